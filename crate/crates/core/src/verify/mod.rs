//! Identity certification by exact evaluation on degree-exceeding grids.
//!
//! Every identity compares a definitional value (read off a generating
//! function) against an explicit formula from [`theorems`]. Both sides are
//! polynomials in the gridded variables `x` and `lambda` with per-variable
//! degree bounded by the index range, so agreement on a tensor grid with one
//! more node than the bound in each variable proves the identity for that law
//! and index range. Law parameters are fixed per report.
//!
//! Identities whose printed statement disagrees with the printed derivation
//! are evaluated in both readings; see [`Verifier::certify`].

pub mod theorems;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{degenerate_bernstein, degenerate_bernstein_gf, degenerate_falling};
use crate::families::{FamilyContext, FamilyError};
use crate::random_variable::{Law, LawKind, MgfCache, RandomVariable};
use crate::rational::{binomial_int, Rational};

pub use theorems::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{theorem} does not apply to {law}")]
    LawMismatch { theorem: TheoremId, law: String },
    #[error("{theorem} has no alternative reading")]
    NoVariants { theorem: TheoremId },
    #[error("unknown identity `{0}`")]
    UnknownTheorem(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    T2_1,
    T2_2,
    T2_3,
    T2_4,
    T2_5,
    T2_6,
    T2_7,
    T2_8,
    T2_9,
    T2_10,
    T2_11,
    Eq15,
    Eq16,
    EulerAltSum,
    BasisChange,
    StirlingRoutes,
    DegenerateBernsteinGf,
}

impl TheoremId {
    pub const ALL: [TheoremId; 17] = [
        TheoremId::T2_1,
        TheoremId::T2_2,
        TheoremId::T2_3,
        TheoremId::T2_4,
        TheoremId::T2_5,
        TheoremId::T2_6,
        TheoremId::T2_7,
        TheoremId::T2_8,
        TheoremId::T2_9,
        TheoremId::T2_10,
        TheoremId::T2_11,
        TheoremId::Eq15,
        TheoremId::Eq16,
        TheoremId::EulerAltSum,
        TheoremId::BasisChange,
        TheoremId::StirlingRoutes,
        TheoremId::DegenerateBernsteinGf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T2_1 => "T2.1",
            TheoremId::T2_2 => "T2.2",
            TheoremId::T2_3 => "T2.3",
            TheoremId::T2_4 => "T2.4",
            TheoremId::T2_5 => "T2.5",
            TheoremId::T2_6 => "T2.6",
            TheoremId::T2_7 => "T2.7",
            TheoremId::T2_8 => "T2.8",
            TheoremId::T2_9 => "T2.9",
            TheoremId::T2_10 => "T2.10",
            TheoremId::T2_11 => "T2.11",
            TheoremId::Eq15 => "Eq15",
            TheoremId::Eq16 => "Eq16",
            TheoremId::EulerAltSum => "EulerAltSum",
            TheoremId::BasisChange => "BasisChange",
            TheoremId::StirlingRoutes => "StirlingRoutes",
            TheoremId::DegenerateBernsteinGf => "DegenerateBernsteinGf",
        }
    }

    pub fn has_variants(self) -> bool {
        matches!(self, TheoremId::T2_6 | TheoremId::T2_9 | TheoremId::T2_11 | TheoremId::Eq16)
    }

    /// Human-readable description of a reading.
    pub fn variant_label(self, variant: Variant) -> &'static str {
        match (self, variant) {
            (TheoremId::T2_6, Variant::Stated) => "stated Stirling index {m brace k+1}",
            (TheoremId::T2_6, Variant::Derivation) => "derivation Stirling index {m brace k+j}",
            (TheoremId::T2_9 | TheoremId::T2_11, Variant::Stated) => "stated Stirling index {n-k brace j}",
            (TheoremId::T2_9 | TheoremId::T2_11, Variant::Derivation) => "derivation Stirling index {n-j brace j}",
            (TheoremId::Eq16, Variant::Stated) => "stated falling factorial (x)_k",
            (TheoremId::Eq16, Variant::Derivation) => "generating-function falling factorial (x)_{k+1}",
            (_, Variant::Stated) => "stated",
            (_, Variant::Derivation) => "derivation",
        }
    }

    pub fn spec(self) -> TheoremSpec {
        use TheoremId::*;
        let all = LawKind::ALL.to_vec();
        let (laws, law_free) = match self {
            T2_8 | T2_9 => (vec![LawKind::Poisson], false),
            T2_10 => (vec![LawKind::Bernoulli], false),
            T2_11 => (vec![LawKind::Binomial], false),
            BasisChange | StirlingRoutes | DegenerateBernsteinGf => (all, true),
            _ => (all, false),
        };
        let variables = match self {
            Eq15 | EulerAltSum | StirlingRoutes => vec![GridVar::Lambda],
            _ => vec![GridVar::X, GridVar::Lambda],
        };
        let precondition = match self {
            T2_4 | T2_5 => "(x)_{k,lambda} != 0 in the stated form; certified in denominator-cleared form",
            T2_2 | T2_6 | Eq15 | Eq16 => "E[Y] != 0 so that t / (E[e_lambda^Y(t)] - 1) exists",
            _ => "none",
        };
        let checks = match self {
            T2_4 | T2_5 => vec![Check::Cleared, Check::Direct],
            _ => vec![Check::Standard],
        };
        TheoremSpec { id: self, applicable_laws: laws, law_free, variables, precondition, checks }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let want = s.trim().to_ascii_lowercase();
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == want)
            .ok_or_else(|| VerifyError::UnknownTheorem(s.to_string()))
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridVar {
    X,
    Lambda,
}

impl GridVar {
    fn name(self) -> &'static str {
        match self {
            GridVar::X => "x",
            GridVar::Lambda => "lambda",
        }
    }
}

/// One comparison performed at every grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Standard,
    /// Both sides multiplied through by the stated denominators.
    Cleared,
    /// As stated; nodes where a denominator vanishes are skipped and
    /// replaced by further nodes so the count still exceeds the bound.
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremSpec {
    pub id: TheoremId,
    pub applicable_laws: Vec<LawKind>,
    /// The identity does not involve `Y`.
    pub law_free: bool,
    pub variables: Vec<GridVar>,
    pub precondition: &'static str,
    pub checks: Vec<Check>,
}

impl TheoremSpec {
    /// Per-variable degree bounds of both sides for indices up to `nmax`.
    ///
    /// Every coefficient of `t^n` in the generating functions involved is a
    /// polynomial of degree at most `n` in `x` and in `lambda`; the sum
    /// identity reaches one index further through `beta_{m+1}`.
    pub fn degree_bounds(&self, nmax: u32) -> BTreeMap<&'static str, u32> {
        let extra = u32::from(self.id == TheoremId::Eq15);
        self.variables.iter().map(|v| (v.name(), nmax + extra)).collect()
    }

    pub fn index_names(&self) -> &'static [&'static str] {
        match self.id {
            TheoremId::Eq15 | TheoremId::EulerAltSum => &["n", "m"],
            TheoremId::Eq16 | TheoremId::BasisChange => &["n"],
            TheoremId::StirlingRoutes => &["n", "k"],
            TheoremId::T2_3 => &["k", "n"],
            _ => &["k", "n"],
        }
    }

    /// Index tuples checked for `nmax`, in the order of [`Self::index_names`].
    pub fn index_tuples(&self, nmax: u32) -> Vec<[u32; 2]> {
        let triangle = || (0..=nmax).flat_map(|n| (0..=n).map(move |k| [k, n])).collect::<Vec<_>>();
        match self.id {
            // B_{k,n+k} needs n + k <= nmax
            TheoremId::T2_3 => (0..=nmax).flat_map(|s| (0..=s).map(move |k| [k, s - k])).collect(),
            TheoremId::Eq15 => (0..=nmax).flat_map(|n| (0..=nmax).map(move |m| [n, m])).collect(),
            TheoremId::EulerAltSum => (0..=nmax)
                .filter(|n| n % 2 == 0)
                .flat_map(|n| (0..=nmax).map(move |m| [n, m]))
                .collect(),
            TheoremId::Eq16 => (1..=nmax).map(|n| [n, 0]).collect(),
            TheoremId::BasisChange => (0..=nmax).map(|n| [n, 0]).collect(),
            TheoremId::StirlingRoutes => (0..=nmax).flat_map(|n| (0..=n).map(move |k| [n, k])).collect(),
            _ => triangle(),
        }
    }

    pub fn index_range(&self, nmax: u32) -> String {
        match self.id {
            TheoremId::T2_3 => format!("k, n >= 0, n + k <= {nmax}"),
            TheoremId::Eq15 => format!("0 <= n, m <= {nmax}"),
            TheoremId::EulerAltSum => format!("even 0 <= n <= {nmax}, 0 <= m <= {nmax}"),
            TheoremId::Eq16 => format!("1 <= n <= {nmax}"),
            TheoremId::BasisChange => format!("0 <= n <= {nmax}"),
            TheoremId::StirlingRoutes => format!("0 <= k <= n <= {nmax}"),
            _ => format!("0 <= k <= n <= {nmax}"),
        }
    }
}

/// Infinite deterministic stream of distinct rationals:
/// `0, 1, 1/2, -1, 2, 1/3, -1/2`, then every other fraction by increasing height.
pub fn node_stream() -> impl Iterator<Item = Rational> {
    let prefix: Vec<Rational> = ["0", "1", "1/2", "-1", "2", "1/3", "-1/2"]
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect();
    let seen = prefix.clone();
    let tail = (2i64..).flat_map(move |h| {
        let mut level = Vec::new();
        for q in 1..=h {
            for p in 0..=h {
                if p.max(q) != h || num_integer::gcd(p, q) != 1 {
                    continue;
                }
                level.push(Rational::frac(p, q));
                level.push(Rational::frac(-p, q));
            }
        }
        level.into_iter().filter(|r| !seen.contains(r)).collect::<Vec<_>>()
    });
    let mut emitted: Vec<Rational> = Vec::new();
    prefix.into_iter().chain(tail).filter(move |r| {
        if emitted.contains(r) {
            false
        } else {
            emitted.push(r.clone());
            true
        }
    })
}

pub fn grid_nodes(count: usize) -> Vec<Rational> {
    node_stream().take(count).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Witness {
    pub check: Check,
    pub indices: BTreeMap<&'static str, u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Rational>,
    pub lambda: Rational,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub theorem: TheoremId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant_label: Option<&'static str>,
    pub law: String,
    pub index_range: String,
    pub degree_bounds: BTreeMap<&'static str, u32>,
    pub grid: BTreeMap<&'static str, Vec<Rational>>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "is_unperturbed")]
    pub perturbation: Perturbation,
    pub verdict: Verdict,
    /// Number of (node, index tuple, check) comparisons.
    pub nodes_evaluated: usize,
    /// Direct-form nodes skipped because a denominator vanished.
    pub nodes_skipped: usize,
    pub mismatches: usize,
    pub witnesses: Vec<Witness>,
}

fn is_unperturbed(p: &Perturbation) -> bool {
    *p == Perturbation::None
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub nmax: u32,
    pub variant: Variant,
    pub perturbation: Perturbation,
    /// Cap on stored witnesses; `mismatches` always counts all of them.
    pub max_witnesses: Option<usize>,
}

impl VerifyOptions {
    pub fn new(nmax: u32) -> Self {
        VerifyOptions { nmax, variant: Variant::Stated, perturbation: Perturbation::None, max_witnesses: None }
    }

    pub fn variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn perturbation(mut self, p: Perturbation) -> Self {
        self.perturbation = p;
        self
    }

    pub fn max_witnesses(mut self, cap: Option<usize>) -> Self {
        self.max_witnesses = cap;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    PassWithErratum,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Matched {
    Stated,
    Derivation,
    Both,
    Neither,
}

/// Certification result for one identity and law, covering every reading.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremOutcome {
    pub theorem: TheoremId,
    pub law: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<Matched>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erratum: Option<String>,
    pub reports: Vec<IdentityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub nmax: u32,
    pub all_pass: bool,
    pub errata: Vec<String>,
    pub outcomes: Vec<TheoremOutcome>,
}

#[derive(Default)]
struct NodeTally {
    evaluated: usize,
    skipped: usize,
    mismatches: usize,
    witnesses: Vec<Witness>,
}

type Sides = Option<(Rational, Rational)>;

/// Runs identity checks, sharing moment generating series across runs.
#[derive(Default)]
pub struct Verifier {
    cache: MgfCache,
}

impl Verifier {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluates one reading of one identity for one law.
    pub fn verify(&self, id: TheoremId, y: &RandomVariable, opts: &VerifyOptions) -> Result<IdentityReport, VerifyError> {
        let spec = id.spec();
        if !spec.applicable_laws.contains(&y.kind()) {
            return Err(VerifyError::LawMismatch { theorem: id, law: y.to_string() });
        }
        let variant = opts.variant;
        let pert = opts.perturbation;
        let report = self.run_grid(&spec, y, opts, |ctx, x, idx, check| {
            evaluate(id, ctx, x, idx, check, variant, pert)
        })?;
        Ok(IdentityReport {
            variant: id.has_variants().then_some(variant),
            variant_label: id.has_variants().then(|| id.variant_label(variant)),
            ..report
        })
    }

    /// Certifies an identity for one law. Identities with two printed
    /// readings are evaluated in both, and the outcome states which matched.
    pub fn certify(&self, id: TheoremId, y: &RandomVariable, nmax: u32) -> Result<TheoremOutcome, VerifyError> {
        let base = VerifyOptions::new(nmax).max_witnesses(Some(20));
        self.certify_with(id, y, &base)
    }

    pub fn certify_with(&self, id: TheoremId, y: &RandomVariable, base: &VerifyOptions) -> Result<TheoremOutcome, VerifyError> {
        if !id.has_variants() {
            let report = self.verify(id, y, base)?;
            let status = if report.passed() { Status::Pass } else { Status::Fail };
            return Ok(TheoremOutcome {
                theorem: id,
                law: y.to_string(),
                status,
                matched: None,
                erratum: None,
                reports: vec![report],
            });
        }
        let stated = self.verify(id, y, &base.clone().variant(Variant::Stated))?;
        let derived = self.verify(id, y, &base.clone().variant(Variant::Derivation))?;
        let (matched, status, erratum) = match (stated.passed(), derived.passed()) {
            (true, true) => (Matched::Both, Status::Pass, None),
            (true, false) => (
                Matched::Stated,
                Status::PassWithErratum,
                Some(format!(
                    "{}: {} does not match the definition; {} certified",
                    id,
                    id.variant_label(Variant::Derivation),
                    id.variant_label(Variant::Stated)
                )),
            ),
            (false, true) => (
                Matched::Derivation,
                Status::PassWithErratum,
                Some(format!(
                    "{}: {} does not match the definition; {} certified",
                    id,
                    id.variant_label(Variant::Stated),
                    id.variant_label(Variant::Derivation)
                )),
            ),
            (false, false) => (Matched::Neither, Status::Fail, None),
        };
        Ok(TheoremOutcome {
            theorem: id,
            law: y.to_string(),
            status,
            matched: Some(matched),
            erratum,
            reports: vec![stated, derived],
        })
    }

    /// Runs every identity against every applicable law in `laws`.
    /// Law-free identities run once, with `Y = 1`.
    pub fn verify_all(&self, laws: &[RandomVariable], nmax: u32, max_witnesses: Option<usize>) -> Result<SuiteReport, VerifyError> {
        let base = VerifyOptions::new(nmax).max_witnesses(max_witnesses);
        let mut outcomes = Vec::new();
        for id in TheoremId::ALL {
            let spec = id.spec();
            if spec.law_free {
                outcomes.push(self.certify_with(id, &RandomVariable::one(), &base)?);
                continue;
            }
            for y in laws.iter().filter(|y| spec.applicable_laws.contains(&y.kind())) {
                outcomes.push(self.certify_with(id, y, &base)?);
            }
        }
        let all_pass = outcomes.iter().all(|o| o.status != Status::Fail);
        let mut errata: Vec<String> = outcomes.iter().filter_map(|o| o.erratum.clone()).collect();
        errata.dedup();
        Ok(SuiteReport { nmax, all_pass, errata, outcomes })
    }

    /// Checks that the three explicit forms of `B^Y_{k,n}` (T2.1, T2.2, T2.7)
    /// agree pairwise at every node, without reference to the generating function.
    pub fn cross_consistency(&self, y: &RandomVariable, nmax: u32) -> Result<IdentityReport, VerifyError> {
        let spec = TheoremId::T2_1.spec();
        let opts = VerifyOptions::new(nmax);
        let p = Perturbation::None;
        let mut report = self.run_grid(&spec, y, &opts, |ctx, x, idx, _| {
            let x = x.expect("x is gridded");
            let [k, n] = idx;
            let a = rhs_t2_1(ctx, k, n, x, p)?;
            let b = rhs_t2_2(ctx, k, n, x, p)?;
            let c = rhs_t2_7(ctx, k, n, x, p)?;
            // a == b and a == c, reported as a single comparison
            if a == b {
                Ok(Some((a, c)))
            } else {
                Ok(Some((a, b)))
            }
        })?;
        report.variant_label = Some("pairwise agreement of T2.1, T2.2 and T2.7");
        Ok(report)
    }

    fn run_grid<F>(&self, spec: &TheoremSpec, y: &RandomVariable, opts: &VerifyOptions, eval: F) -> Result<IdentityReport, VerifyError>
    where
        F: Fn(&FamilyContext, Option<&Rational>, [u32; 2], Check) -> Result<Sides, VerifyError> + Sync,
    {
        let nmax = opts.nmax;
        let bounds = spec.degree_bounds(nmax);
        let lambda_nodes = grid_nodes(bounds.get("lambda").map_or(1, |b| *b as usize + 1));
        let x_count = bounds.get("x").map(|b| *b as usize + 1);
        let x_nodes: Vec<Option<Rational>> = match x_count {
            Some(c) => grid_nodes(c).into_iter().map(Some).collect(),
            None => vec![None],
        };
        let tuples = spec.index_tuples(nmax);
        let names = spec.index_names();
        let capacity = nmax + 2;

        let tallies: Vec<Result<NodeTally, VerifyError>> = lambda_nodes
            .par_iter()
            .map(|lambda| {
                let ctx = FamilyContext::with_cache(&self.cache, y.clone(), lambda.clone(), capacity);
                let mut tally = NodeTally::default();
                let mut record = |check: Check, idx: [u32; 2], x: Option<&Rational>, sides: (Rational, Rational)| {
                    tally.evaluated += 1;
                    if sides.0 != sides.1 {
                        tally.mismatches += 1;
                        tally.witnesses.push(Witness {
                            check,
                            indices: names.iter().copied().zip(idx).collect(),
                            x: x.cloned(),
                            lambda: lambda.clone(),
                            lhs: sides.0,
                            rhs: sides.1,
                        });
                    }
                };
                for &check in &spec.checks {
                    if check == Check::Direct {
                        let needed = x_count.unwrap_or(1);
                        for &idx in &tuples {
                            let mut taken = 0;
                            for x in node_stream() {
                                if taken == needed {
                                    break;
                                }
                                match eval(&ctx, Some(&x), idx, check)? {
                                    Some(sides) => {
                                        taken += 1;
                                        record(check, idx, Some(&x), sides);
                                    }
                                    None => tally.skipped += 1,
                                }
                            }
                        }
                    } else {
                        for x in &x_nodes {
                            for &idx in &tuples {
                                if let Some(sides) = eval(&ctx, x.as_ref(), idx, check)? {
                                    record(check, idx, x.as_ref(), sides);
                                }
                            }
                        }
                    }
                }
                Ok(tally)
            })
            .collect();

        let mut total = NodeTally::default();
        for t in tallies {
            let t = t?;
            total.evaluated += t.evaluated;
            total.skipped += t.skipped;
            total.mismatches += t.mismatches;
            total.witnesses.extend(t.witnesses);
        }
        if let Some(cap) = opts.max_witnesses {
            total.witnesses.truncate(cap);
        }
        let mut grid = BTreeMap::new();
        grid.insert("lambda", lambda_nodes);
        if x_count.is_some() {
            grid.insert("x", x_nodes.into_iter().flatten().collect());
        }
        Ok(IdentityReport {
            theorem: spec.id,
            variant: None,
            variant_label: None,
            law: y.to_string(),
            index_range: spec.index_range(nmax),
            degree_bounds: bounds,
            grid,
            checks: spec.checks.clone(),
            perturbation: opts.perturbation,
            verdict: if total.mismatches == 0 { Verdict::Pass } else { Verdict::Fail },
            nodes_evaluated: total.evaluated,
            nodes_skipped: total.skipped,
            mismatches: total.mismatches,
            witnesses: total.witnesses,
        })
    }
}

fn law_param_error(id: TheoremId, y: &RandomVariable) -> VerifyError {
    VerifyError::LawMismatch { theorem: id, law: y.to_string() }
}

/// Definitional value and explicit formula for one identity at one node.
fn evaluate(
    id: TheoremId,
    ctx: &FamilyContext,
    x: Option<&Rational>,
    idx: [u32; 2],
    check: Check,
    variant: Variant,
    pert: Perturbation,
) -> Result<Sides, VerifyError> {
    use TheoremId::*;
    let lambda = ctx.lambda();
    let y = ctx.variable();
    let zero = Rational::zero();
    let x = x.unwrap_or(&zero);
    let [a, b] = idx;
    let bern = |k: u32, n: u32| ctx.prob_bernstein(k, n, x);
    let sides = match id {
        T2_1 => (bern(a, b)?, rhs_t2_1(ctx, a, b, x, pert)?),
        T2_2 => (bern(a, b)?, rhs_t2_2(ctx, a, b, x, pert)?),
        T2_3 => {
            let (k, n) = (a, b);
            let lhs = bern(k, n + k)? / binomial_int((n + k) as i64, k as i64);
            (lhs, rhs_t2_3(ctx, k, n, x, pert)?)
        }
        T2_4 => {
            let (k, n) = (a, b);
            let moment = y.degenerate_moment(n - k, lambda);
            match check {
                Check::Direct => match rhs_t2_4_direct(ctx, k, n, x, pert)? {
                    Some(rhs) => (moment, rhs),
                    None => return Ok(None),
                },
                _ => {
                    let lhs = moment * binomial_int(n as i64, k as i64) * degenerate_falling(x, k, lambda);
                    (lhs, rhs_t2_4_cleared(ctx, k, n, x, pert)?)
                }
            }
        }
        T2_5 => {
            let (k, n) = (a, b);
            let euler = ctx.prob_euler(n - k, &(Rational::one() - x))?;
            match check {
                Check::Direct => match rhs_t2_5_direct(ctx, k, n, x, pert)? {
                    Some(rhs) => (euler, rhs),
                    None => return Ok(None),
                },
                _ => {
                    let lhs = euler * binomial_int(n as i64, k as i64) * degenerate_falling(x, k, lambda);
                    (lhs, rhs_t2_5_cleared(ctx, k, n, x, pert)?)
                }
            }
        }
        T2_6 => (bern(a, b)?, rhs_t2_6(ctx, a, b, x, variant, pert)?),
        T2_7 => (bern(a, b)?, rhs_t2_7(ctx, a, b, x, pert)?),
        T2_8 | T2_9 => {
            let Law::Poisson { alpha } = y.law() else {
                return Err(law_param_error(id, y));
            };
            let rhs = if id == T2_8 {
                rhs_t2_8(ctx, alpha, a, b, x, pert)?
            } else {
                rhs_t2_9(ctx, alpha, a, b, x, variant, pert)?
            };
            (bern(a, b)?, rhs)
        }
        T2_10 => {
            let Law::Bernoulli { p } = y.law() else {
                return Err(law_param_error(id, y));
            };
            (bern(a, b)?, rhs_t2_10(ctx, p, a, b, x, pert)?)
        }
        T2_11 => {
            let Law::Binomial { trials, p } = y.law() else {
                return Err(law_param_error(id, y));
            };
            (bern(a, b)?, rhs_t2_11(ctx, *trials, p, a, b, x, variant, pert)?)
        }
        Eq15 => {
            let (n, m) = (a, b);
            let lhs: Rational = (0..=n).map(|k| y.sum_degenerate_moment(k, m, lambda)).sum();
            (lhs, rhs_eq15(ctx, n, m, pert)?)
        }
        Eq16 => {
            let n = a;
            let lhs = (ctx.prob_bernoulli(n, x, 1)? - ctx.prob_bernoulli(n, &zero, 1)?) / Rational::from(n);
            (lhs, rhs_eq16(ctx, n, x, variant, pert)?)
        }
        EulerAltSum => {
            let (n, m) = (a, b);
            let lhs: Rational = (0..=n)
                .map(|k| {
                    let v = y.sum_degenerate_moment(k, m, lambda);
                    if k % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .sum();
            (lhs, rhs_euler_alt_sum(ctx, n, m, pert)?)
        }
        BasisChange => (degenerate_falling(x, a, lambda), rhs_basis_change(ctx, a, x, pert)?),
        StirlingRoutes => {
            let (n, k) = (a, b);
            let row = degenerate_stirling_row_by_basis(n, lambda, pert);
            (ctx.degenerate_stirling().entry(n, k).clone(), row[k as usize].clone())
        }
        DegenerateBernsteinGf => {
            let (k, n) = (a, b);
            let lhs = degenerate_bernstein(k, n, x, lambda).expect("k <= n");
            let shifted = match pert {
                Perturbation::None => n as i64,
                Perturbation::DropLast => n as i64 - 1,
                Perturbation::DropFirst => n as i64 + 1,
            };
            let rhs = if shifted < k as i64 {
                Rational::zero()
            } else {
                degenerate_bernstein_gf(k, shifted as u32, x, lambda).expect("k <= n")
            };
            (lhs, rhs)
        }
    };
    Ok(Some(sides))
}
