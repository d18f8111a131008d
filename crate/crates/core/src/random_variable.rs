//! Random variables with exact rational moments and the degenerate moment
//! generating series `E[e_lambda^Y(t)] = sum_n E[(Y)_{n,lambda}] t^n / n!`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::combinatorics::{degenerate_exp_series, falling, stirling1, stirling2};
use crate::rational::{binomial_int, Rational};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomVariableError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse distribution `{0}`: {1}")]
    Parse(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub value: Rational,
    pub prob: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Law {
    Poisson { alpha: Rational },
    Bernoulli { p: Rational },
    Binomial { trials: u32, p: Rational },
    FiniteDiscrete { atoms: Vec<Atom> },
    Deterministic { value: Rational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Poisson,
    Bernoulli,
    Binomial,
    FiniteDiscrete,
    Deterministic,
}

impl LawKind {
    pub const ALL: [LawKind; 5] = [
        LawKind::Poisson,
        LawKind::Bernoulli,
        LawKind::Binomial,
        LawKind::FiniteDiscrete,
        LawKind::Deterministic,
    ];
}

impl Law {
    pub fn kind(&self) -> LawKind {
        match self {
            Law::Poisson { .. } => LawKind::Poisson,
            Law::Bernoulli { .. } => LawKind::Bernoulli,
            Law::Binomial { .. } => LawKind::Binomial,
            Law::FiniteDiscrete { .. } => LawKind::FiniteDiscrete,
            Law::Deterministic { .. } => LawKind::Deterministic,
        }
    }
}

/// A random variable `Y` given by its law.
///
/// Parameter ranges (`alpha > 0`, `0 <= p <= 1`, nonnegative atom masses) are
/// enforced unless the variable was built in formal mode, where parameters
/// are treated as indeterminates evaluated at arbitrary rationals. Atom
/// masses must sum to one in either mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomVariable {
    law: Law,
    formal: bool,
}

fn unit_interval(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

impl RandomVariable {
    pub fn new(law: Law) -> Result<Self, RandomVariableError> {
        Self::build(law, false)
    }

    /// Formal mode: skips the probabilistic range checks.
    pub fn formal(law: Law) -> Result<Self, RandomVariableError> {
        Self::build(law, true)
    }

    fn build(law: Law, formal: bool) -> Result<Self, RandomVariableError> {
        let bad = |msg: String| Err(RandomVariableError::InvalidParameter(msg));
        match &law {
            Law::Poisson { alpha } => {
                if !formal && (alpha.is_negative() || alpha.is_zero()) {
                    return bad(format!("poisson rate must be positive, got {alpha}"));
                }
            }
            Law::Bernoulli { p } => {
                if !formal && !unit_interval(p) {
                    return bad(format!("probability must lie in [0, 1], got {p}"));
                }
            }
            Law::Binomial { trials, p } => {
                if *trials == 0 {
                    return bad("binomial trial count must be positive".into());
                }
                if !formal && !unit_interval(p) {
                    return bad(format!("probability must lie in [0, 1], got {p}"));
                }
            }
            Law::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return bad("discrete law needs at least one atom".into());
                }
                if !formal {
                    if let Some(a) = atoms.iter().find(|a| a.prob.is_negative()) {
                        return bad(format!("atom mass must be nonnegative, got {}", a.prob));
                    }
                }
                let total: Rational = atoms.iter().map(|a| &a.prob).sum();
                if !total.is_one() {
                    return bad(format!("atom masses sum to {total}, not 1"));
                }
            }
            Law::Deterministic { .. } => {}
        }
        Ok(RandomVariable { law, formal })
    }

    pub fn poisson(alpha: Rational) -> Result<Self, RandomVariableError> {
        Self::new(Law::Poisson { alpha })
    }

    pub fn bernoulli(p: Rational) -> Result<Self, RandomVariableError> {
        Self::new(Law::Bernoulli { p })
    }

    pub fn binomial(trials: u32, p: Rational) -> Result<Self, RandomVariableError> {
        Self::new(Law::Binomial { trials, p })
    }

    pub fn discrete(atoms: Vec<(Rational, Rational)>) -> Result<Self, RandomVariableError> {
        Self::new(Law::FiniteDiscrete {
            atoms: atoms.into_iter().map(|(value, prob)| Atom { value, prob }).collect(),
        })
    }

    pub fn deterministic(value: Rational) -> Self {
        RandomVariable { law: Law::Deterministic { value }, formal: false }
    }

    /// The constant variable `Y = 1`.
    pub fn one() -> Self {
        Self::deterministic(Rational::one())
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn kind(&self) -> LawKind {
        self.law.kind()
    }

    pub fn is_formal(&self) -> bool {
        self.formal
    }

    /// `E[Y^m]`.
    pub fn raw_moment(&self, m: u32) -> Rational {
        if m == 0 {
            return Rational::one();
        }
        let m_i = m as i64;
        match &self.law {
            // Touchard: E[Y^m] = sum_j S(m, j) alpha^j
            Law::Poisson { alpha } => (0..=m).map(|j| stirling2(m_i, j as i64) * alpha.powu(j)).sum(),
            Law::Bernoulli { p } => p.clone(),
            // E[(Y)_j] = (trials)_j p^j
            Law::Binomial { trials, p } => (0..=m)
                .map(|j| stirling2(m_i, j as i64) * falling(&Rational::from(*trials), j) * p.powu(j))
                .sum(),
            Law::FiniteDiscrete { atoms } => atoms.iter().map(|a| &a.prob * &a.value.powu(m)).sum(),
            Law::Deterministic { value } => value.powu(m),
        }
    }

    pub fn mean(&self) -> Rational {
        self.raw_moment(1)
    }

    /// `E[(Y)_{n,lambda}] = sum_m S_1(n, m) lambda^{n-m} E[Y^m]`.
    pub fn degenerate_moment(&self, n: u32, lambda: &Rational) -> Rational {
        (0..=n)
            .map(|m| stirling1(n as i64, m as i64) * lambda.powu(n - m) * self.raw_moment(m))
            .sum()
    }

    /// `E[e_lambda^Y(t)]` built coefficientwise from the degenerate moments.
    pub fn mgf_series(&self, lambda: &Rational, order: usize) -> TruncatedSeries {
        let mut fact = Rational::one();
        TruncatedSeries::from_fn(order, |n| {
            if n > 0 {
                fact *= Rational::from(n);
            }
            self.degenerate_moment(n as u32, lambda) / &fact
        })
    }

    /// The same series from the law's closed form:
    /// `exp(alpha (e_lambda(t) - 1))`, `p e_lambda(t) + 1 - p`,
    /// `(p (e_lambda(t) - 1) + 1)^m`, or a finite mixture of `e_lambda^v(t)`.
    pub fn mgf_series_closed_form(&self, lambda: &Rational, order: usize) -> TruncatedSeries {
        let e1 = || degenerate_exp_series(&Rational::one(), lambda, order);
        match &self.law {
            Law::Poisson { alpha } => (&e1() - &Rational::one())
                .scale(alpha)
                .exp()
                .expect("zero constant term"),
            Law::Bernoulli { p } => &(&e1() - &Rational::one()).scale(p) + &Rational::one(),
            Law::Binomial { trials, p } => {
                (&(&e1() - &Rational::one()).scale(p) + &Rational::one()).powu(*trials)
            }
            Law::FiniteDiscrete { atoms } => atoms.iter().fold(TruncatedSeries::zero(order), |acc, a| {
                &acc + &degenerate_exp_series(&a.value, lambda, order).scale(&a.prob)
            }),
            Law::Deterministic { value } => degenerate_exp_series(value, lambda, order),
        }
    }

    /// `E[(S_k)_{m,lambda}]` for `S_k` a sum of `k` independent copies of `Y`,
    /// read off `(E[e_lambda^Y(t)])^k`.
    pub fn sum_degenerate_moment(&self, k: u32, m: u32, lambda: &Rational) -> Rational {
        let order = m as usize;
        self.mgf_series(lambda, order)
            .powu(k)
            .extract_egf(order)
            .expect("within order")
    }
}

impl fmt::Display for RandomVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            Law::Poisson { alpha } => write!(f, "poisson:a={alpha}"),
            Law::Bernoulli { p } => write!(f, "bernoulli:p={p}"),
            Law::Binomial { trials, p } => write!(f, "binomial:m={trials},p={p}"),
            Law::FiniteDiscrete { atoms } => {
                write!(f, "discrete:")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}", a.value, a.prob)?;
                }
                Ok(())
            }
            Law::Deterministic { value } => write!(f, "det:{value}"),
        }
    }
}

impl Serialize for RandomVariable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses the compact syntax `poisson:a=3/2`, `bernoulli:p=1/3`,
/// `binomial:m=4,p=1/3`, `discrete:0:1/2,2:1/2`, `det:1`.
///
/// The result is range-checked; use [`parse_law`] with
/// [`RandomVariable::formal`] to skip the checks.
impl FromStr for RandomVariable {
    type Err = RandomVariableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RandomVariable::new(parse_law(s)?)
    }
}

pub fn parse_law(s: &str) -> Result<Law, RandomVariableError> {
    let err = |msg: &str| RandomVariableError::Parse(s.to_string(), msg.to_string());
    let rat = |v: &str| v.trim().parse::<Rational>().map_err(|e| err(&e.to_string()));
    let (name, rest) = s.trim().split_once(':').ok_or_else(|| err("expected `<law>:<params>`"))?;
    let kv = |rest: &str| -> Result<HashMap<String, String>, RandomVariableError> {
        rest.split(',')
            .map(|part| {
                part.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| err("expected key=value"))
            })
            .collect()
    };
    let get = |map: &HashMap<String, String>, keys: &[&str]| -> Result<Rational, RandomVariableError> {
        keys.iter()
            .find_map(|k| map.get(*k))
            .ok_or_else(|| err(&format!("missing parameter `{}`", keys[0])))
            .and_then(|v| rat(v))
    };
    match name.trim() {
        "poisson" => {
            let map = kv(rest)?;
            Ok(Law::Poisson { alpha: get(&map, &["a", "alpha"])? })
        }
        "bernoulli" => {
            let map = kv(rest)?;
            Ok(Law::Bernoulli { p: get(&map, &["p"])? })
        }
        "binomial" => {
            let map = kv(rest)?;
            let m = get(&map, &["m", "n"])?;
            let trials = m
                .to_i64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| err("trial count must be a nonnegative integer"))?;
            Ok(Law::Binomial { trials, p: get(&map, &["p"])? })
        }
        "discrete" => {
            let atoms = rest
                .split(',')
                .map(|part| {
                    let (v, p) = part.split_once(':').ok_or_else(|| err("expected value:prob"))?;
                    Ok(Atom { value: rat(v)?, prob: rat(p)? })
                })
                .collect::<Result<Vec<_>, RandomVariableError>>()?;
            Ok(Law::FiniteDiscrete { atoms })
        }
        "det" | "deterministic" => Ok(Law::Deterministic { value: rat(rest)? }),
        other => Err(err(&format!("unknown law `{other}`"))),
    }
}

type MgfKey = (RandomVariable, Rational, usize);

/// Shared memo of moment generating series keyed by `(Y, lambda, order)`.
///
/// Reads are concurrent and each entry is computed exactly once.
#[derive(Default)]
pub struct MgfCache {
    slots: Mutex<HashMap<MgfKey, Arc<OnceLock<Arc<TruncatedSeries>>>>>,
}

impl MgfCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, y: &RandomVariable, lambda: &Rational, order: usize) -> Arc<TruncatedSeries> {
        let slot = {
            let mut slots = self.slots.lock().expect("mgf cache poisoned");
            slots.entry((y.clone(), lambda.clone(), order)).or_default().clone()
        };
        slot.get_or_init(|| Arc::new(y.mgf_series(lambda, order))).clone()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("mgf cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Probability that a binomial variable equals `j`; used by the finite-atom view.
pub fn binomial_pmf(trials: u32, p: &Rational, j: u32) -> Rational {
    binomial_int(trials as i64, j as i64) * p.powu(j) * (Rational::one() - p).powu(trials - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn raw_moment_examples() {
        let a = q("3/2");
        let y = RandomVariable::poisson(a.clone()).unwrap();
        assert_eq!(y.raw_moment(2), &a + &(&a * &a));
        let b = RandomVariable::bernoulli(q("2/7")).unwrap();
        assert_eq!(b.raw_moment(7), q("2/7"));
        for y in [y, b, RandomVariable::one()] {
            assert_eq!(y.raw_moment(0), Rational::one());
        }
    }

    #[test]
    fn binomial_moments_match_pmf_sum() {
        let p = q("2/5");
        let y = RandomVariable::binomial(4, p.clone()).unwrap();
        for m in 0..8 {
            let direct: Rational = (0..=4)
                .map(|j| binomial_pmf(4, &p, j) * Rational::from(j).powu(m))
                .sum();
            assert_eq!(y.raw_moment(m), direct);
        }
    }

    #[test]
    fn degenerate_moment_examples() {
        let lam = q("1/3");
        let y = RandomVariable::poisson(q("2")).unwrap();
        assert_eq!(y.degenerate_moment(0, &lam), Rational::one());
        // (Y)_{2,lambda} = Y^2 - lambda Y
        assert_eq!(y.degenerate_moment(2, &lam), q("4") + q("2") - &lam * q("2"));
        let one = RandomVariable::one();
        for n in 0..8 {
            assert_eq!(
                one.degenerate_moment(n, &lam),
                crate::combinatorics::degenerate_falling(&Rational::one(), n, &lam)
            );
        }
    }

    #[test]
    fn mgf_examples() {
        let lam = q("2/3");
        let one = RandomVariable::one();
        assert_eq!(one.mgf_series(&lam, 6), degenerate_exp_series(&Rational::one(), &lam, 6));
        let b = RandomVariable::bernoulli(q("1/4")).unwrap();
        assert_eq!(b.mgf_series(&lam, 3).coefficient(1).unwrap(), &q("1/4"));
        let a = q("5/2");
        let p = RandomVariable::poisson(a.clone()).unwrap();
        let expect = TruncatedSeries::new(
            vec![Rational::one(), a.clone(), (&a + &(&a * &a)) / Rational::from(2)],
            2,
        );
        assert_eq!(p.mgf_series(&Rational::zero(), 2), expect);
    }

    #[test]
    fn sum_moment_examples() {
        let lam = q("1/2");
        let b = RandomVariable::bernoulli(q("1/3")).unwrap();
        assert_eq!(b.sum_degenerate_moment(0, 0, &lam), Rational::one());
        assert_eq!(b.sum_degenerate_moment(0, 3, &lam), Rational::zero());
        assert_eq!(b.sum_degenerate_moment(2, 1, &lam), q("2/3"));
        for m in 0..6 {
            assert_eq!(b.sum_degenerate_moment(1, m, &lam), b.degenerate_moment(m, &lam));
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(RandomVariable::poisson(Rational::zero()).is_err());
        assert!(RandomVariable::bernoulli(q("3/2")).is_err());
        assert!(RandomVariable::binomial(0, q("1/2")).is_err());
        assert!(RandomVariable::discrete(vec![(q("1"), q("1/2"))]).is_err());
        assert!(RandomVariable::discrete(vec![(q("1"), q("3/2")), (q("0"), q("-1/2"))]).is_err());
        let f = RandomVariable::formal(Law::Bernoulli { p: q("-2") }).unwrap();
        assert!(f.is_formal());
        assert!(RandomVariable::formal(Law::FiniteDiscrete { atoms: vec![] }).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["poisson:a=3/2", "bernoulli:p=1/3", "binomial:m=4,p=1/3", "discrete:0:1/2,2:1/2", "det:1"] {
            let y: RandomVariable = s.parse().unwrap();
            assert_eq!(y.to_string(), s);
        }
        assert_eq!("poisson:alpha=2".parse::<RandomVariable>().unwrap().to_string(), "poisson:a=2");
        for bad in ["gauss:mu=0", "poisson", "bernoulli:q=1/2", "binomial:m=1/2,p=1/2", "det:x"] {
            assert!(bad.parse::<RandomVariable>().is_err(), "{bad}");
        }
    }

    #[test]
    fn cache_initializes_once() {
        let cache = MgfCache::new();
        let y = RandomVariable::poisson(q("2")).unwrap();
        let a = cache.get(&y, &q("1/2"), 6);
        let b = cache.get(&y, &q("1/2"), 6);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
        assert_eq!(*a, y.mgf_series(&q("1/2"), 6));
    }
}
