//! Probabilistic degenerate polynomial families attached to a random variable `Y`.
//!
//! Every value here is read off its defining exponential generating function
//! built from `E[e_lambda^Y(t)]`:
//!
//! | family | generating function |
//! |---|---|
//! | Stirling `{n brace k}_{Y,lambda}` | `(E - 1)^k / k!` |
//! | Bell `phi^Y_{n,lambda}(x)` | `exp(x (E - 1))` |
//! | Bernoulli of order `r`, `beta^{(r,Y)}_{n,lambda}(x)` | `(t / (E - 1))^r E^x` |
//! | Euler `E^Y_{n,lambda}(x)` | `2 / (E + 1) E^x` |
//! | Bernstein `B^Y_{k,n}(x mid lambda)` | `(x)_{k,lambda} t^k / k! E^{1-x}` |
//!
//! where `E` abbreviates the moment generating series. None of the explicit
//! sum formulas for these families are used here; those live in
//! [`crate::verify`] as independent routes.
//!
//! A [`FamilyContext`] fixes `(Y, lambda)` and a maximal index, and memoizes
//! the series that are shared between queries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{degenerate_binomial, StirlingTable};
use crate::random_variable::{MgfCache, RandomVariable};
use crate::rational::{factorial, Rational};
use crate::series::{SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("k must not exceed n (k = {k}, n = {n})")]
    KExceedsN { k: u32, n: u32 },
    #[error("index {n} exceeds the context capacity {capacity}")]
    BeyondCapacity { n: u32, capacity: u32 },
    #[error("the Bernoulli kernel t / (E[e_lambda^Y(t)] - 1) is undefined for this variable: {0}")]
    DegenerateKernel(SeriesError),
    #[error("missing argument `{0}` for this family")]
    MissingArgument(&'static str),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type FamilyResult<T> = Result<T, FamilyError>;

/// Memoized generating functions for one `(Y, lambda)` pair, valid for
/// indices up to [`FamilyContext::capacity`].
pub struct FamilyContext {
    y: RandomVariable,
    lambda: Rational,
    capacity: u32,
    mgf: Arc<TruncatedSeries>,
    stirling_gfs: OnceLock<Vec<TruncatedSeries>>,
    bernoulli_kernel: OnceLock<FamilyResult<TruncatedSeries>>,
    euler_kernel: OnceLock<TruncatedSeries>,
    degenerate_stirling: OnceLock<StirlingTable>,
    powers: Mutex<HashMap<Rational, Arc<TruncatedSeries>>>,
    kernel_powers: Mutex<HashMap<u32, Arc<TruncatedSeries>>>,
    bernoulli_gfs: Mutex<HashMap<(u32, Rational), Arc<TruncatedSeries>>>,
    euler_gfs: Mutex<HashMap<Rational, Arc<TruncatedSeries>>>,
}

fn memo<K, F>(map: &Mutex<HashMap<K, Arc<TruncatedSeries>>>, key: K, f: F) -> FamilyResult<Arc<TruncatedSeries>>
where
    K: std::hash::Hash + Eq + Clone,
    F: FnOnce() -> FamilyResult<TruncatedSeries>,
{
    if let Some(v) = map.lock().expect("family memo poisoned").get(&key) {
        return Ok(v.clone());
    }
    let value = Arc::new(f()?);
    Ok(map
        .lock()
        .expect("family memo poisoned")
        .entry(key)
        .or_insert(value)
        .clone())
}

impl FamilyContext {
    /// Context for indices `n <= n_max`. Series are carried to order `n_max + 2`.
    pub fn new(y: RandomVariable, lambda: Rational, n_max: u32) -> Self {
        let mgf = Arc::new(y.mgf_series(&lambda, n_max as usize + 2));
        Self::from_parts(y, lambda, n_max, mgf)
    }

    /// Like [`FamilyContext::new`] but draws the moment generating series from a shared cache.
    pub fn with_cache(cache: &MgfCache, y: RandomVariable, lambda: Rational, n_max: u32) -> Self {
        let mgf = cache.get(&y, &lambda, n_max as usize + 2);
        Self::from_parts(y, lambda, n_max, mgf)
    }

    fn from_parts(y: RandomVariable, lambda: Rational, capacity: u32, mgf: Arc<TruncatedSeries>) -> Self {
        FamilyContext {
            y,
            lambda,
            capacity,
            mgf,
            stirling_gfs: OnceLock::new(),
            bernoulli_kernel: OnceLock::new(),
            euler_kernel: OnceLock::new(),
            degenerate_stirling: OnceLock::new(),
            powers: Mutex::default(),
            kernel_powers: Mutex::default(),
            bernoulli_gfs: Mutex::default(),
            euler_gfs: Mutex::default(),
        }
    }

    pub fn variable(&self) -> &RandomVariable {
        &self.y
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn mgf(&self) -> &TruncatedSeries {
        &self.mgf
    }

    fn check(&self, n: u32) -> FamilyResult<()> {
        if n > self.capacity {
            return Err(FamilyError::BeyondCapacity { n, capacity: self.capacity });
        }
        Ok(())
    }

    /// `{n brace k}_lambda` without `Y`, at this context's `lambda`.
    pub fn degenerate_stirling(&self) -> &StirlingTable {
        self.degenerate_stirling
            .get_or_init(|| StirlingTable::degenerate_second(&self.lambda, self.capacity))
    }

    fn stirling_gfs(&self) -> &[TruncatedSeries] {
        self.stirling_gfs.get_or_init(|| {
            let order = self.mgf.order();
            let base = &*self.mgf - &Rational::one();
            let mut out = Vec::with_capacity(order + 1);
            let mut power = TruncatedSeries::one(order);
            for k in 0..=order as u32 {
                out.push(power.scale(&factorial(k).recip().expect("k! > 0")));
                power = &power * &base;
            }
            out
        })
    }

    /// Generating function `(E - 1)^k / k!` of `{n brace k}_{Y,lambda}`.
    pub fn stirling_gf(&self, k: u32) -> FamilyResult<&TruncatedSeries> {
        self.stirling_gfs()
            .get(k as usize)
            .ok_or(FamilyError::BeyondCapacity { n: k, capacity: self.capacity })
    }

    /// `{n brace k}_{Y,lambda}`; zero when `k > n`.
    pub fn prob_stirling2(&self, n: u32, k: u32) -> FamilyResult<Rational> {
        self.check(n)?;
        if k > n {
            return Ok(Rational::zero());
        }
        Ok(self.stirling_gfs()[k as usize].extract_egf(n as usize)?)
    }

    /// `phi^Y_{n,lambda}(x)`.
    pub fn prob_bell(&self, n: u32, x: &Rational) -> FamilyResult<Rational> {
        self.check(n)?;
        Ok(self.bell_gf(x)?.extract_egf(n as usize)?)
    }

    pub fn bell_gf(&self, x: &Rational) -> FamilyResult<TruncatedSeries> {
        Ok((&*self.mgf - &Rational::one()).scale(x).exp()?)
    }

    /// `E[e_lambda^Y(t)]^r`, memoized by exponent.
    pub fn mgf_pow(&self, r: &Rational) -> FamilyResult<Arc<TruncatedSeries>> {
        memo(&self.powers, r.clone(), || Ok(self.mgf.pow_rational(r)?))
    }

    fn bernoulli_kernel(&self) -> FamilyResult<&TruncatedSeries> {
        self.bernoulli_kernel
            .get_or_init(|| {
                let order = self.mgf.order();
                let t = TruncatedSeries::monomial(Rational::one(), 1, order);
                t.div(&(&*self.mgf - &Rational::one()))
                    .map_err(FamilyError::DegenerateKernel)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `(t / (E[e_lambda^Y(t)] - 1))^r`.
    pub fn bernoulli_kernel_pow(&self, r: u32) -> FamilyResult<Arc<TruncatedSeries>> {
        memo(&self.kernel_powers, r, || Ok(self.bernoulli_kernel()?.powu(r)))
    }

    /// Generating function of `beta^{(r,Y)}_{n,lambda}(x)`.
    pub fn bernoulli_gf(&self, r: u32, x: &Rational) -> FamilyResult<Arc<TruncatedSeries>> {
        memo(&self.bernoulli_gfs, (r, x.clone()), || {
            let kernel = self.bernoulli_kernel_pow(r)?;
            Ok(&*kernel * &*self.mgf_pow(x)?)
        })
    }

    /// `beta^{(r,Y)}_{n,lambda}(x)`; `r = 1` gives the ordinary family and
    /// `x = 0` the corresponding numbers.
    pub fn prob_bernoulli(&self, n: u32, x: &Rational, r: u32) -> FamilyResult<Rational> {
        self.check(n)?;
        Ok(self.bernoulli_gf(r, x)?.extract_egf(n as usize)?)
    }

    fn euler_kernel(&self) -> &TruncatedSeries {
        self.euler_kernel.get_or_init(|| {
            let order = self.mgf.order();
            TruncatedSeries::constant(Rational::from(2), order)
                .div(&(&*self.mgf + &Rational::one()))
                .expect("E + 1 has constant term 2")
        })
    }

    pub fn euler_gf(&self, x: &Rational) -> FamilyResult<Arc<TruncatedSeries>> {
        memo(&self.euler_gfs, x.clone(), || Ok(self.euler_kernel() * &*self.mgf_pow(x)?))
    }

    /// `E^Y_{n,lambda}(x)`.
    pub fn prob_euler(&self, n: u32, x: &Rational) -> FamilyResult<Rational> {
        self.check(n)?;
        Ok(self.euler_gf(x)?.extract_egf(n as usize)?)
    }

    /// `B^Y_{k,n}(x | lambda)`.
    pub fn prob_bernstein(&self, k: u32, n: u32, x: &Rational) -> FamilyResult<Rational> {
        if k > n {
            return Err(FamilyError::KExceedsN { k, n });
        }
        self.check(n)?;
        Ok(self.bernstein_gf(k, x)?.extract_egf(n as usize)?)
    }

    /// Generating function `(x)_{k,lambda} t^k / k! E^{1-x}` of `B^Y_{k,n}(x | lambda)` over `n`.
    pub fn bernstein_gf(&self, k: u32, x: &Rational) -> FamilyResult<TruncatedSeries> {
        let power = self.mgf_pow(&(Rational::one() - x))?;
        Ok(power
            .shift_up(k as usize)
            .scale(&degenerate_binomial(x, k, &self.lambda)))
    }
}

pub fn prob_degenerate_stirling2(y: &RandomVariable, n: u32, k: u32, lambda: &Rational) -> FamilyResult<Rational> {
    FamilyContext::new(y.clone(), lambda.clone(), n).prob_stirling2(n, k)
}

pub fn prob_degenerate_bell(y: &RandomVariable, n: u32, x: &Rational, lambda: &Rational) -> FamilyResult<Rational> {
    FamilyContext::new(y.clone(), lambda.clone(), n).prob_bell(n, x)
}

pub fn prob_degenerate_bernoulli(
    y: &RandomVariable,
    n: u32,
    x: &Rational,
    lambda: &Rational,
    r: u32,
) -> FamilyResult<Rational> {
    FamilyContext::new(y.clone(), lambda.clone(), n).prob_bernoulli(n, x, r)
}

pub fn prob_degenerate_euler(y: &RandomVariable, n: u32, x: &Rational, lambda: &Rational) -> FamilyResult<Rational> {
    FamilyContext::new(y.clone(), lambda.clone(), n).prob_euler(n, x)
}

pub fn prob_degenerate_bernstein(
    y: &RandomVariable,
    k: u32,
    n: u32,
    x: &Rational,
    lambda: &Rational,
) -> FamilyResult<Rational> {
    if k > n {
        return Err(FamilyError::KExceedsN { k, n });
    }
    FamilyContext::new(y.clone(), lambda.clone(), n).prob_bernstein(k, n, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ProbStirling2,
    ProbBell,
    ProbBernoulli,
    ProbBernoulliOrder,
    ProbEuler,
    ProbBernstein,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ProbStirling2 => "prob-stirling2",
            Family::ProbBell => "prob-bell",
            Family::ProbBernoulli => "prob-bernoulli",
            Family::ProbBernoulliOrder => "prob-bernoulli-order",
            Family::ProbEuler => "prob-euler",
            Family::ProbBernstein => "prob-bernstein",
        }
    }
}

/// A single family evaluation request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyQuery {
    pub family: Family,
    #[serde(rename = "dist")]
    pub y: RandomVariable,
    pub lambda: Rational,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Rational>,
}

impl FamilyQuery {
    pub fn evaluate(&self) -> FamilyResult<Rational> {
        let x = || self.x.clone().ok_or(FamilyError::MissingArgument("x"));
        let k = || self.k.ok_or(FamilyError::MissingArgument("k"));
        let n = self.n;
        let lam = &self.lambda;
        match self.family {
            Family::ProbStirling2 => {
                let k = k()?;
                if k > n {
                    return Err(FamilyError::KExceedsN { k, n });
                }
                prob_degenerate_stirling2(&self.y, n, k, lam)
            }
            Family::ProbBell => prob_degenerate_bell(&self.y, n, &x()?, lam),
            Family::ProbBernoulli => {
                let x = self.x.clone().unwrap_or_default();
                prob_degenerate_bernoulli(&self.y, n, &x, lam, 1)
            }
            Family::ProbBernoulliOrder => {
                let r = self.r.ok_or(FamilyError::MissingArgument("r"))?;
                let x = self.x.clone().unwrap_or_default();
                prob_degenerate_bernoulli(&self.y, n, &x, lam, r)
            }
            Family::ProbEuler => {
                let x = self.x.clone().unwrap_or_default();
                prob_degenerate_euler(&self.y, n, &x, lam)
            }
            Family::ProbBernstein => prob_degenerate_bernstein(&self.y, k()?, n, &x()?, lam),
        }
    }
}
