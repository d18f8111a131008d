//! Sampling estimates of degenerate moments, used to check the exact values
//! against the probabilistic meaning of `Y`.
//!
//! Draws are split into fixed-size chunks. Chunk `c` uses its own ChaCha
//! stream `c` under the configured seed, and chunk statistics are merged in
//! chunk order, so results are bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::degenerate_falling;
use crate::random_variable::{Law, RandomVariable};
use crate::rational::Rational;

pub const DEFAULT_SAMPLES: u64 = 200_000;
pub const MAX_MOMENT_ORDER: u32 = 8;
pub const MAX_SUM_TERMS: u32 = 6;
pub const MAX_SUM_ORDER: u32 = 6;

const CHUNK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McError {
    #[error("cannot sample {0}: parameters are outside the probabilistic range")]
    Unsupported(String),
    #[error("{what} = {value} exceeds the supported maximum {max}")]
    IndexTooLarge { what: &'static str, value: u32, max: u32 },
    #[error("sample count must be positive")]
    NoSamples,
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub seed: u64,
    pub samples: u64,
    pub variable: RandomVariable,
}

impl McConfig {
    pub fn new(variable: RandomVariable, seed: u64) -> Self {
        McConfig { seed, samples: DEFAULT_SAMPLES, variable }
    }

    pub fn samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// Standardized distance from `exact`; `None` when the estimate has zero
    /// spread but differs from `exact`.
    pub fn z_score(&self, exact: &Rational) -> Option<f64> {
        let diff = self.estimate - exact.to_f64();
        if self.stderr > 0.0 {
            Some(diff / self.stderr)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn agrees(&self, exact: &Rational, sigmas: f64) -> bool {
        (self.estimate - exact.to_f64()).abs() <= sigmas * self.stderr
    }
}

/// Double-precision sampler for a law.
#[derive(Debug, Clone)]
enum Sampler {
    Constant(f64),
    Bernoulli(f64),
    Binomial(u32, f64),
    Poisson(f64),
    Table { values: Vec<f64>, cumulative: Vec<f64> },
}

impl Sampler {
    fn new(y: &RandomVariable) -> Result<Self, McError> {
        if y.is_formal() && RandomVariable::new(y.law().clone()).is_err() {
            return Err(McError::Unsupported(y.to_string()));
        }
        Ok(match y.law() {
            Law::Deterministic { value } => Sampler::Constant(value.to_f64()),
            Law::Bernoulli { p } => Sampler::Bernoulli(p.to_f64()),
            Law::Binomial { trials, p } => Sampler::Binomial(*trials, p.to_f64()),
            Law::Poisson { alpha } => Sampler::Poisson(alpha.to_f64()),
            Law::FiniteDiscrete { atoms } => {
                let values = atoms.iter().map(|a| a.value.to_f64()).collect();
                let mut acc = Rational::zero();
                let cumulative = atoms
                    .iter()
                    .map(|a| {
                        acc += &a.prob;
                        acc.to_f64()
                    })
                    .collect();
                Sampler::Table { values, cumulative }
            }
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Constant(c) => *c,
            Sampler::Bernoulli(p) => f64::from(u8::from(rng.gen::<f64>() < *p)),
            Sampler::Binomial(m, p) => (0..*m).filter(|_| rng.gen::<f64>() < *p).count() as f64,
            Sampler::Poisson(alpha) => {
                // inversion with the recurrence P(k) = P(k - 1) * alpha / k
                let u: f64 = rng.gen();
                let mut k = 0u32;
                let mut mass = (-alpha).exp();
                let mut cdf = mass;
                while u > cdf && mass > 0.0 {
                    k += 1;
                    mass *= alpha / f64::from(k);
                    cdf += mass;
                }
                f64::from(k)
            }
            Sampler::Table { values, cumulative } => {
                let u: f64 = rng.gen();
                let i = cumulative.partition_point(|&c| c <= u).min(values.len() - 1);
                values[i]
            }
        }
    }
}

fn falling_f64(y: f64, n: u32, lambda: f64) -> f64 {
    (0..n).map(|i| y - f64::from(i) * lambda).product()
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

fn estimate<F>(cfg: &McConfig, statistic: F) -> Result<McEstimate, McError>
where
    F: Fn(&Sampler, &mut ChaCha8Rng) -> f64 + Sync,
{
    let sampler = Sampler::new(&cfg.variable)?;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c);
            let len = CHUNK.min(cfg.samples - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(statistic(&sampler, &mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if total.count > 1 { total.m2 / (total.count - 1) as f64 } else { 0.0 };
    Ok(McEstimate {
        estimate: total.mean,
        stderr: (variance.max(0.0) / total.count as f64).sqrt(),
        samples: total.count,
    })
}

/// A constant statistic is reported exactly rather than through rounded sampling.
fn constant(cfg: &McConfig) -> Option<&Rational> {
    match cfg.variable.law() {
        Law::Deterministic { value } => Some(value),
        _ => None,
    }
}

fn check_samples(cfg: &McConfig) -> Result<(), McError> {
    if cfg.samples == 0 {
        return Err(McError::NoSamples);
    }
    Ok(())
}

fn exact_estimate(cfg: &McConfig, value: Rational) -> McEstimate {
    McEstimate { estimate: value.to_f64(), stderr: 0.0, samples: cfg.samples }
}

/// Estimates `E[(Y)_{n,lambda}]`.
pub fn mc_degenerate_moment(cfg: &McConfig, n: u32, lambda: &Rational) -> Result<McEstimate, McError> {
    if n > MAX_MOMENT_ORDER {
        return Err(McError::IndexTooLarge { what: "n", value: n, max: MAX_MOMENT_ORDER });
    }
    check_samples(cfg)?;
    if let Some(c) = constant(cfg) {
        return Ok(exact_estimate(cfg, degenerate_falling(c, n, lambda)));
    }
    let lambda = lambda.to_f64();
    estimate(cfg, |s, rng| falling_f64(s.draw(rng), n, lambda))
}

/// Estimates `E[(S_k)_{m,lambda}]` for `S_k` a sum of `k` independent copies of `Y`.
pub fn mc_sum_moment(cfg: &McConfig, k: u32, m: u32, lambda: &Rational) -> Result<McEstimate, McError> {
    if k > MAX_SUM_TERMS {
        return Err(McError::IndexTooLarge { what: "k", value: k, max: MAX_SUM_TERMS });
    }
    if m > MAX_SUM_ORDER {
        return Err(McError::IndexTooLarge { what: "m", value: m, max: MAX_SUM_ORDER });
    }
    check_samples(cfg)?;
    if k == 0 || constant(cfg).is_some() {
        let c = constant(cfg).cloned().unwrap_or_else(Rational::zero);
        let sum = c * Rational::from(k);
        return Ok(exact_estimate(cfg, degenerate_falling(&sum, m, lambda)));
    }
    let lambda = lambda.to_f64();
    estimate(cfg, |s, rng| {
        let sum: f64 = (0..k).map(|_| s.draw(rng)).sum();
        falling_f64(sum, m, lambda)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn constant_variable_is_exact() {
        let cfg = McConfig::new(RandomVariable::one(), 7).samples(1000);
        for n in 0..=4 {
            let lambda = q("1/3");
            let est = mc_degenerate_moment(&cfg, n, &lambda).unwrap();
            let exact = RandomVariable::one().degenerate_moment(n, &lambda);
            assert_eq!(est.estimate, exact.to_f64());
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn empty_sum_is_exact() {
        let y = RandomVariable::poisson(q("2")).unwrap();
        let cfg = McConfig::new(y, 1).samples(100);
        assert_eq!(mc_sum_moment(&cfg, 0, 0, &q("1/2")).unwrap().estimate, 1.0);
        let e = mc_sum_moment(&cfg, 0, 3, &q("1/2")).unwrap();
        assert_eq!((e.estimate, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn replay_is_bit_identical() {
        let y = RandomVariable::poisson(q("2")).unwrap();
        let cfg = McConfig::new(y, 42).samples(20_000);
        let a = mc_degenerate_moment(&cfg, 2, &q("1/2")).unwrap();
        let b = mc_degenerate_moment(&cfg, 2, &q("1/2")).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn poisson_second_degenerate_moment() {
        // E[Y^2] - E[Y]/2 = 6 - 1
        let y = RandomVariable::poisson(q("2")).unwrap();
        let e = mc_degenerate_moment(&McConfig::new(y, 3), 2, &q("1/2")).unwrap();
        assert!(e.agrees(&q("5"), 4.0), "{e:?}");
    }

    #[test]
    fn bernoulli_first_moment_and_sum() {
        let y = RandomVariable::bernoulli(q("1/2")).unwrap();
        let cfg = McConfig::new(y, 9);
        assert!(mc_degenerate_moment(&cfg, 1, &q("0")).unwrap().agrees(&q("1/2"), 4.0));
        assert!(mc_sum_moment(&cfg, 2, 1, &q("0")).unwrap().agrees(&q("1"), 4.0));
    }

    #[test]
    fn formal_parameters_are_rejected() {
        let y = RandomVariable::formal(Law::Bernoulli { p: q("2") }).unwrap();
        let err = mc_degenerate_moment(&McConfig::new(y, 0), 1, &q("0")).unwrap_err();
        assert!(matches!(err, McError::Unsupported(_)));
    }

    #[test]
    fn index_limits() {
        let cfg = McConfig::new(RandomVariable::one(), 0);
        assert!(mc_degenerate_moment(&cfg, 9, &q("0")).is_err());
        assert!(mc_sum_moment(&cfg, 7, 1, &q("0")).is_err());
        assert!(mc_sum_moment(&cfg, 1, 7, &q("0")).is_err());
    }
}
