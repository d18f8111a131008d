//! Deterministic combinatorial quantities: falling factorials and their
//! degenerate analogues, Stirling numbers of both kinds, degenerate Stirling
//! numbers of the second kind, degenerate Bell polynomials and the degenerate
//! Bernstein polynomials.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{binomial_int, factorial, Rational};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("k must not exceed n (k = {k}, n = {n})")]
    KExceedsN { k: u32, n: u32 },
}

/// `x (x - lambda) ... (x - (n-1) lambda)`, with the empty product for `n = 0`.
pub fn degenerate_falling(x: &Rational, n: u32, lambda: &Rational) -> Rational {
    (0..n).map(|i| x - &(lambda * &Rational::from(i))).product()
}

/// The ordinary falling factorial `x (x-1) ... (x-n+1)`.
pub fn falling(x: &Rational, n: u32) -> Rational {
    degenerate_falling(x, n, &Rational::one())
}

/// `(x)_{k,lambda} / k!`.
pub fn degenerate_binomial(x: &Rational, k: u32, lambda: &Rational) -> Rational {
    degenerate_falling(x, k, lambda) / factorial(k)
}

/// The degenerate exponential `e_lambda^x(t) = sum_n (x)_{n,lambda} t^n / n!`.
pub fn degenerate_exp_series(x: &Rational, lambda: &Rational, order: usize) -> TruncatedSeries {
    let mut falling = Rational::one();
    let mut coeffs = Vec::with_capacity(order + 1);
    for n in 0..=order as u32 {
        coeffs.push(&falling / &factorial(n));
        falling *= x - &(lambda * &Rational::from(n));
    }
    TruncatedSeries::new(coeffs, order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StirlingKind {
    First,
    Second,
    DegenerateSecond,
}

/// Triangular array of Stirling-type numbers `(n, k)` for `0 <= k <= n <= n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTable {
    kind: StirlingKind,
    lambda: Option<Rational>,
    rows: Vec<Vec<Rational>>,
}

impl StirlingTable {
    /// Signed Stirling numbers of the first kind: coefficients of `(x)_n` in powers of `x`.
    pub fn first(n_max: u32) -> Self {
        let mut rows = vec![vec![Rational::one()]];
        for n in 1..=n_max as usize {
            let prev = &rows[n - 1];
            let shift = Rational::from(n - 1);
            let row = (0..=n)
                .map(|k| {
                    let left = if k >= 1 { prev[k - 1].clone() } else { Rational::zero() };
                    let here = prev.get(k).map(|v| v * &shift).unwrap_or_default();
                    left - here
                })
                .collect();
            rows.push(row);
        }
        StirlingTable { kind: StirlingKind::First, lambda: None, rows }
    }

    pub fn second(n_max: u32) -> Self {
        let mut rows = vec![vec![Rational::one()]];
        for n in 1..=n_max as usize {
            let prev = &rows[n - 1];
            let row = (0..=n)
                .map(|k| {
                    let left = if k >= 1 { prev[k - 1].clone() } else { Rational::zero() };
                    let here = prev.get(k).map(|v| v * &Rational::from(k)).unwrap_or_default();
                    left + here
                })
                .collect();
            rows.push(row);
        }
        StirlingTable { kind: StirlingKind::Second, lambda: None, rows }
    }

    /// Degenerate Stirling numbers of the second kind, read off the
    /// exponential generating functions `(e_lambda(t) - 1)^k / k!`.
    pub fn degenerate_second(lambda: &Rational, n_max: u32) -> Self {
        let order = n_max as usize;
        let base = &degenerate_exp_series(&Rational::one(), lambda, order) - &Rational::one();
        let mut rows: Vec<Vec<Rational>> = (0..=order).map(|n| vec![Rational::zero(); n + 1]).collect();
        let mut power = TruncatedSeries::one(order);
        for k in 0..=order {
            let scaled = power.scale(&factorial(k as u32).recip().expect("k! > 0"));
            for (n, row) in rows.iter_mut().enumerate().skip(k) {
                row[k] = scaled.extract_egf(n).expect("within order");
            }
            power = &power * &base;
        }
        StirlingTable { kind: StirlingKind::DegenerateSecond, lambda: Some(lambda.clone()), rows }
    }

    pub fn build(kind: StirlingKind, n_max: u32, lambda: Option<&Rational>) -> Self {
        match kind {
            StirlingKind::First => Self::first(n_max),
            StirlingKind::Second => Self::second(n_max),
            StirlingKind::DegenerateSecond => {
                Self::degenerate_second(lambda.unwrap_or(&Rational::zero()), n_max)
            }
        }
    }

    pub fn kind(&self) -> StirlingKind {
        self.kind
    }

    pub fn lambda(&self) -> Option<&Rational> {
        self.lambda.as_ref()
    }

    pub fn n_max(&self) -> u32 {
        (self.rows.len() - 1) as u32
    }

    /// Entry `(n, k)`; zero outside the triangle.
    ///
    /// Panics if `n` exceeds the table size.
    pub fn get(&self, n: i64, k: i64) -> Rational {
        if n < 0 || k < 0 || k > n {
            return Rational::zero();
        }
        assert!((n as usize) < self.rows.len(), "row {n} beyond table size {}", self.n_max());
        self.rows[n as usize][k as usize].clone()
    }

    pub fn entry(&self, n: u32, k: u32) -> &Rational {
        &self.rows[n as usize][k as usize]
    }

    /// Entries in row-major order `(n, k, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, &Rational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(n, row)| row.iter().enumerate().map(move |(k, v)| (n as u32, k as u32, v)))
    }
}

static FIRST_KIND: RwLock<Option<StirlingTable>> = RwLock::new(None);
static SECOND_KIND: RwLock<Option<StirlingTable>> = RwLock::new(None);

fn memoized(cache: &RwLock<Option<StirlingTable>>, n: i64, k: i64, build: fn(u32) -> StirlingTable) -> Rational {
    if n < 0 || k < 0 || k > n {
        return Rational::zero();
    }
    if let Some(t) = cache.read().expect("stirling cache poisoned").as_ref() {
        if n as u32 <= t.n_max() {
            return t.get(n, k);
        }
    }
    let mut guard = cache.write().expect("stirling cache poisoned");
    let have = guard.as_ref().map(StirlingTable::n_max);
    if have.is_none_or(|m| m < n as u32) {
        *guard = Some(build((n as u32).max(16)));
    }
    guard.as_ref().unwrap().get(n, k)
}

/// Signed Stirling number of the first kind `S_1(n, k)`; zero off the triangle.
pub fn stirling1(n: i64, k: i64) -> Rational {
    memoized(&FIRST_KIND, n, k, StirlingTable::first)
}

/// Stirling number of the second kind; zero off the triangle.
pub fn stirling2(n: i64, k: i64) -> Rational {
    memoized(&SECOND_KIND, n, k, StirlingTable::second)
}

pub fn degenerate_stirling2(n: i64, k: i64, lambda: &Rational) -> Rational {
    if n < 0 || k < 0 || k > n {
        return Rational::zero();
    }
    StirlingTable::degenerate_second(lambda, n as u32).get(n, k)
}

/// Degenerate Bell polynomial `sum_k {n brace k}_lambda x^k`.
pub fn degenerate_bell(n: u32, x: &Rational, lambda: &Rational) -> Rational {
    degenerate_bell_from(&StirlingTable::degenerate_second(lambda, n), n, x)
}

/// Degenerate Bell polynomial using an existing degenerate Stirling table.
pub fn degenerate_bell_from(table: &StirlingTable, n: u32, x: &Rational) -> Rational {
    let mut xp = Rational::one();
    let mut acc = Rational::zero();
    for k in 0..=n {
        acc += table.entry(n, k) * &xp;
        xp *= x;
    }
    acc
}

/// Degenerate Bernstein polynomial `binom(n, k) (x)_{k,lambda} (1-x)_{n-k,lambda}`.
pub fn degenerate_bernstein(k: u32, n: u32, x: &Rational, lambda: &Rational) -> Result<Rational, CombinatoricsError> {
    if k > n {
        return Err(CombinatoricsError::KExceedsN { k, n });
    }
    let one_minus_x = Rational::one() - x;
    Ok(binomial_int(n as i64, k as i64)
        * degenerate_falling(x, k, lambda)
        * degenerate_falling(&one_minus_x, n - k, lambda))
}

/// The same polynomial read off its generating function
/// `(x)_{k,lambda} t^k / k! * e_lambda^{1-x}(t)`.
pub fn degenerate_bernstein_gf(k: u32, n: u32, x: &Rational, lambda: &Rational) -> Result<Rational, CombinatoricsError> {
    if k > n {
        return Err(CombinatoricsError::KExceedsN { k, n });
    }
    let order = n as usize;
    let lead = degenerate_binomial(x, k, lambda);
    let gf = degenerate_exp_series(&(Rational::one() - x), lambda, order)
        .shift_up(k as usize)
        .scale(&lead);
    Ok(gf.extract_egf(n as usize).expect("within order"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn first_kind_expansion() {
        // x(x-1)(x-2) = x^3 - 3x^2 + 2x
        assert_eq!(stirling1(3, 1), Rational::from(2));
        assert_eq!(stirling1(3, 2), Rational::from(-3));
        assert_eq!(stirling1(3, 3), Rational::one());
        assert_eq!(stirling1(3, 0), Rational::zero());
        assert_eq!(stirling1(3, 4), Rational::zero());
        for n in 0..12 {
            assert_eq!(stirling1(n, n), Rational::one());
        }
    }

    #[test]
    fn second_kind_values() {
        assert_eq!(stirling2(4, 2), Rational::from(7));
        assert_eq!(stirling2(3, 3), Rational::one());
        for n in 1..15 {
            assert_eq!(stirling2(n, 1), Rational::one());
            assert_eq!(stirling2(n, 0), Rational::zero());
        }
        assert_eq!(stirling2(0, 0), Rational::one());
        assert_eq!(stirling2(-1, 0), Rational::zero());
    }

    #[test]
    fn memo_grows_past_initial_size() {
        assert_eq!(stirling2(25, 24), binomial_int(25, 2));
        assert_eq!(stirling1(20, 19), -binomial_int(20, 2));
    }

    #[test]
    fn degenerate_falling_values() {
        assert_eq!(degenerate_falling(&q("1/2"), 2, &q("1/3")), q("1/12"));
        assert_eq!(degenerate_falling(&q("-9/4"), 0, &q("5")), Rational::one());
        assert_eq!(degenerate_falling(&Rational::from(2), 3, &Rational::zero()), Rational::from(8));
    }

    #[test]
    fn degenerate_binomial_values() {
        assert_eq!(degenerate_binomial(&q("7/5"), 0, &q("1/9")), Rational::one());
        assert_eq!(degenerate_binomial(&Rational::one(), 2, &Rational::zero()), q("1/2"));
        assert_eq!(degenerate_binomial(&q("1/2"), 2, &q("1/3")), q("1/24"));
    }

    #[test]
    fn degenerate_stirling_values() {
        for lam in ["0", "1/3", "-2", "5/7"] {
            let l = q(lam);
            // x(x - lambda) = (x)_2 + (1 - lambda)(x)_1
            assert_eq!(degenerate_stirling2(2, 1, &l), Rational::one() - &l);
            for n in 0..8 {
                assert_eq!(degenerate_stirling2(n, n, &l), Rational::one());
            }
        }
        assert_eq!(degenerate_stirling2(4, 2, &Rational::zero()), Rational::from(7));
        assert_eq!(degenerate_stirling2(2, 3, &q("1/2")), Rational::zero());
    }

    #[test]
    fn degenerate_table_shape() {
        let t = StirlingTable::degenerate_second(&q("2/5"), 6);
        assert_eq!(t.get(0, 0), Rational::one());
        for n in 1..=6 {
            assert_eq!(t.get(n, 0), Rational::zero());
            assert_eq!(t.get(n, n), Rational::one());
        }
        assert_eq!(t.entries().count(), 28);
        assert_eq!(StirlingTable::degenerate_second(&Rational::zero(), 10), {
            let mut s = StirlingTable::second(10);
            s.kind = StirlingKind::DegenerateSecond;
            s.lambda = Some(Rational::zero());
            s
        });
    }

    #[test]
    fn degenerate_bell_values() {
        assert_eq!(degenerate_bell(0, &q("3/7"), &q("1/2")), Rational::one());
        assert_eq!(degenerate_bell(2, &Rational::one(), &Rational::zero()), Rational::from(2));
        for (x, l) in [("1/2", "1/3"), ("-2", "3/4"), ("5", "0")] {
            let (x, l) = (q(x), q(l));
            let expected = (Rational::one() - &l) * &x + &x * &x;
            assert_eq!(degenerate_bell(2, &x, &l), expected);
        }
    }

    #[test]
    fn degenerate_bernstein_values() {
        for (x, l) in [("1/2", "1/7"), ("3", "-1/2"), ("-2/9", "4")] {
            let (x, l) = (q(x), q(l));
            let expected = Rational::from(2) * &x * (Rational::one() - &x);
            assert_eq!(degenerate_bernstein(1, 2, &x, &l).unwrap(), expected);
            assert_eq!(degenerate_bernstein(0, 0, &x, &l).unwrap(), Rational::one());
        }
        assert_eq!(degenerate_bernstein(1, 2, &q("1/2"), &q("1/7")).unwrap(), q("1/2"));
        assert_eq!(
            degenerate_bernstein(3, 2, &q("1/2"), &q("1/7")),
            Err(CombinatoricsError::KExceedsN { k: 3, n: 2 })
        );
    }

    #[test]
    fn bernstein_generating_function_matches_product() {
        for (x, l) in [("1/3", "1/5"), ("-3/2", "2"), ("7/4", "-1/3")] {
            let (x, l) = (q(x), q(l));
            for n in 0..=8 {
                for k in 0..=n {
                    assert_eq!(
                        degenerate_bernstein(k, n, &x, &l).unwrap(),
                        degenerate_bernstein_gf(k, n, &x, &l).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_exponential_reduces_to_exp() {
        let e = degenerate_exp_series(&Rational::one(), &Rational::zero(), 6);
        assert_eq!(e, TruncatedSeries::exp_t(6));
    }
}
