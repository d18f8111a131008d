//! Truncated formal power series in one variable `t` over [`Rational`].
//!
//! A series of order `N` stores the coefficients of `t^0 ..= t^N`. Binary
//! operations between series of different orders produce a result at the
//! smaller order, so every stored coefficient is always exact.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::rational::{binomial_general, factorial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by a series that vanishes to order {order}")]
    ZeroDivisor { order: usize },
    #[error("divisor has valuation {divisor} but dividend only {dividend}")]
    ValuationMismatch { dividend: usize, divisor: usize },
    #[error("constant term must be {expected}, found {found}")]
    ConstantTerm { expected: i64, found: Box<Rational> },
    #[error("index {index} exceeds series order {order}")]
    IndexOutOfRange { index: usize, order: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    /// Builds a series of the given order, zero-padding or truncating `coeffs`.
    pub fn new(mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        TruncatedSeries { coeffs }
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Rational) -> Self {
        TruncatedSeries { coeffs: (0..=order).map(f).collect() }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// `c * t^power`, which is the zero series when `power > order`.
    pub fn monomial(c: Rational, power: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    /// The exponential series `sum t^n / n!`.
    pub fn exp_t(order: usize) -> Self {
        Self::from_fn(order, |n| factorial(n as u32).recip().expect("n! > 0"))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    /// Coefficient of `t^n`.
    pub fn coefficient(&self, n: usize) -> Result<&Rational, SeriesError> {
        self.coeffs
            .get(n)
            .ok_or(SeriesError::IndexOutOfRange { index: n, order: self.order() })
    }

    /// `n!` times the coefficient of `t^n`: the exponential generating function reading.
    pub fn extract_egf(&self, n: usize) -> Result<Rational, SeriesError> {
        Ok(self.coefficient(n)? * factorial(n as u32))
    }

    pub fn constant_term(&self) -> &Rational {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// Index of the first nonzero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        TruncatedSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplies by `t^k`, keeping the order fixed.
    pub fn shift_up(&self, k: usize) -> Self {
        let order = self.order();
        Self::from_fn(order, |i| if i >= k { self.coeffs[i - k].clone() } else { Rational::zero() })
    }

    /// Divides by `t^k`; the order drops by `k`. The caller guarantees the low terms vanish.
    fn shift_down(&self, k: usize) -> Self {
        TruncatedSeries { coeffs: self.coeffs[k..].to_vec() }
    }

    fn add_constant(&self, c: &Rational) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += c;
        s
    }

    /// Nonnegative integer power by repeated squaring.
    pub fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Quotient `self / divisor`. A common factor `t^v` is cancelled first, so
    /// `t / (e^t - 1)` is accepted; the result order drops by `v`.
    pub fn div(&self, divisor: &TruncatedSeries) -> Result<Self, SeriesError> {
        let v = divisor
            .valuation()
            .ok_or(SeriesError::ZeroDivisor { order: divisor.order() })?;
        if let Some(va) = self.valuation() {
            if va < v {
                return Err(SeriesError::ValuationMismatch { dividend: va, divisor: v });
            }
        }
        if v > self.order() {
            return Err(SeriesError::ZeroDivisor { order: self.order() });
        }
        let num = self.shift_down(v);
        let den = divisor.shift_down(v);
        let order = num.order().min(den.order());
        let lead = den.coeffs[0].recip().expect("nonzero leading coefficient");
        let mut q: Vec<Rational> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = num.coeffs[n].clone();
            for i in 1..=n {
                acc -= &den.coeffs[i] * &q[n - i];
            }
            q.push(acc * &lead);
        }
        Ok(TruncatedSeries { coeffs: q })
    }

    /// `exp(self)`; the constant term must vanish.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::ConstantTerm {
                expected: 0,
                found: Box::new(self.coeffs[0].clone()),
            });
        }
        // f' = a' f  =>  n f_n = sum_{k=1}^n k a_k f_{n-k}
        let order = self.order();
        let mut f = vec![Rational::one()];
        for n in 1..=order {
            let mut acc = Rational::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &f[n - k] * Rational::from(k);
                }
            }
            f.push(acc / Rational::from(n));
        }
        Ok(TruncatedSeries { coeffs: f })
    }

    /// `log(self)`; the constant term must be one.
    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::ConstantTerm {
                expected: 1,
                found: Box::new(self.coeffs[0].clone()),
            });
        }
        // a l' = a'  =>  n l_n = n a_n - sum_{k=1}^{n-1} k l_k a_{n-k}
        let order = self.order();
        let mut l = vec![Rational::zero()];
        for n in 1..=order {
            let mut acc = &self.coeffs[n] * Rational::from(n);
            for (k, lk) in l.iter().enumerate().skip(1) {
                acc -= lk * &self.coeffs[n - k] * Rational::from(k);
            }
            l.push(acc / Rational::from(n));
        }
        Ok(TruncatedSeries { coeffs: l })
    }

    /// `self^r` for a unit series with constant term one, by the binomial
    /// series `sum_j binom(r, j) (self - 1)^j`.
    pub fn pow_rational(&self, r: &Rational) -> Result<Self, SeriesError> {
        self.require_unit()?;
        let order = self.order();
        if r.is_zero() {
            return Ok(Self::one(order));
        }
        if r.is_one() {
            return Ok(self.clone());
        }
        let u = self.add_constant(&-Rational::one());
        let mut out = Self::zero(order);
        let mut u_pow = Self::one(order);
        for j in 0..=order as u32 {
            let c = binomial_general(r, j);
            if !c.is_zero() {
                out = &out + &u_pow.scale(&c);
            }
            u_pow = &u_pow * &u;
        }
        Ok(out)
    }

    /// `self^r` through `exp(r log self)`. Agrees with [`Self::pow_rational`].
    pub fn pow_rational_exp_log(&self, r: &Rational) -> Result<Self, SeriesError> {
        self.require_unit()?;
        self.log()?.scale(r).exp()
    }

    fn require_unit(&self) -> Result<(), SeriesError> {
        if self.coeffs[0].is_one() {
            Ok(())
        } else {
            Err(SeriesError::ConstantTerm { expected: 1, found: Box::new(self.coeffs[0].clone()) })
        }
    }
}

impl Add<&TruncatedSeries> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |i| &self.coeffs[i] + &rhs.coeffs[i])
    }
}

impl Sub<&TruncatedSeries> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        TruncatedSeries::from_fn(order, |i| &self.coeffs[i] - &rhs.coeffs[i])
    }
}

impl Mul<&TruncatedSeries> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs[..=order].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=order - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl std::ops::Sub<&Rational> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &Rational) -> TruncatedSeries {
        self.add_constant(&-rhs)
    }
}

impl std::ops::Add<&Rational> for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &Rational) -> TruncatedSeries {
        self.add_constant(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn series(cs: &[&str]) -> TruncatedSeries {
        TruncatedSeries::new(cs.iter().map(|c| q(c)).collect(), cs.len() - 1)
    }

    #[test]
    fn product_and_sum() {
        let a = series(&["1", "1", "0"]);
        let b = series(&["1", "-1", "0"]);
        assert_eq!(&a * &b, series(&["1", "0", "-1"]));
        assert_eq!(&a + &TruncatedSeries::zero(2), a);
    }

    #[test]
    fn exp_squared_is_exp_2t() {
        // Cauchy product oracle: sum_{i+j=n} 1/(i! j!) = 2^n / n!
        let e = TruncatedSeries::exp_t(3);
        assert_eq!(&e * &e, series(&["1", "2", "2", "4/3"]));
    }

    #[test]
    fn mixed_orders_truncate_to_minimum() {
        let a = TruncatedSeries::exp_t(5);
        let b = TruncatedSeries::exp_t(2);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
    }

    #[test]
    fn bernoulli_generating_function() {
        // Bernoulli-number oracle: sum_{k<=n} binom(n+1, k) B_k = 0, B_0 = 1.
        let mut b = vec![Rational::one()];
        for n in 1..=4i64 {
            let s: Rational = (0..n).map(|k| crate::rational::binomial_int(n + 1, k) * &b[k as usize]).sum();
            b.push(-s / Rational::from(n + 1));
        }
        let expected: Vec<Rational> =
            b.iter().enumerate().map(|(n, bn)| bn / &factorial(n as u32)).collect();
        assert_eq!(expected, vec![q("1"), q("-1/2"), q("1/12"), q("0"), q("-1/720")]);

        let t = TruncatedSeries::monomial(Rational::one(), 1, 5);
        let em1 = &TruncatedSeries::exp_t(5) - &Rational::one();
        let quotient = t.div(&em1).unwrap();
        assert_eq!(quotient.order(), 4);
        assert_eq!(quotient.coeffs(), expected.as_slice());
        assert_eq!(quotient.extract_egf(2).unwrap(), q("1/6"));
    }

    #[test]
    fn division_edge_cases() {
        let a = series(&["3", "1/2", "-2"]);
        assert_eq!(a.div(&TruncatedSeries::one(2)).unwrap(), a);
        let geo = TruncatedSeries::one(3).div(&series(&["1", "-1", "0", "0"])).unwrap();
        assert_eq!(geo, series(&["1", "1", "1", "1"]));
        assert_eq!(a.div(&TruncatedSeries::zero(2)), Err(SeriesError::ZeroDivisor { order: 2 }));
        let t2 = TruncatedSeries::monomial(Rational::one(), 2, 3);
        let t1 = TruncatedSeries::monomial(Rational::one(), 1, 3);
        assert_eq!(t1.div(&t2), Err(SeriesError::ValuationMismatch { dividend: 1, divisor: 2 }));
    }

    #[test]
    fn exp_and_log_basics() {
        let t = TruncatedSeries::monomial(Rational::one(), 1, 3);
        assert_eq!(t.exp().unwrap(), series(&["1", "1", "1/2", "1/6"]));
        assert_eq!((&t + &Rational::one()).log().unwrap(), series(&["0", "1", "-1/2", "1/3"]));
        assert!(TruncatedSeries::one(3).exp().is_err());
        assert!(t.log().is_err());
    }

    #[test]
    fn rational_power() {
        let a = series(&["1", "1", "0"]);
        assert_eq!(a.pow_rational(&q("1/2")).unwrap(), series(&["1", "1/2", "-1/8"]));
        assert_eq!(a.pow_rational(&Rational::zero()).unwrap(), TruncatedSeries::one(2));
        assert_eq!(a.pow_rational(&Rational::one()).unwrap(), a);
        assert!(series(&["2", "1"]).pow_rational(&q("1/2")).is_err());
        assert_eq!(a.powu(3), series(&["1", "3", "3"]));
    }

    #[test]
    fn coefficient_access() {
        let e = TruncatedSeries::exp_t(5);
        assert_eq!(e.extract_egf(5).unwrap(), Rational::one());
        assert_eq!(series(&["1", "-1/2"]).coefficient(1).unwrap(), &q("-1/2"));
        assert_eq!(e.coefficient(6), Err(SeriesError::IndexOutOfRange { index: 6, order: 5 }));
    }
}
