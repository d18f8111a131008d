//! Shared laws and first-principles oracles.
#![allow(dead_code)]

use degen_bernstein::rational::{binomial_int, factorial};
use degen_bernstein::{Law, RandomVariable, Rational, TruncatedSeries};

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn laws() -> Vec<RandomVariable> {
    vec![
        RandomVariable::one(),
        RandomVariable::bernoulli(q("1/3")).unwrap(),
        RandomVariable::binomial(3, q("1/2")).unwrap(),
        RandomVariable::poisson(q("2")).unwrap(),
        RandomVariable::discrete(vec![(q("0"), q("1/2")), (q("2"), q("1/2"))]).unwrap(),
    ]
}

/// `sum_n c^n t^n / n!`.
pub fn exp_ct(c: &Rational, order: usize) -> TruncatedSeries {
    TruncatedSeries::from_fn(order, |n| c.powu(n as u32) / factorial(n as u32))
}

/// `E[e^{Yt}]` for a finite law given by atoms, built term by term.
fn classical_mgf_finite(atoms: &[(Rational, Rational)], order: usize) -> TruncatedSeries {
    atoms
        .iter()
        .fold(TruncatedSeries::zero(order), |acc, (v, p)| &acc + &exp_ct(v, order).scale(p))
}

pub fn classical_mgf(y: &RandomVariable, order: usize) -> TruncatedSeries {
    match y.law() {
        Law::Deterministic { value } => exp_ct(value, order),
        Law::Bernoulli { p } => classical_mgf_finite(&[(q("0"), Rational::one() - p), (q("1"), p.clone())], order),
        Law::Binomial { trials, p } => {
            let atoms: Vec<_> = (0..=*trials)
                .map(|j| {
                    let mass = binomial_int(*trials as i64, j as i64)
                        * p.powu(j)
                        * (Rational::one() - p).powu(trials - j);
                    (Rational::from(j), mass)
                })
                .collect();
            classical_mgf_finite(&atoms, order)
        }
        Law::Poisson { alpha } => (&exp_ct(&Rational::one(), order) - &Rational::one()).scale(alpha).exp().unwrap(),
        Law::FiniteDiscrete { atoms } => {
            let atoms: Vec<_> = atoms.iter().map(|a| (a.value.clone(), a.prob.clone())).collect();
            classical_mgf_finite(&atoms, order)
        }
    }
}

/// Probabilistic Bernstein polynomial from `(tx)^k / k! E[e^{Yt}]^{1-x}`.
pub fn probabilistic_bernstein(y: &RandomVariable, k: u32, n: u32, x: &Rational) -> Rational {
    let order = n as usize + 1;
    let gf = classical_mgf(y, order).pow_rational(&(Rational::one() - x)).unwrap();
    let coeff = if n >= k { gf.coeffs()[(n - k) as usize].clone() } else { Rational::zero() };
    coeff * x.powu(k) / factorial(k) * factorial(n)
}

/// `binom(n, k) (x)_{k,lambda} (1 - x)_{n-k,lambda}` from explicit products.
pub fn degenerate_bernstein_oracle(k: u32, n: u32, x: &Rational, lambda: &Rational) -> Rational {
    let falling = |base: Rational, m: u32| (0..m).map(|i| &base - &(lambda * &Rational::from(i))).product::<Rational>();
    binomial_int(n as i64, k as i64) * falling(x.clone(), k) * falling(Rational::one() - x, n - k)
}

pub fn classical_bernstein(k: u32, n: u32, x: &Rational) -> Rational {
    binomial_int(n as i64, k as i64) * x.powu(k) * (Rational::one() - x).powu(n - k)
}
