use degen_bernstein::combinatorics::{
    degenerate_bernstein, degenerate_falling, degenerate_stirling2, falling, stirling1, stirling2,
};
use degen_bernstein::rational::binomial_general;
use degen_bernstein::{Rational, TruncatedSeries};
use proptest::prelude::*;

const ORDER: usize = 10;

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=7).prop_map(|(p, q)| Rational::frac(p, q))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

/// Series with prescribed constant term and small rational coefficients.
fn series_with_constant(c: Rational) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(rational(), ORDER).prop_map(move |tail| {
        let mut coeffs = vec![c.clone()];
        coeffs.extend(tail);
        TruncatedSeries::new(coeffs, ORDER)
    })
}

fn any_series() -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(rational(), ORDER + 1).prop_map(|c| TruncatedSeries::new(c, ORDER))
}

proptest! {
    #[test]
    fn field_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Rational::zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.recip().unwrap(), Rational::one());
        }
    }

    #[test]
    fn rational_text_round_trip(a in rational()) {
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn general_binomial_pascal(r in rational(), j in 0u32..10) {
        let lhs = binomial_general(&(&r + &Rational::one()), j + 1);
        let rhs = binomial_general(&r, j) + binomial_general(&r, j + 1);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exp_log_round_trip(u in series_with_constant(Rational::zero())) {
        prop_assert_eq!(u.exp().unwrap().log().unwrap(), u.clone());
        let unit = &u + &Rational::one();
        prop_assert_eq!(unit.log().unwrap().exp().unwrap(), unit);
    }

    #[test]
    fn pow_routes_agree(a in series_with_constant(Rational::one()), r in rational()) {
        prop_assert_eq!(a.pow_rational(&r).unwrap(), a.pow_rational_exp_log(&r).unwrap());
    }

    #[test]
    fn pow_is_a_homomorphism(a in series_with_constant(Rational::one()), r in rational(), s in rational()) {
        let lhs = &a.pow_rational(&r).unwrap() * &a.pow_rational(&s).unwrap();
        prop_assert_eq!(lhs, a.pow_rational(&(&r + &s)).unwrap());
    }

    #[test]
    fn integer_pow_matches_repeated_product(a in series_with_constant(Rational::one()), e in 0u32..5) {
        prop_assert_eq!(a.pow_rational(&Rational::from(e)).unwrap(), a.powu(e));
    }

    #[test]
    fn div_inverts_mul(a in any_series(), c in nonzero_rational(), b in series_with_constant(Rational::one())) {
        let b = b.scale(&c);
        prop_assert_eq!((&a * &b).div(&b).unwrap(), a);
    }

    #[test]
    fn div_cancels_common_power_of_t(a in any_series(), b in series_with_constant(Rational::one()), v in 1usize..3) {
        let q = a.shift_up(v).div(&b.shift_up(v)).unwrap();
        prop_assert_eq!(q.order(), ORDER - v);
        prop_assert_eq!(&q * &b.truncate(ORDER - v), a.truncate(ORDER - v));
    }

    #[test]
    fn degenerate_falling_splits(x in rational(), lambda in rational(), m in 0u32..6, n in 0u32..6) {
        // (x)_{m+n} = (x)_m (x - m lambda)_n
        let shifted = &x - &(&lambda * &Rational::from(m));
        prop_assert_eq!(
            degenerate_falling(&x, m + n, &lambda),
            degenerate_falling(&x, m, &lambda) * degenerate_falling(&shifted, n, &lambda)
        );
    }

    #[test]
    fn degenerate_falling_in_falling_basis(x in rational(), lambda in rational(), n in 0u32..9) {
        let rhs: Rational = (0..=n)
            .map(|k| degenerate_stirling2(n as i64, k as i64, &lambda) * falling(&x, k))
            .sum();
        prop_assert_eq!(degenerate_falling(&x, n, &lambda), rhs);
    }

    #[test]
    fn degenerate_bernstein_sums_to_shifted_falling(x in rational(), lambda in rational(), n in 0u32..9) {
        let total: Rational = (0..=n).map(|k| degenerate_bernstein(k, n, &x, &lambda).unwrap()).sum();
        prop_assert_eq!(total, degenerate_falling(&Rational::one(), n, &lambda));
    }
}

#[test]
fn stirling_tables_are_mutually_inverse() {
    for n in 0..=12i64 {
        for m in 0..=12i64 {
            let s: Rational = (0..=12).map(|k| stirling1(n, k) * stirling2(k, m)).sum();
            let expected = if n == m { Rational::one() } else { Rational::zero() };
            assert_eq!(s, expected, "n = {n}, m = {m}");
        }
    }
}
