use degen_bernstein::verify::{
    Check, Matched, Perturbation, Status, TheoremId, Verdict, Verifier, VerifyError, VerifyOptions,
};
use degen_bernstein::RandomVariable;

mod common;
use common::{laws, q};

fn report_json(threads: usize, id: TheoremId, y: &RandomVariable, opts: &VerifyOptions) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let report = Verifier::new().verify(id, y, opts).unwrap();
        serde_json::to_string(&report).unwrap()
    })
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let y = RandomVariable::poisson(q("1/2")).unwrap();
    let opts = VerifyOptions::new(4).perturbation(Perturbation::DropLast);
    let one = report_json(1, TheoremId::T2_7, &y, &opts);
    assert_eq!(one, report_json(3, TheoremId::T2_7, &y, &opts));
    assert!(one.contains("\"verdict\":\"fail\""));
}

#[test]
fn every_grid_exceeds_its_recorded_bounds() {
    let v = Verifier::new();
    for id in TheoremId::ALL {
        let y = match id {
            TheoremId::T2_8 | TheoremId::T2_9 => RandomVariable::poisson(q("2")).unwrap(),
            TheoremId::T2_10 => RandomVariable::bernoulli(q("1/3")).unwrap(),
            TheoremId::T2_11 => RandomVariable::binomial(2, q("1/3")).unwrap(),
            _ => RandomVariable::one(),
        };
        let r = v.verify(id, &y, &VerifyOptions::new(3)).unwrap();
        assert!(!r.degree_bounds.is_empty());
        for (var, bound) in &r.degree_bounds {
            let nodes = &r.grid[var];
            assert_eq!(nodes.len(), *bound as usize + 1, "{id} {var}");
        }
    }
}

#[test]
fn sum_identity_over_poisson() {
    let y = RandomVariable::poisson(q("2")).unwrap();
    let r = Verifier::new().verify(TheoremId::Eq15, &y, &VerifyOptions::new(6)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.degree_bounds["lambda"], 7);
}

#[test]
fn cross_consistency_of_explicit_forms() {
    let v = Verifier::new();
    for y in laws() {
        assert!(v.cross_consistency(&y, 5).unwrap().passed(), "{y}");
    }
}

#[test]
fn direct_forms_skip_vanishing_denominators() {
    let y = RandomVariable::bernoulli(q("1/3")).unwrap();
    for id in [TheoremId::T2_4, TheoremId::T2_5] {
        let r = Verifier::new().verify(id, &y, &VerifyOptions::new(4)).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks, vec![Check::Cleared, Check::Direct]);
        assert!(r.nodes_skipped > 0, "{id}");
    }
}

#[test]
fn two_reading_identities_report_the_matching_one() {
    let v = Verifier::new();
    let y = RandomVariable::bernoulli(q("1/3")).unwrap();
    let expected = [
        (TheoremId::T2_6, y.clone(), Matched::Derivation),
        (TheoremId::Eq16, y, Matched::Derivation),
        (TheoremId::T2_9, RandomVariable::poisson(q("1/2")).unwrap(), Matched::Stated),
        (TheoremId::T2_11, RandomVariable::binomial(4, q("2/5")).unwrap(), Matched::Stated),
    ];
    for (id, y, matched) in expected {
        let o = v.certify(id, &y, 5).unwrap();
        assert_eq!(o.matched, Some(matched), "{id}");
        assert_eq!(o.status, Status::PassWithErratum);
        assert!(o.erratum.is_some());
        assert_eq!(o.reports.len(), 2);
    }
    let o = v.certify(TheoremId::T2_1, &RandomVariable::one(), 4).unwrap();
    assert_eq!((o.status, o.matched), (Status::Pass, None));
}

#[test]
fn suite_passes_modulo_errata() {
    let suite = Verifier::new().verify_all(&laws(), 4, Some(0)).unwrap();
    assert!(suite.all_pass);
    let mut named: Vec<&str> = suite.errata.iter().map(|e| e.split(':').next().unwrap()).collect();
    named.sort();
    named.dedup();
    assert_eq!(named, ["Eq16", "T2.11", "T2.6", "T2.9"]);
    assert!(suite.outcomes.iter().flat_map(|o| &o.reports).all(|r| r.witnesses.is_empty()));
}

#[test]
fn wrong_law_is_an_error() {
    let v = Verifier::new();
    let err = v.verify(TheoremId::T2_11, &RandomVariable::one(), &VerifyOptions::new(2)).unwrap_err();
    assert!(matches!(err, VerifyError::LawMismatch { .. }));
    assert!(matches!("T9".parse::<TheoremId>(), Err(VerifyError::UnknownTheorem(_))));
}

#[test]
fn witnesses_carry_both_values() {
    let y = RandomVariable::poisson(q("2")).unwrap();
    let opts = VerifyOptions::new(3).perturbation(Perturbation::DropFirst);
    let r = Verifier::new().verify(TheoremId::T2_8, &y, &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.mismatches, r.witnesses.len());
    for w in &r.witnesses {
        assert_ne!(w.lhs, w.rhs);
        assert!(w.x.is_some());
        assert_eq!(w.indices.len(), 2);
    }
}
