use num_rational::BigRational;
use num_traits::One;

use summaprob::corpus::{self, Separation, UniquenessPair};
use summaprob::evaluators::{Caps, Method, MethodParams};
use summaprob::exact::{rat, rat_int};
use summaprob::harness::{check_ids, Harness, Outcome, ParamGrid, Probe};
use summaprob::Error;

fn one() -> MethodParams {
    MethodParams::new(BigRational::one(), rat(1, 2), rat(1, 2), BigRational::one()).unwrap()
}

#[test]
fn strictness_and_theorem_3_3_checks_pass() {
    let h = Harness::default();
    for id in [
        "ex-2.1",
        "rem-2.1",
        "ex-2.2",
        "ex-3.1",
        "thm-3.3-forward",
        "thm-3.3-converse",
        "thm-2.2i",
    ] {
        let r = h.run(id).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
        assert!(r.probes > 0);
        assert!(r.render().starts_with(&format!("{id} pass")));
    }
}

#[test]
fn inclusion_on_a_small_grid() {
    let h = Harness::default();
    let grid = ParamGrid {
        n: vec![1000, 4000, 16_000],
        n_enumerated: vec![1000, 4000],
        ..ParamGrid::default()
    };
    let entries: Vec<_> = ["ex-2.1", "ex-2.2", "thm-3.3-ex"]
        .iter()
        .map(|n| corpus::entry(n, &[]).unwrap())
        .collect();
    let before = entries.clone();
    for id in ["thm-2.4", "thm-2.5", "note-2.1"] {
        let r = h.check_inclusion(id, &entries, &grid).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
        assert_eq!(r.scenarios, ["ex-2.1", "ex-2.2", "thm-3.3-ex"]);
    }
    assert_eq!(entries, before);
    assert!(matches!(
        h.check_inclusion("ex-2.1", &entries, &grid),
        Err(Error::UnknownCheckId(_))
    ));
}

#[test]
fn unknown_ids_are_rejected() {
    let h = Harness::default();
    assert!(matches!(h.run("thm-9.9"), Err(Error::UnknownCheckId(id)) if id == "thm-9.9"));
    assert!(matches!(
        h.check_strictness("thm-2.4"),
        Err(Error::UnknownCheckId(_))
    ));
    assert_eq!(check_ids().len(), 21);
}

#[test]
fn a_false_separation_yields_a_replayable_witness() {
    let h = Harness::default();
    let a = corpus::entry("ex-2.1", &[]).unwrap().scenario;
    let mut b = a.clone();
    b.name = "ex-2.1-copy".into();
    let pair = UniquenessPair {
        sequence: "copy".into(),
        limit_a: a,
        limit_b: b,
        separation: Some(Separation {
            eps0: rat_int(1),
            delta0: rat(1, 2),
        }),
    };
    let r = h.check_uniqueness(&pair, Method::Ps, &one(), None).unwrap();
    assert_eq!(r.outcome, Outcome::Fail);
    assert_eq!(r.witnesses.len(), 1);
    let w = &r.witnesses[0];
    assert_eq!(w.reason, "both candidate limits converge");
    assert_eq!(w.probes.len(), 2);
    assert!(w.probes.iter().all(|p| matches!(p, Probe::Verdict { .. })));
    assert_eq!(h.replay(w), w.observed);
    assert_eq!(Harness::new(Caps::default()).replay(w), w.observed);
    assert!(r
        .render()
        .contains("witness: both candidate limits converge"));
}

#[test]
fn pairs_need_a_separation_declaration() {
    let h = Harness::default();
    let mut pair = corpus::example_3_1_pair();
    pair.separation = None;
    assert!(matches!(
        h.check_uniqueness(&pair, Method::Ps, &one(), None),
        Err(Error::MissingSeparationDeclaration)
    ));
}

#[test]
fn zero_separation_is_skipped() {
    let h = Harness::default();
    let r = h
        .check_uniqueness(&corpus::zero_pair(), Method::Ps, &one(), None)
        .unwrap();
    assert_eq!(r.outcome, Outcome::Skipped);
    assert_eq!(r.probes, 0);
    assert!(r.witnesses.is_empty());
    assert_eq!(r.notes.len(), 1);
}

#[test]
fn the_true_pair_is_exclusive() {
    let h = Harness::default();
    let pair = corpus::example_3_1_pair();
    for m in [Method::Ps, Method::Pw] {
        let r = h.check_uniqueness(&pair, m, &one(), None).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
    }
}

#[test]
fn reports_render_identically() {
    let a = Harness::default().run("thm-3.4").unwrap();
    let b = Harness::default().run("thm-3.4").unwrap();
    assert_eq!(a.render(), b.render());
    assert_eq!(a.outcome, Outcome::Pass, "{}", a.render());
    assert!(a.render().contains("guard active"));
}

#[test]
fn low_caps_leave_implications_undetermined() {
    let h = Harness::new(Caps {
        prefix: 1000,
        cesaro: 1000,
        block: 1000,
    });
    let r = h.run("thm-2.5").unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
    assert!(r.capped > 0);
    assert!(r.render().contains("undetermined"));
}
