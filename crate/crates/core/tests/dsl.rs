mod common;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::gen::{inject_typo, random_scenario};
use summaprob::corpus;
use summaprob::dsl::{format_scenario, parse_scenario, DslError};
use summaprob::exact::{rat, rat_int};
use summaprob::lacunary::LacunarySequence;

#[test]
fn corpus_exports_round_trip() {
    let mut entries = corpus::default_entries();
    entries.push(corpus::example_2_1(7, 3).unwrap());
    entries.push(corpus::example_2_2(rat_int(2)).unwrap());
    entries.push(corpus::theorem_3_2_example(rat(1, 3), LacunarySequence::FactorialOdd).unwrap());
    for e in entries {
        let text = format_scenario(&e.scenario).unwrap();
        let back =
            parse_scenario(&text).unwrap_or_else(|err| panic!("{}: {err}\n{text}", e.name()));
        assert_eq!(back, e.scenario, "{}", e.name());
        assert_eq!(format_scenario(&back).unwrap(), text);
    }
}

#[test]
fn random_scenarios_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..100 {
        let s = random_scenario(&mut rng, i);
        let text = format_scenario(&s).unwrap();
        let back = parse_scenario(&text).unwrap_or_else(|err| panic!("case {i}: {err}\n{text}"));
        assert_eq!(back, s, "case {i}\n{text}");
    }
}

#[test]
fn rationals_are_printed_reduced() {
    let mut s = corpus::example_2_1(2, 1).unwrap().scenario;
    s.defaults.alpha = Some(rat(6, 8));
    let text = format_scenario(&s).unwrap();
    assert!(text.contains("alpha = 3/4;"), "{text}");
    let parsed = parse_scenario(&text.replace("3/4", "9/12")).unwrap();
    assert_eq!(parsed.defaults.alpha, Some(rat(3, 4)));
}

#[test]
fn single_typos_are_located() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let texts: Vec<String> = corpus::default_entries()
        .iter()
        .map(|e| format_scenario(&e.scenario).unwrap())
        .collect();
    for case in 0..50 {
        let text = texts.choose(&mut rng).unwrap();
        let (broken, start, end) = inject_typo(text, &mut rng);
        let typo = &broken[start..end];
        match parse_scenario(&broken) {
            Err(DslError::Parse(e)) => assert!(
                e.span.covers(start, end) && e.span.len == end - start,
                "case {case}: `{}` -> `{typo}` at {start}..{end}, reported {:?}: {}",
                &text[start..end],
                e.span,
                e.message
            ),
            other => panic!(
                "case {case}: `{}` -> `{typo}` gave {other:?}",
                &text[start..end]
            ),
        }
    }
}

#[test]
fn errors_carry_positions() {
    let err = parse_scenario("scenario \"s\" {\n  limit = \"0\";\n  index_set = all;\n  on_tail = 1;\n  off_tail = 1;\n  limit = \"1\";\n}\n")
        .unwrap_err();
    match err {
        DslError::Parse(e) => assert_eq!((e.span.line, e.span.column), (6, 3)),
        other => panic!("{other:?}"),
    }
    let err = parse_scenario("scenario \"s\" {\n  limit = \"0\";\n  index_set = all;\n  on_tail = 2;\n  off_tail = 1;\n}\n")
        .unwrap_err();
    assert!(
        matches!(err, DslError::Validation(ref v) if v.span.line == 4),
        "{err:?}"
    );
    let err =
        parse_scenario("scenario \"s\" {\n  limit = \"0\";\n  on_tail = 1;\n  off_tail = 1;\n}\n")
            .unwrap_err();
    assert!(err.to_string().contains("index_set"), "{err}");
}
