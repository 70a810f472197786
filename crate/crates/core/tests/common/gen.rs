//! Seeded scenario generators and typo injection for the DSL tests.

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use summaprob::dsl::KEYWORDS;
use summaprob::exact::rat;
use summaprob::expr::TailExpr;
use summaprob::index_set::{IndexSet, Parity};
use summaprob::lacunary::LacunarySequence;
use summaprob::model::{Defaults, Scenario, TailModel};

fn unit_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let d = rng.gen_range(1..=12i64);
    rat(rng.gen_range(1..=d), d)
}

fn theta(rng: &mut ChaCha8Rng) -> LacunarySequence {
    match rng.gen_range(0..5) {
        0 => LacunarySequence::Powers(rng.gen_range(2..=9)),
        1 => LacunarySequence::FactorialEven,
        2 => LacunarySequence::FactorialOdd,
        3 => LacunarySequence::RatioControlled(rng.gen_range(1..=9)),
        _ => {
            let mut x = rng.gen_range(1..4u64);
            let mut v = vec![BigUint::from(x)];
            for _ in 0..rng.gen_range(2..6) {
                x = x * 2 + rng.gen_range(1..5);
                v.push(BigUint::from(x));
            }
            LacunarySequence::ExplicitList(v)
        }
    }
}

fn set(rng: &mut ChaCha8Rng) -> IndexSet {
    match rng.gen_range(0..8) {
        0 => {
            let pairs = [(2, 1), (3, 1), (3, 2), (5, 2), (7, 3), (9, 4)];
            let (s, r) = *pairs.choose(rng).unwrap();
            IndexSet::FloorPower { s, r }
        }
        1 => IndexSet::SelfPower,
        2 => IndexSet::FactorialParity(if rng.gen() { Parity::Even } else { Parity::Odd }),
        3 => IndexSet::BlockPrefix {
            theta: LacunarySequence::Powers(rng.gen_range(2..6)),
            c: unit_rational(rng),
        },
        4 => IndexSet::RatioBlocks {
            j_max: rng.gen_range(1..10),
        },
        5 => {
            let items = (0..rng.gen_range(1..6))
                .map(|_| BigUint::from(rng.gen_range(1..500u32)))
                .collect();
            IndexSet::finite_list(items).unwrap()
        }
        6 => IndexSet::Empty,
        _ => IndexSet::All,
    }
}

/// Expressions whose value stays in `[0, 1]` for `k >= 1` and `eps <= 1`.
fn tail(rng: &mut ChaCha8Rng, depth: u32) -> TailExpr {
    let leaf = depth == 0 || rng.gen_range(0..3) == 0;
    if leaf {
        return match rng.gen_range(0..4) {
            0 => TailExpr::rational(unit_rational(rng)),
            1 => TailExpr::int(1) / TailExpr::k(),
            2 => TailExpr::pow(TailExpr::k(), -TailExpr::rational(unit_rational(rng))),
            _ => TailExpr::pow(
                TailExpr::int(1) - TailExpr::eps() / TailExpr::int(rng.gen_range(2..5)),
                TailExpr::k(),
            ),
        };
    }
    let (a, b) = (tail(rng, depth - 1), tail(rng, depth - 1));
    match rng.gen_range(0..4) {
        0 => TailExpr::min(a, b),
        1 => TailExpr::max(a, b),
        2 => a * b,
        _ => (a + b) / TailExpr::int(2),
    }
}

pub fn random_scenario(rng: &mut ChaCha8Rng, i: usize) -> Scenario {
    let names = ["plain", "with \"quotes\"", "back\\slash", "ünïcode", "x"];
    let mut s = Scenario::new(
        format!("{}-{i}", names.choose(rng).unwrap()),
        TailModel::piecewise(
            ["0", "1", "2", "-3/2"].choose(rng).unwrap().to_string(),
            set(rng),
            tail(rng, 3),
            tail(rng, 3),
            rng.gen(),
        ),
    );
    let opt = |rng: &mut ChaCha8Rng| rng.gen_bool(0.5).then(|| unit_rational(rng));
    s.defaults = Defaults {
        alpha: opt(rng),
        p: rng
            .gen_bool(0.5)
            .then(|| rat(rng.gen_range(1..9), rng.gen_range(1..5))),
        eps: opt(rng),
        delta: opt(rng),
    };
    if rng.gen() {
        s.theta = Some(theta(rng));
    }
    s
}

/// Byte ranges of identifier tokens outside string literals.
fn identifiers(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut in_string = false;
    while i < bytes.len() {
        let c = bytes[i];
        if in_string {
            if c == b'\\' {
                i += 1;
            } else if c == b'"' {
                in_string = false;
            }
            i += 1;
            continue;
        }
        if c == b'"' {
            in_string = true;
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, i));
        } else {
            i += 1;
        }
    }
    out
}

/// Replaces one identifier of `text` by a non-keyword misspelling of the
/// same length. Returns the broken text and the byte range of the typo.
pub fn inject_typo(text: &str, rng: &mut ChaCha8Rng) -> (String, usize, usize) {
    let tokens = identifiers(text);
    let (start, end) = *tokens.choose(rng).unwrap();
    let word = &text[start..end];
    let mut typo = word.to_string();
    while KEYWORDS.contains(&typo.as_str()) || typo == word || typo == "k" || typo == "eps" {
        let at = rng.gen_range(0..word.len());
        let ch = (b'a' + rng.gen_range(0..26u8)) as char;
        typo = format!("{}{}{}", &word[..at], ch, &word[at + 1..]);
    }
    (
        format!("{}{}{}", &text[..start], typo, &text[end..]),
        start,
        end,
    )
}
