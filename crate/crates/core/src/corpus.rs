//! Parameterised generators for the worked counterexamples, each bundled with
//! the verdicts it is expected to produce.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::diagnostics::{default_blocks, ratio_pair_blocks, Abscissae, GridSpec, VerdictClass};
use crate::error::{domain, Result};
use crate::evaluators::{Method, MethodParams};
use crate::exact::{format_ratio, gcd_u32, parse_rational, rat, rat_int};
use crate::expr::TailExpr;
use crate::index_set::{IndexSet, Parity};
use crate::lacunary::LacunarySequence;
use crate::model::{Defaults, Scenario, TailModel};

/// Corpus names accepted by [`entry`].
pub const NAMES: [&str; 7] = [
    "ex-2.1",
    "thm-2.3-ex",
    "ex-2.2",
    "ex-3.1-lim0",
    "ex-3.1-lim1",
    "thm-3.2-ex",
    "thm-3.3-ex",
];

/// One expected verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub method: Method,
    pub params: MethodParams,
    pub expected: VerdictClass,
    /// Sampling points; `None` means the default grid or block window.
    pub abscissae: Option<Abscissae>,
    /// Lacunary sequence for the block methods; `None` means the scenario's own.
    pub theta: Option<LacunarySequence>,
    pub claim: String,
}

impl Expectation {
    pub fn abscissae(&self) -> Abscissae {
        self.abscissae.clone().unwrap_or_else(|| {
            if self.method.is_lacunary() {
                Abscissae::Blocks(default_blocks())
            } else {
                Abscissae::Grid(GridSpec::default())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub scenario: Scenario,
    pub expectations: Vec<Expectation>,
    pub provenance: String,
    /// The closed-form tails are valid only for `eps <= eps_max`.
    pub eps_max: Option<BigRational>,
}

impl CorpusEntry {
    pub fn name(&self) -> &str {
        &self.scenario.name
    }

    /// Refuses `eps` outside the range where the entry's tails were derived.
    pub fn check_eps(&self, eps: &BigRational) -> Result<()> {
        match &self.eps_max {
            Some(max) if eps > max => Err(domain(format!(
                "scenario {} is defined only for eps <= {}",
                self.name(),
                format_ratio(max)
            ))),
            _ => Ok(()),
        }
    }
}

fn half() -> BigRational {
    rat(1, 2)
}

fn params(alpha: BigRational, p: BigRational) -> MethodParams {
    MethodParams::new(alpha, half(), half(), p).expect("corpus parameters are valid")
}

fn expect(
    method: Method,
    params: MethodParams,
    expected: VerdictClass,
    claim: impl Into<String>,
) -> Expectation {
    Expectation {
        method,
        params,
        expected,
        abscissae: None,
        theta: None,
        claim: claim.into(),
    }
}

fn defaults(p: Option<BigRational>) -> Defaults {
    Defaults {
        alpha: None,
        p,
        eps: Some(half()),
        delta: Some(half()),
    }
}

fn check_floor_power(s: u32, r: u32) -> Result<()> {
    if !(s > r && r >= 1) || gcd_u32(s, r) != 1 {
        return Err(domain(format!(
            "need s > r >= 1 with gcd(s, r) = 1, got s={s}, r={r}"
        )));
    }
    Ok(())
}

/// Orders just below and above `r/s`, clipped to `(0, 1]`.
fn orders_around(center: &BigRational) -> (Option<BigRational>, BigRational) {
    let step = rat(1, 10);
    let below = center - &step;
    let above = (center + &step).min(BigRational::one());
    (below.is_positive().then_some(below), above)
}

/// `X_n` uniform on `(0, 1)` on `n = floor(m^(s/r))`, else concentrated near 2:
/// tail 1 on the floor-power set and `(1 - eps/2)^k` elsewhere.
pub fn example_2_1(s: u32, r: u32) -> Result<CorpusEntry> {
    check_floor_power(s, r)?;
    let model = TailModel::piecewise(
        "2",
        IndexSet::FloorPower { s, r },
        TailExpr::int(1),
        TailExpr::pow(
            TailExpr::int(1) - TailExpr::eps() / TailExpr::int(2),
            TailExpr::k(),
        ),
        true,
    );
    let center = rat(i64::from(r), i64::from(s));
    let (below, above) = orders_around(&center);
    let mut expectations = vec![
        expect(
            Method::Ps,
            params(above.clone(), BigRational::one()),
            VerdictClass::ConvergesToZero,
            format!("PS of order {} > r/s holds", format_ratio(&above)),
        ),
        expect(
            Method::Ps,
            params(BigRational::one(), BigRational::one()),
            VerdictClass::ConvergesToZero,
            "PS of order 1 holds",
        ),
    ];
    if let Some(b) = below {
        expectations.push(expect(
            Method::Ps,
            params(b.clone(), BigRational::one()),
            VerdictClass::FailsToConverge,
            format!("PS of order {} < r/s fails", format_ratio(&b)),
        ));
    }
    let mut scenario = Scenario::new("ex-2.1", model);
    scenario.defaults = defaults(None);
    Ok(CorpusEntry {
        scenario,
        expectations,
        provenance: format!(
            "floor-power counterexample: the set {{floor(m^({s}/{r}))}} has order-{} density",
            format_ratio(&center)
        ),
        eps_max: Some(BigRational::one()),
    })
}

/// Floor-power set with tail 1, elsewhere `P(X_n = 1) = n^(-2/p)`, so that
/// `tail^p = 1/k^2` has bounded partial sums.
pub fn theorem_2_3_example(s: u32, r: u32, p: BigRational) -> Result<CorpusEntry> {
    check_floor_power(s, r)?;
    if !p.is_positive() {
        return Err(domain("p must be positive"));
    }
    let exponent = -(rat_int(2) / &p);
    let model = TailModel::piecewise(
        "0",
        IndexSet::FloorPower { s, r },
        TailExpr::int(1),
        TailExpr::pow(TailExpr::k(), TailExpr::rational(exponent)),
        true,
    );
    let center = rat(i64::from(r), i64::from(s));
    let (below, above) = orders_around(&center);
    let mut expectations = vec![expect(
        Method::Pw,
        params(above.clone(), p.clone()),
        VerdictClass::ConvergesToZero,
        format!("PW_p of order {} > r/s holds", format_ratio(&above)),
    )];
    if let Some(b) = below {
        expectations.push(expect(
            Method::Pw,
            params(b.clone(), p.clone()),
            VerdictClass::FailsToConverge,
            format!("PW_p of order {} < r/s fails", format_ratio(&b)),
        ));
    }
    let mut scenario = Scenario::new("thm-2.3-ex", model);
    scenario.defaults = defaults(Some(p.clone()));
    Ok(CorpusEntry {
        scenario,
        expectations,
        provenance: format!(
            "floor-power set ({s}, {r}) with off-set tails whose p-th powers are 1/k^2 (p = {})",
            format_ratio(&p)
        ),
        eps_max: Some(BigRational::one()),
    })
}

/// Self-power set `{m^m}` with tail 1, elsewhere `P(X_n = 1) = n^(-1/(2p))`.
pub fn example_2_2(p: BigRational) -> Result<CorpusEntry> {
    if !p.is_positive() {
        return Err(domain("p must be positive"));
    }
    let exponent = -(BigRational::one() / (rat_int(2) * &p));
    let model = TailModel::piecewise(
        "0",
        IndexSet::SelfPower,
        TailExpr::int(1),
        TailExpr::pow(TailExpr::k(), TailExpr::rational(exponent)),
        true,
    );
    let mut expectations = Vec::new();
    for a in [rat(3, 10), rat(1, 2), rat(4, 5), rat_int(1)] {
        expectations.push(expect(
            Method::Ps,
            params(a.clone(), p.clone()),
            VerdictClass::ConvergesToZero,
            format!("PS of order {} holds", format_ratio(&a)),
        ));
    }
    for a in [rat(3, 10), rat(1, 2)] {
        expectations.push(expect(
            Method::Pw,
            params(a.clone(), p.clone()),
            VerdictClass::FailsToConverge,
            format!("PW_p of order {} <= 1/2 fails", format_ratio(&a)),
        ));
    }
    expectations.push(expect(
        Method::Pw,
        params(BigRational::one(), p.clone()),
        VerdictClass::ConvergesToZero,
        "PW_p of order 1 holds",
    ));
    let mut scenario = Scenario::new("ex-2.2", model);
    scenario.defaults = defaults(Some(p.clone()));
    Ok(CorpusEntry {
        scenario,
        expectations,
        provenance: format!(
            "self-power set with off-set tails n^(-1/(2p)), p = {}: statistically null at every order but not Cesàro summable at orders up to 1/2",
            format_ratio(&p)
        ),
        eps_max: Some(BigRational::one()),
    })
}

/// The factorial-parity sequence against its two candidate limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Example31 {
    pub lim0: CorpusEntry,
    pub lim1: CorpusEntry,
    pub theta1: LacunarySequence,
    pub theta2: LacunarySequence,
}

fn blocks_2_to_8() -> Option<Abscissae> {
    Some(Abscissae::Blocks((2..=8).collect()))
}

/// `G(n) = g` for `g! < n <= (g+1)!`. For even `G(n)`, `X_n` is `-1` with
/// probability `1/n` and `1` otherwise; for odd `G(n)`, `X_n` is `1` with
/// probability `1/n` and `0` otherwise.
pub fn example_3_1() -> Example31 {
    let theta1 = LacunarySequence::FactorialEven;
    let theta2 = LacunarySequence::FactorialOdd;
    let inv = || TailExpr::int(1) / TailExpr::k();
    let block_expect = |theta: &LacunarySequence, expected, claim: &str| Expectation {
        method: Method::STheta,
        params: params(BigRational::one(), BigRational::one()),
        expected,
        abscissae: blocks_2_to_8(),
        theta: Some(theta.clone()),
        claim: claim.into(),
    };
    let lim0 = CorpusEntry {
        scenario: Scenario {
            name: "ex-3.1-lim0".into(),
            model: TailModel::piecewise(
                "0",
                IndexSet::FactorialParity(Parity::Even),
                TailExpr::int(1),
                inv(),
                true,
            ),
            theta: Some(theta1.clone()),
            defaults: defaults(None),
        },
        expectations: vec![
            block_expect(
                &theta1,
                VerdictClass::ConvergesToZero,
                "S_theta1 limit 0 holds",
            ),
            block_expect(
                &theta2,
                VerdictClass::FailsToConverge,
                "S_theta2 limit 0 fails",
            ),
        ],
        provenance: "factorial-parity sequence measured against the limit 0".into(),
        eps_max: Some(BigRational::one()),
    };
    let lim1 = CorpusEntry {
        scenario: Scenario {
            name: "ex-3.1-lim1".into(),
            model: TailModel::piecewise(
                "1",
                IndexSet::FactorialParity(Parity::Odd),
                TailExpr::int(1) - inv(),
                inv(),
                true,
            ),
            theta: Some(theta2.clone()),
            defaults: defaults(None),
        },
        expectations: vec![
            block_expect(
                &theta2,
                VerdictClass::ConvergesToZero,
                "S_theta2 limit 1 holds",
            ),
            block_expect(
                &theta1,
                VerdictClass::FailsToConverge,
                "S_theta1 limit 1 fails",
            ),
        ],
        provenance: "factorial-parity sequence measured against the limit 1".into(),
        eps_max: Some(BigRational::one()),
    };
    Example31 {
        lim0,
        lim1,
        theta1,
        theta2,
    }
}

/// Tail 1 on the first `floor(h_r^c)` indices of every block, `1/k` elsewhere.
pub fn theorem_3_2_example(c: BigRational, theta: LacunarySequence) -> Result<CorpusEntry> {
    if !(c.is_positive() && c < BigRational::one()) {
        return Err(domain(format!(
            "c must lie in (0, 1), got {}",
            format_ratio(&c)
        )));
    }
    theta.validate()?;
    let set = IndexSet::BlockPrefix {
        theta: theta.clone(),
        c: c.clone(),
    };
    set.validate()?;
    let model = TailModel::piecewise(
        "0",
        set,
        TailExpr::int(1),
        TailExpr::int(1) / TailExpr::k(),
        true,
    );
    let step = rat(1, 5);
    let above = (&c + &step).min(BigRational::one());
    let below = &c - &step;
    let mut expectations = vec![expect(
        Method::STheta,
        params(above.clone(), BigRational::one()),
        VerdictClass::ConvergesToZero,
        format!("S_theta of order {} > c holds", format_ratio(&above)),
    )];
    if below.is_positive() {
        expectations.push(expect(
            Method::NTheta,
            params(below.clone(), BigRational::one()),
            VerdictClass::FailsToConverge,
            format!("N_theta of order {} < c fails", format_ratio(&below)),
        ));
    }
    let mut scenario = Scenario::new("thm-3.2-ex", model).with_theta(theta.clone());
    scenario.defaults = defaults(None);
    Ok(CorpusEntry {
        scenario,
        expectations,
        provenance: format!(
            "block-prefix construction on {theta} with exponent c = {}",
            format_ratio(&c)
        ),
        eps_max: Some(BigRational::one()),
    })
}

/// Tail 1 on the ratio-controlled blocks `(a_j, b_j]`, `1/k^2` elsewhere.
pub fn theorem_3_3_example(j_max: u32) -> Result<(CorpusEntry, LacunarySequence)> {
    if j_max < 2 {
        return Err(domain("j_max must be at least 2"));
    }
    let theta = LacunarySequence::RatioControlled(j_max);
    let model = TailModel::piecewise(
        "0",
        IndexSet::RatioBlocks { j_max },
        TailExpr::int(1),
        TailExpr::pow(TailExpr::k(), TailExpr::int(-2)),
        true,
    );
    let blocks = Some(Abscissae::Blocks(ratio_pair_blocks(j_max)));
    let mut expectations = vec![expect(
        Method::Ps,
        params(BigRational::one(), BigRational::one()),
        VerdictClass::ConvergesToZero,
        "PS of order 1 holds",
    )];
    for beta in [rat(1, 2), rat_int(1)] {
        expectations.push(Expectation {
            abscissae: blocks.clone(),
            ..expect(
                Method::STheta,
                params(beta.clone(), BigRational::one()),
                VerdictClass::FailsToConverge,
                format!(
                    "S_theta of order {} fails on the blocks (a_j, b_j]",
                    format_ratio(&beta)
                ),
            )
        });
    }
    let mut scenario = Scenario::new("thm-3.3-ex", model).with_theta(theta.clone());
    scenario.defaults = defaults(None);
    Ok((
        CorpusEntry {
            scenario,
            expectations,
            provenance: format!(
                "ratio-controlled blocks up to j = {j_max}: q_r dips below 1 + 1/j"
            ),
            eps_max: Some(BigRational::one()),
        },
        theta,
    ))
}

fn take<'a>(
    overrides: &'a [(String, String)],
    allowed: &[&str],
) -> Result<Vec<(&'a str, &'a str)>> {
    overrides
        .iter()
        .map(|(k, v)| {
            if allowed.contains(&k.as_str()) {
                Ok((k.as_str(), v.as_str()))
            } else if allowed.is_empty() {
                Err(domain(format!(
                    "this corpus entry takes no parameters, got `{k}`"
                )))
            } else {
                Err(domain(format!(
                    "unknown parameter `{k}` (expected one of {})",
                    allowed.join(", ")
                )))
            }
        })
        .collect()
}

fn parse_u32(key: &str, v: &str) -> Result<u32> {
    v.trim().parse().map_err(|_| {
        domain(format!(
            "parameter {key} must be a nonnegative integer, got `{v}`"
        ))
    })
}

/// Looks up a corpus entry by name with `key=value` parameter overrides.
pub fn entry(name: &str, overrides: &[(String, String)]) -> Result<CorpusEntry> {
    match name {
        "ex-2.1" => {
            let (mut s, mut r) = (2, 1);
            for (k, v) in take(overrides, &["s", "r"])? {
                match k {
                    "s" => s = parse_u32(k, v)?,
                    _ => r = parse_u32(k, v)?,
                }
            }
            example_2_1(s, r)
        }
        "thm-2.3-ex" => {
            let (mut s, mut r, mut p) = (2, 1, BigRational::one());
            for (k, v) in take(overrides, &["s", "r", "p"])? {
                match k {
                    "s" => s = parse_u32(k, v)?,
                    "r" => r = parse_u32(k, v)?,
                    _ => p = parse_rational(v)?,
                }
            }
            theorem_2_3_example(s, r, p)
        }
        "ex-2.2" => {
            let mut p = BigRational::one();
            for (_, v) in take(overrides, &["p"])? {
                p = parse_rational(v)?;
            }
            example_2_2(p)
        }
        "ex-3.1-lim0" => {
            take(overrides, &[])?;
            Ok(example_3_1().lim0)
        }
        "ex-3.1-lim1" => {
            take(overrides, &[])?;
            Ok(example_3_1().lim1)
        }
        "thm-3.2-ex" => {
            let (mut c, mut theta) = (half(), LacunarySequence::Powers(2));
            for (k, v) in take(overrides, &["c", "theta"])? {
                match k {
                    "c" => c = parse_rational(v)?,
                    _ => theta = v.parse()?,
                }
            }
            theorem_3_2_example(c, theta)
        }
        "thm-3.3-ex" => {
            let mut j = 8;
            for (k, v) in take(overrides, &["j_max"])? {
                j = parse_u32(k, v)?;
            }
            Ok(theorem_3_3_example(j)?.0)
        }
        other => Err(domain(format!(
            "unknown corpus entry `{other}` (known: {})",
            NAMES.join(", ")
        ))),
    }
}

/// Every corpus entry with default parameters, in [`NAMES`] order.
pub fn default_entries() -> Vec<CorpusEntry> {
    NAMES
        .iter()
        .map(|n| entry(n, &[]).expect("defaults are valid"))
        .collect()
}

/// `P(|X - Y| >= eps0) >= delta0` for the two candidate limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub eps0: BigRational,
    pub delta0: BigRational,
}

impl Separation {
    pub fn is_degenerate(&self) -> bool {
        self.eps0.is_zero() || self.delta0.is_zero()
    }
}

/// One sequence measured against two candidate limits.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessPair {
    pub sequence: String,
    pub limit_a: Scenario,
    pub limit_b: Scenario,
    pub separation: Option<Separation>,
}

/// The factorial-parity sequence against 0 and against 1; `|0 - 1| = 1` surely.
pub fn example_3_1_pair() -> UniquenessPair {
    let ex = example_3_1();
    UniquenessPair {
        sequence: "ex-3.1".into(),
        limit_a: ex.lim0.scenario,
        limit_b: ex.lim1.scenario,
        separation: Some(Separation {
            eps0: BigRational::one(),
            delta0: BigRational::one(),
        }),
    }
}

/// `X_k = X` against `X` twice: no separation, so not a uniqueness instance.
pub fn zero_pair() -> UniquenessPair {
    let zero = Scenario::new("zero", TailModel::zero());
    UniquenessPair {
        sequence: "zero".into(),
        limit_a: zero.clone(),
        limit_b: zero,
        separation: Some(Separation {
            eps0: BigRational::zero(),
            delta0: BigRational::zero(),
        }),
    }
}

/// `b_j / a_j < 1 + 1/j` and `a_{j+1} / b_j > j + 1` for `j <= j_max`, exactly.
pub fn audit_ratio_construction(j_max: u32) -> Vec<String> {
    let mut failures = Vec::new();
    let mut prev_b: Option<BigUint> = None;
    for j in 1..=j_max {
        let (a, b) = crate::lacunary::ratio_pair(j);
        let jj = BigUint::from(j);
        if &jj * &b >= (&jj + 1u32) * &a {
            failures.push(format!("b_{j}/a_{j} = {b}/{a} is not below 1 + 1/{j}"));
        }
        if let Some(pb) = prev_b {
            // a_j / b_{j-1} > j
            if a <= &jj * &pb {
                failures.push(format!("a_{j}/b_{} = {a}/{pb} is not above {j}", j - 1));
            }
        }
        prev_b = Some(b);
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        let all = default_entries();
        assert_eq!(all.len(), NAMES.len());
        for (e, n) in all.iter().zip(NAMES) {
            assert_eq!(e.name(), n);
            assert!(!e.expectations.is_empty());
        }
    }

    #[test]
    fn overrides() {
        let e = entry(
            "ex-2.1",
            &[("s".into(), "3".into()), ("r".into(), "2".into())],
        )
        .unwrap();
        assert_eq!(
            e.scenario.model.as_piecewise().unwrap().on_set,
            IndexSet::FloorPower { s: 3, r: 2 }
        );
        assert!(entry("ex-2.1", &[("s".into(), "1".into())]).is_err());
        assert!(entry("ex-2.1", &[("q".into(), "1".into())]).is_err());
        assert!(entry("ex-3.1-lim0", &[("s".into(), "1".into())]).is_err());
        assert!(entry("nope", &[]).is_err());
        let t = entry("thm-3.2-ex", &[("theta".into(), "pow:3".into())]).unwrap();
        assert_eq!(t.scenario.theta, Some(LacunarySequence::Powers(3)));
    }

    #[test]
    fn generator_preconditions() {
        assert!(example_2_1(1, 1).is_err());
        assert!(example_2_1(4, 2).is_err());
        assert!(example_2_2(rat_int(0)).is_err());
        assert!(theorem_3_2_example(rat_int(1), LacunarySequence::Powers(2)).is_err());
        assert!(theorem_3_3_example(1).is_err());
    }

    #[test]
    fn ratio_construction_audit_is_clean() {
        assert!(audit_ratio_construction(12).is_empty());
    }

    #[test]
    fn eps_range_is_enforced() {
        let e = example_2_1(2, 1).unwrap();
        assert!(e.check_eps(&rat_int(1)).is_ok());
        assert!(e.check_eps(&rat(3, 2)).is_err());
    }
}
