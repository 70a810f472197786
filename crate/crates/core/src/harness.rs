//! Finite-scale checks of the inclusion, strictness and uniqueness results.
//!
//! Every check works at two levels. The exact inequality behind each
//! inclusion is audited pointwise on a parameter grid, and the verdict-level
//! implication is tested on the default sampling grid. A failing check carries
//! [`Witness`]es whose probes can be re-run with [`Harness::replay`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::corpus::{self, CorpusEntry, Expectation, Separation, UniquenessPair};
use crate::diagnostics::{
    classify_default, default_blocks, liminf_q, sample_profile, verdict_blocks, Abscissae,
    DensityProfile, Gap, GridSpec, Sample, VerdictClass,
};
use crate::error::{Error, Result};
use crate::evaluators::{Caps, Evaluator, Method, MethodParams, QualifyingCounter};
use crate::exact::{format_ratio, rat, rat_int, ratio_to_f64};
use crate::lacunary::LacunarySequence;
use crate::model::{scale_model, sum_bound_model, Scenario, TailModel};
use crate::scalar::big_pow;

/// Relative tolerance of the floating-point inequality audits.
pub const INEQUALITY_TOL: f64 = 1e-9;

pub const INCLUSION_IDS: [&str; 9] = [
    "thm-2.4",
    "note-2.1",
    "thm-2.5",
    "thm-2.2iv",
    "thm-2.3i",
    "thm-2.3ii",
    "thm-3.2",
    "thm-2.2ii",
    "thm-2.2iii",
];
pub const STRICTNESS_IDS: [&str; 7] = [
    "ex-2.1",
    "rem-2.1",
    "thm-2.3-ex",
    "ex-2.2",
    "thm-3.2-ex",
    "thm-3.3-ex",
    "ex-3.1",
];
pub const UNIQUENESS_IDS: [&str; 3] = ["thm-2.2i", "thm-3.1", "thm-3.4"];
pub const THEOREM_3_3_IDS: [&str; 2] = ["thm-3.3-forward", "thm-3.3-converse"];

/// All check ids in report order.
pub fn check_ids() -> Vec<&'static str> {
    INCLUSION_IDS
        .iter()
        .chain(&STRICTNESS_IDS)
        .chain(&UNIQUENESS_IDS)
        .chain(&THEOREM_3_3_IDS)
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    /// The check's hypotheses do not apply to any input.
    Skipped,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pointwise inequality `lhs <= rhs` (or `lhs == rhs`) between functionals.
#[derive(Debug, Clone, PartialEq)]
pub enum Relation {
    /// `delta^p * S^alpha(n) <= W_p^alpha(n)`.
    CesaroDominatesDensity,
    /// `W_p^1(n) <= S^1(n) + delta^p`.
    DensityBoundsCesaro,
    /// `S^beta(n) <= S^alpha(n)`.
    DensityOrder { beta: BigRational },
    /// `W_p^beta(n) <= W_p^alpha(n)`.
    CesaroOrder { beta: BigRational },
    /// `W_p^1(n) <= W_q^1(n)^(p/q)`.
    Holder { q: BigRational },
    /// `delta * S_theta^alpha(r) <= N_theta^alpha(r)`.
    BlockMeanDominatesDensity { theta: LacunarySequence },
    /// `count_{X+Y}(eps, delta) <= count_X(eps/2, delta/2) + count_Y(eps/2, delta/2)`.
    SumCover { other: Box<Scenario> },
    /// `count_{cX}(eps, delta) == count_X(eps/|c|, delta)`.
    ScaleIdentity { c: BigRational },
    /// `n <= count_A(n) + count_B(n)` at the parameters given.
    SeparationCover { other: Box<Scenario> },
}

impl Relation {
    fn name(&self) -> String {
        match self {
            Relation::CesaroDominatesDensity => "delta^p*S <= W_p".into(),
            Relation::DensityBoundsCesaro => "W_p <= S + delta^p".into(),
            Relation::DensityOrder { beta } => format!("S^{} <= S^alpha", format_ratio(beta)),
            Relation::CesaroOrder { beta } => format!("W^{} <= W^alpha", format_ratio(beta)),
            Relation::Holder { q } => format!("W_p <= W_{}^(p/q)", format_ratio(q)),
            Relation::BlockMeanDominatesDensity { theta } => {
                format!("delta*S_theta <= N_theta on {theta}")
            }
            Relation::SumCover { other } => format!("sum cover with {}", other.name),
            Relation::ScaleIdentity { c } => format!("scale identity c={}", format_ratio(c)),
            Relation::SeparationCover { other } => format!("separation cover with {}", other.name),
        }
    }
}

/// One deterministic computation whose result a witness records.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Inequality {
        relation: Relation,
        scenario: Scenario,
        params: MethodParams,
        /// `n`, or the block index `r` for block relations.
        at: u64,
    },
    Verdict {
        scenario: Scenario,
        method: Method,
        params: MethodParams,
        abscissae: Abscissae,
        theta: Option<LacunarySequence>,
    },
}

fn params_text(p: &MethodParams) -> String {
    format!(
        "alpha={} eps={} delta={} p={}",
        format_ratio(&p.alpha),
        format_ratio(&p.eps),
        format_ratio(&p.delta),
        format_ratio(&p.p)
    )
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Inequality {
                relation,
                scenario,
                params,
                at,
            } => write!(
                f,
                "inequality [{}] scenario={} at={at} {}",
                relation.name(),
                scenario.name,
                params_text(params)
            ),
            Probe::Verdict {
                scenario,
                method,
                params,
                abscissae,
                theta,
            } => {
                write!(
                    f,
                    "verdict method={method} scenario={} {}",
                    scenario.name,
                    params_text(params)
                )?;
                if let Some(t) = theta {
                    write!(f, " theta={t}")?;
                }
                match abscissae {
                    Abscissae::Grid(g) => {
                        write!(f, " grid={}:{}:{}", g.n0, format_ratio(&g.ratio), g.points)
                    }
                    Abscissae::Blocks(b) => write!(f, " blocks={b:?}"),
                }
            }
        }
    }
}

/// Everything needed to reproduce one failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub reason: String,
    pub probes: Vec<Probe>,
    /// What each probe produced when the failure was recorded.
    pub observed: Vec<String>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reason)?;
        for (p, o) in self.probes.iter().zip(&self.observed) {
            write!(f, "\n    {p} -> {o}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: String,
    pub scenarios: Vec<String>,
    pub grid: String,
    pub outcome: Outcome,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    /// Number of inequality points and verdict implications examined.
    pub probes: usize,
    /// Implications whose premise converged on the window without settling.
    pub unsettled: usize,
    /// Implications left undetermined because a profile hit an enumeration cap.
    pub capped: usize,
    pub runtime: Duration,
}

impl CheckReport {
    fn new(id: &str, grid: impl Into<String>) -> Self {
        CheckReport {
            id: id.into(),
            scenarios: Vec::new(),
            grid: grid.into(),
            outcome: Outcome::Skipped,
            witnesses: Vec::new(),
            notes: Vec::new(),
            probes: 0,
            unsettled: 0,
            capped: 0,
            runtime: Duration::ZERO,
        }
    }

    fn scenario(&mut self, name: &str) {
        if !self.scenarios.iter().any(|s| s == name) {
            self.scenarios.push(name.to_string());
        }
    }

    fn ran(&mut self) {
        self.probes += 1;
        if self.outcome == Outcome::Skipped {
            self.outcome = Outcome::Pass;
        }
    }

    fn fail(&mut self, w: Witness) {
        self.outcome = Outcome::Fail;
        self.witnesses.push(w);
    }

    fn finish(mut self, start: Instant) -> Self {
        self.runtime = start.elapsed();
        if self.unsettled > 0 {
            self.notes.push(format!(
                "{} implication(s) vacuous: premise profile had not settled on the window",
                self.unsettled
            ));
        }
        if self.capped > 0 {
            self.notes.push(format!(
                "{} implication(s) undetermined: a profile hit the enumeration cap",
                self.capped
            ));
        }
        self
    }

    /// Report body without the runtime, so that it is reproducible.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{} {} probes={} scenarios={} grid={}",
            self.id,
            self.outcome,
            self.probes,
            self.scenarios.join(","),
            self.grid
        );
        for n in &self.notes {
            out.push_str(&format!("\n  note: {n}"));
        }
        for w in &self.witnesses {
            out.push_str(&format!("\n  witness: {w}"));
        }
        out
    }
}

/// Parameter grid for the inequality audits.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub n: Vec<u64>,
    /// `n` values for relations that need enumeration.
    pub n_enumerated: Vec<u64>,
    pub blocks: Vec<u64>,
    pub eps: Vec<BigRational>,
    pub delta: Vec<BigRational>,
    pub p: Vec<BigRational>,
    pub orders: Vec<BigRational>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            n: (0..=10).map(|j| 1000u64 << j).collect(),
            n_enumerated: (0..=7).map(|j| 1000u64 << j).collect(),
            blocks: default_blocks(),
            eps: vec![rat(1, 4), rat(1, 2), rat_int(1)],
            delta: vec![rat(1, 4), rat(1, 2), rat(3, 4)],
            p: vec![rat(1, 2), rat_int(1), rat_int(2)],
            orders: vec![rat(3, 10), rat(1, 2), rat(3, 5), rat_int(1)],
        }
    }
}

impl ParamGrid {
    fn describe(&self) -> String {
        let list = |v: &[BigRational]| v.iter().map(format_ratio).collect::<Vec<_>>().join(",");
        format!(
            "n={}..{} eps={{{}}} delta={{{}}} p={{{}}} orders={{{}}}",
            self.n.first().copied().unwrap_or(0),
            self.n.last().copied().unwrap_or(0),
            list(&self.eps),
            list(&self.delta),
            list(&self.p),
            list(&self.orders)
        )
    }
}

/// The window over which `liminf q_r` is approximated.
pub const LIMINF_WINDOW: (u64, u64) = (2, 8);
/// A finite window minimum always exceeds 1; the guard asks for this margin.
pub fn liminf_margin() -> BigRational {
    rat(9, 8)
}

/// Whether the ratio condition is treated as satisfied by `theta` over `window`.
pub fn liminf_guard(theta: &LacunarySequence, window: (u64, u64)) -> Result<(bool, BigRational)> {
    let q = liminf_q(theta, window.0, window.1)?;
    Ok((q > liminf_margin(), q))
}

type Observation = std::result::Result<(f64, f64, bool), String>;

#[derive(Debug, Clone)]
struct Observed {
    text: String,
    class: Option<VerdictClass>,
    /// The trailing third of the profile stays below 1 and below the peak of
    /// the leading third.
    settled: bool,
    /// Some abscissae were dropped because they exceeded an enumeration cap.
    capped: bool,
}

/// Cached `(n, partial sum)` pairs of one Cesàro series.
type CesaroSeries = Rc<Vec<(u64, f64)>>;

pub struct Harness {
    pub evaluator: Evaluator,
    pub grid: ParamGrid,
    pub verdict_grid: GridSpec,
    cesaro: RefCell<HashMap<String, CesaroSeries>>,
    blocks: RefCell<HashMap<String, Option<f64>>>,
    counts: RefCell<HashMap<String, HashMap<u64, BigUint>>>,
    verdicts: RefCell<HashMap<String, Observed>>,
}

impl Default for Harness {
    fn default() -> Self {
        Harness::new(Caps::default())
    }
}

fn half() -> BigRational {
    rat(1, 2)
}

fn verdict_params(alpha: BigRational, p: BigRational) -> MethodParams {
    MethodParams::new(alpha, half(), half(), p).expect("valid")
}

fn default_p(s: &Scenario) -> BigRational {
    s.defaults.p.clone().unwrap_or_else(BigRational::one)
}

fn pow_f(n: u64, a: &BigRational) -> f64 {
    big_pow::<f64>(&BigUint::from(n), a)
}

fn holds_approx(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQUALITY_TOL * lhs.abs().max(rhs.abs())
}

fn cap_error(e: &Error) -> bool {
    matches!(e, Error::EnumerationCapExceeded { .. })
}

impl Harness {
    pub fn new(caps: Caps) -> Self {
        Harness {
            evaluator: Evaluator::new(caps),
            grid: ParamGrid::default(),
            verdict_grid: GridSpec::default(),
            cesaro: RefCell::new(HashMap::new()),
            blocks: RefCell::new(HashMap::new()),
            counts: RefCell::new(HashMap::new()),
            verdicts: RefCell::new(HashMap::new()),
        }
    }

    /// Runs one check by id on the default corpus.
    pub fn run(&self, id: &str) -> Result<CheckReport> {
        if INCLUSION_IDS.contains(&id) {
            let entries = corpus::default_entries();
            let grid = self.grid.clone();
            return self.check_inclusion(id, &entries, &grid);
        }
        if STRICTNESS_IDS.contains(&id) {
            return self.check_strictness(id);
        }
        let start = Instant::now();
        match id {
            "thm-2.2i" | "thm-3.1" => {
                let pair = corpus::example_3_1_pair();
                let ex = corpus::example_3_1();
                let one = verdict_params(BigRational::one(), BigRational::one());
                let runs: Vec<(Method, Option<LacunarySequence>)> = if id == "thm-2.2i" {
                    vec![(Method::Ps, None), (Method::Pw, None)]
                } else {
                    let mut v = Vec::new();
                    for m in [Method::STheta, Method::NTheta] {
                        for t in [&ex.theta1, &ex.theta2] {
                            v.push((m, Some(t.clone())));
                        }
                    }
                    v
                };
                let mut report = CheckReport::new(id, "default sampling grid");
                for (m, t) in runs {
                    let sub = self.check_uniqueness(&pair, m, &one, t.as_ref())?;
                    merge(&mut report, sub);
                }
                let sub = self.check_uniqueness(&corpus::zero_pair(), Method::Ps, &one, None)?;
                merge(&mut report, sub);
                Ok(report.finish(start))
            }
            "thm-3.4" => self.check_theorem_3_4(&corpus::example_3_1_pair()),
            "thm-3.3-forward" => self.check_theorem_3_3(true),
            "thm-3.3-converse" => self.check_theorem_3_3(false),
            other => Err(Error::UnknownCheckId(other.to_string())),
        }
    }

    /// Every check, in [`check_ids`] order.
    pub fn run_all(&self) -> Result<Vec<CheckReport>> {
        check_ids().into_iter().map(|id| self.run(id)).collect()
    }

    fn entry_grid(&self, entry: &CorpusEntry) -> Vec<BigRational> {
        self.grid
            .eps
            .iter()
            .filter(|e| entry.check_eps(e).is_ok())
            .cloned()
            .collect()
    }

    fn cesaro_raw(
        &self,
        model: &TailModel,
        n: u64,
        eps: &BigRational,
        p: &BigRational,
    ) -> Result<f64> {
        let key = format!("{model:?}|{}|{}", format_ratio(eps), format_ratio(p));
        let cached = self.cesaro.borrow().get(&key).cloned();
        let table = match cached {
            Some(t) => t,
            None => {
                let mut ns: Vec<u64> = self.grid.n.clone();
                ns.extend(self.verdict_grid.abscissae()?);
                ns.sort_unstable();
                ns.dedup();
                // Past the enumeration cap only the points below it are tabulated.
                let mut table = Vec::new();
                while !ns.is_empty() {
                    match self
                        .evaluator
                        .cesaro_partial_sums::<f64>(model, &ns, eps, p)
                    {
                        Ok(sums) => {
                            table = ns.into_iter().zip(sums).collect();
                            break;
                        }
                        Err(e) if cap_error(&e) => {
                            ns.pop();
                        }
                        Err(e) => return Err(e),
                    }
                }
                let t = Rc::new(table);
                self.cesaro.borrow_mut().insert(key, t.clone());
                t
            }
        };
        match table.binary_search_by_key(&n, |e| e.0) {
            Ok(i) => Ok(table[i].1),
            Err(_) => Ok(self
                .evaluator
                .cesaro_partial_sums::<f64>(model, &[n], eps, p)?[0]),
        }
    }

    /// [`Evaluator::block_tail_sum`], remembering results and cap failures.
    fn block_sum(
        &self,
        model: &TailModel,
        theta: &LacunarySequence,
        r: u64,
        eps: &BigRational,
    ) -> Result<f64> {
        let key = format!("{model:?}|{theta}|{r}|{}", format_ratio(eps));
        if let Some(v) = self.blocks.borrow().get(&key) {
            return v.ok_or_else(|| Error::EnumerationCapExceeded {
                what: "block summation",
                needed: format!("block {r}"),
                cap: self.evaluator.caps.block,
            });
        }
        let v = self.evaluator.block_tail_sum(model, theta, r, eps);
        match &v {
            Ok(x) => {
                self.blocks.borrow_mut().insert(key, Some(*x));
            }
            Err(e) if cap_error(e) => {
                self.blocks.borrow_mut().insert(key, None);
            }
            Err(_) => {}
        }
        v
    }

    fn cesaro_w(
        &self,
        model: &TailModel,
        n: u64,
        eps: &BigRational,
        p: &BigRational,
        alpha: &BigRational,
    ) -> Result<f64> {
        Ok(self.cesaro_raw(model, n, eps, p)? / pow_f(n, alpha))
    }

    fn density(
        &self,
        model: &TailModel,
        n: u64,
        eps: &BigRational,
        delta: &BigRational,
        alpha: &BigRational,
    ) -> Result<f64> {
        let params = MethodParams::new(
            alpha.clone(),
            eps.clone(),
            delta.clone(),
            BigRational::one(),
        )?;
        self.evaluator
            .ps_density::<f64>(model, &BigUint::from(n), &params)
    }

    fn count(
        &self,
        model: &TailModel,
        n: u64,
        eps: &BigRational,
        delta: &BigRational,
    ) -> Result<BigUint> {
        let key = format!("{model:?}|{eps}|{delta}");
        if let Some(c) = self.counts.borrow().get(&key).and_then(|m| m.get(&n)) {
            return Ok(c.clone());
        }
        let counter = QualifyingCounter::new(model, eps, delta, self.evaluator.caps)?;
        if counter.is_closed_form() {
            return counter.count(&BigUint::from(n));
        }
        let top = self.grid.n_enumerated.iter().copied().fold(n, u64::max);
        let mut ns: Vec<u64> = self
            .grid
            .n
            .iter()
            .chain(&self.grid.n_enumerated)
            .copied()
            .filter(|&m| m <= top)
            .chain([n])
            .collect();
        ns.sort_unstable();
        ns.dedup();
        let mut found = HashMap::new();
        for (&m, c) in ns.iter().zip(counter.counts(&ns)) {
            if let Ok(c) = c {
                found.insert(m, c);
            }
        }
        let hit = found.get(&n).cloned();
        self.counts
            .borrow_mut()
            .entry(key)
            .or_default()
            .extend(found);
        match hit {
            Some(c) => Ok(c),
            None => counter.count(&BigUint::from(n)),
        }
    }

    fn evaluate(
        &self,
        relation: &Relation,
        scenario: &Scenario,
        params: &MethodParams,
        at: u64,
    ) -> Result<(f64, f64, bool)> {
        let m = &scenario.model;
        let MethodParams {
            alpha,
            eps,
            delta,
            p,
        } = params;
        let delta_p = ratio_to_f64(delta).powf(ratio_to_f64(p));
        let one = BigRational::one();
        let exact = |l: BigUint, r: BigUint, eq: bool| {
            let ok = if eq { l == r } else { l <= r };
            (
                l.to_f64().unwrap_or(f64::INFINITY),
                r.to_f64().unwrap_or(f64::INFINITY),
                ok,
            )
        };
        Ok(match relation {
            Relation::CesaroDominatesDensity => {
                let l = delta_p * self.density(m, at, eps, delta, alpha)?;
                let r = self.cesaro_w(m, at, eps, p, alpha)?;
                (l, r, holds_approx(l, r))
            }
            Relation::DensityBoundsCesaro => {
                let l = self.cesaro_w(m, at, eps, p, &one)?;
                let r = self.density(m, at, eps, delta, &one)? + delta_p;
                (l, r, holds_approx(l, r))
            }
            Relation::DensityOrder { beta } => {
                let l = self.density(m, at, eps, delta, beta)?;
                let r = self.density(m, at, eps, delta, alpha)?;
                (l, r, holds_approx(l, r))
            }
            Relation::CesaroOrder { beta } => {
                let l = self.cesaro_w(m, at, eps, p, beta)?;
                let r = self.cesaro_w(m, at, eps, p, alpha)?;
                (l, r, holds_approx(l, r))
            }
            Relation::Holder { q } => {
                let l = self.cesaro_w(m, at, eps, p, &one)?;
                let wq = self.cesaro_w(m, at, eps, q, &one)?;
                let r = wq.powf(ratio_to_f64(p) / ratio_to_f64(q));
                (l, r, holds_approx(l, r))
            }
            Relation::BlockMeanDominatesDensity { theta } => {
                let s = self
                    .evaluator
                    .s_theta_density::<f64>(m, theta, at, params)?;
                let l = ratio_to_f64(delta) * s;
                let r = self.block_sum(m, theta, at, eps)? / big_pow::<f64>(&theta.h(at)?, alpha);
                (l, r, holds_approx(l, r))
            }
            Relation::SumCover { other } => {
                let sum = sum_bound_model(m, &other.model);
                let (e2, d2) = (eps / rat_int(2), delta / rat_int(2));
                let l = self.count(&sum, at, eps, delta)?;
                let r = self.count(m, at, &e2, &d2)? + self.count(&other.model, at, &e2, &d2)?;
                exact(l, r, false)
            }
            Relation::ScaleIdentity { c } => {
                let l = self.count(&scale_model(m, c), at, eps, delta)?;
                let r = self.count(m, at, &(eps / c.abs()), delta)?;
                exact(l, r, true)
            }
            Relation::SeparationCover { other } => {
                let r =
                    self.count(m, at, eps, delta)? + self.count(&other.model, at, eps, delta)?;
                exact(BigUint::from(at), r, false)
            }
        })
    }

    fn observe(&self, probe: &Probe) -> (String, Option<VerdictClass>) {
        let seen = self.observe_full(probe);
        (seen.text, seen.class)
    }

    fn observe_full(&self, probe: &Probe) -> Observed {
        match probe {
            Probe::Inequality {
                relation,
                scenario,
                params,
                at,
            } => {
                let o: Observation = self
                    .evaluate(relation, scenario, params, *at)
                    .map_err(|e| e.to_string());
                let text = match o {
                    Ok((l, r, ok)) => format!("lhs={l:.17e} rhs={r:.17e} holds={ok}"),
                    Err(e) => format!("error: {e}"),
                };
                Observed {
                    text,
                    class: None,
                    settled: false,
                    capped: false,
                }
            }
            Probe::Verdict {
                scenario,
                method,
                params,
                abscissae,
                theta,
            } => {
                let key = format!("{probe:?}");
                if let Some(hit) = self.verdicts.borrow().get(&key) {
                    return hit.clone();
                }
                let out = match self.verdict(scenario, *method, params, abscissae, theta.as_ref()) {
                    Ok(seen) => seen,
                    Err(e) => Observed {
                        text: format!("error: {e}"),
                        class: None,
                        settled: false,
                        capped: false,
                    },
                };
                self.verdicts.borrow_mut().insert(key, out.clone());
                out
            }
        }
    }

    /// Re-runs every probe of a witness; the failure reproduces when the
    /// returned observations equal `witness.observed`.
    pub fn replay(&self, witness: &Witness) -> Vec<String> {
        let fresh = Harness {
            grid: self.grid.clone(),
            verdict_grid: self.verdict_grid.clone(),
            ..Harness::new(self.evaluator.caps)
        };
        witness.probes.iter().map(|p| fresh.observe(p).0).collect()
    }

    fn profile(
        &self,
        scenario: &Scenario,
        method: Method,
        params: &MethodParams,
        abscissae: &Abscissae,
        theta: Option<&LacunarySequence>,
    ) -> Result<DensityProfile<f64>> {
        if let (Method::Pw, Abscissae::Grid(g)) = (method, abscissae) {
            if *g == self.verdict_grid {
                params.validate()?;
                let mut samples = Vec::new();
                let mut gaps = Vec::new();
                for n in g.abscissae()? {
                    match self.cesaro_w(&scenario.model, n, &params.eps, &params.p, &params.alpha) {
                        Ok(v) => samples.push(Sample {
                            abscissa: n,
                            value: v,
                        }),
                        Err(e) if cap_error(&e) => gaps.push(Gap {
                            abscissa: n,
                            reason: e.to_string(),
                        }),
                        Err(e) => return Err(e),
                    }
                }
                let mut prof = DensityProfile::from_samples(
                    samples,
                    method,
                    params.clone(),
                    scenario.name.clone(),
                )?;
                prof.gaps = gaps;
                return Ok(prof);
            }
        }
        sample_profile::<f64>(scenario, method, params, abscissae, theta, &self.evaluator)
    }

    fn verdict(
        &self,
        scenario: &Scenario,
        method: Method,
        params: &MethodParams,
        abscissae: &Abscissae,
        theta: Option<&LacunarySequence>,
    ) -> Result<Observed> {
        let prof = self.profile(scenario, method, params, abscissae, theta)?;
        let third = prof.samples.len() / 3;
        let peak = |xs: &[Sample<f64>]| xs.iter().map(|s| s.value).fold(0.0, f64::max);
        let tail_peak = peak(&prof.samples[prof.samples.len() - third..]);
        let settled = tail_peak < 1.0 && tail_peak < peak(&prof.samples[..third]);
        let capped = !prof.gaps.is_empty();
        Ok(match classify_default(&prof) {
            Ok(v) => Observed {
                text: format!("{} slope={:?} last={:?}", v.class, v.slope, v.last_value),
                class: Some(v.class),
                settled,
                capped,
            },
            Err(Error::InsufficientData(m)) => Observed {
                text: format!("inconclusive ({m})"),
                class: Some(VerdictClass::Inconclusive),
                settled,
                capped,
            },
            Err(e) => return Err(e),
        })
    }

    fn verdict_probe(
        &self,
        scenario: &Scenario,
        method: Method,
        params: MethodParams,
        theta: Option<&LacunarySequence>,
    ) -> Probe {
        let abscissae = if method.is_lacunary() {
            Abscissae::Blocks(theta.map_or_else(|| self.grid.blocks.clone(), verdict_blocks))
        } else {
            Abscissae::Grid(self.verdict_grid.clone())
        };
        Probe::Verdict {
            scenario: scenario.clone(),
            method,
            params,
            abscissae,
            theta: theta.cloned(),
        }
    }

    fn audit(
        &self,
        report: &mut CheckReport,
        relation: Relation,
        scenario: &Scenario,
        params: MethodParams,
        at: u64,
    ) {
        let probe = Probe::Inequality {
            relation,
            scenario: scenario.clone(),
            params,
            at,
        };
        let Probe::Inequality {
            relation,
            scenario,
            params,
            at,
        } = &probe
        else {
            unreachable!()
        };
        match self.evaluate(relation, scenario, params, *at) {
            Ok((_, _, true)) => report.ran(),
            Ok(_) => {
                report.ran();
                let observed = vec![self.observe(&probe).0];
                report.fail(Witness {
                    reason: format!("inequality {} violated", relation.name()),
                    probes: vec![probe],
                    observed,
                });
            }
            Err(e) if cap_error(&e) => {}
            Err(e) => {
                report.ran();
                report.fail(Witness {
                    reason: format!("evaluation failed: {e}"),
                    probes: vec![probe.clone()],
                    observed: vec![format!("error: {e}")],
                });
            }
        }
    }

    /// `premise` converging must imply every conclusion converging.
    /// Premises whose profile has not settled are treated as not converging,
    /// and profiles cut short by a cap decide nothing.
    fn implication(&self, report: &mut CheckReport, premise: Probe, conclusions: Vec<Probe>) {
        report.ran();
        let Observed {
            text: p_text,
            class: p_class,
            settled,
            capped,
        } = self.observe_full(&premise);
        if capped {
            report.capped += 1;
            return;
        }
        if p_class == Some(VerdictClass::ConvergesToZero) && !settled {
            report.unsettled += 1;
        }
        if p_class != Some(VerdictClass::ConvergesToZero) || !settled {
            if p_class.is_none() {
                report.fail(Witness {
                    reason: "premise could not be evaluated".into(),
                    probes: vec![premise],
                    observed: vec![p_text],
                });
            }
            return;
        }
        for c in conclusions {
            let seen = self.observe_full(&c);
            let (c_text, c_class) = (seen.text, seen.class);
            if c_class != Some(VerdictClass::ConvergesToZero) && seen.capped {
                report.capped += 1;
            } else if c_class != Some(VerdictClass::ConvergesToZero) {
                report.fail(Witness {
                    reason: "premise converges but conclusion does not".into(),
                    probes: vec![premise.clone(), c],
                    observed: vec![p_text.clone(), c_text],
                });
            }
        }
    }

    /// Audits one inclusion over `entries`: the pointwise inequality on
    /// `grid`, then the verdict implication at `eps = delta = 1/2`.
    pub fn check_inclusion(
        &self,
        id: &str,
        entries: &[CorpusEntry],
        grid: &ParamGrid,
    ) -> Result<CheckReport> {
        if !INCLUSION_IDS.contains(&id) {
            return Err(Error::UnknownCheckId(id.to_string()));
        }
        let start = Instant::now();
        let saved = std::mem::take(&mut *self.cesaro.borrow_mut());
        let harness = Harness {
            evaluator: self.evaluator,
            grid: grid.clone(),
            verdict_grid: self.verdict_grid.clone(),
            cesaro: RefCell::new(if grid == &self.grid {
                saved.clone()
            } else {
                HashMap::new()
            }),
            blocks: RefCell::new(std::mem::take(&mut *self.blocks.borrow_mut())),
            counts: RefCell::new(std::mem::take(&mut *self.counts.borrow_mut())),
            verdicts: RefCell::new(std::mem::take(&mut *self.verdicts.borrow_mut())),
        };
        let report = harness.inclusion(id, entries, start);
        *self.blocks.borrow_mut() = harness.blocks.take();
        *self.counts.borrow_mut() = harness.counts.take();
        *self.verdicts.borrow_mut() = harness.verdicts.take();
        if grid == &self.grid {
            *self.cesaro.borrow_mut() = harness.cesaro.into_inner();
        } else {
            *self.cesaro.borrow_mut() = saved;
        }
        report
    }

    fn inclusion(&self, id: &str, entries: &[CorpusEntry], start: Instant) -> Result<CheckReport> {
        let g = &self.grid;
        let mut report = CheckReport::new(id, g.describe());
        let order_pairs: Vec<(BigRational, BigRational)> = g
            .orders
            .iter()
            .flat_map(|a| {
                g.orders
                    .iter()
                    .filter(move |b| a <= *b)
                    .map(move |b| (a.clone(), b.clone()))
            })
            .collect();
        let p_pairs: Vec<(BigRational, BigRational)> =
            g.p.iter()
                .flat_map(|p| {
                    g.p.iter()
                        .filter(move |q| p < *q)
                        .map(move |q| (p.clone(), q.clone()))
                })
                .collect();
        let one = BigRational::one();
        let thetas = |s: &Scenario| {
            let mut v = vec![LacunarySequence::Powers(2), LacunarySequence::FactorialEven];
            if let Some(t) = &s.theta {
                if !v.contains(t) {
                    v.push(t.clone());
                }
            }
            v
        };
        for entry in entries {
            let s = &entry.scenario;
            report.scenario(&s.name);
            let eps_grid = self.entry_grid(entry);
            let ps = |alpha: &BigRational| {
                self.verdict_probe(
                    s,
                    Method::Ps,
                    verdict_params(alpha.clone(), default_p(s)),
                    None,
                )
            };
            let pw = |alpha: &BigRational, p: &BigRational| {
                self.verdict_probe(
                    s,
                    Method::Pw,
                    verdict_params(alpha.clone(), p.clone()),
                    None,
                )
            };
            let mk =
                |alpha: &BigRational, eps: &BigRational, delta: &BigRational, p: &BigRational| {
                    MethodParams::new(alpha.clone(), eps.clone(), delta.clone(), p.clone())
                        .expect("grid params valid")
                };
            match id {
                "thm-2.4" | "note-2.1" => {
                    for eps in &eps_grid {
                        for delta in &g.delta {
                            for p in &g.p {
                                for alpha in &g.orders {
                                    for &n in &g.n {
                                        self.audit(
                                            &mut report,
                                            Relation::CesaroDominatesDensity,
                                            s,
                                            mk(alpha, eps, delta, p),
                                            n,
                                        );
                                    }
                                }
                            }
                        }
                    }
                    let p = default_p(s);
                    for (a, b) in &order_pairs {
                        if id == "note-2.1" && a != b {
                            continue;
                        }
                        self.implication(&mut report, pw(a, &p), vec![ps(b)]);
                    }
                }
                "thm-2.5" => {
                    for eps in &eps_grid {
                        for delta in &g.delta {
                            for p in &g.p {
                                for &n in &g.n {
                                    self.audit(
                                        &mut report,
                                        Relation::DensityBoundsCesaro,
                                        s,
                                        mk(&one, eps, delta, p),
                                        n,
                                    );
                                    self.audit(
                                        &mut report,
                                        Relation::CesaroDominatesDensity,
                                        s,
                                        mk(&one, eps, delta, p),
                                        n,
                                    );
                                }
                            }
                        }
                    }
                    let p = default_p(s);
                    self.implication(&mut report, pw(&one, &p), vec![ps(&one)]);
                    self.implication(&mut report, ps(&one), vec![pw(&one, &p)]);
                }
                "thm-2.2iv" => {
                    for eps in &eps_grid {
                        for delta in &g.delta {
                            for (a, b) in &order_pairs {
                                for &n in &g.n {
                                    let rel = Relation::DensityOrder { beta: b.clone() };
                                    self.audit(&mut report, rel, s, mk(a, eps, delta, &one), n);
                                }
                            }
                        }
                    }
                    for (a, b) in order_pairs.iter().filter(|(a, b)| a < b) {
                        self.implication(&mut report, ps(a), vec![ps(b)]);
                    }
                }
                "thm-2.3i" => {
                    for eps in &eps_grid {
                        for p in &g.p {
                            for (a, b) in &order_pairs {
                                for &n in &g.n {
                                    let rel = Relation::CesaroOrder { beta: b.clone() };
                                    self.audit(&mut report, rel, s, mk(a, eps, &half(), p), n);
                                }
                            }
                        }
                    }
                    let p = default_p(s);
                    for (a, b) in order_pairs.iter().filter(|(a, b)| a < b) {
                        self.implication(&mut report, pw(a, &p), vec![pw(b, &p)]);
                    }
                }
                "thm-2.3ii" => {
                    for eps in &eps_grid {
                        for (p, q) in &p_pairs {
                            for &n in &g.n {
                                let rel = Relation::Holder { q: q.clone() };
                                self.audit(&mut report, rel, s, mk(&one, eps, &half(), p), n);
                            }
                        }
                    }
                    for (p, q) in &p_pairs {
                        self.implication(&mut report, pw(&one, q), vec![pw(&one, p)]);
                    }
                }
                "thm-3.2" => {
                    for theta in thetas(s) {
                        let blocks: Vec<u64> = match theta.len() {
                            Some(len) => g.blocks.iter().copied().filter(|&r| r < len).collect(),
                            None => g.blocks.clone(),
                        };
                        for eps in &eps_grid {
                            for delta in &g.delta {
                                for alpha in &g.orders {
                                    for &r in &blocks {
                                        let rel = Relation::BlockMeanDominatesDensity {
                                            theta: theta.clone(),
                                        };
                                        self.audit(
                                            &mut report,
                                            rel,
                                            s,
                                            mk(alpha, eps, delta, &one),
                                            r,
                                        );
                                    }
                                }
                            }
                        }
                        let window = verdict_blocks(&theta);
                        for (a, b) in &order_pairs {
                            let premise = Probe::Verdict {
                                scenario: s.clone(),
                                method: Method::NTheta,
                                params: verdict_params(a.clone(), one.clone()),
                                abscissae: Abscissae::Blocks(window.clone()),
                                theta: Some(theta.clone()),
                            };
                            let conclusion = Probe::Verdict {
                                scenario: s.clone(),
                                method: Method::STheta,
                                params: verdict_params(b.clone(), one.clone()),
                                abscissae: Abscissae::Blocks(window.clone()),
                                theta: Some(theta.clone()),
                            };
                            self.implication(&mut report, premise, vec![conclusion]);
                        }
                    }
                }
                "thm-2.2ii" => {
                    let enum_grid = GridSpec {
                        points: 10,
                        ..self.verdict_grid.clone()
                    };
                    let orders = [rat(3, 5), one.clone()];
                    for other in entries
                        .iter()
                        .skip_while(|e| e.scenario.name != s.name)
                        .skip(1)
                    {
                        report.scenario(&other.scenario.name);
                        let other_eps = self.entry_grid(other);
                        for eps in eps_grid.iter().filter(|e| other_eps.contains(e)) {
                            let delta = eps.clone();
                            for &n in &g.n_enumerated {
                                let rel = Relation::SumCover {
                                    other: Box::new(other.scenario.clone()),
                                };
                                self.audit(&mut report, rel, s, mk(&one, eps, &delta, &one), n);
                            }
                        }
                        let sum = Scenario::new(
                            format!("({})+({})", s.name, other.scenario.name),
                            sum_bound_model(&s.model, &other.scenario.model),
                        );
                        for a in &orders {
                            for b in &orders {
                                let probe = |sc: &Scenario, alpha: &BigRational| Probe::Verdict {
                                    scenario: sc.clone(),
                                    method: Method::Ps,
                                    params: verdict_params(alpha.clone(), one.clone()),
                                    abscissae: Abscissae::Grid(enum_grid.clone()),
                                    theta: None,
                                };
                                let (pa, pb) = (probe(s, a), probe(&other.scenario, b));
                                let (_, ca) = self.observe(&pb);
                                if ca != Some(VerdictClass::ConvergesToZero) {
                                    report.ran();
                                    continue;
                                }
                                self.implication(&mut report, pa, vec![probe(&sum, a.max(b))]);
                            }
                        }
                    }
                }
                "thm-2.2iii" => {
                    let enum_grid = GridSpec {
                        points: 10,
                        ..self.verdict_grid.clone()
                    };
                    for c in [rat_int(2), rat(1, 2), rat_int(-3)] {
                        for eps in &eps_grid {
                            if entry.check_eps(&(eps / c.abs())).is_err() {
                                continue;
                            }
                            for &n in &g.n_enumerated {
                                let rel = Relation::ScaleIdentity { c: c.clone() };
                                self.audit(&mut report, rel, s, mk(&one, eps, &half(), &one), n);
                            }
                        }
                        let scaled = Scenario::new(
                            format!("{}*({})", format_ratio(&c), s.name),
                            scale_model(&s.model, &c),
                        );
                        for alpha in [rat(3, 5), one.clone()] {
                            let probe = |sc: &Scenario, params: MethodParams| Probe::Verdict {
                                scenario: sc.clone(),
                                method: Method::Ps,
                                params,
                                abscissae: Abscissae::Grid(enum_grid.clone()),
                                theta: None,
                            };
                            // The scaled sequence at eps is the original at eps/|c|.
                            let base = MethodParams::new(
                                alpha.clone(),
                                half() / c.abs(),
                                half(),
                                one.clone(),
                            )?;
                            if entry.check_eps(&base.eps).is_err() {
                                continue;
                            }
                            let premise = probe(s, base);
                            let conclusion =
                                probe(&scaled, verdict_params(alpha.clone(), one.clone()));
                            self.implication(&mut report, premise, vec![conclusion]);
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        if id == "thm-2.3ii" {
            report.notes.push(
                "checked at order 1 only; at smaller orders the inclusion does not hold in general"
                    .into(),
            );
        }
        Ok(report.finish(start))
    }

    fn expectation_probe(&self, entry: &CorpusEntry, e: &Expectation) -> Probe {
        Probe::Verdict {
            scenario: entry.scenario.clone(),
            method: e.method,
            params: e.params.clone(),
            abscissae: e.abscissae(),
            theta: e.theta.clone().or_else(|| entry.scenario.theta.clone()),
        }
    }

    fn expect(&self, report: &mut CheckReport, entry: &CorpusEntry, e: &Expectation) {
        report.scenario(entry.name());
        report.ran();
        let probe = self.expectation_probe(entry, e);
        let seen = self.observe_full(&probe);
        let (text, class) = (seen.text, seen.class);
        if class != Some(e.expected) {
            let cut = if seen.capped {
                " (profile truncated by the enumeration cap)"
            } else {
                ""
            };
            report.fail(Witness {
                reason: format!("{}: expected {}{cut}", e.claim, e.expected),
                probes: vec![probe],
                observed: vec![text],
            });
        }
    }

    /// Confirms a counterexample's two-sided behaviour.
    pub fn check_strictness(&self, id: &str) -> Result<CheckReport> {
        let start = Instant::now();
        let mut report = CheckReport::new(id, "default sampling grid");
        let entries: Vec<CorpusEntry> = match id {
            "ex-2.1" => vec![corpus::example_2_1(2, 1)?],
            "rem-2.1" => {
                let mut e = corpus::example_2_1(7, 3)?;
                let mk = |alpha: BigRational, expected, claim: &str| Expectation {
                    method: Method::Ps,
                    params: verdict_params(alpha, BigRational::one()),
                    expected,
                    abscissae: None,
                    theta: None,
                    claim: claim.into(),
                };
                e.expectations = vec![
                    mk(
                        rat(7, 20),
                        VerdictClass::FailsToConverge,
                        "PS of order 0.35 < 3/7 fails",
                    ),
                    mk(
                        rat(49, 100),
                        VerdictClass::ConvergesToZero,
                        "PS of order 0.49 > 3/7 holds",
                    ),
                ];
                vec![e]
            }
            "thm-2.3-ex" => vec![corpus::theorem_2_3_example(2, 1, BigRational::one())?],
            "ex-2.2" => {
                let mut e = corpus::example_2_2(BigRational::one())?;
                let base = e.expectations[0].clone();
                for (method, expected) in [
                    (Method::Ps, VerdictClass::ConvergesToZero),
                    (Method::Pw, VerdictClass::FailsToConverge),
                ] {
                    e.expectations.push(Expectation {
                        method,
                        params: base.params.with_alpha(rat(2, 5)),
                        expected,
                        claim: format!("{method} of order 2/5 {expected}"),
                        ..base.clone()
                    });
                }
                vec![e]
            }
            "thm-3.2-ex" => vec![corpus::theorem_3_2_example(
                half(),
                LacunarySequence::Powers(2),
            )?],
            "thm-3.3-ex" => vec![corpus::theorem_3_3_example(8)?.0],
            "ex-3.1" => {
                let ex = corpus::example_3_1();
                vec![ex.lim0, ex.lim1]
            }
            other => return Err(Error::UnknownCheckId(other.to_string())),
        };
        for entry in &entries {
            for e in &entry.expectations {
                self.expect(&mut report, entry, e);
            }
        }
        Ok(report.finish(start))
    }

    /// Two candidate limits of one sequence cannot both be reached.
    pub fn check_uniqueness(
        &self,
        pair: &UniquenessPair,
        method: Method,
        params: &MethodParams,
        theta: Option<&LacunarySequence>,
    ) -> Result<CheckReport> {
        let start = Instant::now();
        let id = format!("uniqueness[{}:{method}]", pair.sequence);
        let mut report = CheckReport::new(&id, "default sampling grid");
        let Some(sep) = &pair.separation else {
            return Err(Error::MissingSeparationDeclaration);
        };
        report.scenario(&pair.limit_a.name);
        report.scenario(&pair.limit_b.name);
        if sep.is_degenerate() {
            report.notes.push(format!(
                "{}: zero separation declared, not a uniqueness instance",
                pair.sequence
            ));
            return Ok(report.finish(start));
        }
        let probe = |s: &Scenario| {
            self.verdict_probe(s, method, params.clone(), theta.or(s.theta.as_ref()))
        };
        self.exclusive(&mut report, probe(&pair.limit_a), probe(&pair.limit_b));
        Ok(report.finish(start))
    }

    fn exclusive(&self, report: &mut CheckReport, a: Probe, b: Probe) {
        report.ran();
        let (ta, ca) = self.observe(&a);
        let (tb, cb) = self.observe(&b);
        let both =
            ca == Some(VerdictClass::ConvergesToZero) && cb == Some(VerdictClass::ConvergesToZero);
        if both || ca.is_none() || cb.is_none() {
            report.fail(Witness {
                reason: if both {
                    "both candidate limits converge".into()
                } else {
                    "a verdict could not be evaluated".into()
                },
                probes: vec![a, b],
                observed: vec![ta, tb],
            });
        }
    }

    fn check_theorem_3_4(&self, pair: &UniquenessPair) -> Result<CheckReport> {
        let start = Instant::now();
        let mut report = CheckReport::new(
            "thm-3.4",
            format!("liminf window [{}, {}]", LIMINF_WINDOW.0, LIMINF_WINDOW.1),
        );
        let Some(sep) = &pair.separation else {
            return Err(Error::MissingSeparationDeclaration);
        };
        report.scenario(&pair.limit_a.name);
        report.scenario(&pair.limit_b.name);
        if sep.is_degenerate() {
            report.notes.push("zero separation declared".into());
            return Ok(report.finish(start));
        }
        self.separation_cover(&mut report, pair, sep)?;
        let ex = corpus::example_3_1();
        let thetas = [ex.theta1, ex.theta2, LacunarySequence::RatioControlled(8)];
        let one = BigRational::one();
        for theta in thetas {
            let window = match theta.len() {
                Some(len) => (LIMINF_WINDOW.0, len),
                None => LIMINF_WINDOW,
            };
            let (active, q) = liminf_guard(&theta, window)?;
            report.notes.push(format!(
                "{theta}: window minimum of q_r is {} ({})",
                format_ratio(&q),
                if active {
                    "guard active"
                } else {
                    "guard inactive, skipped"
                }
            ));
            if !active {
                continue;
            }
            let blocks = Abscissae::Blocks((LIMINF_WINDOW.0..=LIMINF_WINDOW.1).collect());
            for (x, y) in [
                (&pair.limit_a, &pair.limit_b),
                (&pair.limit_b, &pair.limit_a),
            ] {
                let ps = self.verdict_probe(
                    x,
                    Method::Ps,
                    verdict_params(one.clone(), one.clone()),
                    None,
                );
                let st = Probe::Verdict {
                    scenario: y.clone(),
                    method: Method::STheta,
                    params: verdict_params(one.clone(), one.clone()),
                    abscissae: blocks.clone(),
                    theta: Some(theta.clone()),
                };
                self.exclusive(&mut report, ps, st);
            }
        }
        Ok(report.finish(start))
    }

    /// `P(|X - Y| >= eps0) >= delta0` forces, at every `k`, one of the two
    /// tails at `eps0/2` to reach `delta0/2`.
    fn separation_cover(
        &self,
        report: &mut CheckReport,
        pair: &UniquenessPair,
        sep: &Separation,
    ) -> Result<()> {
        let params = MethodParams::new(
            BigRational::one(),
            &sep.eps0 / rat_int(2),
            &sep.delta0 / rat_int(2),
            BigRational::one(),
        )?;
        for &n in &self.grid.n {
            let rel = Relation::SeparationCover {
                other: Box::new(pair.limit_b.clone()),
            };
            self.audit(report, rel, &pair.limit_a, params.clone(), n);
        }
        Ok(())
    }

    /// `forward`: PS convergence carries over to S_theta whenever the ratio
    /// guard holds. Otherwise the ratio-controlled counterexample.
    pub fn check_theorem_3_3(&self, forward: bool) -> Result<CheckReport> {
        let start = Instant::now();
        let one = BigRational::one();
        if !forward {
            let mut report = CheckReport::new(
                "thm-3.3-converse",
                "default sampling grid; blocks r(j) = 2j - 1",
            );
            let j_max = 8;
            let (entry, theta) = corpus::theorem_3_3_example(j_max)?;
            for e in &entry.expectations {
                self.expect(&mut report, &entry, e);
            }
            let params = verdict_params(one.clone(), one.clone());
            for r in crate::diagnostics::ratio_pair_blocks(j_max) {
                report.ran();
                let v = self.evaluator.s_theta_density::<f64>(
                    &entry.scenario.model,
                    &theta,
                    r,
                    &params,
                );
                if !matches!(v, Ok(x) if x == 1.0) {
                    report.fail(Witness {
                        reason: format!("block density at r={r} is not exactly 1"),
                        probes: vec![Probe::Verdict {
                            scenario: entry.scenario.clone(),
                            method: Method::STheta,
                            params: params.clone(),
                            abscissae: Abscissae::Blocks(vec![r]),
                            theta: Some(theta.clone()),
                        }],
                        observed: vec![format!("{v:?}")],
                    });
                }
            }
            for failure in corpus::audit_ratio_construction(j_max) {
                report.ran();
                report.fail(Witness {
                    reason: failure,
                    probes: Vec::new(),
                    observed: Vec::new(),
                });
            }
            return Ok(report.finish(start));
        }
        let mut report = CheckReport::new("thm-3.3-forward", "default sampling grid; blocks 2..12");
        let thetas = [LacunarySequence::Powers(2), LacunarySequence::FactorialEven];
        for theta in &thetas {
            let (active, q) = liminf_guard(theta, LIMINF_WINDOW)?;
            report.notes.push(format!(
                "{theta}: window minimum of q_r is {}",
                format_ratio(&q)
            ));
            if !active {
                continue;
            }
            for entry in corpus::default_entries() {
                let s = &entry.scenario;
                report.scenario(&s.name);
                for alpha in &self.grid.orders {
                    let premise = self.verdict_probe(
                        s,
                        Method::Ps,
                        verdict_params(alpha.clone(), one.clone()),
                        None,
                    );
                    let conclusions = [alpha.clone(), one.clone()]
                        .into_iter()
                        .map(|beta| {
                            self.verdict_probe(
                                s,
                                Method::STheta,
                                verdict_params(beta, one.clone()),
                                Some(theta),
                            )
                        })
                        .collect();
                    self.implication(&mut report, premise, conclusions);
                }
            }
        }
        Ok(report.finish(start))
    }
}

fn merge(into: &mut CheckReport, sub: CheckReport) {
    for s in sub.scenarios {
        into.scenario(&s);
    }
    into.probes += sub.probes;
    into.notes.extend(sub.notes);
    if sub.outcome == Outcome::Fail {
        into.outcome = Outcome::Fail;
    } else if sub.outcome == Outcome::Pass && into.outcome == Outcome::Skipped {
        into.outcome = Outcome::Pass;
    }
    into.witnesses.extend(sub.witnesses);
    into.runtime += sub.runtime;
}
