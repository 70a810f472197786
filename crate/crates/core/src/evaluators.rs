//! Finite-`n` values of the four functionals: the order-α density of the
//! qualifying set, the order-α p-Cesàro mean, and their lacunary block analogues.
//!
//! Counts are exact. For piecewise models whose branches are monotone in `k`
//! the qualifying indices of each branch form a prefix or suffix of `N`, so
//! counting reduces to [`IndexSet::count`] at two points; anything else is
//! enumerated under a cap.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::exact::format_ratio;
use crate::expr::{Direction, TailExpr};
use crate::index_set::IndexSet;
use crate::lacunary::LacunarySequence;
use crate::model::{near, ModelRepr, Piecewise, TailAt, TailModel};
use crate::scalar::{big_pow, CompensatedSum, Scalar};
use crate::sums::interval_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Order-α density of `{k <= n : tail >= delta}`.
    Ps,
    /// Order-α mean of `tail^p`.
    Pw,
    /// Lacunary block density.
    STheta,
    /// Lacunary block mean.
    NTheta,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ps => "ps",
            Method::Pw => "pw",
            Method::STheta => "stheta",
            Method::NTheta => "ntheta",
        }
    }

    pub fn is_lacunary(self) -> bool {
        matches!(self, Method::STheta | Method::NTheta)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ps" => Ok(Method::Ps),
            "pw" => Ok(Method::Pw),
            "stheta" => Ok(Method::STheta),
            "ntheta" => Ok(Method::NTheta),
            other => Err(domain(format!(
                "unknown method `{other}` (ps, pw, stheta, ntheta)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodParams {
    pub alpha: BigRational,
    pub eps: BigRational,
    pub delta: BigRational,
    pub p: BigRational,
}

impl MethodParams {
    pub fn new(
        alpha: BigRational,
        eps: BigRational,
        delta: BigRational,
        p: BigRational,
    ) -> Result<Self> {
        let m = MethodParams {
            alpha,
            eps,
            delta,
            p,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(&self.alpha)?;
        check_eps(&self.eps)?;
        check_delta(&self.delta)?;
        check_p(&self.p)
    }

    pub fn with_alpha(&self, alpha: BigRational) -> Self {
        MethodParams {
            alpha,
            ..self.clone()
        }
    }
}

fn check_alpha(alpha: &BigRational) -> Result<()> {
    if alpha.is_positive() && *alpha <= BigRational::one() {
        Ok(())
    } else {
        Err(domain(format!(
            "alpha must lie in (0, 1], got {}",
            format_ratio(alpha)
        )))
    }
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(domain(format!(
            "eps must be positive, got {}",
            format_ratio(eps)
        )))
    }
}

fn check_delta(delta: &BigRational) -> Result<()> {
    if delta.is_positive() && *delta <= BigRational::one() {
        Ok(())
    } else {
        Err(domain(format!(
            "delta must lie in (0, 1], got {}",
            format_ratio(delta)
        )))
    }
}

fn check_p(p: &BigRational) -> Result<()> {
    if p.is_positive() {
        Ok(())
    } else {
        Err(domain(format!(
            "p must be positive, got {}",
            format_ratio(p)
        )))
    }
}

fn check_n(n: &BigUint) -> Result<()> {
    if n.is_zero() {
        Err(domain("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Caps {
    /// Largest `n` counted by enumeration.
    pub prefix: u64,
    /// Largest `n` for the direct Cesàro sum.
    pub cesaro: u64,
    /// Largest number of indices summed or counted directly inside one block.
    pub block: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            prefix: 1_000_000,
            cesaro: 10_000_000,
            block: 10_000_000,
        }
    }
}

impl Caps {
    pub fn uniform(cap: u64) -> Self {
        Caps {
            prefix: cap,
            cesaro: cap,
            block: cap,
        }
    }
}

/// Result of [`qualifying_prefix_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixBound {
    /// No index qualifies.
    None,
    /// Indices `1..=k` qualify.
    Bound(u64),
    /// No crossing below `2^63`.
    Unbounded,
}

/// Qualifying indices of one branch, as a subset of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Empty,
    Prefix(u64),
    Suffix(u64),
    All,
}

const SEARCH_LIMIT: u64 = 1 << 63;

fn branch_ge(
    at: &TailAt<'_>,
    expr: &TailExpr,
    k: u64,
    delta: &BigRational,
    delta_f: f64,
) -> Result<bool> {
    let v = at.branch_value(expr, k)?;
    if (v - delta_f).abs() > 1e-12 * v.abs().max(delta_f.abs()) {
        return Ok(v >= delta_f);
    }
    Ok(expr.ge(&BigRational::from_integer(k.into()), &at.eps, delta))
}

/// Sample points for checking a declared monotone decrease.
fn monotonicity_samples() -> Vec<u64> {
    let mut ks: Vec<u64> = (1..=64).collect();
    for j in 7..63 {
        ks.push(1 << j);
        ks.push(3 << (j - 1));
    }
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn check_nonincreasing(at: &TailAt<'_>, expr: &TailExpr) -> Result<()> {
    let ks = monotonicity_samples();
    let mut prev: Option<(u64, f64)> = None;
    for &k in &ks {
        let v = at.branch_value(expr, k)?;
        if let Some((k0, v0)) = prev {
            if v > v0 + 1e-12 * v0.abs() {
                return Err(Error::MonotonicityViolated {
                    k1: k0.to_string(),
                    v1: v0,
                    k2: k.to_string(),
                    v2: v,
                });
            }
        }
        prev = Some((k, v));
    }
    Ok(())
}

fn find_region(
    at: &TailAt<'_>,
    expr: &TailExpr,
    dir: Direction,
    delta: &BigRational,
    delta_f: f64,
) -> Result<Option<Region>> {
    let ge = |k: u64| branch_ge(at, expr, k, delta, delta_f);
    Ok(Some(match dir {
        Direction::Unknown => return Ok(None),
        Direction::Constant => {
            if ge(1)? {
                Region::All
            } else {
                Region::Empty
            }
        }
        Direction::NonIncreasing => {
            if !ge(1)? {
                return Ok(Some(Region::Empty));
            }
            let (mut lo, mut hi) = (1u64, 2u64);
            loop {
                if !ge(hi)? {
                    break;
                }
                if hi == SEARCH_LIMIT {
                    return Ok(Some(Region::All));
                }
                lo = hi;
                hi *= 2;
            }
            // ge(lo) holds, ge(hi) fails
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ge(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Region::Prefix(lo)
        }
        Direction::NonDecreasing => {
            if ge(1)? {
                return Ok(Some(Region::All));
            }
            let (mut lo, mut hi) = (1u64, 2u64);
            loop {
                if ge(hi)? {
                    break;
                }
                if hi == SEARCH_LIMIT {
                    return Ok(Some(Region::Empty));
                }
                lo = hi;
                hi *= 2;
            }
            // ge(lo) fails, ge(hi) holds
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ge(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Region::Suffix(hi)
        }
    }))
}

/// `region ∩ [1, n]` as an inclusive interval.
fn clip_region(region: Region, n: &BigUint) -> Option<(BigUint, BigUint)> {
    match region {
        Region::Empty => None,
        Region::All => Some((BigUint::one(), n.clone())),
        Region::Prefix(b) => {
            let b = BigUint::from(b);
            Some((BigUint::one(), if &b < n { b } else { n.clone() }))
        }
        Region::Suffix(a) => {
            let a = BigUint::from(a);
            (&a <= n).then(|| (a, n.clone()))
        }
    }
}

fn off_direction(p: &Piecewise, at: &TailAt<'_>) -> Result<Direction> {
    if !p.off_tail.uses_k() {
        return Ok(Direction::Constant);
    }
    if p.off_tail_monotone {
        check_nonincreasing(at, &p.off_tail)?;
        return Ok(Direction::NonIncreasing);
    }
    Ok(Direction::Unknown)
}

enum Plan<'a> {
    Closed {
        set: &'a IndexSet,
        on: Region,
        off: Region,
    },
    Enumerate,
}

/// Counts `{k : tail(k, eps) >= delta}` over ranges of indices, with the model
/// frozen at one `(eps, delta)`.
pub struct QualifyingCounter<'a> {
    at: TailAt<'a>,
    delta: BigRational,
    delta_f: f64,
    plan: Plan<'a>,
    caps: Caps,
}

impl<'a> QualifyingCounter<'a> {
    pub fn new(
        model: &'a TailModel,
        eps: &BigRational,
        delta: &BigRational,
        caps: Caps,
    ) -> Result<Self> {
        check_eps(eps)?;
        check_delta(delta)?;
        model.validate()?;
        let at = model.at(eps)?;
        let delta_f = delta.to_f64().unwrap_or(f64::NAN);
        let plan = match at.piecewise() {
            Some(p) => {
                let on = match p.on_set {
                    IndexSet::Empty => Some(Region::Empty),
                    _ => find_region(
                        &at,
                        &p.on_tail,
                        p.on_tail.shape(at.eps_f).dir,
                        delta,
                        delta_f,
                    )?,
                };
                let off = match p.on_set {
                    IndexSet::All => Some(Region::Empty),
                    _ => find_region(&at, &p.off_tail, off_direction(p, &at)?, delta, delta_f)?,
                };
                match (on, off) {
                    (Some(on), Some(off)) => Plan::Closed {
                        set: &p.on_set,
                        on,
                        off,
                    },
                    _ => Plan::Enumerate,
                }
            }
            None => Plan::Enumerate,
        };
        Ok(QualifyingCounter {
            at,
            delta: delta.clone(),
            delta_f,
            plan,
            caps,
        })
    }

    /// Whether counts come from closed forms rather than enumeration.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.plan, Plan::Closed { .. })
    }

    /// `|{k <= n : tail(k) >= delta}|`.
    pub fn count(&self, n: &BigUint) -> Result<BigUint> {
        check_n(n)?;
        match &self.plan {
            Plan::Closed { set, on, off } => Ok(self.closed_count(set, *on, *off, n)),
            Plan::Enumerate => {
                let n64 = n
                    .to_u64()
                    .filter(|&x| x <= self.caps.prefix)
                    .ok_or_else(|| Error::EnumerationCapExceeded {
                        what: "qualifying-set enumeration",
                        needed: n.to_string(),
                        cap: self.caps.prefix,
                    })?;
                self.enumerate(1, n64)
            }
        }
    }

    /// [`QualifyingCounter::count`] at increasing `ns`, enumerating each index
    /// at most once.
    pub fn counts(&self, ns: &[u64]) -> Vec<Result<BigUint>> {
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return vec![Err(domain("counts need strictly increasing n")); ns.len()];
        }
        if self.is_closed_form() {
            return ns.iter().map(|&n| self.count(&BigUint::from(n))).collect();
        }
        let mut total = BigUint::zero();
        let mut done = 0u64;
        let mut out = Vec::with_capacity(ns.len());
        for &n in ns {
            if n == 0 || n > self.caps.prefix {
                out.push(self.count(&BigUint::from(n)));
                continue;
            }
            match self.enumerate(done + 1, n) {
                Ok(c) => {
                    total += c;
                    done = n;
                    out.push(Ok(total.clone()));
                }
                Err(e) => out.push(Err(e)),
            }
        }
        out
    }

    /// `|{lo < k <= hi : tail(k) >= delta}|`.
    pub fn count_between(&self, lo: &BigUint, hi: &BigUint) -> Result<BigUint> {
        if lo >= hi {
            return Ok(BigUint::zero());
        }
        match &self.plan {
            Plan::Closed { set, on, off } => {
                let upper = self.closed_count(set, *on, *off, hi);
                let lower = if lo.is_zero() {
                    BigUint::zero()
                } else {
                    self.closed_count(set, *on, *off, lo)
                };
                Ok(upper - lower)
            }
            Plan::Enumerate => {
                let len = hi - lo;
                let fits = len <= BigUint::from(self.caps.block) && hi.to_u64().is_some();
                if !fits {
                    return Err(Error::EnumerationCapExceeded {
                        what: "block enumeration",
                        needed: len.to_string(),
                        cap: self.caps.block,
                    });
                }
                let lo64 = lo.to_u64().expect("lo < hi fits");
                self.enumerate(lo64 + 1, hi.to_u64().expect("checked"))
            }
        }
    }

    fn closed_count(&self, set: &IndexSet, on: Region, off: Region, n: &BigUint) -> BigUint {
        let members = |a: &BigUint, b: &BigUint| set.count_upto(b) - set.count_upto(&(a - 1u32));
        let mut total = BigUint::zero();
        if let Some((a, b)) = clip_region(on, n) {
            total += members(&a, &b);
        }
        if let Some((a, b)) = clip_region(off, n) {
            total += (&b - &a + 1u32) - members(&a, &b);
        }
        total
    }

    fn enumerate(&self, from: u64, to: u64) -> Result<BigUint> {
        const CHUNK: u64 = 1 << 16;
        let mut c = 0u64;
        let mut lo = from;
        while lo <= to {
            let hi = to.min(lo + (CHUNK - 1));
            for (v, k) in self.at.values_u64(lo, hi)?.into_iter().zip(lo..=hi) {
                let hit = if near(v, self.delta_f) {
                    self.at.ge(&BigUint::from(k), &self.delta)?
                } else {
                    v >= self.delta_f
                };
                c += u64::from(hit);
            }
            lo = hi + 1;
        }
        Ok(BigUint::from(c))
    }
}

/// Exact evaluation entry points with configurable caps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Evaluator {
    pub caps: Caps,
}

impl Evaluator {
    pub fn new(caps: Caps) -> Self {
        Evaluator { caps }
    }

    pub fn ps_count(
        &self,
        model: &TailModel,
        n: &BigUint,
        eps: &BigRational,
        delta: &BigRational,
    ) -> Result<BigUint> {
        QualifyingCounter::new(model, eps, delta, self.caps)?.count(n)
    }

    pub fn ps_density<T: Scalar>(
        &self,
        model: &TailModel,
        n: &BigUint,
        params: &MethodParams,
    ) -> Result<T> {
        params.validate()?;
        let c = self.ps_count(model, n, &params.eps, &params.delta)?;
        Ok(T::of_big(&c) / big_pow::<T>(n, &params.alpha))
    }

    /// `sum_{k <= n} tail(k)^p` for each `n` in `ns` (ascending), in one pass.
    /// Long runs of a branch with a power-term form are summed in closed form;
    /// the Cesàro cap bounds the number of terms added one by one.
    pub fn cesaro_partial_sums<T: Scalar>(
        &self,
        model: &TailModel,
        ns: &[u64],
        eps: &BigRational,
        p: &BigRational,
    ) -> Result<Vec<T>> {
        check_eps(eps)?;
        check_p(p)?;
        model.validate()?;
        if ns.is_empty() {
            return Ok(Vec::new());
        }
        if ns.contains(&0) {
            return Err(domain("n must be at least 1"));
        }
        if ns.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("sample points must be ascending"));
        }
        let n_max = *ns.last().expect("nonempty");
        let at = model.at(eps)?;
        let p_f = p.to_f64().unwrap_or(f64::NAN);
        let raise = |v: f64| -> f64 {
            if p_f == 1.0 {
                v
            } else if p_f == 2.0 {
                v * v
            } else if v == 0.0 {
                0.0
            } else {
                v.powf(p_f)
            }
        };
        let cap = self.caps.cesaro;
        let Some(pw) = at.piecewise() else {
            if n_max > cap {
                return Err(Error::EnumerationCapExceeded {
                    what: "Cesàro summation",
                    needed: n_max.to_string(),
                    cap,
                });
            }
            let mut out = Vec::with_capacity(ns.len());
            let mut next = 0usize;
            let mut acc = CompensatedSum::<T>::default();
            for k in 1..=n_max {
                acc.add(T::of(raise(at.value_u64(k)?)));
                while next < ns.len() && ns[next] == k {
                    out.push(acc.value());
                    next += 1;
                }
            }
            return Ok(out);
        };
        // Alternate off-set gaps and on-set runs over [1, n_max].
        let runs = pw.on_set.runs_u64(1, n_max, cap)?;
        let on = Branch::new(&pw.on_tail, at.eps_f, p_f);
        let off = Branch::new(&pw.off_tail, at.eps_f, p_f);
        let mut pieces: Vec<(u64, u64, &Branch<'_>)> = Vec::with_capacity(2 * runs.len() + 1);
        let mut cur = 1u64;
        for &(a, b) in &runs {
            if cur < a {
                pieces.push((cur, a - 1, &off));
            }
            pieces.push((a, b, &on));
            cur = b + 1;
        }
        if cur <= n_max {
            pieces.push((cur, n_max, &off));
        }
        let mut budget = cap;
        let mut segment = |br: &Branch<'_>, a: u64, b: u64| -> Result<f64> {
            br.sum(&at, &raise, a, b, &mut budget, cap, "Cesàro summation")
        };
        let mut out = Vec::with_capacity(ns.len());
        let mut next = 0usize;
        let mut acc = CompensatedSum::<T>::default();
        for (a, b, br) in pieces {
            let mut lo = a;
            while next < ns.len() && ns[next] <= b {
                let hi = ns[next];
                if lo <= hi {
                    acc.add(T::of(segment(br, lo, hi)?));
                    lo = hi + 1;
                }
                out.push(acc.value());
                next += 1;
            }
            if lo <= b {
                acc.add(T::of(segment(br, lo, b)?));
            }
        }
        Ok(out)
    }

    pub fn cesaro_sum<T: Scalar>(
        &self,
        model: &TailModel,
        n: u64,
        eps: &BigRational,
        p: &BigRational,
        alpha: &BigRational,
    ) -> Result<T> {
        check_alpha(alpha)?;
        let sums = self.cesaro_partial_sums::<T>(model, &[n], eps, p)?;
        Ok(sums[0] / big_pow::<T>(&BigUint::from(n), alpha))
    }

    pub fn lacunary_count(
        &self,
        model: &TailModel,
        theta: &LacunarySequence,
        r: u64,
        eps: &BigRational,
        delta: &BigRational,
    ) -> Result<BigUint> {
        let (lo, hi) = theta.block(r)?;
        QualifyingCounter::new(model, eps, delta, self.caps)?.count_between(&lo, &hi)
    }

    pub fn s_theta_density<T: Scalar>(
        &self,
        model: &TailModel,
        theta: &LacunarySequence,
        r: u64,
        params: &MethodParams,
    ) -> Result<T> {
        params.validate()?;
        let (lo, hi) = theta.block(r)?;
        let c = QualifyingCounter::new(model, &params.eps, &params.delta, self.caps)?
            .count_between(&lo, &hi)?;
        Ok(T::of_big(&c) / big_pow::<T>(&(hi - lo), &params.alpha))
    }

    /// `sum_{k in I_r} tail(k)`.
    pub fn block_tail_sum(
        &self,
        model: &TailModel,
        theta: &LacunarySequence,
        r: u64,
        eps: &BigRational,
    ) -> Result<f64> {
        check_eps(eps)?;
        model.validate()?;
        let (lo, hi) = theta.block(r)?;
        let at = model.at(eps)?;
        self.range_tail_sum(&at, &(lo + 1u32), &hi)
    }

    pub fn n_theta_mean<T: Scalar>(
        &self,
        model: &TailModel,
        theta: &LacunarySequence,
        r: u64,
        eps: &BigRational,
        alpha: &BigRational,
    ) -> Result<T> {
        check_alpha(alpha)?;
        let s = self.block_tail_sum(model, theta, r, eps)?;
        let h = theta.h(r)?;
        Ok(T::of(s) / big_pow::<T>(&h, alpha))
    }

    /// `sum_{k=a}^{b} tail(k)`, by closed form on each branch run where possible.
    fn range_tail_sum(&self, at: &TailAt<'_>, a: &BigUint, b: &BigUint) -> Result<f64> {
        let mut budget = self.caps.block;
        let mut acc = CompensatedSum::<f64>::default();
        match at.piecewise() {
            Some(pw) if b.to_u64().is_some() => {
                let (a, b) = (a.to_u64().expect("a <= b"), b.to_u64().expect("checked"));
                let cap = self.caps.block;
                let runs = pw.on_set.runs_u64(a, b, cap)?;
                let on = Branch::new(&pw.on_tail, at.eps_f, 1.0);
                let off = Branch::new(&pw.off_tail, at.eps_f, 1.0);
                let id = |v: f64| v;
                let mut cur = a;
                for (s, e) in runs {
                    if cur < s {
                        acc.add(off.sum(
                            at,
                            &id,
                            cur,
                            s - 1,
                            &mut budget,
                            cap,
                            "block summation",
                        )?);
                    }
                    acc.add(on.sum(at, &id, s, e, &mut budget, cap, "block summation")?);
                    cur = e + 1;
                }
                if cur <= b {
                    acc.add(off.sum(at, &id, cur, b, &mut budget, cap, "block summation")?);
                }
            }
            Some(pw) => {
                let runs = pw.on_set.runs(a, b, self.caps.block)?;
                let mut cur = a.clone();
                for (s, e) in runs {
                    if cur < s {
                        let before = &s - 1u32;
                        acc.add(self.segment_sum(at, &pw.off_tail, &cur, &before, &mut budget)?);
                    }
                    acc.add(self.segment_sum(at, &pw.on_tail, &s, &e, &mut budget)?);
                    cur = e + 1u32;
                }
                if &cur <= b {
                    acc.add(self.segment_sum(at, &pw.off_tail, &cur, b, &mut budget)?);
                }
            }
            None => {
                let (a64, b64) = direct_range(a, b, &mut budget, self.caps.block)?;
                for k in a64..=b64 {
                    acc.add(at.value_u64(k)?);
                }
            }
        }
        Ok(acc.value())
    }

    fn segment_sum(
        &self,
        at: &TailAt<'_>,
        expr: &TailExpr,
        a: &BigUint,
        b: &BigUint,
        budget: &mut u64,
    ) -> Result<f64> {
        let endpoint = |k: &BigUint| -> Result<()> {
            let v = expr.eval(k.to_f64().unwrap_or(f64::INFINITY), at.eps_f);
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::ExpressionOutOfRange {
                    value: v,
                    k: k.to_string(),
                    eps: format_ratio(&at.eps),
                })
            }
        };
        if let Some(terms) = expr.power_terms(at.eps_f) {
            let len_small = (b - a) < BigUint::from(64u32);
            if !len_small {
                if let Some(s) = interval_sum(&terms, a, b) {
                    endpoint(a)?;
                    endpoint(b)?;
                    return Ok(s);
                }
            }
        }
        let (a64, b64) = direct_range(a, b, budget, self.caps.block)?;
        let mut acc = CompensatedSum::<f64>::default();
        for k in a64..=b64 {
            acc.add(at.branch_value(expr, k)?);
        }
        Ok(acc.value())
    }
}

/// One branch of a piecewise model with the closed form of `expr^p`, if any.
struct Branch<'e> {
    expr: &'e TailExpr,
    terms: Option<Vec<crate::expr::PowerTerm>>,
}

impl<'e> Branch<'e> {
    fn new(expr: &'e TailExpr, eps: f64, p: f64) -> Self {
        Branch {
            expr,
            terms: expr.power_terms_raised(eps, p),
        }
    }

    /// `sum_{k=a}^{b} raise(expr(k))`: closed form for runs of 64 or more
    /// terms, otherwise term by term against `budget`.
    #[allow(clippy::too_many_arguments)]
    fn sum(
        &self,
        at: &TailAt<'_>,
        raise: &dyn Fn(f64) -> f64,
        a: u64,
        b: u64,
        budget: &mut u64,
        cap: u64,
        what: &'static str,
    ) -> Result<f64> {
        if b - a >= 64 {
            if let Some(s) = self
                .terms
                .as_deref()
                .and_then(|t| crate::sums::interval_sum_u64(t, a, b))
            {
                at.branch_value(self.expr, a)?;
                at.branch_value(self.expr, b)?;
                return Ok(s);
            }
        }
        let len = b - a + 1;
        if len > *budget {
            return Err(Error::EnumerationCapExceeded {
                what,
                needed: len.to_string(),
                cap,
            });
        }
        *budget -= len;
        let mut acc = CompensatedSum::<f64>::default();
        for k in a..=b {
            acc.add(raise(at.branch_value(self.expr, k)?));
        }
        Ok(acc.value())
    }
}

fn direct_range(a: &BigUint, b: &BigUint, budget: &mut u64, cap: u64) -> Result<(u64, u64)> {
    let len = b - a + 1u32;
    let too_big = || Error::EnumerationCapExceeded {
        what: "block summation",
        needed: len.to_string(),
        cap,
    };
    let len64 = len.to_u64().ok_or_else(too_big)?;
    if len64 > *budget || b.to_u64().is_none() {
        return Err(too_big());
    }
    *budget -= len64;
    Ok((a.to_u64().expect("a <= b"), b.to_u64().expect("checked")))
}

/// Largest `k` with `off_tail(k, eps) >= delta`, for an off-tail declared
/// nonincreasing (or constant in `k`).
pub fn qualifying_prefix_bound(
    model: &TailModel,
    eps: &BigRational,
    delta: &BigRational,
) -> Result<PrefixBound> {
    check_eps(eps)?;
    check_delta(delta)?;
    match &model.repr {
        ModelRepr::Piecewise(p) => {
            let at = model.at(eps)?;
            let dir = off_direction(p, &at)?;
            if dir == Direction::Unknown {
                return Err(Error::MonotonicityUndeclared);
            }
            let delta_f = delta.to_f64().unwrap_or(f64::NAN);
            Ok(match find_region(&at, &p.off_tail, dir, delta, delta_f)? {
                Some(Region::Empty) => PrefixBound::None,
                Some(Region::Prefix(b)) => PrefixBound::Bound(b),
                Some(Region::All) => PrefixBound::Unbounded,
                _ => unreachable!("off-tail direction is constant or nonincreasing"),
            })
        }
        ModelRepr::Scaled { inner, factor } => {
            qualifying_prefix_bound(inner, &(eps / factor), delta)
        }
        _ => Err(Error::MonotonicityUndeclared),
    }
}

pub fn ps_count(
    model: &TailModel,
    n: &BigUint,
    eps: &BigRational,
    delta: &BigRational,
) -> Result<BigUint> {
    Evaluator::default().ps_count(model, n, eps, delta)
}

pub fn ps_density<T: Scalar>(model: &TailModel, n: &BigUint, params: &MethodParams) -> Result<T> {
    Evaluator::default().ps_density(model, n, params)
}

pub fn cesaro_sum<T: Scalar>(
    model: &TailModel,
    n: u64,
    eps: &BigRational,
    p: &BigRational,
    alpha: &BigRational,
) -> Result<T> {
    Evaluator::default().cesaro_sum(model, n, eps, p, alpha)
}

pub fn lacunary_count(
    model: &TailModel,
    theta: &LacunarySequence,
    r: u64,
    eps: &BigRational,
    delta: &BigRational,
) -> Result<BigUint> {
    Evaluator::default().lacunary_count(model, theta, r, eps, delta)
}

pub fn s_theta_density<T: Scalar>(
    model: &TailModel,
    theta: &LacunarySequence,
    r: u64,
    params: &MethodParams,
) -> Result<T> {
    Evaluator::default().s_theta_density(model, theta, r, params)
}

pub fn n_theta_mean<T: Scalar>(
    model: &TailModel,
    theta: &LacunarySequence,
    r: u64,
    eps: &BigRational,
    alpha: &BigRational,
) -> Result<T> {
    Evaluator::default().n_theta_mean(model, theta, r, eps, alpha)
}
