//! Index sets `K ⊂ N` with exact membership and exact counting `K(1, n)`.
//!
//! Membership never touches floating point. Counting is closed-form per kind;
//! the only loops are over structural pieces (roots, factorial intervals,
//! lacunary blocks), never over the indices themselves.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::exact::{floor_rational_power, gcd_u32, iroot_floor, iroot_floor_u128, pow_u128};
use crate::lacunary::{LacunarySequence, RatioPairs, TermIter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn matches(self, g: u64) -> bool {
        g.is_multiple_of(2) == (self == Parity::Even)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexSet {
    /// `{ floor(m^(s/r)) : m >= 1 }` with `s > r >= 1`, `gcd(s, r) = 1`.
    FloorPower {
        s: u32,
        r: u32,
    },
    /// `{ m^m : m >= 1 }`.
    SelfPower,
    /// `{ n : G(n) has the given parity }` where `G(n) = g` iff `g! < n <= (g+1)!`;
    /// `G(1) = 0` by convention.
    FactorialParity(Parity),
    /// The first `floor(h_r^c)` integers of every block `I_r` of `theta`.
    BlockPrefix {
        theta: LacunarySequence,
        c: BigRational,
    },
    /// The union of the blocks `(a_j, b_j]` of the ratio-controlled construction.
    RatioBlocks {
        j_max: u32,
    },
    /// Sorted, duplicate-free, all entries >= 1.
    FiniteList(Vec<BigUint>),
    Empty,
    All,
}

/// A maximal run `[start, end]` of consecutive members.
pub type Run = (BigUint, BigUint);

fn push_run(runs: &mut Vec<Run>, start: BigUint, end: BigUint) {
    if let Some(last) = runs.last_mut() {
        if &last.1 + 1u32 >= start {
            if end > last.1 {
                last.1 = end;
            }
            return;
        }
    }
    runs.push((start, end));
}

fn clip(lo: &BigUint, hi: &BigUint, start: BigUint, end: BigUint) -> Option<Run> {
    let s = if &start < lo { lo.clone() } else { start };
    let e = if &end > hi { hi.clone() } else { end };
    (s <= e).then_some((s, e))
}

/// `(g, g!, (g+1)!)` for `g = 1, 2, ...`.
fn factorial_intervals() -> impl Iterator<Item = (u64, BigUint, BigUint)> {
    let mut g = 0u64;
    let mut lo = BigUint::one();
    std::iter::from_fn(move || {
        g += 1;
        let start = lo.clone() * g; // g!
        let end = &start * (g + 1); // (g+1)!
        lo = start.clone();
        Some((g, start, end))
    })
}

/// Blocks `(r, k_{r-1}, k_r)` of a lacunary sequence.
struct Blocks<'a> {
    terms: TermIter<'a>,
    prev: Option<BigUint>,
    r: u64,
}

impl<'a> Blocks<'a> {
    fn new(theta: &'a LacunarySequence) -> Self {
        let mut terms = theta.iter();
        let prev = terms.next();
        Self { terms, prev, r: 0 }
    }
}

impl Iterator for Blocks<'_> {
    type Item = (u64, BigUint, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        let lo = self.prev.take()?;
        let hi = self.terms.next()?;
        self.prev = Some(hi.clone());
        self.r += 1;
        Some((self.r, lo, hi))
    }
}

impl IndexSet {
    pub fn finite_list(mut items: Vec<BigUint>) -> Result<Self> {
        items.sort();
        items.dedup();
        let s = IndexSet::FiniteList(items);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IndexSet::FloorPower { s, r } => {
                if !(*s > *r && *r >= 1) {
                    return Err(domain(format!("floor_power({s},{r}) needs s > r >= 1")));
                }
                if gcd_u32(*s, *r) != 1 {
                    return Err(domain(format!("floor_power({s},{r}) must be gcd-reduced")));
                }
                if *s > 64 {
                    return Err(domain("floor_power exponent too large"));
                }
                Ok(())
            }
            IndexSet::BlockPrefix { theta, c } => {
                theta.validate()?;
                if *c < BigRational::zero() || *c > BigRational::one() {
                    return Err(domain(format!(
                        "block_prefix exponent {c} must lie in [0, 1]"
                    )));
                }
                if c.denom().to_u32().is_none() || c.numer().to_u32().is_none() {
                    return Err(domain(
                        "block_prefix exponent has too large a numerator or denominator",
                    ));
                }
                Ok(())
            }
            IndexSet::RatioBlocks { j_max } if *j_max < 1 => {
                Err(domain("ratio_blocks needs j_max >= 1"))
            }
            IndexSet::FiniteList(v) => {
                if v.iter().any(Zero::is_zero) {
                    return Err(domain("list entries must be positive"));
                }
                if v.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(domain("list entries must be sorted and distinct"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, n: &BigUint) -> Result<bool> {
        if n.is_zero() {
            return Err(domain("indices start at 1"));
        }
        self.validate()?;
        if let Some(small) = n.to_u64() {
            if let Some(b) = self.contains_fast(small) {
                return Ok(b);
            }
        }
        Ok(self.contains_big(n))
    }

    pub fn contains_u64(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(domain("indices start at 1"));
        }
        self.validate()?;
        Ok(self
            .contains_fast(n)
            .unwrap_or_else(|| self.contains_big(&BigUint::from(n))))
    }

    /// Exact `|K ∩ [1, n]|`.
    pub fn count(&self, n: &BigUint) -> Result<BigUint> {
        if n.is_zero() {
            return Err(domain("n must be at least 1"));
        }
        self.validate()?;
        Ok(self.count_upto(n))
    }

    pub fn count_u64(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        self.validate()?;
        Ok(self.count_upto_u64(n))
    }

    /// `|K ∩ [1, n]|` with `n = 0` allowed; assumes a validated set.
    pub(crate) fn count_upto(&self, n: &BigUint) -> BigUint {
        if let Some(small) = n.to_u64() {
            if let Some(c) = self.count_fast(small) {
                return BigUint::from(c);
            }
        }
        self.count_big(n)
    }

    pub(crate) fn count_upto_u64(&self, n: u64) -> u64 {
        self.count_fast(n).unwrap_or_else(|| {
            self.count_big(&BigUint::from(n))
                .to_u64()
                .expect("count <= n")
        })
    }

    fn contains_fast(&self, n: u64) -> Option<bool> {
        match self {
            IndexSet::FloorPower { s, r } => {
                let n = u128::from(n);
                let upper = pow_u128(n + 1, *r)? - 1;
                let m = iroot_floor_u128(upper, *s);
                Some(m >= 1 && pow_u128(m, *s)? >= pow_u128(n, *r)?)
            }
            IndexSet::SelfPower => {
                let mut m = 1u32;
                loop {
                    let p = u64::from(m).checked_pow(m)?;
                    if p >= n {
                        return Some(p == n);
                    }
                    m += 1;
                }
            }
            IndexSet::FactorialParity(par) => {
                if n == 1 {
                    return Some(par.matches(0));
                }
                let mut g = 1u64;
                let mut lo = 1u64; // g!
                loop {
                    let hi = lo.checked_mul(g + 1)?; // (g+1)!
                    if n <= hi {
                        return Some(par.matches(g));
                    }
                    lo = hi;
                    g += 1;
                }
            }
            IndexSet::FiniteList(v) => Some(v.binary_search(&BigUint::from(n)).is_ok()),
            IndexSet::Empty => Some(false),
            IndexSet::All => Some(true),
            _ => None,
        }
    }

    fn contains_big(&self, n: &BigUint) -> bool {
        match self {
            IndexSet::FloorPower { s, r } => {
                let upper: BigUint = Pow::pow(n + 1u32, *r) - 1u32;
                let m = iroot_floor(&upper, *s);
                !m.is_zero() && Pow::pow(&m, *s) >= Pow::pow(n, *r)
            }
            IndexSet::SelfPower => {
                let mut m = 1u32;
                loop {
                    let p = Pow::pow(BigUint::from(m), m);
                    if &p >= n {
                        return &p == n;
                    }
                    m += 1;
                }
            }
            IndexSet::FactorialParity(par) => {
                if n.is_one() {
                    return par.matches(0);
                }
                factorial_intervals()
                    .find(|(_, _, hi)| n <= hi)
                    .map(|(g, _, _)| par.matches(g))
                    .unwrap_or(false)
            }
            IndexSet::BlockPrefix { theta, c } => {
                for (_, lo, hi) in Blocks::new(theta) {
                    if n <= &lo {
                        return false;
                    }
                    if n <= &hi {
                        let p = floor_rational_power(&(&hi - &lo), c).expect("validated exponent");
                        return n - &lo <= p;
                    }
                }
                false
            }
            IndexSet::RatioBlocks { .. } => {
                for (a, b) in RatioPairs::new() {
                    if n <= &a {
                        return false;
                    }
                    if n <= &b {
                        return true;
                    }
                }
                unreachable!("ratio pairs are unbounded")
            }
            IndexSet::FiniteList(v) => v.binary_search(n).is_ok(),
            IndexSet::Empty => false,
            IndexSet::All => true,
        }
    }

    fn count_fast(&self, n: u64) -> Option<u64> {
        match self {
            IndexSet::FloorPower { s, r } => {
                // #{m >= 1 : m^s < (n+1)^r}; the map m -> floor(m^(s/r)) is injective for s > r.
                let upper = pow_u128(u128::from(n) + 1, *r)? - 1;
                u64::try_from(iroot_floor_u128(upper, *s)).ok()
            }
            IndexSet::SelfPower => {
                let mut m = 0u32;
                while let Some(p) = u64::from(m + 1).checked_pow(m + 1) {
                    if p > n {
                        break;
                    }
                    m += 1;
                }
                Some(u64::from(m))
            }
            IndexSet::FactorialParity(par) => {
                if n == 0 {
                    return Some(0);
                }
                let mut total = u64::from(par.matches(0));
                let mut g = 1u64;
                let mut lo = 1u64;
                while lo < n {
                    let hi = lo.checked_mul(g + 1)?;
                    if par.matches(g) {
                        total += hi.min(n) - lo;
                    }
                    lo = hi;
                    g += 1;
                }
                Some(total)
            }
            IndexSet::FiniteList(v) => {
                let key = BigUint::from(n);
                Some(v.partition_point(|x| x <= &key) as u64)
            }
            IndexSet::Empty => Some(0),
            IndexSet::All => Some(n),
            _ => None,
        }
    }

    fn count_big(&self, n: &BigUint) -> BigUint {
        if n.is_zero() {
            return BigUint::zero();
        }
        match self {
            IndexSet::FloorPower { s, r } => {
                let upper: BigUint = Pow::pow(n + 1u32, *r) - 1u32;
                iroot_floor(&upper, *s)
            }
            IndexSet::SelfPower => {
                let mut m = 0u32;
                while Pow::pow(BigUint::from(m + 1), m + 1) <= *n {
                    m += 1;
                }
                BigUint::from(m)
            }
            IndexSet::FactorialParity(par) => {
                let mut total = BigUint::from(u32::from(par.matches(0)));
                for (g, lo, hi) in factorial_intervals() {
                    if &lo >= n {
                        break;
                    }
                    if par.matches(g) {
                        total += if &hi < n { hi } else { n.clone() } - lo;
                    }
                }
                total
            }
            IndexSet::BlockPrefix { theta, c } => {
                let mut total = BigUint::zero();
                for (_, lo, hi) in Blocks::new(theta) {
                    if &lo >= n {
                        break;
                    }
                    let p = floor_rational_power(&(&hi - &lo), c).expect("validated exponent");
                    let avail = n - &lo;
                    total += if avail < p { avail } else { p };
                }
                total
            }
            IndexSet::RatioBlocks { .. } => {
                let mut total = BigUint::zero();
                for (a, b) in RatioPairs::new() {
                    if &a >= n {
                        break;
                    }
                    total += if &b < n { b } else { n.clone() } - a;
                }
                total
            }
            IndexSet::FiniteList(v) => BigUint::from(v.partition_point(|x| x <= n)),
            IndexSet::Empty => BigUint::zero(),
            IndexSet::All => n.clone(),
        }
    }

    /// [`IndexSet::runs`] for a range inside `u64`, avoiding big integers for
    /// floor-power sets.
    pub fn runs_u64(&self, lo: u64, hi: u64, cap: u64) -> Result<Vec<(u64, u64)>> {
        if let IndexSet::FloorPower { s, r } = self {
            if lo == 0 {
                return Err(domain("indices start at 1"));
            }
            self.validate()?;
            let first = self.count_upto_u64(lo - 1) + 1;
            let last = self.count_upto_u64(hi);
            if last < first {
                return Ok(Vec::new());
            }
            if last - first + 1 > cap {
                return Err(Error::EnumerationCapExceeded {
                    what: "member runs",
                    needed: (last - first + 1).to_string(),
                    cap,
                });
            }
            let mut runs: Vec<(u64, u64)> = Vec::new();
            for m in first..=last {
                let v = pow_u128(u128::from(m), *s)
                    .map(|x| iroot_floor_u128(x, *r))
                    .and_then(|v| u64::try_from(v).ok())
                    .ok_or_else(|| domain("floor power overflow"))?;
                match runs.last_mut() {
                    Some(l) if l.1 + 1 >= v => l.1 = l.1.max(v),
                    _ => runs.push((v, v)),
                }
            }
            return Ok(runs);
        }
        let runs = self.runs(&BigUint::from(lo), &BigUint::from(hi), cap)?;
        Ok(runs
            .iter()
            .map(|(a, b)| (a.to_u64().expect("<= hi"), b.to_u64().expect("<= hi")))
            .collect())
    }

    /// Maximal runs of members inside `[lo, hi]` (`lo >= 1`). Fails when the
    /// number of structural pieces to visit exceeds `cap`.
    pub fn runs(&self, lo: &BigUint, hi: &BigUint, cap: u64) -> Result<Vec<Run>> {
        if lo.is_zero() {
            return Err(domain("indices start at 1"));
        }
        self.validate()?;
        let mut runs = Vec::new();
        if lo > hi {
            return Ok(runs);
        }
        let too_many = |needed: &BigUint| Error::EnumerationCapExceeded {
            what: "member runs",
            needed: needed.to_string(),
            cap,
        };
        match self {
            IndexSet::FloorPower { s, r } => {
                let first = self.count_upto(&(lo - 1u32)) + 1u32;
                let last = self.count_upto(hi);
                if last < first {
                    return Ok(runs);
                }
                let needed = &last - &first + 1u32;
                if needed > BigUint::from(cap) {
                    return Err(too_many(&needed));
                }
                let mut m = first;
                while m <= last {
                    let v = iroot_floor(&Pow::pow(&m, *s), *r);
                    push_run(&mut runs, v.clone(), v);
                    m += 1u32;
                }
            }
            IndexSet::SelfPower => {
                let mut m = 1u32;
                loop {
                    let p = Pow::pow(BigUint::from(m), m);
                    if &p > hi {
                        break;
                    }
                    if &p >= lo {
                        push_run(&mut runs, p.clone(), p);
                    }
                    m += 1;
                }
            }
            IndexSet::FactorialParity(par) => {
                if par.matches(0) && lo.is_one() {
                    push_run(&mut runs, BigUint::one(), BigUint::one());
                }
                for (g, start, end) in factorial_intervals() {
                    if &start >= hi {
                        break;
                    }
                    if par.matches(g) {
                        if let Some((a, b)) = clip(lo, hi, start + 1u32, end) {
                            push_run(&mut runs, a, b);
                        }
                    }
                }
            }
            IndexSet::BlockPrefix { theta, c } => {
                let mut visited = 0u64;
                for (_, start, end) in Blocks::new(theta) {
                    if &start >= hi {
                        break;
                    }
                    visited += 1;
                    if visited > cap {
                        return Err(too_many(&BigUint::from(visited)));
                    }
                    let p = floor_rational_power(&(&end - &start), c)?;
                    if p.is_zero() {
                        continue;
                    }
                    if let Some((a, b)) = clip(lo, hi, &start + 1u32, &start + p) {
                        push_run(&mut runs, a, b);
                    }
                }
            }
            IndexSet::RatioBlocks { .. } => {
                for (a, b) in RatioPairs::new() {
                    if &a >= hi {
                        break;
                    }
                    if let Some((x, y)) = clip(lo, hi, a + 1u32, b) {
                        push_run(&mut runs, x, y);
                    }
                }
            }
            IndexSet::FiniteList(v) => {
                for x in v.iter().filter(|x| *x >= lo && *x <= hi) {
                    push_run(&mut runs, x.clone(), x.clone());
                }
            }
            IndexSet::Empty => {}
            IndexSet::All => runs.push((lo.clone(), hi.clone())),
        }
        Ok(runs)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSet::FloorPower { s, r } => write!(f, "floor_power({s}, {r})"),
            IndexSet::SelfPower => f.write_str("self_power"),
            IndexSet::FactorialParity(Parity::Even) => f.write_str("factorial_parity(even)"),
            IndexSet::FactorialParity(Parity::Odd) => f.write_str("factorial_parity(odd)"),
            IndexSet::BlockPrefix { theta, c } => {
                write!(
                    f,
                    "block_prefix({theta}, {})",
                    crate::exact::format_ratio(c)
                )
            }
            IndexSet::RatioBlocks { j_max } => write!(f, "ratio_blocks({j_max})"),
            IndexSet::FiniteList(v) => {
                f.write_str("list[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            IndexSet::Empty => f.write_str("empty"),
            IndexSet::All => f.write_str("all"),
        }
    }
}

/// `G(n)`: the `g` with `g! < n <= (g+1)!`, and `G(1) = 0`.
pub fn factorial_class(n: &BigUint) -> Result<u64> {
    if n.is_zero() {
        return Err(domain("indices start at 1"));
    }
    if n.is_one() {
        return Ok(0);
    }
    Ok(factorial_intervals()
        .find(|(_, _, hi)| n <= hi)
        .map(|(g, _, _)| g)
        .expect("factorials are unbounded"))
}
