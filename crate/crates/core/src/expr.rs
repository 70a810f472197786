//! Tail expressions: small expression trees in `k` and `eps`.

use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::exact::{format_ratio, pow_ge_exact, pow_rational_exact, rat};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TailExpr {
    /// A nonnegative rational literal; negative constants are `Neg(Lit(..))`.
    Lit(BigRational),
    K,
    Eps,
    Neg(Box<TailExpr>),
    Add(Box<TailExpr>, Box<TailExpr>),
    Sub(Box<TailExpr>, Box<TailExpr>),
    Mul(Box<TailExpr>, Box<TailExpr>),
    Div(Box<TailExpr>, Box<TailExpr>),
    Pow(Box<TailExpr>, Box<TailExpr>),
    Min(Box<TailExpr>, Box<TailExpr>),
    Max(Box<TailExpr>, Box<TailExpr>),
}

/// Monotonicity in `k` over `k >= 1` at a fixed `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Unknown,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::NonDecreasing => Direction::NonIncreasing,
            Direction::NonIncreasing => Direction::NonDecreasing,
            d => d,
        }
    }

    /// Direction of a sum, or of min/max, of two functions.
    fn combine(self, other: Self) -> Self {
        match (self, other) {
            (Direction::Constant, d) | (d, Direction::Constant) => d,
            (a, b) if a == b => a,
            _ => Direction::Unknown,
        }
    }
}

/// Direction plus a conservative value range over `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub dir: Direction,
    pub lo: f64,
    pub hi: f64,
}

impl Shape {
    const UNKNOWN: Shape = Shape {
        dir: Direction::Unknown,
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn constant(v: f64) -> Shape {
        Shape {
            dir: Direction::Constant,
            lo: v,
            hi: v,
        }
    }

    fn checked(self) -> Shape {
        if self.lo.is_nan() || self.hi.is_nan() {
            Shape::UNKNOWN
        } else {
            self
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        (self.dir == Direction::Constant && self.lo == self.hi).then_some(self.lo)
    }

    fn neg(self) -> Shape {
        Shape {
            dir: self.dir.flip(),
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    fn recip(self) -> Shape {
        if self.lo > 0.0 || self.hi < 0.0 {
            Shape {
                dir: self.dir.flip(),
                lo: 1.0 / self.hi,
                hi: 1.0 / self.lo,
            }
        } else {
            Shape::UNKNOWN
        }
    }

    fn mul(self, other: Shape) -> Shape {
        if self.hi <= 0.0 {
            return self.neg().mul(other).neg();
        }
        if other.hi <= 0.0 {
            return self.mul(other.neg()).neg();
        }
        if self.lo < 0.0 || other.lo < 0.0 {
            return Shape::UNKNOWN;
        }
        let dir = match (self.constant_value(), other.constant_value()) {
            (Some(0.0), _) | (_, Some(0.0)) => Direction::Constant,
            _ => self.dir.combine(other.dir),
        };
        let prod = |x: f64, y: f64| if x == 0.0 || y == 0.0 { 0.0 } else { x * y };
        Shape {
            dir,
            lo: prod(self.lo, other.lo),
            hi: prod(self.hi, other.hi),
        }
        .checked()
    }
}

/// One term `coef * k^power * geo^k` of a power-sum decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub power: f64,
    pub geo: f64,
}

const MAX_POWER_TERMS: usize = 16;

fn boxed(a: TailExpr, b: TailExpr) -> (Box<TailExpr>, Box<TailExpr>) {
    (Box::new(a), Box::new(b))
}

impl TailExpr {
    /// A literal of any sign.
    pub fn rational(r: BigRational) -> Self {
        if r.is_negative() {
            TailExpr::Neg(Box::new(TailExpr::Lit(-r)))
        } else {
            TailExpr::Lit(r)
        }
    }

    pub fn lit(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    pub fn int(n: i64) -> Self {
        Self::lit(n, 1)
    }

    pub fn k() -> Self {
        TailExpr::K
    }

    pub fn eps() -> Self {
        TailExpr::Eps
    }

    pub fn pow(base: TailExpr, exponent: TailExpr) -> Self {
        let (a, b) = boxed(base, exponent);
        TailExpr::Pow(a, b)
    }

    pub fn min(a: TailExpr, b: TailExpr) -> Self {
        let (a, b) = boxed(a, b);
        TailExpr::Min(a, b)
    }

    pub fn max(a: TailExpr, b: TailExpr) -> Self {
        let (a, b) = boxed(a, b);
        TailExpr::Max(a, b)
    }

    pub fn uses_k(&self) -> bool {
        self.any(&|e| matches!(e, TailExpr::K))
    }

    pub fn uses_eps(&self) -> bool {
        self.any(&|e| matches!(e, TailExpr::Eps))
    }

    fn any(&self, pred: &dyn Fn(&TailExpr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            TailExpr::Lit(_) | TailExpr::K | TailExpr::Eps => false,
            TailExpr::Neg(a) => a.any(pred),
            TailExpr::Add(a, b)
            | TailExpr::Sub(a, b)
            | TailExpr::Mul(a, b)
            | TailExpr::Div(a, b)
            | TailExpr::Pow(a, b)
            | TailExpr::Min(a, b)
            | TailExpr::Max(a, b) => a.any(pred) || b.any(pred),
        }
    }

    /// All literals are nonnegative.
    pub fn is_well_formed(&self) -> bool {
        !self.any(&|e| matches!(e, TailExpr::Lit(r) if r.is_negative()))
    }

    pub fn eval(&self, k: f64, eps: f64) -> f64 {
        match self {
            TailExpr::Lit(r) => r.to_f64().unwrap_or(f64::NAN),
            TailExpr::K => k,
            TailExpr::Eps => eps,
            TailExpr::Neg(a) => -a.eval(k, eps),
            TailExpr::Add(a, b) => a.eval(k, eps) + b.eval(k, eps),
            TailExpr::Sub(a, b) => a.eval(k, eps) - b.eval(k, eps),
            TailExpr::Mul(a, b) => a.eval(k, eps) * b.eval(k, eps),
            TailExpr::Div(a, b) => a.eval(k, eps) / b.eval(k, eps),
            TailExpr::Pow(a, b) => pow_f64(a.eval(k, eps), b.eval(k, eps)),
            TailExpr::Min(a, b) => a.eval(k, eps).min(b.eval(k, eps)),
            TailExpr::Max(a, b) => a.eval(k, eps).max(b.eval(k, eps)),
        }
    }

    /// Exact value when it is rational and cheap to obtain.
    pub fn eval_exact(&self, k: &BigRational, eps: &BigRational) -> Option<BigRational> {
        Some(match self {
            TailExpr::Lit(r) => r.clone(),
            TailExpr::K => k.clone(),
            TailExpr::Eps => eps.clone(),
            TailExpr::Neg(a) => -a.eval_exact(k, eps)?,
            TailExpr::Add(a, b) => a.eval_exact(k, eps)? + b.eval_exact(k, eps)?,
            TailExpr::Sub(a, b) => a.eval_exact(k, eps)? - b.eval_exact(k, eps)?,
            TailExpr::Mul(a, b) => a.eval_exact(k, eps)? * b.eval_exact(k, eps)?,
            TailExpr::Div(a, b) => {
                let d = b.eval_exact(k, eps)?;
                if d.is_zero() {
                    return None;
                }
                a.eval_exact(k, eps)? / d
            }
            TailExpr::Pow(a, b) => {
                pow_rational_exact(&a.eval_exact(k, eps)?, &b.eval_exact(k, eps)?)?
            }
            TailExpr::Min(a, b) => a.eval_exact(k, eps)?.min(b.eval_exact(k, eps)?),
            TailExpr::Max(a, b) => a.eval_exact(k, eps)?.max(b.eval_exact(k, eps)?),
        })
    }

    /// `value >= threshold` where `value` is this expression at `(k, eps)`.
    ///
    /// Decided in double precision unless the two sides are within a relative
    /// `1e-12` of each other; then exact rational arithmetic decides when the
    /// value is rational (or a rational power), and the float comparison stands
    /// otherwise.
    pub fn ge(&self, k: &BigRational, eps: &BigRational, threshold: &BigRational) -> bool {
        let kf = k.to_f64().unwrap_or(f64::INFINITY);
        let ef = eps.to_f64().unwrap_or(f64::NAN);
        let t = threshold.to_f64().unwrap_or(f64::NAN);
        let v = self.eval(kf, ef);
        if !near(v, t) {
            return v >= t;
        }
        if let Some(x) = self.eval_exact(k, eps) {
            return x >= *threshold;
        }
        if let TailExpr::Pow(a, b) = self {
            if let (Some(base), Some(e)) = (a.eval_exact(k, eps), b.eval_exact(k, eps)) {
                if let Some(ans) = pow_ge_exact(&base, &e, threshold) {
                    return ans;
                }
            }
        }
        v >= t
    }

    /// Monotonicity and value range over `k >= 1` at the given `eps`.
    pub fn shape(&self, eps: f64) -> Shape {
        match self {
            TailExpr::Lit(r) => Shape::constant(r.to_f64().unwrap_or(f64::NAN)),
            TailExpr::Eps => Shape::constant(eps),
            TailExpr::K => Shape {
                dir: Direction::NonDecreasing,
                lo: 1.0,
                hi: f64::INFINITY,
            },
            TailExpr::Neg(a) => a.shape(eps).neg(),
            TailExpr::Add(a, b) => {
                let (x, y) = (a.shape(eps), b.shape(eps));
                Shape {
                    dir: x.dir.combine(y.dir),
                    lo: x.lo + y.lo,
                    hi: x.hi + y.hi,
                }
                .checked()
            }
            TailExpr::Sub(a, b) => {
                let (x, y) = (a.shape(eps), b.shape(eps).neg());
                Shape {
                    dir: x.dir.combine(y.dir),
                    lo: x.lo + y.lo,
                    hi: x.hi + y.hi,
                }
                .checked()
            }
            TailExpr::Mul(a, b) => a.shape(eps).mul(b.shape(eps)),
            TailExpr::Div(a, b) => a.shape(eps).mul(b.shape(eps).recip()),
            TailExpr::Pow(a, b) => pow_shape(a.shape(eps), b.shape(eps)),
            TailExpr::Min(a, b) => {
                let (x, y) = (a.shape(eps), b.shape(eps));
                Shape {
                    dir: x.dir.combine(y.dir),
                    lo: x.lo.min(y.lo),
                    hi: x.hi.min(y.hi),
                }
            }
            TailExpr::Max(a, b) => {
                let (x, y) = (a.shape(eps), b.shape(eps));
                Shape {
                    dir: x.dir.combine(y.dir),
                    lo: x.lo.max(y.lo),
                    hi: x.hi.max(y.hi),
                }
            }
        }
    }

    /// Rewrites the expression at fixed `eps` as `sum coef * k^power * geo^k`,
    /// or `None` when it has no such form.
    pub fn power_terms(&self, eps: f64) -> Option<Vec<PowerTerm>> {
        let terms = match self {
            TailExpr::Lit(_) | TailExpr::Eps => vec![PowerTerm {
                coef: self.eval(1.0, eps),
                power: 0.0,
                geo: 1.0,
            }],
            TailExpr::K => vec![PowerTerm {
                coef: 1.0,
                power: 1.0,
                geo: 1.0,
            }],
            TailExpr::Neg(a) => negate(a.power_terms(eps)?),
            TailExpr::Add(a, b) => {
                let mut t = a.power_terms(eps)?;
                t.extend(b.power_terms(eps)?);
                t
            }
            TailExpr::Sub(a, b) => {
                let mut t = a.power_terms(eps)?;
                t.extend(negate(b.power_terms(eps)?));
                t
            }
            TailExpr::Mul(a, b) => product(&a.power_terms(eps)?, &b.power_terms(eps)?),
            TailExpr::Div(a, b) => {
                let d = b.power_terms(eps)?;
                let [t] = d.as_slice() else { return None };
                if t.coef == 0.0 {
                    return None;
                }
                let inv = PowerTerm {
                    coef: 1.0 / t.coef,
                    power: -t.power,
                    geo: 1.0 / t.geo,
                };
                product(&a.power_terms(eps)?, &[inv])
            }
            TailExpr::Pow(a, b) => {
                let base = a.power_terms(eps)?;
                let exp = b.power_terms(eps)?;
                match (base.as_slice(), exp.as_slice()) {
                    // (c k^x g^k)^y with constant y
                    ([t], [e]) if e.power == 0.0 && e.geo == 1.0 => {
                        let y = e.coef;
                        if t.coef <= 0.0 {
                            return None;
                        }
                        vec![PowerTerm {
                            coef: t.coef.powf(y),
                            power: t.power * y,
                            geo: t.geo.powf(y),
                        }]
                    }
                    // x^(c k) with constant x > 0
                    ([t], [e])
                        if t.power == 0.0 && t.geo == 1.0 && e.power == 1.0 && e.geo == 1.0 =>
                    {
                        if t.coef <= 0.0 {
                            return None;
                        }
                        vec![PowerTerm {
                            coef: 1.0,
                            power: 0.0,
                            geo: t.coef.powf(e.coef),
                        }]
                    }
                    _ => return None,
                }
            }
            TailExpr::Min(..) | TailExpr::Max(..) => {
                if self.uses_k() {
                    return None;
                }
                vec![PowerTerm {
                    coef: self.eval(1.0, eps),
                    power: 0.0,
                    geo: 1.0,
                }]
            }
        };
        let merged = merge(terms);
        (merged.len() <= MAX_POWER_TERMS
            && merged
                .iter()
                .all(|t| t.coef.is_finite() && t.geo.is_finite()))
        .then_some(merged)
    }

    /// [`TailExpr::power_terms`] of `self^p`, for `p = 1`, a single term, or a
    /// small integer `p`.
    pub(crate) fn power_terms_raised(&self, eps: f64, p: f64) -> Option<Vec<PowerTerm>> {
        let terms = self.power_terms(eps)?;
        if p == 1.0 || terms.is_empty() {
            return Some(terms);
        }
        if let [t] = terms.as_slice() {
            return (t.coef > 0.0 && t.geo > 0.0).then(|| {
                vec![PowerTerm {
                    coef: t.coef.powf(p),
                    power: t.power * p,
                    geo: t.geo.powf(p),
                }]
            });
        }
        if p.fract() != 0.0 || !(2.0..=4.0).contains(&p) {
            return None;
        }
        let mut acc = terms.clone();
        for _ in 1..p as usize {
            acc = merge(product(&acc, &terms));
            if acc.len() > MAX_POWER_TERMS {
                return None;
            }
        }
        Some(acc)
    }

    fn precedence(&self) -> u8 {
        match self {
            TailExpr::Add(..) | TailExpr::Sub(..) => 1,
            TailExpr::Mul(..) | TailExpr::Div(..) => 2,
            TailExpr::Neg(_) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn near(v: f64, t: f64) -> bool {
    let scale = v.abs().max(t.abs());
    (v - t).abs() <= 1e-12 * scale
}

fn pow_f64(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= f64::from(i32::MAX) {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

fn pow_shape(base: Shape, exp: Shape) -> Shape {
    if let Some(y) = exp.constant_value() {
        if y == 0.0 {
            return Shape::constant(1.0);
        }
        if base.lo > 0.0 || (base.lo >= 0.0 && y > 0.0) {
            let (a, b) = (pow_f64(base.lo, y), pow_f64(base.hi, y));
            return if y > 0.0 {
                Shape {
                    dir: base.dir,
                    lo: a,
                    hi: b,
                }
            } else {
                Shape {
                    dir: base.dir.flip(),
                    lo: b,
                    hi: a,
                }
            }
            .checked();
        }
        return Shape::UNKNOWN;
    }
    if let Some(x) = base.constant_value() {
        if x == 1.0 {
            return Shape::constant(1.0);
        }
        if x > 0.0 {
            let (a, b) = (x.powf(exp.lo), x.powf(exp.hi));
            return if x > 1.0 {
                Shape {
                    dir: exp.dir,
                    lo: a,
                    hi: b,
                }
            } else {
                Shape {
                    dir: exp.dir.flip(),
                    lo: b,
                    hi: a,
                }
            }
            .checked();
        }
    }
    Shape::UNKNOWN
}

fn negate(mut t: Vec<PowerTerm>) -> Vec<PowerTerm> {
    for x in &mut t {
        x.coef = -x.coef;
    }
    t
}

fn product(a: &[PowerTerm], b: &[PowerTerm]) -> Vec<PowerTerm> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(PowerTerm {
                coef: x.coef * y.coef,
                power: x.power + y.power,
                geo: x.geo * y.geo,
            });
        }
    }
    out
}

fn merge(terms: Vec<PowerTerm>) -> Vec<PowerTerm> {
    let mut out: Vec<PowerTerm> = Vec::new();
    for t in terms {
        if t.coef == 0.0 {
            continue;
        }
        match out
            .iter_mut()
            .find(|u| u.power == t.power && u.geo == t.geo)
        {
            Some(u) => u.coef += t.coef,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

impl fmt::Display for TailExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &TailExpr, op: &str, b: &TailExpr, p: u8| {
            a.fmt_child(f, p)?;
            write!(f, " {op} ")?;
            b.fmt_child(f, p + 1)
        };
        match self {
            TailExpr::Lit(r) => f.write_str(&format_ratio(r)),
            TailExpr::K => f.write_str("k"),
            TailExpr::Eps => f.write_str("eps"),
            TailExpr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 3)
            }
            TailExpr::Add(a, b) => binary(f, a, "+", b, 1),
            TailExpr::Sub(a, b) => binary(f, a, "-", b, 1),
            TailExpr::Mul(a, b) => binary(f, a, "*", b, 2),
            TailExpr::Div(a, b) => binary(f, a, "/", b, 2),
            TailExpr::Pow(a, b) => write!(f, "pow({a}, {b})"),
            TailExpr::Min(a, b) => write!(f, "min({a}, {b})"),
            TailExpr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for TailExpr {
            type Output = TailExpr;
            fn $method(self, rhs: TailExpr) -> TailExpr {
                let (a, b) = boxed(self, rhs);
                TailExpr::$variant(a, b)
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for TailExpr {
    type Output = TailExpr;
    fn neg(self) -> TailExpr {
        TailExpr::Neg(Box::new(self))
    }
}

impl From<i64> for TailExpr {
    fn from(n: i64) -> Self {
        TailExpr::int(n)
    }
}

impl From<BigInt> for TailExpr {
    fn from(n: BigInt) -> Self {
        TailExpr::rational(BigRational::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    fn ex21_off() -> TailExpr {
        TailExpr::pow(
            TailExpr::int(1) - TailExpr::eps() / TailExpr::int(2),
            TailExpr::k(),
        )
    }

    #[test]
    fn evaluates_geometric_tail() {
        assert!((ex21_off().eval(3.0, 0.5) - 0.421875).abs() < 1e-15);
        assert_eq!(
            ex21_off().eval_exact(&rat_int(3), &rat(1, 2)),
            Some(rat(27, 64))
        );
    }

    #[test]
    fn display_round_trips_through_precedence() {
        assert_eq!(ex21_off().to_string(), "pow(1 - eps / 2, k)");
        let e = TailExpr::pow(TailExpr::k(), TailExpr::lit(-1, 2));
        assert_eq!(e.to_string(), "pow(k, -1/2)");
        let nested = TailExpr::int(1) - (TailExpr::k() - TailExpr::int(1));
        assert_eq!(nested.to_string(), "1 - (k - 1)");
        let neg_prod = -(TailExpr::k() * TailExpr::eps());
        assert_eq!(neg_prod.to_string(), "-(k * eps)");
    }

    #[test]
    fn threshold_ties_use_exact_arithmetic() {
        let root = TailExpr::pow(TailExpr::k(), TailExpr::lit(-1, 2));
        let half = rat(1, 2);
        assert!(root.ge(&rat_int(4), &half, &half));
        assert!(!root.ge(&rat_int(5), &half, &half));
        // 0.1 + 0.2 style float noise is resolved exactly
        let e = TailExpr::lit(1, 10) + TailExpr::lit(2, 10);
        assert!(e.ge(&rat_int(1), &half, &rat(3, 10)));
    }

    #[test]
    fn shapes_of_corpus_tails() {
        assert_eq!(ex21_off().shape(0.5).dir, Direction::NonIncreasing);
        let inv = TailExpr::int(1) / TailExpr::k();
        assert_eq!(inv.shape(0.5).dir, Direction::NonIncreasing);
        let one_minus = TailExpr::int(1) - TailExpr::int(1) / TailExpr::k();
        let s = one_minus.shape(0.5);
        assert_eq!(s.dir, Direction::NonDecreasing);
        assert!(s.lo >= 0.0 && s.hi <= 1.0);
        let wiggle = TailExpr::min(TailExpr::k(), TailExpr::int(1) / TailExpr::k());
        assert_eq!(wiggle.shape(0.5).dir, Direction::Unknown);
        assert_eq!(TailExpr::int(1).shape(0.5).constant_value(), Some(1.0));
    }

    #[test]
    fn power_term_decomposition() {
        let t = (TailExpr::int(1) - TailExpr::int(1) / TailExpr::k())
            .power_terms(0.5)
            .unwrap();
        assert_eq!(t.len(), 2);
        let g = ex21_off().power_terms(0.5).unwrap();
        assert_eq!(
            g,
            vec![PowerTerm {
                coef: 1.0,
                power: 0.0,
                geo: 0.75
            }]
        );
        let sq = TailExpr::pow(TailExpr::k(), TailExpr::lit(-2, 1))
            .power_terms(1.0)
            .unwrap();
        assert_eq!(
            sq,
            vec![PowerTerm {
                coef: 1.0,
                power: -2.0,
                geo: 1.0
            }]
        );
        assert!(TailExpr::min(TailExpr::k(), TailExpr::int(1))
            .power_terms(1.0)
            .is_none());
    }
}
