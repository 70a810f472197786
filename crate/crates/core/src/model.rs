//! Tail models `(k, eps) -> P(|X_k - X| >= eps)` and their combinators.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::exact::{format_ratio, rat, rat_big};
use crate::expr::TailExpr;
use crate::index_set::IndexSet;
use crate::lacunary::LacunarySequence;

/// The piecewise rule: `on_tail` on `on_set`, `off_tail` elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Piecewise {
    pub on_set: IndexSet,
    pub on_tail: TailExpr,
    pub off_tail: TailExpr,
    /// Declared: `off_tail` is nonincreasing in `k` for every `eps`.
    pub off_tail_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelRepr {
    Piecewise(Piecewise),
    /// Tail of `c X_k` against `c X`: the inner tail at `eps / factor`, `factor = |c| > 0`.
    Scaled {
        inner: Box<TailModel>,
        factor: BigRational,
    },
    /// `min(1, a(k, eps/2) + b(k, eps/2))`, an upper bound on the tail of a sum.
    SumBound(Box<TailModel>, Box<TailModel>),
    /// A deterministic sequence against a constant limit: the tail is 1 when
    /// `|values(k) - limit| >= eps`, else 0.
    Deterministic {
        values: TailExpr,
        limit: BigRational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TailModel {
    pub limit_label: String,
    pub repr: ModelRepr,
}

impl TailModel {
    pub fn piecewise(
        limit_label: impl Into<String>,
        on_set: IndexSet,
        on_tail: TailExpr,
        off_tail: TailExpr,
        off_tail_monotone: bool,
    ) -> Self {
        TailModel {
            limit_label: limit_label.into(),
            repr: ModelRepr::Piecewise(Piecewise {
                on_set,
                on_tail,
                off_tail,
                off_tail_monotone,
            }),
        }
    }

    /// The degenerate sequence `X_k = X`.
    pub fn zero() -> Self {
        Self::piecewise(
            "0",
            IndexSet::Empty,
            TailExpr::int(0),
            TailExpr::int(0),
            true,
        )
    }

    /// Tail identically equal to `value`.
    pub fn constant(label: impl Into<String>, value: BigRational) -> Self {
        Self::piecewise(
            label,
            IndexSet::Empty,
            TailExpr::int(0),
            TailExpr::rational(value),
            true,
        )
    }

    pub fn as_piecewise(&self) -> Option<&Piecewise> {
        match &self.repr {
            ModelRepr::Piecewise(p) => Some(p),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            ModelRepr::Piecewise(p) => {
                p.on_set.validate()?;
                if !p.on_tail.is_well_formed() || !p.off_tail.is_well_formed() {
                    return Err(domain("tail literals must be nonnegative; use unary minus"));
                }
                Ok(())
            }
            ModelRepr::Scaled { inner, factor } => {
                if !factor.is_positive() {
                    return Err(domain("scale factor must be positive"));
                }
                inner.validate()
            }
            ModelRepr::SumBound(a, b) => {
                a.validate()?;
                b.validate()
            }
            ModelRepr::Deterministic { values, .. } => {
                if values.uses_eps() {
                    return Err(domain("deterministic values cannot depend on eps"));
                }
                Ok(())
            }
        }
    }

    /// `p_k(eps)`.
    pub fn tail(&self, k: &BigUint, eps: &BigRational) -> Result<f64> {
        if k.is_zero() {
            return Err(domain("k must be at least 1"));
        }
        self.at(eps)?.value(k)
    }

    /// The model with its rule frozen at one `eps`.
    pub(crate) fn at(&self, eps: &BigRational) -> Result<TailAt<'_>> {
        if !eps.is_positive() {
            return Err(domain(format!(
                "eps must be positive, got {}",
                format_ratio(eps)
            )));
        }
        Ok(TailAt::new(self, eps.clone()))
    }
}

/// `tail_eval`: the tail of `model` at `(k, eps)`.
pub fn tail_eval(model: &TailModel, k: &BigUint, eps: &BigRational) -> Result<f64> {
    model.tail(k, eps)
}

/// The tail model of `c X_k` against `c X`.
pub fn scale_model(model: &TailModel, c: &BigRational) -> TailModel {
    if c.is_zero() {
        let mut z = TailModel::zero();
        z.limit_label = format!("0*({})", model.limit_label);
        return z;
    }
    let factor = c.abs();
    if factor.is_one() {
        return model.clone();
    }
    TailModel {
        limit_label: format!("{}*({})", format_ratio(c), model.limit_label),
        repr: ModelRepr::Scaled {
            inner: Box::new(model.clone()),
            factor,
        },
    }
}

/// Upper-bound tail model of `X_k + Y_k` against `X + Y`.
pub fn sum_bound_model(a: &TailModel, b: &TailModel) -> TailModel {
    TailModel {
        limit_label: format!("({})+({})", a.limit_label, b.limit_label),
        repr: ModelRepr::SumBound(Box::new(a.clone()), Box::new(b.clone())),
    }
}

/// A deterministic sequence viewed as one-point random variables.
pub fn deterministic_model(values: TailExpr, limit: BigRational) -> TailModel {
    TailModel {
        limit_label: format_ratio(&limit),
        repr: ModelRepr::Deterministic { values, limit },
    }
}

/// Parameter defaults carried by a scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Defaults {
    pub alpha: Option<BigRational>,
    pub p: Option<BigRational>,
    pub eps: Option<BigRational>,
    pub delta: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub name: String,
    pub model: TailModel,
    pub theta: Option<LacunarySequence>,
    pub defaults: Defaults,
}

impl Scenario {
    pub fn new(name: impl Into<String>, model: TailModel) -> Self {
        Scenario {
            name: name.into(),
            model,
            theta: None,
            defaults: Defaults::default(),
        }
    }

    pub fn with_theta(mut self, theta: LacunarySequence) -> Self {
        self.theta = Some(theta);
        self
    }
}

pub(crate) fn near(v: f64, t: f64) -> bool {
    (v - t).abs() <= 1e-12 * v.abs().max(t.abs())
}

pub(crate) enum AtKind<'a> {
    Piecewise(&'a Piecewise),
    Scaled(Box<TailAt<'a>>),
    Sum(Box<TailAt<'a>>, Box<TailAt<'a>>),
    Deterministic {
        values: &'a TailExpr,
        limit: &'a BigRational,
    },
}

pub(crate) struct TailAt<'a> {
    pub(crate) eps: BigRational,
    pub(crate) eps_f: f64,
    pub(crate) kind: AtKind<'a>,
}

impl<'a> TailAt<'a> {
    fn new(model: &'a TailModel, eps: BigRational) -> Self {
        let kind = match &model.repr {
            ModelRepr::Piecewise(p) => AtKind::Piecewise(p),
            ModelRepr::Scaled { inner, factor } => {
                AtKind::Scaled(Box::new(TailAt::new(inner, &eps / factor)))
            }
            ModelRepr::SumBound(a, b) => {
                let half = &eps * rat(1, 2);
                AtKind::Sum(
                    Box::new(TailAt::new(a, half.clone())),
                    Box::new(TailAt::new(b, half)),
                )
            }
            ModelRepr::Deterministic { values, limit } => AtKind::Deterministic { values, limit },
        };
        let eps_f = eps.to_f64().unwrap_or(f64::NAN);
        TailAt { eps, eps_f, kind }
    }

    pub(crate) fn piecewise(&self) -> Option<&'a Piecewise> {
        match self.kind {
            AtKind::Piecewise(p) => Some(p),
            _ => None,
        }
    }

    fn check(&self, v: f64, k: &dyn std::fmt::Display) -> Result<f64> {
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(Error::ExpressionOutOfRange {
                value: v,
                k: k.to_string(),
                eps: format_ratio(&self.eps),
            })
        }
    }

    /// Range-checked tail value.
    pub(crate) fn value(&self, k: &BigUint) -> Result<f64> {
        let v = self.raw(k, k.to_f64().unwrap_or(f64::INFINITY))?;
        self.check(v, k)
    }

    pub(crate) fn value_u64(&self, k: u64) -> Result<f64> {
        let v = match &self.kind {
            AtKind::Piecewise(p) => {
                let e = if p.on_set.contains_u64(k)? {
                    &p.on_tail
                } else {
                    &p.off_tail
                };
                e.eval(k as f64, self.eps_f)
            }
            AtKind::Scaled(inner) => inner.value_u64(k)?,
            AtKind::Sum(a, b) => (a.value_u64(k)? + b.value_u64(k)?).min(1.0),
            AtKind::Deterministic { .. } => self.raw(&BigUint::from(k), k as f64)?,
        };
        self.check(v, &k)
    }

    /// Values at `from..=to`, with set membership resolved run by run.
    pub(crate) fn values_u64(&self, from: u64, to: u64) -> Result<Vec<f64>> {
        let len = (to - from + 1) as usize;
        let v = match &self.kind {
            AtKind::Piecewise(p) => {
                let mut on = vec![false; len];
                for (a, b) in p.on_set.runs_u64(from, to, len as u64)? {
                    on[(a - from) as usize..=(b - from) as usize].fill(true);
                }
                on.iter()
                    .zip(from..=to)
                    .map(|(&hit, k)| {
                        if hit { &p.on_tail } else { &p.off_tail }.eval(k as f64, self.eps_f)
                    })
                    .collect()
            }
            AtKind::Scaled(inner) => inner.values_u64(from, to)?,
            AtKind::Sum(a, b) => {
                let mut out = a.values_u64(from, to)?;
                for (x, y) in out.iter_mut().zip(b.values_u64(from, to)?) {
                    *x = (*x + y).min(1.0);
                }
                out
            }
            AtKind::Deterministic { .. } => {
                return (from..=to).map(|k| self.value_u64(k)).collect()
            }
        };
        v.into_iter()
            .zip(from..=to)
            .map(|(x, k)| self.check(x, &k))
            .collect()
    }

    /// Value of a known branch of a piecewise model, range-checked.
    pub(crate) fn branch_value(&self, expr: &TailExpr, k: u64) -> Result<f64> {
        self.check(expr.eval(k as f64, self.eps_f), &k)
    }

    fn raw(&self, k: &BigUint, kf: f64) -> Result<f64> {
        Ok(match &self.kind {
            AtKind::Piecewise(p) => {
                let e = if p.on_set.contains(k)? {
                    &p.on_tail
                } else {
                    &p.off_tail
                };
                e.eval(kf, self.eps_f)
            }
            AtKind::Scaled(inner) => inner.value(k)?,
            AtKind::Sum(a, b) => (a.value(k)? + b.value(k)?).min(1.0),
            AtKind::Deterministic { values, limit } => {
                if self.deterministic_hit(values, limit, k) {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }

    fn deterministic_hit(&self, values: &TailExpr, limit: &BigRational, k: &BigUint) -> bool {
        let kr = rat_big(k);
        let v = values.eval(k.to_f64().unwrap_or(f64::INFINITY), self.eps_f);
        let d = (v - limit.to_f64().unwrap_or(f64::NAN)).abs();
        if !near(d, self.eps_f) {
            return d >= self.eps_f;
        }
        match values.eval_exact(&kr, &self.eps) {
            Some(x) => (x - limit).abs() >= self.eps,
            None => d >= self.eps_f,
        }
    }

    fn exact(&self, k: &BigUint) -> Result<Option<BigRational>> {
        let kr = rat_big(k);
        Ok(match &self.kind {
            AtKind::Piecewise(p) => {
                let e = if p.on_set.contains(k)? {
                    &p.on_tail
                } else {
                    &p.off_tail
                };
                e.eval_exact(&kr, &self.eps)
            }
            AtKind::Scaled(inner) => inner.exact(k)?,
            AtKind::Sum(a, b) => match (a.exact(k)?, b.exact(k)?) {
                (Some(x), Some(y)) => Some((x + y).min(BigRational::one())),
                _ => None,
            },
            AtKind::Deterministic { values, limit } => {
                Some(if self.deterministic_hit(values, limit, k) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                })
            }
        })
    }

    /// `tail(k) >= delta` with the exact tie-break, range-checked.
    pub(crate) fn ge(&self, k: &BigUint, delta: &BigRational) -> Result<bool> {
        let v = self.value(k)?;
        let t = delta.to_f64().unwrap_or(f64::NAN);
        if !near(v, t) {
            return Ok(v >= t);
        }
        if let AtKind::Piecewise(p) = &self.kind {
            let e = if p.on_set.contains(k)? {
                &p.on_tail
            } else {
                &p.off_tail
            };
            return Ok(e.ge(&rat_big(k), &self.eps, delta));
        }
        if let AtKind::Scaled(inner) = &self.kind {
            return inner.ge(k, delta);
        }
        Ok(match self.exact(k)? {
            Some(x) => x >= *delta,
            None => v >= t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    fn ex21() -> TailModel {
        TailModel::piecewise(
            "2",
            IndexSet::FloorPower { s: 2, r: 1 },
            TailExpr::int(1),
            TailExpr::pow(
                TailExpr::int(1) - TailExpr::eps() / TailExpr::int(2),
                TailExpr::k(),
            ),
            true,
        )
    }

    fn k(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn piecewise_tail_values() {
        assert_eq!(ex21().tail(&k(3), &rat(1, 2)).unwrap(), 0.421875);
        assert_eq!(ex21().tail(&k(4), &rat(1, 2)).unwrap(), 1.0);
        assert!(ex21().tail(&k(0), &rat(1, 2)).is_err());
        assert!(matches!(
            ex21().tail(&k(3), &rat(0, 1)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn out_of_range_tail_is_an_error() {
        let bad = TailModel::constant("x", rat(3, 2));
        assert!(matches!(
            bad.tail(&k(1), &rat(1, 2)),
            Err(Error::ExpressionOutOfRange { .. })
        ));
    }

    #[test]
    fn scaling_substitutes_eps() {
        let m = scale_model(&ex21(), &rat_int(2));
        assert_eq!(m.tail(&k(3), &rat_int(1)).unwrap(), 0.421875);
        let z = scale_model(&ex21(), &rat_int(0));
        assert_eq!(z.tail(&k(4), &rat(1, 100)).unwrap(), 0.0);
        assert_eq!(scale_model(&ex21(), &rat_int(-1)), ex21());
    }

    #[test]
    fn sum_bound_clamps_at_one() {
        let m = sum_bound_model(&ex21(), &ex21());
        assert_eq!(m.tail(&k(3), &rat_int(1)).unwrap(), 0.84375);
        assert_eq!(m.tail(&k(4), &rat_int(1)).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_tails() {
        let m = deterministic_model(TailExpr::int(1) / TailExpr::k(), rat_int(0));
        assert_eq!(m.tail(&k(10), &rat(1, 2)).unwrap(), 0.0);
        assert_eq!(m.tail(&k(1), &rat(1, 2)).unwrap(), 1.0);
        // |1/2 - 0| >= 1/2 holds exactly
        assert_eq!(m.tail(&k(2), &rat(1, 2)).unwrap(), 1.0);
        let d = deterministic_model(TailExpr::k(), rat_int(0));
        assert_eq!(d.tail(&k(5), &rat(1, 2)).unwrap(), 1.0);
    }
}
