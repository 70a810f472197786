//! Floating-point scalar abstraction for the real-valued outputs.
//!
//! Counts and lacunary terms are exact integers and tail decisions are made in
//! double precision with an exact fallback; only the normalized functionals
//! (densities, Cesàro means, block means) and the slope fits are generic.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("every f64 converts to a float type")
    }

    fn of_usize(x: usize) -> Self {
        Self::of(x as f64)
    }

    fn of_big(x: &BigUint) -> Self {
        Self::of(crate::exact::big_to_f64(x))
    }

    fn of_ratio(x: &BigRational) -> Self {
        Self::of(crate::exact::ratio_to_f64(x))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x^alpha` for a positive integer `x` of any size, via `exp(alpha * ln x)`.
pub fn big_pow<T: Scalar>(x: &BigUint, alpha: &BigRational) -> T {
    let a = crate::exact::ratio_to_f64(alpha);
    match x.to_f64() {
        Some(f) if f.is_finite() => T::of(f.powf(a)),
        _ => T::of((a * crate::exact::ln_big(x)).exp()),
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::<f64>::default();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-28);
    }

    #[test]
    fn big_pow_matches_powf_in_range() {
        let x = BigUint::from(1_000_000u32);
        let half = BigRational::new(1.into(), 2.into());
        let v: f64 = big_pow(&x, &half);
        assert!((v - 1000.0).abs() < 1e-9);
        let huge = BigUint::from(10u32).pow(400);
        let w: f64 = big_pow(&huge, &BigRational::new(1.into(), 100.into()));
        assert!((w - 10f64.powi(4)).abs() / 1e4 < 1e-10);
    }
}
