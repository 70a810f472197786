//! Sums of `coef * k^power * geo^k` over integer intervals `[a, b]` without
//! visiting every index.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::expr::PowerTerm;
use crate::scalar::CompensatedSum;

/// Below this index the power sum is accumulated term by term; above it the
/// Euler–Maclaurin remainder is far below double-precision resolution.
const EM_START: f64 = 64.0;
/// Intervals at most this long are summed directly.
const DIRECT_LEN: f64 = 4096.0;

/// `sum_{k=a}^{b} f(k)` for `f = sum of terms`, or `None` for a term mixing
/// `k^power` with `geo^k` (no closed form implemented).
pub fn interval_sum(terms: &[PowerTerm], a: &BigUint, b: &BigUint) -> Option<f64> {
    if a > b {
        return Some(0.0);
    }
    sum_from(terms, a.to_f64()?, (b - a).to_f64()? + 1.0)
}

/// [`interval_sum`] for `a <= b` inside `u64`.
pub fn interval_sum_u64(terms: &[PowerTerm], a: u64, b: u64) -> Option<f64> {
    if a > b {
        return Some(0.0);
    }
    sum_from(terms, a as f64, (b - a) as f64 + 1.0)
}

fn sum_from(terms: &[PowerTerm], af: f64, len: f64) -> Option<f64> {
    let mut acc = CompensatedSum::<f64>::default();
    for t in terms {
        let part = if t.geo == 1.0 {
            power_sum(t.power, af, len)
        } else if t.power == 0.0 {
            geometric_sum(t.geo, af, len)
        } else {
            return None;
        };
        acc.add(t.coef * part);
    }
    Some(acc.value())
}

/// `sum_{k=a}^{a+len-1} k^p`.
fn power_sum(p: f64, a: f64, len: f64) -> f64 {
    if p == 0.0 {
        return len;
    }
    let mut acc = CompensatedSum::<f64>::default();
    let end = a + len - 1.0;
    if len <= DIRECT_LEN {
        let mut k = a;
        while k <= end {
            acc.add(k.powf(p));
            k += 1.0;
        }
        return acc.value();
    }
    let mut k = a;
    while k < EM_START && k <= end {
        acc.add(k.powf(p));
        k += 1.0;
    }
    if k <= end {
        acc.add(euler_maclaurin(p, k, end - k));
    }
    acc.value()
}

/// `sum_{k=a}^{a+d} k^p` for `a >= EM_START`, with three Bernoulli corrections.
fn euler_maclaurin(p: f64, a: f64, d: f64) -> f64 {
    let b = a + d;
    let log_ratio = (d / a).ln_1p();
    let integral = if p == -1.0 {
        log_ratio
    } else {
        a.powf(p + 1.0) * ((p + 1.0) * log_ratio).exp_m1() / (p + 1.0)
    };
    let f = |x: f64| x.powf(p);
    let d1 = |x: f64| p * x.powf(p - 1.0);
    let d3 = |x: f64| p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0);
    let d5 = |x: f64| p * (p - 1.0) * (p - 2.0) * (p - 3.0) * (p - 4.0) * x.powf(p - 5.0);
    let mut acc = CompensatedSum::<f64>::default();
    acc.add(integral);
    acc.add((f(a) + f(b)) / 2.0);
    acc.add((d1(b) - d1(a)) / 12.0);
    acc.add(-(d3(b) - d3(a)) / 720.0);
    acc.add((d5(b) - d5(a)) / 30240.0);
    acc.value()
}

/// `sum_{k=a}^{a+len-1} g^k` for `g > 0`.
fn geometric_sum(g: f64, a: f64, len: f64) -> f64 {
    if g == 1.0 {
        return len;
    }
    if g <= 0.0 {
        return f64::NAN;
    }
    let lg = g.ln();
    let first = (a * lg).exp();
    first * (len * lg).exp_m1() / lg.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(p: f64, a: u64, b: u64) -> f64 {
        let mut acc = CompensatedSum::<f64>::default();
        for k in a..=b {
            acc.add((k as f64).powf(p));
        }
        acc.value()
    }

    fn term(power: f64) -> PowerTerm {
        PowerTerm {
            coef: 1.0,
            power,
            geo: 1.0,
        }
    }

    #[test]
    fn power_sums_match_direct_summation() {
        for p in [-2.0, -1.0, -0.5, 0.5, 1.0] {
            for (a, b) in [(1u64, 100_000u64), (70, 250_000), (5000, 9000), (1, 10)] {
                let got = interval_sum(&[term(p)], &BigUint::from(a), &BigUint::from(b)).unwrap();
                let want = direct(p, a, b);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs(),
                    "p={p} [{a},{b}] {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn harmonic_block_of_factorial_size() {
        // sum_{k=a+1}^{b} 1/k ~ ln(b/a) for huge a
        let a = BigUint::from(87_178_291_200u64); // 14!
        let b = BigUint::from(1_307_674_368_000u64); // 15!
        let got = interval_sum(&[term(-1.0)], &(&a + 1u32), &b).unwrap();
        let want = 15f64.ln() + 0.5 / 1_307_674_368_000.0 - 0.5 / 87_178_291_200.0;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn geometric_sums() {
        let t = PowerTerm {
            coef: 2.0,
            power: 0.0,
            geo: 0.75,
        };
        let got = interval_sum(&[t], &BigUint::from(3u32), &BigUint::from(40u32)).unwrap();
        let want: f64 = (3..=40).map(|k| 2.0 * 0.75f64.powi(k)).sum();
        assert!((got - want).abs() < 1e-13);
        let mixed = PowerTerm {
            coef: 1.0,
            power: 1.0,
            geo: 0.5,
        };
        assert!(interval_sum(&[mixed], &BigUint::from(1u32), &BigUint::from(9u32)).is_none());
    }
}
