//! Exact integer and rational helpers: integer roots, rational powers,
//! conversions and text forms.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Largest exponent numerator accepted by the exact power routines.
const MAX_EXACT_EXPONENT: u32 = 4096;
/// Largest root index accepted by the exact power routines.
const MAX_EXACT_ROOT: u32 = 64;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_big(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

pub fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Natural log of an arbitrarily large positive integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).ln();
    }
    let shift = bits - 64;
    let top = big_to_f64(&(x >> shift));
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `floor(x^(1/s))` by binary search on exact integers.
pub fn iroot_floor(x: &BigUint, s: u32) -> BigUint {
    assert!(s >= 1, "root index must be positive");
    if s == 1 || x.is_zero() {
        return x.clone();
    }
    let bits = x.bits();
    let mut lo = BigUint::one() << ((bits - 1) / u64::from(s));
    let mut hi = BigUint::one() << (bits / u64::from(s) + 1);
    // invariant: lo^s <= x < hi^s
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u32;
        if Pow::pow(&mid, s) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `floor(x^(1/s))` for machine integers; float seed followed by exact correction.
pub fn iroot_floor_u128(x: u128, s: u32) -> u128 {
    assert!(s >= 1, "root index must be positive");
    if s == 1 || x < 2 {
        return x;
    }
    let mut m = (x as f64).powf(1.0 / f64::from(s)) as u128;
    while m > 0 && pow_u128(m, s).is_none_or(|p| p > x) {
        m -= 1;
    }
    while pow_u128(m + 1, s).is_some_and(|p| p <= x) {
        m += 1;
    }
    m
}

pub fn pow_u128(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Exact `base^exp` when the result is rational, `None` otherwise (or when the
/// operands are too large to be worth computing exactly).
pub fn pow_rational_exact(base: &BigRational, exp: &BigRational) -> Option<BigRational> {
    let p = exp.numer();
    let q = exp.denom().to_u32()?;
    let p_abs = p.abs().to_u32()?;
    if q > MAX_EXACT_ROOT || p_abs > MAX_EXACT_EXPONENT {
        return None;
    }
    if base.is_zero() {
        return if p.is_positive() {
            Some(BigRational::zero())
        } else if p.is_zero() {
            Some(BigRational::one())
        } else {
            None
        };
    }
    if base.is_negative() && q != 1 {
        return None;
    }
    let root = if q == 1 {
        base.clone()
    } else {
        let n = base.numer().to_biguint()?;
        let d = base.denom().to_biguint()?;
        let rn = iroot_floor(&n, q);
        let rd = iroot_floor(&d, q);
        if Pow::pow(&rn, q) != n || Pow::pow(&rd, q) != d {
            return None;
        }
        BigRational::new(
            BigInt::from_biguint(Sign::Plus, rn),
            BigInt::from_biguint(Sign::Plus, rd),
        )
    };
    let raised = Pow::pow(&root, p_abs);
    if p.is_negative() {
        Some(raised.recip())
    } else {
        Some(raised)
    }
}

/// Exact comparison `base^exp >= threshold` for `base > 0`, `threshold > 0`,
/// using `base^p >= threshold^q` where `exp = p/q`.
pub fn pow_ge_exact(
    base: &BigRational,
    exp: &BigRational,
    threshold: &BigRational,
) -> Option<bool> {
    if !base.is_positive() || !threshold.is_positive() {
        return None;
    }
    let p = exp.numer();
    let q = exp.denom().to_u32()?;
    let p_abs = p.abs().to_u32()?;
    if q > MAX_EXACT_EXPONENT || p_abs > MAX_EXACT_EXPONENT {
        return None;
    }
    let lhs = if p.is_negative() {
        Pow::pow(base, p_abs).recip()
    } else {
        Pow::pow(base, p_abs)
    };
    Some(lhs >= Pow::pow(threshold, q))
}

/// `floor(h^c)` for rational `0 <= c`, exactly: `floor((h^a)^(1/b))` with `c = a/b`.
pub fn floor_rational_power(h: &BigUint, c: &BigRational) -> Result<BigUint> {
    let a = c
        .numer()
        .to_u32()
        .ok_or_else(|| domain("exponent numerator must be a small nonnegative integer"))?;
    let b = c
        .denom()
        .to_u32()
        .ok_or_else(|| domain("exponent denominator too large"))?;
    Ok(iroot_floor(&Pow::pow(h, a), b))
}

/// Canonical `num/den` text (just `num` for integers).
pub fn format_ratio(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `num/den`, an integer, or a decimal such as `0.25` (exactly, over a power of ten).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || domain(format!("`{text}` is not a rational number"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(domain(format!("`{text}` has a zero denominator")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    let denom = Pow::pow(BigInt::from(10u32), frac_part.len() as u32);
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

pub fn to_biguint(x: &BigRational) -> Option<BigUint> {
    if x.is_integer() {
        x.numer().to_biguint()
    } else {
        None
    }
}

pub fn gcd_u32(a: u32, b: u32) -> u32 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Roots;

    #[test]
    fn iroot_matches_newton_reference() {
        for s in 1..=7u32 {
            for x in (0u64..2000).chain([u64::MAX, 1 << 40, 999_999_999_999]) {
                let big = BigUint::from(x);
                assert_eq!(iroot_floor(&big, s), big.nth_root(s), "x={x} s={s}");
                assert_eq!(
                    iroot_floor_u128(u128::from(x), s),
                    u128::from(x).nth_root(s),
                    "x={x} s={s}"
                );
            }
        }
    }

    #[test]
    fn iroot_near_perfect_powers() {
        for m in [3u128, 10, 99_999, 1 << 20] {
            for s in 2..=5u32 {
                let p = m.pow(s);
                assert_eq!(iroot_floor_u128(p, s), m);
                assert_eq!(iroot_floor_u128(p - 1, s), m - 1);
                assert_eq!(iroot_floor(&BigUint::from(p), s), BigUint::from(m));
            }
        }
    }

    #[test]
    fn exact_rational_powers() {
        assert_eq!(pow_rational_exact(&rat(4, 1), &rat(-1, 2)), Some(rat(1, 2)));
        assert_eq!(pow_rational_exact(&rat(9, 4), &rat(3, 2)), Some(rat(27, 8)));
        assert_eq!(pow_rational_exact(&rat(2, 1), &rat(1, 2)), None);
        assert_eq!(
            pow_rational_exact(&rat(3, 4), &rat(3, 1)),
            Some(rat(27, 64))
        );
        assert_eq!(pow_rational_exact(&rat(0, 1), &rat(-1, 1)), None);
    }

    #[test]
    fn exact_power_comparison() {
        // 3^(-1/2) >= 1/2  <=>  3^-1 >= 1/4
        assert_eq!(
            pow_ge_exact(&rat(3, 1), &rat(-1, 2), &rat(1, 2)),
            Some(true)
        );
        assert_eq!(
            pow_ge_exact(&rat(5, 1), &rat(-1, 2), &rat(1, 2)),
            Some(false)
        );
        assert_eq!(
            pow_ge_exact(&rat(4, 1), &rat(-1, 2), &rat(1, 2)),
            Some(true)
        );
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn floor_power_of_block_lengths() {
        assert_eq!(
            floor_rational_power(&BigUint::from(512u32), &rat(1, 2)).unwrap(),
            BigUint::from(22u32)
        );
        assert_eq!(
            floor_rational_power(&BigUint::from(512u32), &rat(0, 1)).unwrap(),
            BigUint::from(1u32)
        );
    }

    #[test]
    fn ln_of_huge_integers() {
        let x = Pow::pow(BigUint::from(10u32), 500u32);
        assert!((ln_big(&x) - 500.0 * 10f64.ln()).abs() < 1e-9);
    }
}
