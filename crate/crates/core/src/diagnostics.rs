//! From pointwise values to verdicts: geometric grids, profiles, log-log slopes,
//! the classification rule, and finite-window ratio minima.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::evaluators::{Evaluator, Method, MethodParams, QualifyingCounter};
use crate::exact::{rat, rat_int};
use crate::lacunary::LacunarySequence;
use crate::model::{Scenario, TailModel};
use crate::scalar::{big_pow, Scalar};

/// Geometric grid `n_j = round(n0 * ratio^j)`, `j = 0..points`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub n0: u64,
    pub ratio: BigRational,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n0: 1000,
            ratio: rat_int(2),
            points: 15,
        }
    }
}

impl GridSpec {
    pub fn new(n0: u64, ratio: BigRational, points: usize) -> Result<Self> {
        let g = GridSpec { n0, ratio, points };
        g.abscissae()?;
        Ok(g)
    }

    /// The grid points; exact rational rounding, halves rounded up.
    pub fn abscissae(&self) -> Result<Vec<u64>> {
        if self.n0 == 0 {
            return Err(domain("grid start must be at least 1"));
        }
        if self.ratio <= BigRational::one() {
            return Err(domain("grid ratio must exceed 1"));
        }
        if self.points == 0 {
            return Err(domain("grid needs at least one point"));
        }
        let mut out = Vec::with_capacity(self.points);
        let mut x = rat_int(self.n0 as i64);
        for _ in 0..self.points {
            let rounded = (&x + rat(1, 2)).floor().to_integer();
            let n = rounded
                .to_u64()
                .ok_or_else(|| domain("grid point exceeds 2^64"))?;
            if out.last().is_some_and(|&prev| prev >= n) {
                return Err(domain(format!("grid is not strictly increasing at {n}")));
            }
            out.push(n);
            x *= &self.ratio;
        }
        Ok(out)
    }
}

/// Default lacunary block window `r = 2..=12`.
pub fn default_blocks() -> Vec<u64> {
    (2..=12).collect()
}

/// Block window for verdicts under `theta`: the default window, widened for
/// geometric sequences so the last block ends near `2^40`.
pub fn verdict_blocks(theta: &LacunarySequence) -> Vec<u64> {
    match theta {
        LacunarySequence::Powers(base) if *base >= 2 => {
            let hi = (40.0 / f64::from(*base).log2()).floor() as u64;
            (2..=hi.max(12)).collect()
        }
        _ => match theta.len() {
            Some(len) => default_blocks().into_iter().filter(|&r| r < len).collect(),
            None => default_blocks(),
        },
    }
}

/// Where a profile is sampled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Abscissae {
    Grid(GridSpec),
    Blocks(Vec<u64>),
}

impl Abscissae {
    pub fn points(&self) -> Result<Vec<u64>> {
        match self {
            Abscissae::Grid(g) => g.abscissae(),
            Abscissae::Blocks(b) => {
                if b.is_empty() || b[0] == 0 || b.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(domain(
                        "block indices must be positive and strictly increasing",
                    ));
                }
                Ok(b.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    /// `n` for PS/PW, the block index `r` for the lacunary methods.
    pub abscissa: u64,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub abscissa: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile<T> {
    pub samples: Vec<Sample<T>>,
    pub gaps: Vec<Gap>,
    pub method: Method,
    pub params: MethodParams,
    pub scenario: String,
}

impl<T: Scalar> DensityProfile<T> {
    pub fn from_samples(
        samples: Vec<Sample<T>>,
        method: Method,
        params: MethodParams,
        scenario: impl Into<String>,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| w[0].abscissa >= w[1].abscissa) {
            return Err(domain("profile abscissae must be strictly increasing"));
        }
        if samples
            .iter()
            .any(|s| !s.value.is_finite() || s.value < T::zero())
        {
            return Err(domain("profile values must be finite and nonnegative"));
        }
        Ok(DensityProfile {
            samples,
            gaps: Vec::new(),
            method,
            params,
            scenario: scenario.into(),
        })
    }

    pub fn last_value(&self) -> Option<T> {
        self.samples.last().map(|s| s.value)
    }
}

/// Evaluates `method` over the abscissae. Points beyond an enumeration cap are
/// recorded as gaps; other errors propagate.
pub fn sample_profile<T: Scalar>(
    scenario: &Scenario,
    method: Method,
    params: &MethodParams,
    where_: &Abscissae,
    theta: Option<&LacunarySequence>,
    evaluator: &Evaluator,
) -> Result<DensityProfile<T>> {
    params.validate()?;
    let points = where_.points()?;
    let lacunary_grid = matches!(where_, Abscissae::Blocks(_));
    if method.is_lacunary() != lacunary_grid {
        return Err(domain(format!(
            "method {method} needs {}",
            if method.is_lacunary() {
                "a block range"
            } else {
                "an n grid"
            }
        )));
    }
    let model = &scenario.model;
    let mut samples = Vec::with_capacity(points.len());
    let mut gaps = Vec::new();
    let mut keep = |x: u64, r: Result<T>| -> Result<()> {
        match r {
            Ok(v) => samples.push(Sample {
                abscissa: x,
                value: v,
            }),
            Err(e @ Error::EnumerationCapExceeded { .. }) => gaps.push(Gap {
                abscissa: x,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
        Ok(())
    };
    match method {
        Method::Ps => {
            let counter =
                QualifyingCounter::new(model, &params.eps, &params.delta, evaluator.caps)?;
            for (&n, c) in points.iter().zip(counter.counts(&points)) {
                keep(
                    n,
                    c.map(|c| T::of_big(&c) / big_pow::<T>(&BigUint::from(n), &params.alpha)),
                )?;
            }
        }
        Method::Pw => {
            let (sums, cut) = capped_partial_sums::<T>(evaluator, model, &points, params)?;
            let done = sums.len();
            for (&n, s) in points.iter().zip(sums) {
                keep(n, Ok(s / big_pow::<T>(&BigUint::from(n), &params.alpha)))?;
            }
            if let Some(e) = cut {
                for &n in &points[done..] {
                    keep(n, Err(e.clone()))?;
                }
            }
        }
        Method::STheta | Method::NTheta => {
            let theta = theta
                .or(scenario.theta.as_ref())
                .ok_or_else(|| domain("lacunary methods need a theta"))?;
            for &r in &points {
                let v = if method == Method::STheta {
                    evaluator.s_theta_density::<T>(model, theta, r, params)
                } else {
                    evaluator.n_theta_mean::<T>(model, theta, r, &params.eps, &params.alpha)
                };
                keep(r, v)?;
            }
        }
    }
    Ok(DensityProfile {
        samples,
        gaps,
        method,
        params: params.clone(),
        scenario: scenario.name.clone(),
    })
}

/// Cesàro partial sums for the longest prefix of `points` that fits the caps,
/// with the cap error that stopped the rest.
fn capped_partial_sums<T: Scalar>(
    evaluator: &Evaluator,
    model: &TailModel,
    points: &[u64],
    params: &MethodParams,
) -> Result<(Vec<T>, Option<Error>)> {
    let sums =
        |m: usize| evaluator.cesaro_partial_sums::<T>(model, &points[..m], &params.eps, &params.p);
    let first = match sums(points.len()) {
        Ok(all) => return Ok((all, None)),
        Err(e @ Error::EnumerationCapExceeded { .. }) => e,
        Err(e) => return Err(e),
    };
    // Work grows with the largest point, so the computable prefixes are
    // closed downward; bisect for the longest one.
    let (mut lo, mut hi, mut best) = (0, points.len(), Vec::new());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match sums(mid) {
            Ok(s) => {
                lo = mid;
                best = s;
            }
            Err(Error::EnumerationCapExceeded { .. }) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    Ok((best, Some(first)))
}

/// Least-squares slope of `ln(value)` against `ln(abscissa)`.
///
/// Zero values are dropped. When more than half of the samples are zero the
/// slope is `-inf`. Fewer than three positive samples is an error.
pub fn fit_slope<T: Scalar>(profile: &DensityProfile<T>) -> Result<T> {
    let total = profile.samples.len();
    let pts: Vec<(T, T)> = profile
        .samples
        .iter()
        .filter(|s| s.value > T::zero())
        .map(|s| (T::of(s.abscissa as f64).ln(), s.value.ln()))
        .collect();
    if total > 0 && 2 * (total - pts.len()) > total {
        return Ok(T::neg_infinity());
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} positive samples, need at least 3",
            pts.len()
        )));
    }
    let m = T::of_usize(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / m;
    let my = pts.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == T::zero() {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictClass {
    ConvergesToZero,
    FailsToConverge,
    Inconclusive,
}

impl VerdictClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictClass::ConvergesToZero => "converges",
            VerdictClass::FailsToConverge => "fails",
            VerdictClass::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub class: VerdictClass,
    pub slope: T,
    pub last_value: T,
    pub evidence: String,
}

/// Default thresholds of [`classify`].
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_SLOPE_MIN: f64 = 0.05;

/// The decision rule, applied in order:
///
/// * converges if every value is zero, or `slope <= -slope_min` with the last
///   value below 1, or the last value is below `tol` with a negative slope;
/// * fails if `slope >= slope_min`, or if at least five values all stay at or
///   above `tol` while `|slope| < slope_min`;
/// * inconclusive otherwise.
pub fn classify<T: Scalar>(
    profile: &DensityProfile<T>,
    tol: T,
    slope_min: T,
) -> Result<Verdict<T>> {
    let last = profile
        .last_value()
        .ok_or_else(|| Error::InsufficientData("empty profile".into()))?;
    let values = || profile.samples.iter().map(|s| s.value);
    if values().all(|v| v == T::zero()) {
        return Ok(Verdict {
            class: VerdictClass::ConvergesToZero,
            slope: T::neg_infinity(),
            last_value: last,
            evidence: format!("all {} values are zero", profile.samples.len()),
        });
    }
    let slope = fit_slope(profile)?;
    let count = profile.samples.len();
    let min = values().fold(T::infinity(), T::min);
    let class = if (slope <= -slope_min && last < T::one()) || (last < tol && slope < T::zero()) {
        VerdictClass::ConvergesToZero
    } else if slope >= slope_min || (min >= tol && slope.abs() < slope_min && count >= 5) {
        VerdictClass::FailsToConverge
    } else {
        VerdictClass::Inconclusive
    };
    let evidence = format!(
        "slope {:.6} over {count} points, last value {:.6e}, min value {:.6e}",
        slope.as_f64(),
        last.as_f64(),
        min.as_f64()
    );
    Ok(Verdict {
        class,
        slope,
        last_value: last,
        evidence,
    })
}

/// [`classify`] with the default thresholds.
pub fn classify_default<T: Scalar>(profile: &DensityProfile<T>) -> Result<Verdict<T>> {
    classify(profile, T::of(DEFAULT_TOL), T::of(DEFAULT_SLOPE_MIN))
}

/// `min { q_r : r_from <= r <= r_to }`, exactly.
pub fn liminf_q(theta: &LacunarySequence, r_from: u64, r_to: u64) -> Result<BigRational> {
    if r_from == 0 || r_from > r_to {
        return Err(domain(format!(
            "window {r_from}:{r_to} must satisfy 1 <= r0 <= r1"
        )));
    }
    let terms = theta.terms(r_to)?;
    let min = terms.terms[r_from as usize..=r_to as usize]
        .iter()
        .filter_map(|t| t.q.clone())
        .min()
        .expect("window is nonempty");
    debug_assert!(min > BigRational::zero());
    Ok(min)
}

/// Block indices `r(j) = 2j - 1`, `j = 1..=j_max`, of the ratio-controlled pairs.
pub fn ratio_pair_blocks(j_max: u32) -> Vec<u64> {
    (1..=j_max).map(crate::lacunary::ratio_pair_block).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(points: &[(u64, f64)]) -> DensityProfile<f64> {
        let samples = points
            .iter()
            .map(|&(a, v)| Sample {
                abscissa: a,
                value: v,
            })
            .collect();
        let params = MethodParams::new(rat_int(1), rat(1, 2), rat(1, 2), rat_int(1)).unwrap();
        DensityProfile::from_samples(samples, Method::Ps, params, "t").unwrap()
    }

    #[test]
    fn grid_points() {
        let g = GridSpec::new(10, rat_int(2), 5).unwrap();
        assert_eq!(g.abscissae().unwrap(), vec![10, 20, 40, 80, 160]);
        let h = GridSpec::new(3, rat(3, 2), 4).unwrap();
        // 3, 4.5 -> 5, 6.75 -> 7, 10.125 -> 10
        assert_eq!(h.abscissae().unwrap(), vec![3, 5, 7, 10]);
        assert!(
            GridSpec::new(1, rat(11, 10), 3).is_err(),
            "1, 1.1, 1.21 all round to 1"
        );
        assert_eq!(
            *GridSpec::default().abscissae().unwrap().last().unwrap(),
            16_384_000
        );
    }

    #[test]
    fn slopes_of_power_laws() {
        let p = profile(&[(10, 1.0), (100, 0.1), (1000, 0.01)]);
        assert!((fit_slope(&p).unwrap() + 1.0).abs() < 1e-12);
        let c = profile(&[(10, 1.0), (100, 1.0), (1000, 1.0)]);
        assert_eq!(fit_slope(&c).unwrap(), 0.0);
        let z = profile(&[(10, 0.0), (100, 0.0), (1000, 1.0)]);
        assert_eq!(fit_slope(&z).unwrap(), f64::NEG_INFINITY);
        let short = profile(&[(10, 1.0), (100, 1.0)]);
        assert!(matches!(fit_slope(&short), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn classification_rule() {
        let zero = profile(&[(1, 0.0), (2, 0.0)]);
        assert_eq!(
            classify_default(&zero).unwrap().class,
            VerdictClass::ConvergesToZero
        );
        let one = profile(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0), (5, 1.0)]);
        assert_eq!(
            classify_default(&one).unwrap().class,
            VerdictClass::FailsToConverge
        );
        let flat_short = profile(&[(1, 1.0), (2, 1.0), (3, 1.0)]);
        assert_eq!(
            classify_default(&flat_short).unwrap().class,
            VerdictClass::Inconclusive
        );
        let decay = profile(&[(10, 0.5), (100, 0.05), (1000, 0.005)]);
        assert_eq!(
            classify_default(&decay).unwrap().class,
            VerdictClass::ConvergesToZero
        );
    }

    #[test]
    fn ratio_minima() {
        assert_eq!(
            liminf_q(&LacunarySequence::Powers(2), 1, 20).unwrap(),
            rat_int(2)
        );
        assert_eq!(
            liminf_q(&LacunarySequence::FactorialEven, 1, 5).unwrap(),
            rat_int(2)
        );
        assert!(liminf_q(&LacunarySequence::Powers(2), 3, 2).is_err());
    }
}
