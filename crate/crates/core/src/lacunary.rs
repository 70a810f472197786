//! Lacunary sequences `k_0 < k_1 < ...` with block lengths `h_r = k_r - k_{r-1}`,
//! blocks `I_r = (k_{r-1}, k_r]` and ratios `q_r = k_r / k_{r-1}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::rat_big;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LacunarySequence {
    /// `k_r = base^r`.
    Powers(u32),
    /// `k_r = (2r)!`.
    FactorialEven,
    /// `k_r = (2r + 1)!`.
    FactorialOdd,
    /// A finite, user-supplied list of terms starting at `k_0`.
    ExplicitList(Vec<BigUint>),
    /// Pairs `a_j < b_j` with `b_j / a_j < 1 + 1/j` and `a_{j+1} / b_j > j + 1`,
    /// laid out as `k_{2j-2} = a_j`, `k_{2j-1} = b_j`. The construction is
    /// unbounded; `j_max` is the audit horizon.
    RatioControlled(u32),
}

/// One row of [`LacunarySequence::terms`].
#[derive(Debug, Clone, PartialEq)]
pub struct LacunaryTerm {
    pub r: u64,
    pub k: BigUint,
    /// `None` for `r = 0`.
    pub h: Option<BigUint>,
    /// `None` for `r = 0`.
    pub q: Option<BigRational>,
}

impl LacunaryTerm {
    pub fn q_f64(&self) -> Option<f64> {
        self.q.as_ref().map(crate::exact::ratio_to_f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LacunaryTerms {
    pub terms: Vec<LacunaryTerm>,
    /// Advisory notes, e.g. where `h_r` decreased.
    pub warnings: Vec<String>,
}

/// The `j`-th pair of the ratio-controlled construction (`j >= 1`).
pub fn ratio_pair(j: u32) -> (BigUint, BigUint) {
    let mut pairs = RatioPairs::new();
    let mut last = pairs.next_pair();
    for _ in 1..j {
        last = pairs.next_pair();
    }
    last
}

/// Block index `r(j)` of the `j`-th ratio-controlled pair: `I_{r(j)} = (a_j, b_j]`.
pub fn ratio_pair_block(j: u32) -> u64 {
    2 * u64::from(j) - 1
}

/// Unbounded stream of the ratio-controlled pairs `(a_j, b_j)`.
pub(crate) struct RatioPairs {
    j: u32,
    next_a: BigUint,
}

impl RatioPairs {
    pub(crate) fn new() -> Self {
        Self {
            j: 0,
            next_a: BigUint::from(2u32),
        }
    }

    fn next_pair(&mut self) -> (BigUint, BigUint) {
        self.j += 1;
        let j = BigUint::from(self.j);
        let j1 = &j + 1u32;
        let a = self.next_a.clone();
        let mut b = &a + &a / &j1 + 1u32;
        // b/a < 1 + 1/j  <=>  j*b < (j+1)*a
        while &j * &b >= &j1 * &a {
            b -= 1u32;
        }
        debug_assert!(b > a);
        self.next_a = &j1 * &b + 1u32;
        (a, b)
    }
}

impl Iterator for RatioPairs {
    type Item = (BigUint, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_pair())
    }
}

/// Streams `k_0, k_1, ...` incrementally.
pub struct TermIter<'a> {
    seq: &'a LacunarySequence,
    r: u64,
    current: Option<BigUint>,
    pairs: Option<RatioPairs>,
    pending_b: Option<BigUint>,
}

impl Iterator for TermIter<'_> {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        let r = self.r;
        let next = match self.seq {
            LacunarySequence::Powers(b) => match &self.current {
                None => BigUint::one(),
                Some(c) => c * *b,
            },
            LacunarySequence::FactorialEven => match &self.current {
                None => BigUint::one(),
                Some(c) => c * (2 * r - 1) * (2 * r),
            },
            LacunarySequence::FactorialOdd => match &self.current {
                None => BigUint::one(),
                Some(c) => c * (2 * r) * (2 * r + 1),
            },
            LacunarySequence::ExplicitList(v) => v.get(r as usize)?.clone(),
            LacunarySequence::RatioControlled(_) => {
                if let Some(b) = self.pending_b.take() {
                    b
                } else {
                    let (a, b) = self.pairs.get_or_insert_with(RatioPairs::new).next_pair();
                    self.pending_b = Some(b);
                    a
                }
            }
        };
        self.r += 1;
        self.current = Some(next.clone());
        Some(next)
    }
}

impl LacunarySequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            LacunarySequence::Powers(b) if *b < 2 => Err(Error::InvalidLacunary(format!(
                "powers({b}) needs base >= 2"
            ))),
            LacunarySequence::ExplicitList(v) => {
                if v.len() < 2 {
                    return Err(Error::InvalidLacunary(
                        "an explicit list needs at least two terms".into(),
                    ));
                }
                if v[0].is_zero() {
                    return Err(Error::InvalidLacunary("k_0 must be at least 1".into()));
                }
                if let Some(w) = v.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidLacunary(format!(
                        "terms not strictly increasing at r={}: {} then {}",
                        w + 1,
                        v[w],
                        v[w + 1]
                    )));
                }
                Ok(())
            }
            LacunarySequence::RatioControlled(j) if *j < 1 => Err(Error::InvalidLacunary(
                "ratio_controlled needs j_max >= 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn iter(&self) -> TermIter<'_> {
        TermIter {
            seq: self,
            r: 0,
            current: None,
            pairs: None,
            pending_b: None,
        }
    }

    /// Number of available terms, `None` when unbounded.
    pub fn len(&self) -> Option<u64> {
        match self {
            LacunarySequence::ExplicitList(v) => Some(v.len() as u64),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn term(&self, r: u64) -> Result<BigUint> {
        self.validate()?;
        self.iter()
            .nth(r as usize)
            .ok_or_else(|| Error::InvalidLacunary(format!("sequence has no term k_{r}")))
    }

    /// `(k_{r-1}, k_r)` for block `r >= 1`.
    pub fn block(&self, r: u64) -> Result<(BigUint, BigUint)> {
        if r == 0 {
            return Err(Error::Domain("block index r must be at least 1".into()));
        }
        self.validate()?;
        let mut it = self.iter().skip((r - 1) as usize);
        match (it.next(), it.next()) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::InvalidLacunary(format!(
                "sequence has no block I_{r}"
            ))),
        }
    }

    pub fn h(&self, r: u64) -> Result<BigUint> {
        let (lo, hi) = self.block(r)?;
        Ok(hi - lo)
    }

    pub fn q(&self, r: u64) -> Result<BigRational> {
        let (lo, hi) = self.block(r)?;
        Ok(rat_big(&hi) / rat_big(&lo))
    }

    /// Terms `r = 0..=r_max` with block lengths and ratios.
    pub fn terms(&self, r_max: u64) -> Result<LacunaryTerms> {
        self.validate()?;
        let ks: Vec<BigUint> = self.iter().take(r_max as usize + 1).collect();
        if (ks.len() as u64) < r_max + 1 {
            return Err(Error::InvalidLacunary(format!(
                "sequence has only {} terms, requested r_max = {r_max}",
                ks.len()
            )));
        }
        if ks[0].is_zero() {
            return Err(Error::InvalidLacunary("k_0 must be at least 1".into()));
        }
        let mut terms = Vec::with_capacity(ks.len());
        let mut warnings = Vec::new();
        let mut prev_h: Option<BigUint> = None;
        for (r, k) in ks.iter().enumerate() {
            let (h, q) = if r == 0 {
                (None, None)
            } else {
                let prev = &ks[r - 1];
                if k <= prev {
                    return Err(Error::InvalidLacunary(format!(
                        "terms not strictly increasing at r={r}: {prev} then {k}"
                    )));
                }
                let h = k - prev;
                if let Some(ph) = &prev_h {
                    if &h < ph {
                        warnings.push(format!("h_{r} = {h} is smaller than h_{} = {ph}", r - 1));
                    }
                }
                prev_h = Some(h.clone());
                (Some(h), Some(rat_big(k) / rat_big(prev)))
            };
            terms.push(LacunaryTerm {
                r: r as u64,
                k: k.clone(),
                h,
                q,
            });
        }
        Ok(LacunaryTerms { terms, warnings })
    }
}

impl FromStr for LacunarySequence {
    type Err = Error;

    /// Command-line form: `pow2`, `pow:B`, `fact_even`, `fact_odd`,
    /// `ratio:JMAX`, `list:1,2,4`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidLacunary(format!("unrecognised theta spec `{spec}`"));
        let seq = match spec.trim() {
            "pow2" => LacunarySequence::Powers(2),
            "fact_even" => LacunarySequence::FactorialEven,
            "fact_odd" => LacunarySequence::FactorialOdd,
            other => match other.split_once(':') {
                Some(("pow", b)) => LacunarySequence::Powers(b.trim().parse().map_err(|_| bad())?),
                Some(("ratio", j)) => {
                    LacunarySequence::RatioControlled(j.trim().parse().map_err(|_| bad())?)
                }
                Some(("list", items)) => LacunarySequence::ExplicitList(
                    items
                        .split(',')
                        .map(|x| x.trim().parse::<BigUint>().map_err(|_| bad()))
                        .collect::<Result<_>>()?,
                ),
                _ => return Err(bad()),
            },
        };
        seq.validate()?;
        Ok(seq)
    }
}

impl fmt::Display for LacunarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LacunarySequence::Powers(b) => write!(f, "powers({b})"),
            LacunarySequence::FactorialEven => f.write_str("factorial_even"),
            LacunarySequence::FactorialOdd => f.write_str("factorial_odd"),
            LacunarySequence::ExplicitList(v) => {
                f.write_str("list[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            LacunarySequence::RatioControlled(j) => write!(f, "ratio_controlled({j})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn ks(seq: &LacunarySequence, n: u64) -> Vec<u64> {
        seq.terms(n)
            .unwrap()
            .terms
            .iter()
            .map(|t| u64::try_from(&t.k).unwrap())
            .collect()
    }

    #[test]
    fn factorial_even_terms() {
        let t = LacunarySequence::FactorialEven.terms(3).unwrap();
        let k: Vec<_> = t.terms.iter().map(|x| x.k.clone()).collect();
        assert_eq!(k, [1u32, 2, 24, 720].map(BigUint::from));
        let h: Vec<_> = t.terms[1..].iter().map(|x| x.h.clone().unwrap()).collect();
        assert_eq!(h, [1u32, 22, 696].map(BigUint::from));
        let q: Vec<_> = t.terms[1..].iter().map(|x| x.q.clone().unwrap()).collect();
        assert_eq!(q, vec![rat(2, 1), rat(12, 1), rat(30, 1)]);
    }

    #[test]
    fn powers_of_two() {
        let t = LacunarySequence::Powers(2).terms(2).unwrap();
        assert_eq!(ks(&LacunarySequence::Powers(2), 2), vec![1, 2, 4]);
        assert_eq!(t.terms[2].q, Some(rat(2, 1)));
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn factorial_odd_terms() {
        assert_eq!(
            ks(&LacunarySequence::FactorialOdd, 3),
            vec![1, 6, 120, 5040]
        );
    }

    #[test]
    fn ratio_controlled_pairs_meet_both_ratio_bounds() {
        let mut pairs = RatioPairs::new();
        let mut prev_b: Option<BigUint> = None;
        for j in 1..=12u32 {
            let (a, b) = pairs.next_pair();
            assert!(b > a);
            assert!(rat_big(&b) / rat_big(&a) < rat(i64::from(j) + 1, i64::from(j)));
            if let Some(pb) = prev_b {
                assert!(rat_big(&a) / rat_big(&pb) > rat(i64::from(j), 1));
            }
            prev_b = Some(b);
        }
        assert_eq!(ratio_pair(1), (BigUint::from(2u32), BigUint::from(3u32)));
        assert_eq!(ratio_pair(2), (BigUint::from(7u32), BigUint::from(10u32)));
    }

    #[test]
    fn ratio_controlled_layout() {
        let seq = LacunarySequence::RatioControlled(3);
        assert_eq!(ks(&seq, 5), vec![2, 3, 7, 10, 31, 39]);
        let (lo, hi) = seq.block(ratio_pair_block(3)).unwrap();
        assert_eq!((lo, hi), ratio_pair(3));
    }

    #[test]
    fn explicit_list_must_increase() {
        let bad = LacunarySequence::ExplicitList([1u32, 4, 4].map(BigUint::from).to_vec());
        assert!(matches!(bad.terms(2), Err(Error::InvalidLacunary(_))));
        let ok = LacunarySequence::ExplicitList([1u32, 4, 6].map(BigUint::from).to_vec());
        let t = ok.terms(2).unwrap();
        assert_eq!(t.warnings.len(), 1, "h decreased from 3 to 2");
        assert!(ok.terms(3).is_err());
    }

    #[test]
    fn command_line_specs() {
        assert_eq!(
            "pow2".parse::<LacunarySequence>().unwrap(),
            LacunarySequence::Powers(2)
        );
        assert_eq!(
            "pow:3".parse::<LacunarySequence>().unwrap(),
            LacunarySequence::Powers(3)
        );
        assert_eq!(
            "ratio:8".parse::<LacunarySequence>().unwrap(),
            LacunarySequence::RatioControlled(8)
        );
        assert_eq!(
            "list:1,2,4".parse::<LacunarySequence>().unwrap(),
            LacunarySequence::ExplicitList([1u32, 2, 4].map(BigUint::from).to_vec())
        );
        assert!("pow:1".parse::<LacunarySequence>().is_err());
        assert!("list:3,2".parse::<LacunarySequence>().is_err());
        assert!("nope".parse::<LacunarySequence>().is_err());
    }

    #[test]
    fn block_zero_rejected() {
        assert!(LacunarySequence::Powers(2).block(0).is_err());
        assert!(LacunarySequence::Powers(1).validate().is_err());
    }
}
