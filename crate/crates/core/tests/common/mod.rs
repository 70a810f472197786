//! Brute-force reference implementations used across the integration tests.
//! Nothing here calls the library's counting or summation code.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use summaprob::exact::rat;
use summaprob::index_set::{IndexSet, Parity};
use summaprob::lacunary::{ratio_pair, LacunarySequence};

pub mod gen;

/// `floor(v^(1/e))` by bisection.
pub fn int_root(v: &BigUint, e: u32) -> BigUint {
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one();
    while num_traits::pow(hi.clone(), e as usize) <= *v {
        hi <<= 1;
    }
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1usize;
        if num_traits::pow(mid.clone(), e as usize) <= *v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Membership table for `{1..=n}`.
pub fn table(n: u64, members: impl IntoIterator<Item = u64>) -> Vec<bool> {
    let mut t = vec![false; n as usize + 1];
    for m in members {
        if m >= 1 && m <= n {
            t[m as usize] = true;
        }
    }
    t
}

/// `{ floor(m^(s/r)) }` up to `n`.
pub fn floor_power_members(s: u32, r: u32, n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for m in 1u64.. {
        let v = int_root(&num_traits::pow(BigUint::from(m), s as usize), r)
            .to_u64()
            .unwrap();
        if v > n {
            break;
        }
        out.push(v);
    }
    out
}

pub fn self_power_members(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for m in 1u32.. {
        let v = BigUint::from(m).pow(m);
        if v > BigUint::from(n) {
            break;
        }
        out.push(v.to_u64().unwrap());
    }
    out
}

/// `G(n) = g` for `g! < n <= (g+1)!`, `G(1) = 0`.
pub fn factorial_class(n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut g = 1u64;
    let mut f: u128 = 1;
    loop {
        let next = f * u128::from(g + 1);
        if u128::from(n) <= next {
            return g;
        }
        f = next;
        g += 1;
    }
}

pub fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, x| acc * x)
}

/// Members `k_(r-1) < k <= k_(r-1) + floor(h_r^(1/2))` of every block of
/// `powers(2)`, up to `n`.
pub fn block_prefix_half_pow2(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for r in 1u32..63 {
        let lo = 1u64 << (r - 1);
        if lo >= n {
            break;
        }
        let h = lo;
        let take = int_root(&BigUint::from(h), 2).to_u64().unwrap();
        out.extend((lo + 1..=lo + take).filter(|&k| k <= n));
    }
    out
}

/// `(1 - eps/2)^k >= delta`, exactly.
pub fn geometric_ge(k: u64, eps: &BigRational, delta: &BigRational) -> bool {
    let base = BigRational::one() - eps / BigRational::from_integer(2.into());
    let mut v = BigRational::one();
    for _ in 0..k {
        v *= &base;
        if v < *delta {
            return false;
        }
    }
    true
}

/// `k^(-q) >= delta` for rational `q = qn/qd > 0`, exactly.
pub fn inverse_power_ge(k: u64, q: &BigRational, delta: &BigRational) -> bool {
    let (qn, qd) = (q.numer().to_u32().unwrap(), q.denom().to_u32().unwrap());
    // k^(-qn/qd) >= dn/dd  <=>  dd^qd >= dn^qd * k^qn
    let (dn, dd) = (
        delta.numer().to_biguint().unwrap(),
        delta.denom().to_biguint().unwrap(),
    );
    let lhs = num_traits::pow(dd, qd as usize);
    let rhs = num_traits::pow(dn, qd as usize) * num_traits::pow(BigUint::from(k), qn as usize);
    lhs >= rhs
}

/// Independent rule for the default corpus entry `name`: membership table
/// and the off-set comparison `tail(k) >= delta`.
/// `(k, eps, delta) -> tail(k) >= delta` off the set.
pub type OffRule = dyn Fn(u64, &BigRational, &BigRational) -> bool;
/// `(k, delta) -> tail(k) >= delta` on the set.
pub type OnRule = dyn Fn(u64, &BigRational) -> bool;

pub struct Oracle {
    pub on: Vec<bool>,
    pub off_ge: Box<OffRule>,
    /// `tail(k)` in floating point, for Cesàro sums.
    pub tail: Box<dyn Fn(u64, f64) -> f64>,
    /// Tail on the set, `1 - 1/k` for the limit-1 reading.
    pub on_ge: Box<OnRule>,
}

pub fn oracle(name: &str, n: u64) -> Oracle {
    let one_ge = Box::new(|_: u64, _: &BigRational| true);
    match name {
        "ex-2.1" => {
            let on = table(n, floor_power_members(2, 1, n));
            let t = on.clone();
            Oracle {
                on,
                off_ge: Box::new(geometric_ge),
                tail: Box::new(move |k, eps| {
                    if t[k as usize] {
                        1.0
                    } else {
                        (1.0 - eps / 2.0).powf(k as f64)
                    }
                }),
                on_ge: one_ge,
            }
        }
        "thm-2.3-ex" => {
            let on = table(n, floor_power_members(2, 1, n));
            let t = on.clone();
            Oracle {
                on,
                off_ge: Box::new(|k, _, d| inverse_power_ge(k, &rat(2, 1), d)),
                tail: Box::new(move |k, _| {
                    if t[k as usize] {
                        1.0
                    } else {
                        1.0 / (k as f64 * k as f64)
                    }
                }),
                on_ge: one_ge,
            }
        }
        "ex-2.2" => {
            let on = table(n, self_power_members(n));
            let t = on.clone();
            Oracle {
                on,
                off_ge: Box::new(|k, _, d| inverse_power_ge(k, &rat(1, 2), d)),
                tail: Box::new(move |k, _| {
                    if t[k as usize] {
                        1.0
                    } else {
                        1.0 / (k as f64).sqrt()
                    }
                }),
                on_ge: one_ge,
            }
        }
        "ex-3.1-lim0" | "ex-3.1-lim1" => {
            let parity = u64::from(name == "ex-3.1-lim1");
            let on = table(n, (1..=n).filter(|&k| factorial_class(k) % 2 == parity));
            let t = on.clone();
            let lim1 = parity == 1;
            Oracle {
                on,
                off_ge: Box::new(|k, _, d| inverse_power_ge(k, &rat(1, 1), d)),
                tail: Box::new(move |k, _| {
                    let inv = 1.0 / k as f64;
                    match (t[k as usize], lim1) {
                        (true, true) => 1.0 - inv,
                        (true, false) => 1.0,
                        (false, _) => inv,
                    }
                }),
                on_ge: if lim1 {
                    // 1 - 1/k >= delta  <=>  k (1 - delta) >= 1
                    Box::new(|k: u64, d: &BigRational| {
                        BigRational::from_integer(k.into()) * (BigRational::one() - d)
                            >= BigRational::one()
                    })
                } else {
                    one_ge
                },
            }
        }
        "thm-3.2-ex" => {
            let on = table(n, block_prefix_half_pow2(n));
            let t = on.clone();
            Oracle {
                on,
                off_ge: Box::new(|k, _, d| inverse_power_ge(k, &rat(1, 1), d)),
                tail: Box::new(move |k, _| if t[k as usize] { 1.0 } else { 1.0 / k as f64 }),
                on_ge: one_ge,
            }
        }
        "thm-3.3-ex" => {
            let mut members = Vec::new();
            for j in 1..=8 {
                let (a, b) = summaprob::lacunary::ratio_pair(j);
                let (a, b) = (a.to_u64().unwrap(), b.to_u64().unwrap_or(u64::MAX));
                if a >= n {
                    break;
                }
                members.extend(a + 1..=b.min(n));
            }
            let on = table(n, members);
            let t = on.clone();
            Oracle {
                on,
                off_ge: Box::new(|k, _, d| inverse_power_ge(k, &rat(2, 1), d)),
                tail: Box::new(move |k, _| {
                    if t[k as usize] {
                        1.0
                    } else {
                        1.0 / (k as f64 * k as f64)
                    }
                }),
                on_ge: one_ge,
            }
        }
        other => panic!("no oracle for {other}"),
    }
}

impl Oracle {
    /// Cumulative qualifying counts `c[n] = |{k <= n : tail(k) >= delta}|`.
    pub fn counts(&self, eps: &BigRational, delta: &BigRational) -> Vec<u64> {
        let n = self.on.len() - 1;
        let mut c = vec![0u64; n + 1];
        // The off-set rules are nonincreasing in k, so the off-set qualifying
        // indices form a prefix; stop testing once it ends.
        let mut off_open = true;
        for k in 1..=n {
            let hit = if self.on[k] {
                (self.on_ge)(k as u64, delta)
            } else if off_open {
                let h = (self.off_ge)(k as u64, eps, delta);
                off_open = h;
                h
            } else {
                false
            };
            c[k] = c[k - 1] + u64::from(hit);
        }
        c
    }

    /// Compensated `sum_{k <= n} tail(k)^p`.
    pub fn cesaro(&self, n: u64, eps: f64, p: f64) -> f64 {
        let (mut s, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=n {
            let y = (self.tail)(k, eps).powf(p) - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        s
    }
}

pub const CORPUS: [&str; 7] = [
    "ex-2.1",
    "thm-2.3-ex",
    "ex-2.2",
    "ex-3.1-lim0",
    "ex-3.1-lim1",
    "thm-3.2-ex",
    "thm-3.3-ex",
];

pub fn eps_grid() -> Vec<BigRational> {
    vec![rat(1, 4), rat(1, 2), rat(1, 1)]
}

pub fn delta_grid() -> Vec<BigRational> {
    vec![rat(1, 4), rat(1, 2), rat(3, 4)]
}

/// Every index-set kind with its membership table on `1..=n`.
pub fn index_cases(n: u64) -> Vec<(IndexSet, Vec<bool>)> {
    let mut ratio_members = Vec::new();
    for j in 1..=8 {
        let (a, b) = ratio_pair(j);
        let (a, b) = (a.to_u64().unwrap(), b.to_u64().unwrap());
        ratio_members.extend(a + 1..=b.min(n));
    }
    vec![
        (
            IndexSet::FloorPower { s: 2, r: 1 },
            table(n, floor_power_members(2, 1, n)),
        ),
        (
            IndexSet::FloorPower { s: 3, r: 2 },
            table(n, floor_power_members(3, 2, n)),
        ),
        (
            IndexSet::FloorPower { s: 7, r: 3 },
            table(n, floor_power_members(7, 3, n)),
        ),
        (IndexSet::SelfPower, table(n, self_power_members(n))),
        (
            IndexSet::FactorialParity(Parity::Even),
            table(n, (1..=n).filter(|&k| factorial_class(k).is_multiple_of(2))),
        ),
        (
            IndexSet::FactorialParity(Parity::Odd),
            table(n, (1..=n).filter(|&k| factorial_class(k) % 2 == 1)),
        ),
        (
            IndexSet::BlockPrefix {
                theta: LacunarySequence::Powers(2),
                c: rat(1, 2),
            },
            table(n, block_prefix_half_pow2(n)),
        ),
        (IndexSet::RatioBlocks { j_max: 8 }, table(n, ratio_members)),
        (
            IndexSet::finite_list(
                [3u32, 10, 11, 4000]
                    .iter()
                    .map(|&x| BigUint::from(x))
                    .collect(),
            )
            .unwrap(),
            table(n, [3, 10, 11, 4000]),
        ),
        (IndexSet::Empty, table(n, [])),
        (IndexSet::All, table(n, 1..=n)),
    ]
}
