//! Exact joint moments `E(T_j^a * X^U)`, where `X^U` is the product of the
//! steps with indices in `U`, a subset of the tracked index set `J_j`.
//!
//! The tracked set contains the memory set `I_j` (plus optionally the most
//! recent steps) and satisfies `J_{j+1} ⊆ J_j ∪ {j+1}`. With `X^2 = 1`,
//! `T_{j+1} = T_j + X_{j+1}` and `E(X_{j+1} | F_j) = c_j * sum_{i in I_j} X_i`,
//! the binomial expansion closes on square-free monomials:
//!
//! ```text
//! E(T_{j+1}^a X^{U'}) = sum_b C(a,b) * E(T_j^{a-b} X_{j+1}^{b+e} X^U)
//! ```
//!
//! where even powers of `X_{j+1}` drop out and odd powers are replaced by
//! the conditional mean.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate, MemorySpec, WalkParams};
use crate::numeric::{binomial_table, Neumaier};

use super::Conditioning;

pub const MAX_MOMENT: usize = 12;
/// Largest tracked index set (the table has `2^MAX_TRACKED` monomials per power).
pub const MAX_TRACKED: usize = 14;
/// Largest `n` accepted by the exact rational tier.
pub const RATIONAL_MAX_N: usize = 64;

/// Arithmetic used by the recursions.
pub trait Scalar: Clone + Send + Sync {
    type Acc;
    fn zero() -> Self;
    /// Exact conversion for the rational tier.
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div_usize(&self, d: usize) -> Self;
    fn acc() -> Self::Acc;
    fn acc_add(acc: &mut Self::Acc, x: Self);
    fn acc_value(acc: Self::Acc) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    type Acc = Neumaier;
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div_usize(&self, d: usize) -> Self {
        self / d as f64
    }
    fn acc() -> Neumaier {
        Neumaier::new()
    }
    fn acc_add(acc: &mut Neumaier, x: f64) {
        acc.add(x);
    }
    fn acc_value(acc: Neumaier) -> f64 {
        acc.value()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    type Acc = BigRational;
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite probability")
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(x.into())
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div_usize(&self, d: usize) -> Self {
        self / BigRational::from_integer(d.into())
    }
    fn acc() -> BigRational {
        Zero::zero()
    }
    fn acc_add(acc: &mut BigRational, x: BigRational) {
        *acc += x;
    }
    fn acc_value(acc: BigRational) -> BigRational {
        acc
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MomentOptions {
    /// Also track the `track_last` most recent steps (for lagged products
    /// outside the memory set).
    pub track_last: usize,
    /// Times at which to keep a copy of the table (the final time is always kept).
    pub snapshots: Vec<usize>,
}

/// Moments at one time `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSnapshot<S> {
    pub j: usize,
    pub max_moment: usize,
    /// The tracked index set `J_j`, increasing.
    pub indices: Vec<usize>,
    /// `values[a * 2^|J_j| + mask] = E(T_j^a * X^mask)`.
    pub values: Vec<S>,
}

impl<S: Scalar> MomentSnapshot<S> {
    fn mask_of(&self, idx: &[usize]) -> Option<usize> {
        let mut mask = 0usize;
        for i in idx {
            let pos = self.indices.iter().position(|t| t == i)?;
            if mask & (1 << pos) != 0 {
                return None;
            }
            mask |= 1 << pos;
        }
        Some(mask)
    }

    /// `E(T_j^a * prod_{i in idx} X_i)` when every index is tracked.
    pub fn get(&self, a: usize, idx: &[usize]) -> Option<S> {
        if a > self.max_moment {
            return None;
        }
        let mask = self.mask_of(idx)?;
        Some(self.values[a * (1 << self.indices.len()) + mask].clone())
    }

    /// `E(T_j^a)`.
    pub fn moment(&self, a: usize) -> S {
        self.get(a, &[]).expect("power within the table")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTableOf<S> {
    pub n: usize,
    pub conditioning: Conditioning,
    /// Memory set `I_n`.
    pub memory: Vec<usize>,
    pub last: MomentSnapshot<S>,
    pub snapshots: Vec<MomentSnapshot<S>>,
}

pub type MomentTable = MomentTableOf<f64>;

impl<S: Scalar> MomentTableOf<S> {
    pub fn get(&self, a: usize, idx: &[usize]) -> Option<S> {
        self.last.get(a, idx)
    }

    pub fn moment(&self, a: usize) -> S {
        self.last.moment(a)
    }

    pub fn snapshot(&self, j: usize) -> Option<&MomentSnapshot<S>> {
        if j == self.n {
            return Some(&self.last);
        }
        self.snapshots.iter().find(|s| s.j == j)
    }

    pub fn to_f64(&self) -> MomentTable {
        let conv = |s: &MomentSnapshot<S>| MomentSnapshot {
            j: s.j,
            max_moment: s.max_moment,
            indices: s.indices.clone(),
            values: s.values.iter().map(Scalar::to_f64).collect(),
        };
        MomentTableOf {
            n: self.n,
            conditioning: self.conditioning.clone(),
            memory: self.memory.clone(),
            last: conv(&self.last),
            snapshots: self.snapshots.iter().map(conv).collect(),
        }
    }
}

impl MomentTable {
    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        self.moment(2) - self.moment(1).powi(2)
    }
}

fn tracked(spec: MemorySpec, j: usize, last: usize) -> Vec<usize> {
    let mut idx = spec.resolve(j);
    idx.extend((j + 1).saturating_sub(last).max(1)..=j);
    idx.sort_unstable();
    idx.dedup();
    idx
}

fn power<S: Scalar>(x: i64, a: usize) -> S {
    S::from_i64(x.pow(a as u32))
}

fn run<S: Scalar>(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    max_moment: usize,
    options: &MomentOptions,
) -> Result<MomentTableOf<S>> {
    validate(params, spec, false)?;
    if spec.window_bound().is_none() {
        return Err(Error::Unsupported(format!(
            "exact moments need a bounded window; `{spec}` is unbounded"
        )));
    }
    if max_moment > MAX_MOMENT {
        return Err(Error::Unsupported(format!("moment order {max_moment} exceeds {MAX_MOMENT}")));
    }
    if n == 0 || params.start.len() > n {
        return Err(Error::InvalidParams("n must be at least 1 and cover the start prefix".into()));
    }
    if spec.window_bound().unwrap_or(0) + options.track_last > MAX_TRACKED {
        return Err(Error::Capacity(format!("tracked set larger than {MAX_TRACKED} steps")));
    }
    let powers = max_moment + 1;
    let binom: Vec<Vec<S>> = binomial_table(max_moment)
        .into_iter()
        .map(|row| row.into_iter().map(|c| S::from_i64(c as i64)).collect())
        .collect();
    let drift = S::from_f64(2.0 * params.p - 1.0);

    let branches = params.initial_branches();
    let start_len = branches[0].0.len();
    let mut idx = tracked(spec, start_len, options.track_last);
    let mut width = 1usize << idx.len();
    let mut table: Vec<S::Acc> = (0..powers * width).map(|_| S::acc()).collect();
    for (prefix, weight) in &branches {
        let w = S::from_f64(*weight);
        let t: i64 = prefix.iter().map(|&x| x as i64).sum();
        for mask in 0..width {
            let sign: i64 = idx
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &i)| prefix[i - 1] as i64)
                .product();
            for a in 0..powers {
                S::acc_add(&mut table[a * width + mask], w.mul(&power::<S>(t, a)).mul(&S::from_i64(sign)));
            }
        }
    }
    let mut cur: Vec<S> = table.into_iter().map(S::acc_value).collect();

    let mut wanted = options.snapshots.clone();
    wanted.sort_unstable();
    wanted.dedup();
    let mut snapshots = Vec::new();
    let snap = |j: usize, idx: &[usize], values: &[S]| MomentSnapshot {
        j,
        max_moment,
        indices: idx.to_vec(),
        values: values.to_vec(),
    };
    if wanted.binary_search(&start_len).is_ok() && start_len < n {
        snapshots.push(snap(start_len, &idx, &cur));
    }

    for j in start_len..n {
        let memory = spec.resolve(j);
        let mem_pos: Vec<usize> = memory
            .iter()
            .map(|i| idx.iter().position(|t| t == i).expect("memory is tracked"))
            .collect();
        let c = drift.div_usize(memory.len());
        let next_idx = tracked(spec, j + 1, options.track_last);
        let mut carry: Vec<(usize, usize)> = Vec::new();
        let mut new_bit = None;
        for (t, i) in next_idx.iter().enumerate() {
            match idx.iter().position(|o| o == i) {
                Some(pos) => carry.push((t, pos)),
                None => new_bit = Some(t),
            }
        }
        let next_width = 1usize << next_idx.len();
        let mut next: Vec<S> = Vec::with_capacity(powers * next_width);
        next.resize(powers * next_width, S::zero());
        for new_mask in 0..next_width {
            let e = new_bit.map_or(0, |t| (new_mask >> t) & 1);
            let old_mask = carry
                .iter()
                .fold(0usize, |acc, &(t, pos)| acc | (((new_mask >> t) & 1) << pos));
            for a in 0..powers {
                let mut acc = S::acc();
                for b in 0..=a {
                    let base = (a - b) * width;
                    if (b + e) % 2 == 0 {
                        S::acc_add(&mut acc, binom[a][b].mul(&cur[base + old_mask]));
                    } else {
                        let scale = binom[a][b].mul(&c);
                        for &pos in &mem_pos {
                            S::acc_add(&mut acc, scale.mul(&cur[base + (old_mask ^ (1 << pos))]));
                        }
                    }
                }
                next[a * next_width + new_mask] = S::acc_value(acc);
            }
        }
        cur = next;
        idx = next_idx;
        width = next_width;
        if j + 1 < n && wanted.binary_search(&(j + 1)).is_ok() {
            snapshots.push(snap(j + 1, &idx, &cur));
        }
    }

    Ok(MomentTableOf {
        n,
        conditioning: Conditioning::of(params),
        memory: spec.resolve(n),
        last: snap(n, &idx, &cur),
        snapshots,
    })
}

/// Exact moment table in double precision with compensated sums.
pub fn exact_moments(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    max_moment: usize,
    options: &MomentOptions,
) -> Result<MomentTable> {
    run::<f64>(spec, params, n, max_moment, options)
}

/// Exact moment table in rational arithmetic (`n <= 64`); `p` and `r` are
/// taken at their exact binary values.
pub fn exact_moments_rational(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    max_moment: usize,
    options: &MomentOptions,
) -> Result<MomentTableOf<BigRational>> {
    if n > RATIONAL_MAX_N {
        return Err(Error::Unsupported(format!("the rational tier needs n <= {RATIONAL_MAX_N}")));
    }
    run::<BigRational>(spec, params, n, max_moment, options)
}

/// `E(T_n^a)` for `a = 0..=max_moment` under the unbounded memories.
///
/// For the full memory `E(X_{j+1} | F_j) = (2p-1) T_j / j`, so the power
/// moments of `T_j` close by themselves. When the first `k` steps are
/// forgotten, the pair `(T_k, V_j = T_j - T_k)` closes instead.
pub fn unbounded_moments(spec: MemorySpec, params: &WalkParams, n: usize, max_moment: usize) -> Result<Vec<f64>> {
    validate(params, spec, false)?;
    let skip = match spec {
        MemorySpec::Full => None,
        MemorySpec::AllButFirstK(0) => None,
        MemorySpec::AllButFirstK(k) => Some(k),
        _ => return Err(Error::Unsupported(format!("`{spec}` has a bounded window; use exact_moments"))),
    };
    if max_moment > MAX_MOMENT {
        return Err(Error::Unsupported(format!("moment order {max_moment} exceeds {MAX_MOMENT}")));
    }
    if n == 0 || params.start.len() > n {
        return Err(Error::InvalidParams("n must be at least 1 and cover the start prefix".into()));
    }
    let top = max_moment + 1;
    let binom = binomial_table(top + 1);
    let c = 2.0 * params.p - 1.0;
    let branches = params.initial_branches();
    let start_len = branches[0].0.len();

    // Full-rule phase on E(T_j^a), a <= top.
    let switch = skip.map_or(n, |k| k.min(n).max(start_len));
    let mut full = vec![0.0; top + 1];
    let mut joint = vec![vec![0.0; top + 1]; top + 1];
    for (prefix, w) in &branches {
        let t: i64 = prefix.iter().map(|&x| x as i64).sum();
        for (a, slot) in full.iter_mut().enumerate() {
            *slot += w * (t as f64).powi(a as i32);
        }
        if let Some(k) = skip {
            if start_len > k {
                let tk: i64 = prefix[..k].iter().map(|&x| x as i64).sum();
                let v = t - tk;
                for (b, row) in joint.iter_mut().enumerate() {
                    for (a, slot) in row.iter_mut().enumerate() {
                        *slot += w * (tk as f64).powi(b as i32) * (v as f64).powi(a as i32);
                    }
                }
            }
        }
    }
    for j in start_len..switch {
        let mut next = vec![0.0; top + 1];
        for (a, slot) in next.iter_mut().enumerate() {
            let mut acc = Neumaier::new();
            for b in 0..=a {
                if b % 2 == 0 {
                    acc.add(binom[a][b] * full[a - b]);
                } else {
                    acc.add(binom[a][b] * c / j as f64 * full[a - b + 1]);
                }
            }
            *slot = acc.value();
        }
        full = next;
    }
    let Some(k) = skip else {
        return Ok(full[..=max_moment].to_vec());
    };
    if start_len <= k {
        for (b, row) in joint.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[0] = full[b];
        }
    }
    // joint[b][a] = E(T_k^b V_j^a)
    let from = switch.max(start_len);
    for j in from..n {
        let mut next = vec![vec![0.0; top + 1]; top + 1];
        for b in 0..top {
            for a in 0..=max_moment {
                let mut acc = Neumaier::new();
                for s in 0..=a {
                    if s % 2 == 0 {
                        acc.add(binom[a][s] * joint[b][a - s]);
                    } else if j == k {
                        acc.add(binom[a][s] * c / k as f64 * joint[b + 1][a - s]);
                    } else {
                        acc.add(binom[a][s] * c / (j - k) as f64 * joint[b][a - s + 1]);
                    }
                }
                next[b][a] = acc.value();
            }
        }
        joint = next;
    }
    Ok((0..=max_moment)
        .map(|a| {
            let mut acc = Neumaier::new();
            for b in 0..=a {
                acc.add(binom[a][b] * joint[b][a - b]);
            }
            acc.value()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate;

    #[test]
    fn last_step_mean_closed_form() {
        let params = WalkParams::new(0.75, 0.5).with_start(&[1]);
        let t = exact_moments(MemorySpec::LastK(1), &params, 4, 2, &MomentOptions::default()).unwrap();
        assert!((t.mean() - 1.875).abs() < 1e-14);
        assert_eq!(t.moment(0), 1.0);
    }

    #[test]
    fn rational_tier_matches_double() {
        let params = WalkParams::new(0.6, 0.25);
        for spec in [MemorySpec::LastK(2), MemorySpec::FirstMLastK(1, 2)] {
            let exact = exact_moments_rational(spec, &params, 30, 4, &MomentOptions::default()).unwrap().to_f64();
            let fast = exact_moments(spec, &params, 30, 4, &MomentOptions::default()).unwrap();
            for a in 0..=4 {
                assert!((exact.moment(a) - fast.moment(a)).abs() <= 1e-12 * exact.moment(a).abs().max(1.0));
            }
        }
        assert!(exact_moments_rational(MemorySpec::LastK(1), &params, 65, 2, &MomentOptions::default()).is_err());
    }

    #[test]
    fn odd_moments_vanish_for_fair_random_start() {
        let params = WalkParams::new(0.8, 0.5);
        let t = exact_moments_rational(MemorySpec::LastK(2), &params, 20, 5, &MomentOptions::default()).unwrap();
        for a in [1, 3, 5] {
            assert!(t.moment(a).is_zero());
        }
    }

    #[test]
    fn unbounded_moments_match_enumeration() {
        for spec in [MemorySpec::Full, MemorySpec::AllButFirstK(2), MemorySpec::AllButFirstK(1)] {
            for params in [
                WalkParams::new(0.6, 0.3),
                WalkParams::new(0.75, 0.5).with_start(&[1, -1]),
                WalkParams::new(0.25, 0.5).with_start(&[-1]),
            ] {
                let pmf = enumerate(spec, &params, 12).unwrap();
                let m = unbounded_moments(spec, &params, 12, 4).unwrap();
                for (a, &v) in m.iter().enumerate() {
                    let want = pmf.moment(a as u32);
                    assert!((v - want).abs() < 1e-10 * want.abs().max(1.0), "{spec} a={a}: {v} vs {want}");
                }
            }
        }
    }

    #[test]
    fn lagged_products_are_tracked() {
        let params = WalkParams::new(0.7, 0.7).with_start(&[1]);
        let opts = MomentOptions { track_last: 2, snapshots: vec![5] };
        let t = exact_moments(MemorySpec::FirstM(1), &params, 8, 1, &opts).unwrap();
        assert!(t.get(0, &[7, 8]).is_some());
        assert!(t.get(0, &[3, 8]).is_none());
        assert_eq!(t.snapshot(5).unwrap().j, 5);
    }

    #[test]
    fn unbounded_windows_are_refused() {
        let params = WalkParams::new(0.6, 0.6);
        assert!(matches!(
            exact_moments(MemorySpec::Full, &params, 10, 2, &MomentOptions::default()),
            Err(Error::Unsupported(_))
        ));
        assert!(exact_moments(MemorySpec::LastK(1), &params, 10, 13, &MomentOptions::default()).is_err());
    }
}
