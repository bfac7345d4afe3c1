//! Walk parameters, memory rules and the transition kernel.
//!
//! Every model in the crate is an instance of one kernel: after `n` steps the
//! walker looks at the steps indexed by its memory set `I_n`, and the next
//! step is `+1` with probability
//!
//! ```text
//! p * (fraction of +1 in I_n) + (1 - p) * (fraction of -1 in I_n)
//!   = (1 + (2p - 1) * mean(I_n)) / 2
//! ```
//!
//! Memory sets are unions of at most two integer intervals, which lets the
//! simulator, the enumerator and the dynamic programs all evaluate window
//! sums from prefix sums or small ring buffers.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single step of the walk, always `+1` or `-1`.
pub type Step = i8;

/// Reinforcement probability `p`, first-step probability `r` and an optional
/// fixed start prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub p: f64,
    pub r: f64,
    /// Fixed leading steps (length 0, 1 or 2). Empty means `X_1` is drawn
    /// with probability `r` of being `+1`.
    #[serde(default)]
    pub start: Vec<Step>,
}

impl WalkParams {
    pub fn new(p: f64, r: f64) -> Self {
        WalkParams { p, r, start: Vec::new() }
    }

    /// Random start with `r = p`.
    pub fn symmetric(p: f64) -> Self {
        WalkParams::new(p, p)
    }

    pub fn with_start(mut self, start: &[Step]) -> Self {
        self.start = start.to_vec();
        self
    }

    pub fn is_random_start(&self) -> bool {
        self.start.is_empty()
    }

    /// The law of the leading steps as weighted branches.
    ///
    /// A fixed start yields a single branch; a random start yields `X_1 = +1`
    /// with weight `r` and `X_1 = -1` with weight `1 - r` (zero-weight
    /// branches are dropped).
    pub fn initial_branches(&self) -> Vec<(Vec<Step>, f64)> {
        if !self.start.is_empty() {
            return vec![(self.start.clone(), 1.0)];
        }
        let mut out = Vec::with_capacity(2);
        if self.r > 0.0 {
            out.push((vec![1], self.r));
        }
        if self.r < 1.0 {
            out.push((vec![-1], 1.0 - self.r));
        }
        out
    }

    /// Same parameters with the start prefix negated and `r -> 1 - r`.
    pub fn mirrored(&self) -> Self {
        WalkParams {
            p: self.p,
            r: 1.0 - self.r,
            start: self.start.iter().map(|s| -s).collect(),
        }
    }
}

/// Which past steps the walker may copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MemorySpec {
    /// Every past step (the classical elephant walk).
    Full,
    /// The first `m` steps.
    FirstM(usize),
    /// The most recent `k` steps.
    LastK(usize),
    /// The first `m` and the most recent `k` steps.
    FirstMLastK(usize, usize),
    /// Everything except the first `k` steps; the full rule applies while
    /// `n <= k`.
    AllButFirstK(usize),
}

impl MemorySpec {
    /// Memory set as at most two disjoint, increasing, inclusive intervals.
    pub fn intervals(&self, n: usize) -> (RangeInclusive<usize>, Option<RangeInclusive<usize>>) {
        debug_assert!(n >= 1);
        match *self {
            MemorySpec::Full => (1..=n, None),
            MemorySpec::FirstM(m) => (1..=m.min(n), None),
            MemorySpec::LastK(k) => ((n + 1).saturating_sub(k).max(1)..=n, None),
            MemorySpec::FirstMLastK(m, k) => {
                let head = m.min(n);
                let lo = (head + 1).max((n + 1).saturating_sub(k));
                let tail = if lo <= n { Some(lo..=n) } else { None };
                (1..=head, tail)
            }
            MemorySpec::AllButFirstK(k) => {
                if n > k {
                    (k + 1..=n, None)
                } else {
                    (1..=n, None)
                }
            }
        }
    }

    /// `I_n` as an increasing index list (1-based).
    pub fn resolve(&self, n: usize) -> Vec<usize> {
        let (a, b) = self.intervals(n);
        let mut out: Vec<usize> = a.collect();
        if let Some(b) = b {
            out.extend(b);
        }
        out
    }

    /// `|I_n|` without materializing the set.
    pub fn memory_len(&self, n: usize) -> usize {
        let (a, b) = self.intervals(n);
        a.count() + b.map_or(0, |b| b.count())
    }

    /// Largest possible memory size, or `None` when it grows with `n`.
    pub fn window_bound(&self) -> Option<usize> {
        match *self {
            MemorySpec::FirstM(m) => Some(m),
            MemorySpec::LastK(k) => Some(k),
            MemorySpec::FirstMLastK(m, k) => Some(m + k),
            MemorySpec::Full | MemorySpec::AllButFirstK(_) => None,
        }
    }

    /// Number of leading steps the memory keeps forever (`m` for the
    /// first-step models, zero otherwise).
    pub fn head_len(&self) -> usize {
        match *self {
            MemorySpec::FirstM(m) | MemorySpec::FirstMLastK(m, _) => m,
            _ => 0,
        }
    }

    /// Number of trailing steps in the sliding part of the memory.
    pub fn tail_len(&self) -> usize {
        match *self {
            MemorySpec::LastK(k) | MemorySpec::FirstMLastK(_, k) => k,
            _ => 0,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            MemorySpec::FirstM(0) => Err(Error::InvalidParams("first:M needs M >= 1".into())),
            MemorySpec::LastK(0) => Err(Error::InvalidParams("last:K needs K >= 1".into())),
            MemorySpec::FirstMLastK(m, k) if m == 0 || k == 0 => Err(Error::InvalidParams(
                "first:M+last:K needs M >= 1 and K >= 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// `I_n` for `n >= 1`.
pub fn resolve_memory(spec: MemorySpec, n: usize) -> Vec<usize> {
    spec.resolve(n)
}

impl fmt::Display for MemorySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MemorySpec::Full => write!(f, "full"),
            MemorySpec::FirstM(m) => write!(f, "first:{m}"),
            MemorySpec::LastK(k) => write!(f, "last:{k}"),
            MemorySpec::FirstMLastK(m, k) => write!(f, "first:{m}+last:{k}"),
            MemorySpec::AllButFirstK(k) => write!(f, "skipfirst:{k}"),
        }
    }
}

fn parse_count(s: &str, what: &str, allow_zero: bool) -> Result<usize> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Grammar(format!("--model: `{s}` is not a count in `{what}`")))?;
    if v == 0 && !allow_zero {
        return Err(Error::Grammar(format!("--model: `{what}` needs a positive count")));
    }
    Ok(v)
}

impl FromStr for MemorySpec {
    type Err = Error;

    /// Grammar: `full | first:M | last:K | first:M+last:K | skipfirst:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(MemorySpec::Full);
        }
        if let Some((head, tail)) = s.split_once('+') {
            let m = head
                .strip_prefix("first:")
                .ok_or_else(|| Error::Grammar(format!("--model: expected `first:M+last:K`, got `{s}`")))?;
            let k = tail
                .strip_prefix("last:")
                .ok_or_else(|| Error::Grammar(format!("--model: expected `first:M+last:K`, got `{s}`")))?;
            return Ok(MemorySpec::FirstMLastK(parse_count(m, s, false)?, parse_count(k, s, false)?));
        }
        if let Some(m) = s.strip_prefix("first:") {
            return Ok(MemorySpec::FirstM(parse_count(m, s, false)?));
        }
        if let Some(k) = s.strip_prefix("last:") {
            return Ok(MemorySpec::LastK(parse_count(k, s, false)?));
        }
        if let Some(k) = s.strip_prefix("skipfirst:") {
            return Ok(MemorySpec::AllButFirstK(parse_count(k, s, true)?));
        }
        Err(Error::Grammar(format!(
            "--model: unknown model `{s}` (expected full | first:M | last:K | first:M+last:K | skipfirst:K)"
        )))
    }
}

/// Parse a start prefix such as `+1`, `-1` or `+1,-1`.
pub fn parse_start(s: &str) -> Result<Vec<Step>> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let v = match tok.trim() {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(Error::Grammar(format!("--start: `{other}` is not +1 or -1"))),
        };
        out.push(v);
    }
    if out.len() > 2 {
        return Err(Error::Grammar("--start: at most two fixed steps".into()));
    }
    Ok(out)
}

/// Law of the independent multiplier `R` applied to a walk started at `+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMultiplier {
    pub atoms: Vec<(f64, f64)>,
}

impl StepMultiplier {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = StepMultiplier { atoms };
        m.check()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        StepMultiplier { atoms: vec![(1.0, 1.0)] }
    }

    /// `R = +1` with probability `r`, `-1` otherwise.
    pub fn coin(r: f64) -> Result<Self> {
        StepMultiplier::new(vec![(1.0, r), (-1.0, 1.0 - r)])
    }

    pub fn check(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidParams("multiplier has no atoms".into()));
        }
        let mut total = 0.0;
        for &(v, w) in &self.atoms {
            if !v.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParams(format!("multiplier atom ({v}, {w}) is malformed")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("multiplier weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| w * v * v).sum()
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, w) in &self.atoms {
            acc += w;
            if u < acc {
                return v;
            }
        }
        self.atoms.last().map(|a| a.0).unwrap_or(0.0)
    }
}

impl FromStr for StepMultiplier {
    type Err = Error;

    /// Grammar: `v:w,v:w,...`.
    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for tok in s.split(',') {
            let (v, w) = tok
                .split_once(':')
                .ok_or_else(|| Error::Grammar(format!("--mult: `{tok}` is not `value:weight`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Grammar(format!("--mult: bad value `{v}`")))?;
            let w: f64 = w.trim().parse().map_err(|_| Error::Grammar(format!("--mult: bad weight `{w}`")))?;
            atoms.push((v, w));
        }
        StepMultiplier::new(atoms).map_err(|e| Error::Grammar(format!("--mult: {e}")))
    }
}

/// What the walker knows after `n` steps.
#[derive(Debug, Clone, PartialEq)]
pub enum History {
    /// Sufficient statistic for unbounded memories: the sum over `I_n` and
    /// its size.
    Summary { n: usize, sum: i64, len: usize },
    /// The actual step values at the indices of `I_n`, in index order.
    Window { n: usize, values: Vec<Step> },
}

impl History {
    /// Build the history a given memory rule sees after the steps `path`.
    pub fn from_path(spec: MemorySpec, path: &[Step]) -> Self {
        let n = path.len();
        match spec {
            MemorySpec::Full | MemorySpec::AllButFirstK(_) => {
                let idx = spec.intervals(n).0;
                let len = idx.clone().count();
                let sum = idx.map(|i| path[i - 1] as i64).sum();
                History::Summary { n, sum, len }
            }
            _ => History::Window {
                n,
                values: spec.resolve(n).into_iter().map(|i| path[i - 1]).collect(),
            },
        }
    }

    pub fn n(&self) -> usize {
        match self {
            History::Summary { n, .. } | History::Window { n, .. } => *n,
        }
    }

    fn sum_len(&self) -> (i64, usize) {
        match self {
            History::Summary { sum, len, .. } => (*sum, *len),
            History::Window { values, .. } => (values.iter().map(|&v| v as i64).sum(), values.len()),
        }
    }
}

/// `P(next step = +1)` when the remembered steps sum to `sum` over `len`
/// entries.
#[inline]
pub fn up_probability(p: f64, sum: i64, len: usize) -> f64 {
    0.5 * (1.0 + (2.0 * p - 1.0) * (sum as f64) / (len as f64))
}

/// `P(X_{n+1} = +1 | history)`.
pub fn prob_up(spec: MemorySpec, params: &WalkParams, history: &History) -> Result<f64> {
    let n = history.n();
    if n == 0 {
        return Ok(params.r);
    }
    let expected = spec.memory_len(n);
    let (sum, len) = history.sum_len();
    if len != expected {
        return Err(Error::InconsistentHistory { expected, found: len });
    }
    if let History::Window { values, .. } = history {
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidParams("window values must be +1 or -1".into()));
        }
    }
    if sum.unsigned_abs() as usize > len {
        return Err(Error::InvalidParams(format!("window sum {sum} exceeds its size {len}")));
    }
    Ok(up_probability(params.p, sum, len))
}

/// Check the type invariants; `strict` additionally requires `0 < p < 1`.
pub fn validate(params: &WalkParams, spec: MemorySpec, strict: bool) -> Result<()> {
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::InvalidParams(format!("p out of range: {} not in [0, 1]", params.p)));
    }
    if !(0.0..=1.0).contains(&params.r) {
        return Err(Error::InvalidParams(format!("r out of range: {} not in [0, 1]", params.r)));
    }
    if strict && (params.p == 0.0 || params.p == 1.0) {
        return Err(Error::InvalidParams(format!(
            "p = {} is excluded in strict mode: p = 1 freezes every step to X_1 and p = 0 alternates",
            params.p
        )));
    }
    if params.start.len() > 2 {
        return Err(Error::InvalidParams(format!(
            "start prefix has {} steps, at most 2 allowed",
            params.start.len()
        )));
    }
    if params.start.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidParams("start entries must be +1 or -1".into()));
    }
    spec.check()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn resolve_examples() {
        assert_eq!(MemorySpec::FirstM(2).resolve(1), vec![1]);
        assert_eq!(MemorySpec::LastK(2).resolve(5), vec![4, 5]);
        assert_eq!(MemorySpec::FirstMLastK(1, 1).resolve(1), vec![1]);
        assert_eq!(MemorySpec::AllButFirstK(2).resolve(2), vec![1, 2]);
        assert_eq!(MemorySpec::AllButFirstK(2).resolve(5), vec![3, 4, 5]);
        assert_eq!(MemorySpec::FirstMLastK(2, 2).resolve(3), vec![1, 2, 3]);
        assert_eq!(MemorySpec::FirstMLastK(2, 2).resolve(7), vec![1, 2, 6, 7]);
        assert_eq!(MemorySpec::Full.resolve(3), vec![1, 2, 3]);
    }

    #[test]
    fn kernel_examples() {
        let full = History::from_path(MemorySpec::Full, &[1, 1, -1]);
        let q = prob_up(MemorySpec::Full, &WalkParams::new(0.75, 0.5), &full).unwrap();
        assert!((q - 7.0 / 12.0).abs() < 1e-15);

        let h = History::from_path(MemorySpec::FirstMLastK(1, 1), &[1, 1, 1, -1]);
        for p in [0.1, 0.75, 0.9] {
            assert_eq!(prob_up(MemorySpec::FirstMLastK(1, 1), &WalkParams::new(p, 0.5), &h).unwrap(), 0.5);
        }
        let h = History::from_path(MemorySpec::LastK(1), &[1, 1, -1]);
        assert_eq!(prob_up(MemorySpec::LastK(1), &WalkParams::new(0.75, 0.5), &h).unwrap(), 0.25);
    }

    #[test]
    fn inconsistent_history_is_rejected() {
        let h = History::Window { n: 5, values: vec![1] };
        let err = prob_up(MemorySpec::LastK(2), &WalkParams::new(0.6, 0.6), &h).unwrap_err();
        assert_eq!(err, Error::InconsistentHistory { expected: 2, found: 1 });
    }

    #[test]
    fn validation() {
        let bad = WalkParams::new(1.2, 0.5);
        let err = validate(&bad, MemorySpec::Full, false).unwrap_err();
        assert!(err.to_string().contains("p out of range"));
        let edge = WalkParams::new(1.0, 0.5);
        assert!(validate(&edge, MemorySpec::Full, false).is_ok());
        let err = validate(&edge, MemorySpec::Full, true).unwrap_err();
        assert!(err.to_string().contains("strict"));
        assert!(validate(&WalkParams::new(0.75, 0.75), MemorySpec::FirstM(1), true).is_ok());
        assert!(validate(&WalkParams::new(0.5, 0.5).with_start(&[1, 0]), MemorySpec::Full, false).is_err());
        assert!(validate(&WalkParams::new(0.5, 0.5).with_start(&[1, 1, 1]), MemorySpec::Full, false).is_err());
        assert!(validate(&WalkParams::new(0.5, 0.5), MemorySpec::FirstM(0), false).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["full", "first:3", "last:2", "first:2+last:1", "skipfirst:0", "skipfirst:4"] {
            let spec: MemorySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        for bad in ["first:0", "last:", "first:1+first:2", "half", "last:-1", "first:1+last:0"] {
            assert!(bad.parse::<MemorySpec>().is_err(), "{bad}");
        }
        assert_eq!(parse_start("+1,-1").unwrap(), vec![1, -1]);
        assert!(parse_start("+2").is_err());
        let m: StepMultiplier = "-2:0.25,-1:0.25,1:0.25,2:0.25".parse().unwrap();
        assert!((m.second_moment() - 2.5).abs() < 1e-15);
        assert!("1:0.5,2:0.4".parse::<StepMultiplier>().is_err());
    }

    fn spec_strategy() -> impl Strategy<Value = MemorySpec> {
        prop_oneof![
            Just(MemorySpec::Full),
            (1usize..5).prop_map(MemorySpec::FirstM),
            (1usize..5).prop_map(MemorySpec::LastK),
            (1usize..4, 1usize..4).prop_map(|(m, k)| MemorySpec::FirstMLastK(m, k)),
            (0usize..4).prop_map(MemorySpec::AllButFirstK),
        ]
    }

    proptest! {
        #[test]
        fn resolve_is_nonempty_increasing_subset(spec in spec_strategy(), n in 1usize..40) {
            let idx = spec.resolve(n);
            prop_assert!(!idx.is_empty());
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(idx.iter().all(|&i| (1..=n).contains(&i)));
            prop_assert_eq!(idx.len(), spec.memory_len(n));
            if let MemorySpec::FirstMLastK(m, k) = spec {
                let mut want: Vec<usize> = (1..=m.min(n)).chain((n + 1).saturating_sub(k).max(1)..=n).collect();
                want.sort();
                want.dedup();
                prop_assert_eq!(idx, want);
            }
        }

        #[test]
        fn kernel_properties(
            spec in spec_strategy(),
            p in 0.0f64..=1.0,
            path in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..30),
        ) {
            let params = WalkParams::new(p, 0.5);
            let h = History::from_path(spec, &path);
            let up = prob_up(spec, &params, &h).unwrap();
            prop_assert!((0.0..=1.0).contains(&up));
            let neg: Vec<Step> = path.iter().map(|s| -s).collect();
            let down = prob_up(spec, &params, &History::from_path(spec, &neg)).unwrap();
            prop_assert!((up + down - 1.0).abs() < 1e-15);
            let half = prob_up(spec, &WalkParams::new(0.5, 0.5), &h).unwrap();
            prop_assert_eq!(half, 0.5);
        }

        #[test]
        fn kernel_is_affine_in_window_mean(p in 0.0f64..=1.0, len in 1usize..20) {
            // three points (mean -1, 0 or near 0, +1) are collinear with slope (2p-1)/2
            let lo = up_probability(p, -(len as i64), len);
            let hi = up_probability(p, len as i64, len);
            let s = if len % 2 == 0 { 0 } else { 1 };
            let mid = up_probability(p, s, len);
            let x = s as f64 / len as f64;
            let slope = (hi - lo) / 2.0;
            prop_assert!((slope - (2.0 * p - 1.0) / 2.0).abs() < 1e-14);
            prop_assert!((mid - (lo + slope * (x + 1.0))).abs() < 1e-14);
        }
    }
}
