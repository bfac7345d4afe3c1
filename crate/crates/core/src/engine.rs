//! Monte Carlo simulation of single paths and ensembles.
//!
//! Path `i` of an ensemble draws from the stream keyed by `(seed, i)`, and
//! results are assembled by index, so the output does not depend on the
//! worker count. While stepping, only the sufficient part of the history is
//! kept: the running sum for the full memory, the head sum plus a ring buffer
//! of the last `k` steps for bounded windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{up_probability, validate, MemorySpec, Step, StepMultiplier, WalkParams};
use crate::numeric::neumaier_sum;
use crate::rng::{stream, threshold, uniform, uniform_bits, StreamRng, DOMAIN_MULTIPLIER, DOMAIN_STEPS};

/// Largest number of step values an ensemble may record in full.
pub const FULL_RECORD_CAP: u128 = 1_000_000_000;

/// What to keep from a simulated path besides the final sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum Record {
    #[default]
    None,
    /// Partial sums at powers of two and at `n`.
    DefaultCheckpoints,
    /// Partial sums at the given indices (sorted and deduplicated on use).
    Checkpoints(Vec<usize>),
    /// Every step value.
    Full,
}

/// Powers of two up to `n`, plus `n` itself.
pub fn default_checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 1usize;
    while j < n {
        out.push(j);
        j = j.saturating_mul(2);
    }
    out.push(n);
    out
}

impl Record {
    fn checkpoint_schedule(&self, n: usize) -> Option<Vec<usize>> {
        match self {
            Record::DefaultCheckpoints => Some(default_checkpoints(n)),
            Record::Checkpoints(idx) => {
                let mut v: Vec<usize> = idx.iter().copied().filter(|&j| j >= 1 && j <= n).collect();
                v.sort_unstable();
                v.dedup();
                Some(v)
            }
            _ => None,
        }
    }
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: MemorySpec,
    pub params: WalkParams,
    pub n: usize,
    pub values: Option<Vec<Step>>,
    /// `(index, T_index)` pairs in increasing index order.
    pub checkpoints: Vec<(usize, i64)>,
    pub final_sum: i64,
    /// The first few steps (at least the memory head and the start prefix).
    pub head: Vec<Step>,
}

/// Start-dependent centering subtracted before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Centering {
    None,
    /// Subtract `n * slope * mean(X_1, ..., X_prefix)`.
    Drift { slope: f64, prefix: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    /// Divide by `sqrt(n)`.
    RootN,
    /// Divide by `sqrt(n log n)` (critical full memory).
    RootNLogN,
}

impl Scale {
    pub fn factor(&self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Scale::RootN => n.sqrt(),
            Scale::RootNLogN => (n * n.ln()).sqrt(),
        }
    }
}

/// Centering and scaling turning a partial sum into a CLT statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltRecipe {
    pub centering: Centering,
    pub scale: Scale,
}

impl CltRecipe {
    pub fn plain() -> Self {
        CltRecipe { centering: Centering::None, scale: Scale::RootN }
    }

    pub fn apply(&self, n: usize, final_sum: i64, head: &[Step]) -> f64 {
        let shift = match self.centering {
            Centering::None => 0.0,
            Centering::Drift { slope, prefix } => {
                let s: i64 = head[..prefix].iter().map(|&x| x as i64).sum();
                n as f64 * slope * s as f64 / prefix as f64
            }
        };
        (final_sum as f64 - shift) / self.scale.factor(n)
    }

    fn prefix(&self) -> usize {
        match self.centering {
            Centering::None => 0,
            Centering::Drift { prefix, .. } => prefix,
        }
    }
}

/// Per-path statistic stored in an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    /// `T_n`.
    Raw,
    /// `T_n / n`.
    OverN,
    Clt(CltRecipe),
}

impl Statistic {
    pub fn evaluate(&self, n: usize, final_sum: i64, head: &[Step]) -> f64 {
        match self {
            Statistic::Raw => final_sum as f64,
            Statistic::OverN => final_sum as f64 / n as f64,
            Statistic::Clt(recipe) => recipe.apply(n, final_sum, head),
        }
    }

    fn prefix(&self) -> usize {
        match self {
            Statistic::Clt(r) => r.prefix(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased sample variance (zero for a single path).
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(sample: &[f64]) -> Summary {
        let len = sample.len().max(1) as f64;
        let mean = neumaier_sum(sample.iter().copied()) / len;
        let ss = neumaier_sum(sample.iter().map(|&x| (x - mean) * (x - mean)));
        let variance = if sample.len() > 1 { ss / (len - 1.0) } else { 0.0 };
        let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Summary { mean, variance, min, max }
    }

    /// Standard error of the mean.
    pub fn std_error(&self, paths: usize) -> f64 {
        (self.variance / paths as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub spec: MemorySpec,
    pub params: WalkParams,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub multiplier: Option<(StepMultiplier, u64)>,
}

/// Monte Carlo output: one statistic per path plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePMF {
    pub sample: Vec<f64>,
    pub meta: EnsembleMeta,
    pub summary: Summary,
    pub trajectories: Option<Vec<Trajectory>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub record: Record,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(n: usize, paths: usize, seed: u64, statistic: Statistic) -> Self {
        EnsembleConfig { n, paths, seed, statistic, record: Record::None, workers: None }
    }

    pub fn with_record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

trait Recorder {
    fn step(&mut self, j: usize, x: Step, sum: i64);
}

struct NoRecord;

impl Recorder for NoRecord {
    #[inline(always)]
    fn step(&mut self, _: usize, _: Step, _: i64) {}
}

struct FullRecord {
    values: Vec<Step>,
    schedule: Vec<usize>,
    next: usize,
    checkpoints: Vec<(usize, i64)>,
}

impl Recorder for FullRecord {
    #[inline]
    fn step(&mut self, j: usize, x: Step, sum: i64) {
        self.values.push(x);
        if self.next < self.schedule.len() && self.schedule[self.next] == j {
            self.checkpoints.push((j, sum));
            self.next += 1;
        }
    }
}

struct CheckpointRecord {
    schedule: Vec<usize>,
    next: usize,
    checkpoints: Vec<(usize, i64)>,
}

impl Recorder for CheckpointRecord {
    #[inline]
    fn step(&mut self, j: usize, _: Step, sum: i64) {
        if self.next < self.schedule.len() && self.schedule[self.next] == j {
            self.checkpoints.push((j, sum));
            self.next += 1;
        }
    }
}

/// Minimal path output for the hot loop.
struct PathEnd {
    sum: i64,
    head: Vec<Step>,
}

#[inline(always)]
fn draw(rng: &mut StreamRng, prob_up: f64) -> Step {
    ((uniform(rng) < prob_up) as Step) * 2 - 1
}

fn run_path<R: Recorder>(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    rng: &mut StreamRng,
    keep: usize,
    rec: &mut R,
) -> PathEnd {
    let m = spec.head_len();
    let k = spec.tail_len();
    let cap = keep.max(m + k).max(params.start.len()).max(2);
    let mut head: Vec<Step> = Vec::with_capacity(cap.min(n));
    let mut sum: i64 = 0;
    let mut j = 0usize;

    // Start prefix.
    if params.start.is_empty() {
        let x = draw(rng, params.r);
        sum += x as i64;
        j = 1;
        head.push(x);
        rec.step(1, x, sum);
    } else {
        for &x in params.start.iter().take(n) {
            sum += x as i64;
            j += 1;
            head.push(x);
            rec.step(j, x, sum);
        }
    }

    let p = params.p;
    match spec {
        MemorySpec::Full => {
            let c = 0.5 * (2.0 * p - 1.0);
            while j < n {
                let q = 0.5 + c * sum as f64 / j as f64;
                let x = draw(rng, q);
                sum += x as i64;
                j += 1;
                if head.len() < cap {
                    head.push(x);
                }
                rec.step(j, x, sum);
            }
        }
        MemorySpec::AllButFirstK(skip) => {
            let mut head_sum: i64 = head.iter().take(skip).map(|&x| x as i64).sum();
            let c = 0.5 * (2.0 * p - 1.0);
            while j < n {
                let q = if j > skip {
                    0.5 + c * (sum - head_sum) as f64 / (j - skip) as f64
                } else {
                    0.5 + c * sum as f64 / j as f64
                };
                let x = draw(rng, q);
                sum += x as i64;
                j += 1;
                if j <= skip {
                    head_sum += x as i64;
                }
                if head.len() < cap {
                    head.push(x);
                }
                rec.step(j, x, sum);
            }
        }
        _ => {
            // Early phase: the head and tail windows may overlap or be short.
            while j < n && j < m + k {
                let (a, b) = spec.intervals(j);
                let mut s: i64 = a.clone().map(|i| head[i - 1] as i64).sum();
                let mut len = a.count();
                if let Some(b) = b {
                    s += b.clone().map(|i| head[i - 1] as i64).sum::<i64>();
                    len += b.count();
                }
                let x = draw(rng, up_probability(p, s, len));
                sum += x as i64;
                j += 1;
                head.push(x);
                rec.step(j, x, sum);
            }
            if j < n {
                let w = m + k;
                let table: Vec<f64> = (0..=w).map(|u| up_probability(p, 2 * u as i64 - w as i64, w)).collect();
                let head_sum: i64 = head[..m].iter().map(|&x| x as i64).sum();
                if k == 0 {
                    let q = table[((head_sum + w as i64) / 2) as usize];
                    while j < n {
                        let x = draw(rng, q);
                        sum += x as i64;
                        j += 1;
                        if head.len() < cap {
                            head.push(x);
                        }
                        rec.step(j, x, sum);
                    }
                } else {
                    let thr: Vec<u64> = table.iter().map(|&q| threshold(q)).collect();
                    let mut ring: Vec<i64> = head[j - k..j].iter().map(|&x| x as i64).collect();
                    let mut ring_sum: i64 = ring.iter().sum();
                    let mut pos = 0usize;
                    let base = head_sum + w as i64;
                    let mut t = thr[((base + ring_sum) >> 1) as usize];
                    while j < n {
                        // Both possible next thresholds are loaded before the draw
                        // so the table lookup stays off the dependency chain.
                        let old = ring[pos];
                        let t_up = thr[((base + ring_sum + 1 - old) >> 1) as usize];
                        let t_down = thr[((base + ring_sum - 1 - old) >> 1) as usize];
                        let up = uniform_bits(rng) < t;
                        let mask = 0u64.wrapping_sub(up as u64);
                        t = t_down ^ ((t_up ^ t_down) & mask);
                        let xi = 2 * up as i64 - 1;
                        let x = xi as Step;
                        ring_sum += xi - old;
                        ring[pos] = xi;
                        pos += 1;
                        if pos == k {
                            pos = 0;
                        }
                        sum += x as i64;
                        j += 1;
                        if head.len() < cap {
                            head.push(x);
                        }
                        rec.step(j, x, sum);
                    }
                }
            }
        }
    }
    PathEnd { sum, head }
}

fn check_inputs(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<()> {
    validate(params, spec, false)?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if params.start.len() > n {
        return Err(Error::InvalidParams("start prefix is longer than n".into()));
    }
    Ok(())
}

/// Simulate one path using `rng`.
pub fn simulate_path(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    rng: &mut StreamRng,
    record: &Record,
) -> Result<Trajectory> {
    check_inputs(spec, params, n)?;
    Ok(simulate_checked(spec, params, n, rng, record, 0))
}

fn simulate_checked(
    spec: MemorySpec,
    params: &WalkParams,
    n: usize,
    rng: &mut StreamRng,
    record: &Record,
    keep: usize,
) -> Trajectory {
    let (end, values, checkpoints) = match record {
        Record::None => (run_path(spec, params, n, rng, keep, &mut NoRecord), None, Vec::new()),
        Record::Full => {
            let mut rec = FullRecord {
                values: Vec::with_capacity(n),
                schedule: default_checkpoints(n),
                next: 0,
                checkpoints: Vec::new(),
            };
            let end = run_path(spec, params, n, rng, keep, &mut rec);
            (end, Some(rec.values), rec.checkpoints)
        }
        other => {
            let mut rec = CheckpointRecord {
                schedule: other.checkpoint_schedule(n).unwrap_or_default(),
                next: 0,
                checkpoints: Vec::new(),
            };
            let end = run_path(spec, params, n, rng, keep, &mut rec);
            (end, None, rec.checkpoints)
        }
    };
    Trajectory {
        spec,
        params: params.clone(),
        n,
        values,
        checkpoints,
        final_sum: end.sum,
        head: end.head,
    }
}

/// Simulate `paths` independent walks and store one statistic per path.
pub fn simulate_ensemble(spec: MemorySpec, params: &WalkParams, config: &EnsembleConfig) -> Result<EnsemblePMF> {
    check_inputs(spec, params, config.n)?;
    if config.paths == 0 {
        return Err(Error::InvalidParams("paths must be at least 1".into()));
    }
    let prefix = config.statistic.prefix();
    if prefix > config.n {
        return Err(Error::InvalidParams("centering prefix exceeds n".into()));
    }
    if config.record == Record::Full && (config.n as u128) * (config.paths as u128) > FULL_RECORD_CAP {
        return Err(Error::Capacity(format!(
            "recording {} x {} step values exceeds the cap of {FULL_RECORD_CAP}; use checkpoints",
            config.n, config.paths
        )));
    }

    let n = config.n;
    let seed = config.seed;
    let statistic = config.statistic;
    let record = &config.record;
    let keep_trajectories = *record != Record::None;

    let work = || -> Vec<(f64, Option<Trajectory>)> {
        (0..config.paths)
            .into_par_iter()
            .with_min_len(64)
            .map(|i| {
                let mut rng = stream(seed, DOMAIN_STEPS, i as u64);
                if keep_trajectories {
                    let t = simulate_checked(spec, params, n, &mut rng, record, prefix);
                    (statistic.evaluate(n, t.final_sum, &t.head), Some(t))
                } else {
                    let end = run_path(spec, params, n, &mut rng, prefix, &mut NoRecord);
                    (statistic.evaluate(n, end.sum, &end.head), None)
                }
            })
            .collect()
    };

    let results = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Unsupported(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut sample = Vec::with_capacity(results.len());
    let mut trajectories = if keep_trajectories { Some(Vec::with_capacity(results.len())) } else { None };
    for (v, t) in results {
        sample.push(v);
        if let (Some(ts), Some(t)) = (trajectories.as_mut(), t) {
            ts.push(t);
        }
    }
    let summary = Summary::of(&sample);
    Ok(EnsemblePMF {
        sample,
        meta: EnsembleMeta {
            spec,
            params: params.clone(),
            n,
            paths: config.paths,
            seed,
            statistic,
            multiplier: None,
        },
        summary,
        trajectories,
    })
}

/// Multiply each path statistic by an independent draw of `R`.
///
/// The ensemble must have been built with the start fixed to `+1`; the
/// result is then distributed as the walk with steps `R * X_n`.
pub fn apply_multiplier(ens: &EnsemblePMF, mult: &StepMultiplier, seed: u64) -> Result<EnsemblePMF> {
    mult.check()?;
    if ens.meta.params.start != [1] {
        return Err(Error::InvalidParams("the multiplier model needs an ensemble started at +1".into()));
    }
    let sample: Vec<f64> = ens
        .sample
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut rng = stream(seed, DOMAIN_MULTIPLIER, i as u64);
            v * mult.quantile(uniform(&mut rng))
        })
        .collect();
    let summary = Summary::of(&sample);
    let mut meta = ens.meta.clone();
    meta.multiplier = Some((mult.clone(), seed));
    Ok(EnsemblePMF { sample, meta, summary, trajectories: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(i: u64) -> StreamRng {
        stream(99, DOMAIN_STEPS, i)
    }

    #[test]
    fn frozen_first_step() {
        let params = WalkParams::new(1.0, 0.5).with_start(&[1]);
        let t = simulate_path(MemorySpec::FirstM(1), &params, 5, &mut rng(0), &Record::Full).unwrap();
        assert_eq!(t.final_sum, 5);
        assert_eq!(t.values.unwrap(), vec![1; 5]);
    }

    #[test]
    fn alternating_last_step() {
        let params = WalkParams::new(0.0, 0.5).with_start(&[1]);
        let t = simulate_path(MemorySpec::LastK(1), &params, 4, &mut rng(0), &Record::Full).unwrap();
        assert_eq!(t.values.unwrap(), vec![1, -1, 1, -1]);
        assert_eq!(t.final_sum, 0);
    }

    #[test]
    fn same_stream_same_path() {
        let params = WalkParams::new(0.7, 0.4);
        for spec in [MemorySpec::Full, MemorySpec::FirstMLastK(2, 3), MemorySpec::AllButFirstK(2)] {
            let a = simulate_path(spec, &params, 300, &mut rng(5), &Record::Full).unwrap();
            let b = simulate_path(spec, &params, 300, &mut rng(5), &Record::Full).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn recorded_and_unrecorded_paths_agree() {
        let params = WalkParams::new(0.65, 0.3);
        for spec in [MemorySpec::LastK(3), MemorySpec::FirstM(2), MemorySpec::FirstMLastK(1, 2)] {
            let a = simulate_path(spec, &params, 1000, &mut rng(3), &Record::Full).unwrap();
            let b = simulate_path(spec, &params, 1000, &mut rng(3), &Record::None).unwrap();
            assert_eq!(a.final_sum, b.final_sum);
            let values = a.values.unwrap();
            assert_eq!(values.iter().map(|&x| x as i64).sum::<i64>(), a.final_sum);
        }
    }

    #[test]
    fn first_step_mean() {
        let params = WalkParams::new(0.75, 0.75).with_start(&[1]);
        let config = EnsembleConfig::new(1000, 100_000, 11, Statistic::Raw);
        let ens = simulate_ensemble(MemorySpec::FirstM(1), &params, &config).unwrap();
        let se = ens.summary.std_error(ens.meta.paths);
        assert!((ens.summary.mean - 500.5).abs() < 4.0 * se, "{} vs 500.5 (se {se})", ens.summary.mean);
    }

    #[test]
    fn symmetric_walks_are_centered() {
        let params = WalkParams::new(0.5, 0.5);
        for spec in [MemorySpec::Full, MemorySpec::LastK(2), MemorySpec::FirstMLastK(1, 1)] {
            let config = EnsembleConfig::new(200, 20_000, 3, Statistic::OverN);
            let ens = simulate_ensemble(spec, &params, &config).unwrap();
            let se = ens.summary.std_error(ens.meta.paths);
            assert!(ens.summary.mean.abs() < 4.0 * se);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let params = WalkParams::new(0.7, 0.6);
        let base = EnsembleConfig::new(257, 3000, 42, Statistic::Raw).with_record(Record::DefaultCheckpoints);
        let a = simulate_ensemble(MemorySpec::LastK(2), &params, &base.clone().with_workers(1)).unwrap();
        let b = simulate_ensemble(MemorySpec::LastK(2), &params, &base.with_workers(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_multiplier_keeps_sample() {
        let params = WalkParams::new(0.6, 0.6).with_start(&[1]);
        let ens = simulate_ensemble(MemorySpec::Full, &params, &EnsembleConfig::new(50, 500, 1, Statistic::Raw)).unwrap();
        let out = apply_multiplier(&ens, &StepMultiplier::identity(), 9).unwrap();
        assert_eq!(out.sample, ens.sample);
        assert_eq!(out.summary, ens.summary);
        assert!(out.meta.multiplier.is_some());
    }

    #[test]
    fn multiplier_needs_plus_one_start() {
        let params = WalkParams::new(0.6, 0.6);
        let ens = simulate_ensemble(MemorySpec::Full, &params, &EnsembleConfig::new(10, 10, 1, Statistic::Raw)).unwrap();
        assert!(apply_multiplier(&ens, &StepMultiplier::identity(), 0).is_err());
        let plus = params.with_start(&[1]);
        let ens = simulate_ensemble(MemorySpec::Full, &plus, &EnsembleConfig::new(10, 10, 1, Statistic::Raw)).unwrap();
        let bad = StepMultiplier { atoms: vec![(1.0, 0.5), (2.0, 0.4)] };
        assert!(apply_multiplier(&ens, &bad, 0).is_err());
    }

    #[test]
    fn coin_multiplier_matches_random_start() {
        // R = +-1 with probabilities r, 1 - r turns the +1-started walk into the
        // random-start walk; compare the first two moments.
        let r = 0.3;
        let n = 200;
        let plus = WalkParams::new(0.6, r).with_start(&[1]);
        let ens = simulate_ensemble(MemorySpec::LastK(1), &plus, &EnsembleConfig::new(n, 100_000, 5, Statistic::Raw)).unwrap();
        let mixed = apply_multiplier(&ens, &StepMultiplier::coin(r).unwrap(), 6).unwrap();
        let direct = simulate_ensemble(
            MemorySpec::LastK(1),
            &WalkParams::new(0.6, r),
            &EnsembleConfig::new(n, 100_000, 7, Statistic::Raw),
        )
        .unwrap();
        let se = (mixed.summary.variance / 100_000.0 * 2.0).sqrt();
        assert!((mixed.summary.mean - direct.summary.mean).abs() < 4.0 * se);
        assert!((mixed.summary.variance / direct.summary.variance - 1.0).abs() < 0.03);
    }

    #[test]
    fn mirrored_start_mirrors_the_law() {
        let plus = WalkParams::new(0.7, 0.5).with_start(&[1, -1]);
        let config = EnsembleConfig::new(60, 50_000, 21, Statistic::Raw);
        for spec in [MemorySpec::LastK(2), MemorySpec::FirstMLastK(2, 1), MemorySpec::Full] {
            let a = simulate_ensemble(spec, &plus, &config).unwrap();
            let b = simulate_ensemble(spec, &plus.mirrored(), &config).unwrap();
            let se = ((a.summary.variance + b.summary.variance) / 50_000.0).sqrt();
            assert!((a.summary.mean + b.summary.mean).abs() < 4.0 * se);
            assert!((a.summary.variance / b.summary.variance - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn full_record_cap() {
        let params = WalkParams::new(0.6, 0.6);
        let config = EnsembleConfig::new(1_000_000, 2000, 1, Statistic::Raw).with_record(Record::Full);
        assert!(matches!(simulate_ensemble(MemorySpec::Full, &params, &config), Err(Error::Capacity(_))));
    }

    #[test]
    fn default_schedule() {
        assert_eq!(default_checkpoints(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(default_checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(default_checkpoints(1), vec![1]);
    }

    fn spec_strategy() -> impl Strategy<Value = MemorySpec> {
        prop_oneof![
            Just(MemorySpec::Full),
            (1usize..4).prop_map(MemorySpec::FirstM),
            (1usize..4).prop_map(MemorySpec::LastK),
            (1usize..3, 1usize..3).prop_map(|(m, k)| MemorySpec::FirstMLastK(m, k)),
            (0usize..3).prop_map(MemorySpec::AllButFirstK),
        ]
    }

    proptest! {
        #[test]
        fn trajectory_parity_and_bounds(
            spec in spec_strategy(),
            p in 0.0f64..=1.0,
            r in 0.0f64..=1.0,
            n in 1usize..200,
            seed in any::<u64>(),
        ) {
            let mut g = stream(seed, DOMAIN_STEPS, 0);
            let t = simulate_path(spec, &WalkParams::new(p, r), n, &mut g, &Record::Checkpoints((1..=n).collect())).unwrap();
            prop_assert_eq!(t.checkpoints.len(), n);
            for w in t.checkpoints.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
                prop_assert_eq!((w[1].1 - w[0].1).abs(), 1);
            }
            for &(j, s) in &t.checkpoints {
                prop_assert!(s.unsigned_abs() as usize <= j);
                prop_assert_eq!((s + j as i64).rem_euclid(2), 0);
            }
            prop_assert_eq!(t.checkpoints.last().unwrap().1, t.final_sum);
        }
    }
}
