//! Limit laws as finite mixtures of point masses and centered normals.

use serde::{Deserialize, Serialize};

use super::head_branches;
use crate::engine::{Centering, CltRecipe, Scale};
use crate::error::{Error, Result};
use crate::model::{validate, MemorySpec, StepMultiplier, WalkParams};
use crate::oracle::enumerate_detailed;
use crate::rng::{uniform, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Mixture of atoms `(location, weight)` and normal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub atoms: Vec<(f64, f64)>,
    pub gaussians: Vec<Gaussian>,
}

/// `E(Z^m)` for a standard normal `Z`.
pub fn gaussian_moment(m: u32) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (1..m).step_by(2).map(|k| k as f64).product()
}

impl LimitLaw {
    pub fn new(atoms: Vec<(f64, f64)>, gaussians: Vec<Gaussian>) -> Result<Self> {
        let law = LimitLaw { atoms, gaussians };
        law.check()?;
        Ok(law)
    }

    pub fn point(x: f64) -> Self {
        LimitLaw { atoms: vec![(x, 1.0)], gaussians: Vec::new() }
    }

    pub fn normal(mean: f64, variance: f64) -> Self {
        LimitLaw { atoms: Vec::new(), gaussians: vec![Gaussian { mean, variance, weight: 1.0 }] }
    }

    pub fn check(&self) -> Result<()> {
        let mut total = 0.0;
        for &(x, w) in &self.atoms {
            if !x.is_finite() || !(w >= 0.0) {
                return Err(Error::InvalidParams(format!("malformed atom ({x}, {w})")));
            }
            total += w;
        }
        for g in &self.gaussians {
            if !(g.variance > 0.0) || !(g.weight >= 0.0) || !g.mean.is_finite() {
                return Err(Error::InvalidParams(format!("malformed normal component {g:?}")));
            }
            total += g.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("limit law weights sum to {total}")));
        }
        Ok(())
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|&(_, w)| w > 0.0)
    }

    pub fn gaussian_weight(&self) -> f64 {
        self.gaussians.iter().map(|g| g.weight).sum()
    }

    /// `E(Y^k)`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(x, w)| w * x.powi(k as i32)).sum();
        let normals: f64 = self
            .gaussians
            .iter()
            .map(|g| {
                let sd = g.variance.sqrt();
                let mut c = 1.0;
                let mut acc = 0.0;
                for j in 0..=k {
                    acc += c * g.mean.powi((k - j) as i32) * sd.powi(j as i32) * gaussian_moment(j);
                    c = c * (k - j) as f64 / (j + 1) as f64;
                }
                g.weight * acc
            })
            .sum();
        atoms + normals
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let atoms: f64 = self.atoms.iter().map(|&(x, w)| w * (x - m).powi(2)).sum();
        let normals: f64 = self.gaussians.iter().map(|g| g.weight * (g.variance + (g.mean - m).powi(2))).sum();
        atoms + normals
    }

    /// Combine atoms at equal locations and normals with equal parameters;
    /// drop zero weights.
    pub fn merged(mut self) -> Self {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (x, w) in self.atoms.drain(..) {
            if w <= 0.0 {
                continue;
            }
            match atoms.iter_mut().find(|(y, _)| (*y - x).abs() <= 1e-14 * x.abs().max(1.0)) {
                Some(slot) => slot.1 += w,
                None => atoms.push((x, w)),
            }
        }
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut gaussians: Vec<Gaussian> = Vec::new();
        for g in self.gaussians.drain(..) {
            if g.weight <= 0.0 {
                continue;
            }
            match gaussians
                .iter_mut()
                .find(|h| h.mean == g.mean && (h.variance - g.variance).abs() <= 1e-14 * g.variance)
            {
                Some(slot) => slot.weight += g.weight,
                None => gaussians.push(g),
            }
        }
        LimitLaw { atoms, gaussians }
    }

    /// Draw `count` values using `rng` (inverse CDF for the component,
    /// Box-Muller for normals).
    pub fn sample(&self, rng: &mut StreamRng, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut u = uniform(rng);
            let mut picked = None;
            for &(x, w) in &self.atoms {
                if u < w {
                    picked = Some(x);
                    break;
                }
                u -= w;
            }
            if picked.is_none() {
                let g = self
                    .gaussians
                    .iter()
                    .find(|g| {
                        let hit = u < g.weight;
                        u -= g.weight;
                        hit
                    })
                    .or(self.gaussians.last());
                picked = Some(match g {
                    Some(g) => {
                        let (u1, u2) = (1.0 - uniform(rng), uniform(rng));
                        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                        g.mean + g.variance.sqrt() * z
                    }
                    None => self.atoms.last().map_or(0.0, |a| a.0),
                });
            }
            out.push(picked.unwrap_or(0.0));
        }
        out
    }

    /// Short human-readable form with six significant digits.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> =
            self.atoms.iter().map(|&(x, w)| format!("{}*delta({})", short(w), short(x))).collect();
        parts.extend(
            self.gaussians
                .iter()
                .map(|g| format!("{}*N({}, {})", short(g.weight), short(g.mean), short(g.variance))),
        );
        parts.join(" + ")
    }
}

fn short(x: f64) -> String {
    let s = format!("{:.6e}", x);
    let v: f64 = s.parse().unwrap_or(x);
    let t = format!("{v}");
    if t == "-0" {
        "0".into()
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenteringMode {
    /// Center at the drift implied by a start prefix fixed in the parameters.
    Fixed,
    /// Center at the drift implied by the realized leading steps.
    Random,
    None,
}

/// Limiting variance used when the first `k` steps are forgotten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SkipVariance {
    /// `1/(3 - 4p)`: the remembered part is itself a full-memory walk.
    #[default]
    FullMemory,
    /// `1/(3 - 4 p_k)` with `p_k = P(X_{k+1} = +1)`.
    FirstRemembered,
    /// `1/(4 - 3 p_k)`.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct CltOptions {
    pub skip_variance: SkipVariance,
}

/// A limit law together with the centering and scaling it applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltLaw {
    pub law: LimitLaw,
    pub recipe: CltRecipe,
    pub label: String,
}

fn strict(spec: MemorySpec, params: &WalkParams) -> Result<()> {
    validate(params, spec, true)
}

/// Law of the limit of `S_n / n`.
pub fn lln_limit_law(spec: MemorySpec, params: &WalkParams) -> Result<LimitLaw> {
    strict(spec, params)?;
    let p = params.p;
    let a = 2.0 * p - 1.0;
    let atoms_from_head = |m: usize, drift: f64| -> Result<LimitLaw> {
        let (_, branches) = head_branches(spec, params, m)?;
        let atoms = branches.iter().map(|b| (drift * b.s_m as f64, b.weight)).collect();
        Ok(LimitLaw { atoms, gaussians: Vec::new() }.merged())
    };
    match spec {
        MemorySpec::FirstM(m) => atoms_from_head(m, a / m as f64),
        MemorySpec::FirstMLastK(1, 1) => atoms_from_head(1, a / (3.0 - 2.0 * p)),
        MemorySpec::FirstMLastK(2, 1) => atoms_from_head(2, a / (2.0 * (2.0 - p))),
        MemorySpec::LastK(1) | MemorySpec::LastK(2) => Ok(LimitLaw::point(0.0)),
        MemorySpec::Full | MemorySpec::AllButFirstK(_) if p <= 0.75 => Ok(LimitLaw::point(0.0)),
        MemorySpec::Full | MemorySpec::AllButFirstK(_) => Err(Error::NoFormula(
            "superdiffusive regime p > 3/4: S_n/n -> 0 but the rescaled limit is not a finite mixture".into(),
        )),
        _ => Err(Error::NoFormula(format!("no law of large numbers in the catalog for `{spec}`"))),
    }
}

fn full_memory_law(p: f64, label: &str) -> Result<CltLaw> {
    if p < 0.75 {
        Ok(CltLaw {
            law: LimitLaw::normal(0.0, 1.0 / (3.0 - 4.0 * p)),
            recipe: CltRecipe::plain(),
            label: format!("{label}: diffusive regime, variance 1/(3-4p)"),
        })
    } else if p == 0.75 {
        Ok(CltLaw {
            law: LimitLaw::normal(0.0, 1.0),
            recipe: CltRecipe { centering: Centering::None, scale: Scale::RootNLogN },
            label: format!("{label}: critical regime, sqrt(n log n) scaling"),
        })
    } else {
        Err(Error::NoFormula(format!(
            "supercritical regime p = {p} > 3/4: no Gaussian limit exists (S_n / n^(2p-1) converges to a non-Gaussian variable)"
        )))
    }
}

fn centered(mode: CenteringMode, params: &WalkParams, slope: f64, prefix: usize) -> Result<Centering> {
    if slope == 0.0 {
        return Ok(Centering::None);
    }
    match mode {
        CenteringMode::None => Err(Error::NoFormula(
            "this walk drifts linearly along start-dependent branches; use fixed or random centering".into(),
        )),
        CenteringMode::Fixed if params.start.len() < prefix => Err(Error::InvalidParams(format!(
            "fixed centering needs the first {prefix} step(s) fixed by the start prefix"
        ))),
        _ => Ok(Centering::Drift { slope, prefix }),
    }
}

/// Limit law of the centered statistic `(S_n - centering) / scale`.
pub fn clt_limit_law(spec: MemorySpec, params: &WalkParams, mode: CenteringMode) -> Result<CltLaw> {
    clt_limit_law_with(spec, params, mode, &CltOptions::default())
}

pub fn clt_limit_law_with(
    spec: MemorySpec,
    params: &WalkParams,
    mode: CenteringMode,
    options: &CltOptions,
) -> Result<CltLaw> {
    strict(spec, params)?;
    let p = params.p;
    let a = 2.0 * p - 1.0;
    let root = |law: LimitLaw, centering: Centering, label: &str| CltLaw {
        law: law.merged(),
        recipe: CltRecipe { centering, scale: Scale::RootN },
        label: label.into(),
    };
    match spec {
        MemorySpec::Full | MemorySpec::AllButFirstK(0) => full_memory_law(p, "full memory"),
        MemorySpec::AllButFirstK(k) => {
            let p_k = || -> Result<f64> {
                Ok(enumerate_detailed(spec, params, k + 1)?.marginal_up[k])
            };
            let variance = match options.skip_variance {
                SkipVariance::FullMemory => return full_memory_law(p, "all but the first steps"),
                SkipVariance::FirstRemembered => {
                    let q = p_k()?;
                    if q >= 0.75 {
                        return Err(Error::NoFormula(format!("p_k = {q} >= 3/4 leaves 1/(3-4p_k) undefined")));
                    }
                    1.0 / (3.0 - 4.0 * q)
                }
                SkipVariance::Printed => 1.0 / (4.0 - 3.0 * p_k()?),
            };
            Ok(root(
                LimitLaw::normal(0.0, variance),
                Centering::None,
                "all but the first steps: variance from the first remembered step",
            ))
        }
        MemorySpec::LastK(1) => Ok(root(
            LimitLaw::normal(0.0, p / (1.0 - p)),
            Centering::None,
            "last-step memory: variance p/(1-p)",
        )),
        MemorySpec::LastK(2) => Ok(root(
            LimitLaw::normal(0.0, super::formulas::sigma_last2(p)),
            Centering::None,
            "last-two-steps memory: second-order Markov chain",
        )),
        MemorySpec::FirstM(m) => {
            let centering = centered(mode, params, a, m)?;
            let (_, branches) = head_branches(spec, params, m)?;
            let gaussians = branches
                .iter()
                .map(|b| {
                    let r = (1.0 + a * b.s_m as f64 / m as f64) / 2.0;
                    Gaussian { mean: 0.0, variance: 4.0 * r * (1.0 - r), weight: b.weight }
                })
                .collect();
            Ok(root(
                LimitLaw { atoms: Vec::new(), gaussians },
                centering,
                "first-m memory: branch mixture with variances 4 r_k (1 - r_k)",
            ))
        }
        MemorySpec::FirstMLastK(1, 1) => {
            let centering = centered(mode, params, a / (3.0 - 2.0 * p), 1)?;
            Ok(root(
                LimitLaw::normal(0.0, super::formulas::sigma_first1_last1(p)),
                centering,
                "first plus last step: randomly centered normal",
            ))
        }
        MemorySpec::FirstMLastK(2, 1) => {
            let (pp, mm) = super::formulas::equal_pair_probs(params);
            let slope = if pp + mm == 0.0 { 0.0 } else { a / (2.0 - p) };
            let centering = centered(mode, params, slope, 2)?;
            let gaussians = vec![
                Gaussian { mean: 0.0, variance: super::formulas::sigma_first2_last1_equal(p), weight: pp + mm },
                Gaussian { mean: 0.0, variance: super::formulas::sigma_first2_last1_mixed(p), weight: 1.0 - pp - mm },
            ];
            Ok(root(
                LimitLaw { atoms: Vec::new(), gaussians },
                centering,
                "first two plus last step: equal and mixed start branches",
            ))
        }
        _ => Err(Error::NoFormula(format!("no central limit theorem in the catalog for `{spec}`"))),
    }
}

/// Limit of `S_n / sqrt(n)` (or `sqrt(n log n)` at `p = 3/4`) for the walk
/// `R * S~_n` with `S~` a full-memory walk started at `+1`.
pub fn multiplier_clt_law(p: f64, mult: &StepMultiplier) -> Result<CltLaw> {
    mult.check()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!("p = {p} must lie in (0, 1)")));
    }
    let base = full_memory_law(p, "full memory with multiplier")?;
    let unit = base.law.gaussians[0].variance;
    let mut atoms = Vec::new();
    let mut gaussians = Vec::new();
    for &(t, w) in &mult.atoms {
        if t == 0.0 {
            atoms.push((0.0, w));
        } else {
            gaussians.push(Gaussian { mean: 0.0, variance: unit * t * t, weight: w });
        }
    }
    Ok(CltLaw {
        law: LimitLaw { atoms, gaussians }.merged(),
        recipe: base.recipe,
        label: format!("{}; scale mixture over the multiplier", base.label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_standard_normal() {
        assert_eq!(gaussian_moment(0), 1.0);
        assert_eq!(gaussian_moment(2), 1.0);
        assert_eq!(gaussian_moment(3), 0.0);
        assert_eq!(gaussian_moment(4), 3.0);
        assert_eq!(gaussian_moment(6), 15.0);
    }

    #[test]
    fn two_step_head_atoms() {
        let law = lln_limit_law(MemorySpec::FirstM(2), &WalkParams::symmetric(0.6)).unwrap();
        let want = [(0.2, 0.36), (0.0, 0.40), (-0.2, 0.24)];
        assert_eq!(law.atoms.len(), 3);
        for (got, want) in law.atoms.iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn extreme_head_weights() {
        for m in 1..6 {
            let p = 0.7;
            let law = lln_limit_law(MemorySpec::FirstM(m), &WalkParams::symmetric(p)).unwrap();
            let at = |x: f64| law.atoms.iter().find(|a| (a.0 - x).abs() < 1e-12).map_or(0.0, |a| a.1);
            let top = 2.0 * p - 1.0;
            assert!((at(top) - p.powi(m as i32)).abs() < 1e-14);
            assert!((at(-top) - (1.0 - p) * p.powi(m as i32 - 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_last_atoms() {
        let law = lln_limit_law(MemorySpec::FirstMLastK(1, 1), &WalkParams::symmetric(0.75)).unwrap();
        assert!((law.atoms[0].0 - 1.0 / 3.0).abs() < 1e-15 && (law.atoms[0].1 - 0.75).abs() < 1e-15);
        assert!((law.atoms[1].0 + 1.0 / 3.0).abs() < 1e-15 && (law.atoms[1].1 - 0.25).abs() < 1e-15);
        assert_eq!(lln_limit_law(MemorySpec::LastK(1), &WalkParams::symmetric(0.75)).unwrap(), LimitLaw::point(0.0));
    }

    #[test]
    fn clt_examples() {
        let law = clt_limit_law(MemorySpec::LastK(1), &WalkParams::symmetric(0.75), CenteringMode::None).unwrap();
        assert_eq!(law.law, LimitLaw::normal(0.0, 3.0));

        let law = clt_limit_law(MemorySpec::FirstM(2), &WalkParams::symmetric(0.6), CenteringMode::Random).unwrap();
        assert_eq!(law.law.gaussians.len(), 2);
        let weights: Vec<(f64, f64)> = law.law.gaussians.iter().map(|g| (g.variance, g.weight)).collect();
        assert!(weights.iter().any(|&(v, w)| (v - 0.96).abs() < 1e-14 && (w - 0.6).abs() < 1e-14));
        assert!(weights.iter().any(|&(v, w)| (v - 1.0).abs() < 1e-14 && (w - 0.4).abs() < 1e-14));

        let law = clt_limit_law(MemorySpec::Full, &WalkParams::symmetric(0.6), CenteringMode::None).unwrap();
        assert!((law.law.gaussians[0].variance - 1.0 / 0.6).abs() < 1e-14);

        let err = clt_limit_law(MemorySpec::Full, &WalkParams::symmetric(0.85), CenteringMode::None).unwrap_err();
        assert!(err.to_string().contains("supercritical"));
        let crit = clt_limit_law(MemorySpec::Full, &WalkParams::symmetric(0.75), CenteringMode::None).unwrap();
        assert_eq!(crit.recipe.scale, Scale::RootNLogN);
    }

    #[test]
    fn branch_variances_for_three_step_head() {
        // r_1 = (p + (1 - p)) / 2 = 1/2 for a two-step head
        let law = clt_limit_law(MemorySpec::FirstM(2), &WalkParams::symmetric(0.6), CenteringMode::Random).unwrap();
        let mixed = law.law.gaussians.iter().find(|g| (g.weight - 0.4).abs() < 1e-14).unwrap();
        assert!((mixed.variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn branch_free_centering_is_refused() {
        assert!(clt_limit_law(MemorySpec::FirstM(1), &WalkParams::symmetric(0.7), CenteringMode::None).is_err());
        assert!(clt_limit_law(MemorySpec::FirstM(1), &WalkParams::symmetric(0.7), CenteringMode::Fixed).is_err());
        let fixed = WalkParams::new(0.7, 0.5).with_start(&[1]);
        assert!(clt_limit_law(MemorySpec::FirstM(1), &fixed, CenteringMode::Fixed).is_ok());
    }

    #[test]
    fn fair_walks_reduce_to_simple_walk() {
        let params = WalkParams::symmetric(0.5);
        for spec in [
            MemorySpec::Full,
            MemorySpec::FirstM(1),
            MemorySpec::FirstM(3),
            MemorySpec::LastK(1),
            MemorySpec::LastK(2),
            MemorySpec::FirstMLastK(1, 1),
            MemorySpec::FirstMLastK(2, 1),
        ] {
            let law = clt_limit_law(spec, &params, CenteringMode::Random).unwrap().law;
            assert!(!law.has_atoms());
            for g in &law.gaussians {
                assert!((g.variance - 1.0).abs() < 1e-14, "{spec}: {g:?}");
            }
            let lln = lln_limit_law(spec, &params).unwrap();
            assert!(lln.atoms.iter().all(|a| a.0 == 0.0));
        }
    }

    #[test]
    fn multiplier_mixture() {
        let mult: StepMultiplier = "-2:0.25,-1:0.25,1:0.25,2:0.25".parse().unwrap();
        let law = multiplier_clt_law(0.6, &mult).unwrap();
        assert_eq!(law.law.gaussians.len(), 2);
        assert!((law.law.raw_moment(2) - 2.5 / 0.6).abs() < 1e-12);
        let with_zero: StepMultiplier = "0:0.5,1:0.5".parse().unwrap();
        assert!(multiplier_clt_law(0.6, &with_zero).unwrap().law.has_atoms());
    }

    #[test]
    fn law_validation() {
        assert!(LimitLaw::new(vec![(0.0, 0.5)], vec![]).is_err());
        assert!(LimitLaw::new(vec![], vec![Gaussian { mean: 0.0, variance: 0.0, weight: 1.0 }]).is_err());
        let law = LimitLaw::new(vec![(1.0, 0.5)], vec![Gaussian { mean: 0.0, variance: 2.0, weight: 0.5 }]).unwrap();
        assert!((law.mean() - 0.5).abs() < 1e-15);
        assert!((law.variance() - 1.25).abs() < 1e-12);
    }
}
