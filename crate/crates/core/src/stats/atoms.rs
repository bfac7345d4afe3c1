use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{ComponentFit, GofReport, Verdict};
use crate::analytic::LimitLaw;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_UNCLASSIFIED: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomTestConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub max_unclassified: f64,
}

impl AtomTestConfig {
    pub fn for_law(law: &LimitLaw, alpha: f64) -> Self {
        AtomTestConfig { epsilon: default_epsilon(law), alpha, max_unclassified: DEFAULT_MAX_UNCLASSIFIED }
    }
}

fn min_separation(locations: &[f64]) -> f64 {
    locations.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// `min(0.05, 0.45 * smallest gap between atoms)`.
pub fn default_epsilon(law: &LimitLaw) -> f64 {
    let mut locs: Vec<f64> = law.atoms.iter().map(|a| a.0).collect();
    locs.sort_by(f64::total_cmp);
    0.05f64.min(0.45 * min_separation(&locs))
}

/// Smallest `n` with `5 sigma / sqrt(n) < epsilon`, where `sigma^2 n` is the
/// within-branch variance of `S_n`.
pub fn required_n(sigma: f64, epsilon: f64) -> usize {
    ((5.0 * sigma / epsilon).powi(2)).floor() as usize + 1
}

/// Classifies each value to the atom within `epsilon` and runs a chi-square
/// test of the counts against the atom weights.
pub fn atom_cluster_test(sample: &[f64], law: &LimitLaw, config: &AtomTestConfig) -> Result<GofReport> {
    law.check()?;
    let AtomTestConfig { epsilon, alpha, max_unclassified } = *config;
    if law.gaussian_weight() > 0.0 {
        return Err(Error::InvalidParams("the law has a normal component; the atoms test needs a discrete law".into()));
    }
    if !(epsilon > 0.0) || !(alpha > 0.0 && alpha < 1.0) || !(0.0..=1.0).contains(&max_unclassified) {
        return Err(Error::InvalidParams(format!(
            "need epsilon > 0, alpha in (0, 1), unclassified bound in [0, 1]; got {epsilon}, {alpha}, {max_unclassified}"
        )));
    }
    if sample.is_empty() {
        return Err(Error::InvalidParams("empty sample".into()));
    }
    let mut atoms: Vec<(f64, f64)> = law.clone().merged().atoms;
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let locs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    let gap = min_separation(&locs);
    if gap <= 2.0 * epsilon {
        return Err(Error::InvalidParams(format!(
            "atom windows overlap: gap {gap} is not larger than 2 epsilon = {}",
            2.0 * epsilon
        )));
    }

    let mut counts = vec![0usize; atoms.len()];
    let mut unclassified = 0usize;
    for &x in sample {
        let i = locs.partition_point(|&l| l < x);
        let near = [i.checked_sub(1), (i < locs.len()).then_some(i)]
            .into_iter()
            .flatten()
            .find(|&j| (x - locs[j]).abs() <= epsilon);
        match near {
            Some(j) => counts[j] += 1,
            None => unclassified += 1,
        }
    }

    let total = sample.len() as f64;
    let classified = sample.len() - unclassified;
    let unclassified_frac = unclassified as f64 / total;
    let mut chi2 = 0.0;
    let mut notes = vec![format!("epsilon {epsilon}"), format!("unclassified fraction {unclassified_frac}")];
    for (&(_, w), &c) in atoms.iter().zip(&counts) {
        let expected = w * classified as f64;
        if expected > 0.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
        } else if c > 0 {
            chi2 = f64::INFINITY;
        }
    }
    let df = atoms.iter().filter(|a| a.1 > 0.0).count().saturating_sub(1);
    let p_value = if classified == 0 {
        0.0
    } else if df == 0 {
        if chi2.is_finite() {
            1.0
        } else {
            0.0
        }
    } else {
        ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?.sf(chi2)
    };
    if df > 0 && atoms.iter().any(|a| a.1 * (classified as f64) < 5.0) {
        notes.push("some expected counts are below 5".into());
    }
    let components = atoms
        .iter()
        .zip(&counts)
        .map(|(&(location, expected), &c)| ComponentFit { location, expected, observed: c as f64 / total })
        .collect();
    let pass = p_value >= alpha && unclassified_frac <= max_unclassified;
    Ok(GofReport {
        test: "atoms".into(),
        statistic: chi2,
        p_value: Some(p_value),
        alpha: Some(alpha),
        verdict: Verdict::from_bool(pass),
        sample_size: sample.len(),
        law: law.describe(),
        components,
        notes,
    })
}
