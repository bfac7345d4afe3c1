//! Goodness-of-fit tests of ensembles against limit laws.

mod atoms;
mod ks;
mod lil;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::analytic::{FormulaResult, LimitLaw};

pub use atoms::{atom_cluster_test, default_epsilon, required_n, AtomTestConfig, DEFAULT_MAX_UNCLASSIFIED};
pub use ks::{kolmogorov_sf, ks_statistic, ks_test, KS_MIN_SAMPLE};
pub use lil::{lil_diagnostic, loglog_scale, EnvelopePoint, LilDiagnostic, LIL_MIN_CHECKPOINTS};

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// Expected against observed mass of one atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub location: f64,
    pub expected: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub alpha: Option<f64>,
    pub verdict: Verdict,
    pub sample_size: usize,
    pub law: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Right-continuous CDF of a mixture law.
pub fn mixture_cdf(law: &LimitLaw, x: f64) -> f64 {
    let atoms: f64 = law.atoms.iter().filter(|&&(a, _)| a <= x).map(|&(_, w)| w).sum();
    let normals: f64 = law
        .gaussians
        .iter()
        .map(|g| g.weight * normal_cdf((x - g.mean) / g.variance.sqrt()))
        .sum();
    (atoms + normals).clamp(0.0, 1.0)
}

/// An observed quantity for [`moment_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observed {
    /// Exact value from an oracle.
    Exact(f64),
    /// Monte Carlo estimate with its standard error.
    MonteCarlo { value: f64, std_error: f64 },
}

impl Observed {
    pub fn value(&self) -> f64 {
        match *self {
            Observed::Exact(v) | Observed::MonteCarlo { value: v, .. } => v,
        }
    }
}

/// Predicted target for [`moment_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicted<'a> {
    Value(f64),
    Formula(&'a FormulaResult),
    LawMean(&'a LimitLaw),
    LawVariance(&'a LimitLaw),
    LawMoment(&'a LimitLaw, u32),
}

impl Predicted<'_> {
    pub fn value(&self) -> f64 {
        match *self {
            Predicted::Value(v) => v,
            Predicted::Formula(f) => f.value,
            Predicted::LawMean(l) => l.mean(),
            Predicted::LawVariance(l) => l.variance(),
            Predicted::LawMoment(l, k) => l.raw_moment(k),
        }
    }
}

/// Pass iff `|obs - pred| <= max(abs_tol, rel_tol |pred|)`; Monte Carlo
/// observations also pass within four standard errors.
pub fn moment_check(name: &str, observed: Observed, predicted: Predicted<'_>, rel_tol: f64, abs_tol: f64) -> GofReport {
    let obs = observed.value();
    let pred = predicted.value();
    let diff = (obs - pred).abs();
    let mut band = abs_tol.max(rel_tol * pred.abs());
    let mut notes = vec![format!("observed {obs}, predicted {pred}")];
    if let Observed::MonteCarlo { std_error, .. } = observed {
        band = band.max(4.0 * std_error);
        notes.push(format!("4 SE band {}", 4.0 * std_error));
    }
    GofReport {
        test: format!("moment:{name}"),
        statistic: diff,
        p_value: None,
        alpha: None,
        verdict: Verdict::from_bool(diff <= band),
        sample_size: 0,
        law: pred.to_string(),
        components: Vec::new(),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Gaussian;
    use proptest::prelude::*;

    #[test]
    fn cdf_examples() {
        let n = LimitLaw::normal(0.0, 1.0);
        assert!((mixture_cdf(&n, 0.0) - 0.5).abs() < 1e-15);
        let mixed = LimitLaw {
            atoms: vec![(0.0, 0.5)],
            gaussians: vec![Gaussian { mean: 0.0, variance: 1.0, weight: 0.5 }],
        };
        assert!((mixture_cdf(&mixed, 0.0) - 0.75).abs() < 1e-15);
        assert_eq!(mixture_cdf(&mixed, f64::NEG_INFINITY), 0.0);
        assert_eq!(mixture_cdf(&mixed, f64::INFINITY), 1.0);
    }

    #[test]
    fn moment_check_examples() {
        let ok = moment_check("mean", Observed::Exact(0.04), Predicted::Value(0.04 + 1e-13), 1e-10, 0.0);
        assert!(ok.verdict.passed());
        let mc = moment_check(
            "mean",
            Observed::MonteCarlo { value: 0.01, std_error: 0.004 },
            Predicted::Value(0.0),
            0.0,
            0.0,
        );
        assert!(mc.verdict.passed());
        let bad = moment_check("mean", Observed::Exact(1.0), Predicted::Value(1.1), 0.01, 0.0);
        assert!(!bad.verdict.passed());
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(
            w in 0.0f64..1.0,
            loc in -3.0f64..3.0,
            mu in -2.0f64..2.0,
            var in 0.01f64..5.0,
        ) {
            let law = LimitLaw {
                atoms: vec![(loc, w)],
                gaussians: vec![Gaussian { mean: mu, variance: var, weight: 1.0 - w }],
            };
            let mut prev = 0.0;
            for i in 0..=2000 {
                let x = -10.0 + i as f64 * 0.01;
                let f = mixture_cdf(&law, x);
                prop_assert!(f - prev >= -1e-15);
                prev = f;
            }
        }

        #[test]
        fn moment_check_is_sign_symmetric(
            obs in -10.0f64..10.0,
            pred in -10.0f64..10.0,
            rel in 0.0f64..0.5,
            abs in 0.0f64..1.0,
            se in 0.0f64..1.0,
        ) {
            let a = moment_check("x", Observed::MonteCarlo { value: obs, std_error: se }, Predicted::Value(pred), rel, abs);
            let b = moment_check("x", Observed::MonteCarlo { value: -obs, std_error: se }, Predicted::Value(-pred), rel, abs);
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }
}
