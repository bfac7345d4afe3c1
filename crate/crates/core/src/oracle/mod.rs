//! Exact laws and moments of `T_n`.
//!
//! Three independent routes: brute-force path enumeration for any model at
//! small `n`, a forward dynamic program over window states for bounded
//! windows, and exact mixed-moment recursions.

mod dp;
mod enumerate;
mod moments;

use serde::{Deserialize, Serialize};

use crate::model::{Step, WalkParams};

pub use dp::{dp_distribution, DP_MAX_CELLS};
pub use enumerate::{enumerate, enumerate_detailed, Enumeration, MAX_ENUMERATE_N};
pub use moments::{
    exact_moments, exact_moments_rational, unbounded_moments, MomentOptions, MomentSnapshot, MomentTable,
    MomentTableOf, Scalar, MAX_MOMENT, MAX_TRACKED, RATIONAL_MAX_N,
};

/// How the leading steps are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Conditioning {
    /// `X_1 = +1` with probability `r`.
    RandomStart { r: f64 },
    /// The given prefix is fixed.
    Start(Vec<Step>),
}

impl Conditioning {
    pub fn of(params: &WalkParams) -> Self {
        if params.is_random_start() {
            Conditioning::RandomStart { r: params.r }
        } else {
            Conditioning::Start(params.start.clone())
        }
    }
}

/// Exact law of `T_n` on its support `{-n, -n + 2, ..., n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPMF {
    pub n: usize,
    pub support: Vec<i64>,
    pub probs: Vec<f64>,
    pub conditioning: Conditioning,
}

impl ExactPMF {
    /// Build from masses indexed by the number of up steps `u` (`T = 2u - n`).
    pub fn from_up_counts(n: usize, by_up: Vec<f64>, conditioning: Conditioning) -> Self {
        debug_assert_eq!(by_up.len(), n + 1);
        let support = (0..=n).map(|u| 2 * u as i64 - n as i64).collect();
        ExactPMF { n, support, probs: by_up, conditioning }
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::neumaier_sum(self.probs.iter().copied())
    }

    /// `P(T_n = t)`.
    pub fn prob(&self, t: i64) -> f64 {
        let shifted = t + self.n as i64;
        if shifted < 0 || shifted % 2 != 0 || shifted / 2 > self.n as i64 {
            return 0.0;
        }
        self.probs[(shifted / 2) as usize]
    }

    /// `E(T_n^a)`.
    pub fn moment(&self, a: u32) -> f64 {
        crate::numeric::neumaier_sum(self.support.iter().zip(&self.probs).map(|(&t, &w)| w * (t as f64).powi(a as i32)))
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        crate::numeric::neumaier_sum(self.support.iter().zip(&self.probs).map(|(&t, &w)| w * (t as f64 - m).powi(2)))
    }

    /// Largest absolute difference in mass against another law on the same `n`.
    pub fn max_abs_diff(&self, other: &ExactPMF) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
