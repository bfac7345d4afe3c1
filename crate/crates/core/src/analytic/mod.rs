//! Closed forms, asymptotic constants and limit laws.

mod formulas;
mod gamma;
mod laws;
mod lde;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MemorySpec, WalkParams};
use crate::oracle::enumerate;

pub use formulas::{mean_formula, variance_formula, FormulaKind, FormulaResult, Leading};
pub use gamma::{gamma_scaling, ln_gamma_ratio, ln_gamma_scaling};
pub use laws::{
    clt_limit_law, clt_limit_law_with, gaussian_moment, lln_limit_law, multiplier_clt_law, CenteringMode, CltLaw,
    CltOptions, Gaussian, LimitLaw, SkipVariance,
};
pub use lde::{solve_lde1, solve_lde2, Forcing, Lde1Solution, Lde2Closed, Lde2Solution, Roots};

/// One starting configuration of the memory head: the partial sum after `h`
/// steps, the sum of the first `m` steps and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) struct HeadBranch {
    pub t_h: i64,
    pub s_m: i64,
    pub weight: f64,
}

/// Law of `(T_h, S_m)` with `h = max(m, start length)` for a memory whose
/// first `m` steps follow the full rule.
pub(crate) fn head_branches(spec: MemorySpec, params: &WalkParams, m: usize) -> Result<(usize, Vec<HeadBranch>)> {
    let h = m.max(params.start.len());
    if h > crate::oracle::MAX_ENUMERATE_N {
        return Err(Error::Unsupported(format!("memory head of {h} steps is too long to enumerate")));
    }
    if params.start.len() >= m {
        let t_h = params.start.iter().map(|&x| x as i64).sum();
        let s_m = params.start[..m].iter().map(|&x| x as i64).sum();
        return Ok((h, vec![HeadBranch { t_h, s_m, weight: 1.0 }]));
    }
    // h = m: the head sum is the partial sum
    let pmf = enumerate(spec, params, m)?;
    let out = pmf
        .support
        .iter()
        .zip(&pmf.probs)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| HeadBranch { t_h: t, s_m: t, weight: w })
        .collect();
    Ok((h, out))
}

/// `E(X_L)` for the last step of the start prefix (or `2r - 1` for a random start).
pub(crate) fn last_start_mean(params: &WalkParams) -> f64 {
    match params.start.last() {
        Some(&x) => x as f64,
        None => 2.0 * params.r - 1.0,
    }
}

/// `E(S_L)` for the start prefix.
pub(crate) fn start_sum_mean(params: &WalkParams) -> f64 {
    if params.start.is_empty() {
        2.0 * params.r - 1.0
    } else {
        params.start.iter().map(|&x| x as f64).sum()
    }
}
