//! Catalog of exact and asymptotic means and variances of `T_n`.
//!
//! Entries are keyed by the memory rule and the start condition. Anything
//! outside the catalog returns [`Error::NoFormula`] so callers fall back to
//! the exact oracles instead of extrapolating an asymptotic formula.

use serde::{Deserialize, Serialize};

use super::gamma::gamma_scaling;
use super::{head_branches, last_start_mean, start_sum_mean};
use crate::error::{Error, Result};
use crate::model::{validate, MemorySpec, WalkParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FormulaKind {
    Exact,
    /// Leading behavior with the stated error order.
    Asymptotic { order: String },
}

/// Coefficient of the leading power of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leading {
    pub power: u32,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaResult {
    pub value: f64,
    pub kind: FormulaKind,
    pub leading: Option<Leading>,
    /// Constant term of the expansion, when known.
    pub offset: Option<f64>,
    pub validity: String,
    pub label: String,
}

impl FormulaResult {
    fn exact(value: f64, label: &str) -> Self {
        FormulaResult {
            value,
            kind: FormulaKind::Exact,
            leading: None,
            offset: None,
            validity: "0 < p < 1".into(),
            label: label.into(),
        }
    }

    fn asymptotic(value: f64, order: &str, leading: Option<Leading>, offset: Option<f64>, label: &str) -> Self {
        FormulaResult {
            value,
            kind: FormulaKind::Asymptotic { order: order.into() },
            leading,
            offset,
            validity: "0 < p < 1, n -> infinity".into(),
            label: label.into(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == FormulaKind::Exact
    }
}

fn no_formula(what: &str, spec: MemorySpec) -> Error {
    Error::NoFormula(format!(
        "no {what} formula for `{spec}` under this start condition; use `exact` (enum, dp or moments) instead"
    ))
}

fn check(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<()> {
    validate(params, spec, true)?;
    if n == 0 || params.start.len() > n {
        return Err(Error::InvalidParams("n must be at least 1 and cover the start prefix".into()));
    }
    Ok(())
}

/// Probabilities that the first two steps are `(+1,+1)` and `(-1,-1)`.
pub(super) fn equal_pair_probs(params: &WalkParams) -> (f64, f64) {
    let p = params.p;
    match params.start.as_slice() {
        [] => (params.r * p, (1.0 - params.r) * p),
        [1] => (p, 0.0),
        [_] => (0.0, p),
        [a, b, ..] if a == b && *a == 1 => (1.0, 0.0),
        [a, b, ..] if a == b => (0.0, 1.0),
        _ => (0.0, 0.0),
    }
}

/// Full-rule mean `E(S_n) = a_L E(S_L) / a_n`.
fn full_rule_mean(params: &WalkParams, n: usize) -> Result<f64> {
    let l = params.start.len().max(1);
    Ok(gamma_scaling(l, params.p)? * start_sum_mean(params) / gamma_scaling(n, params.p)?)
}

/// Linear drift per step for first-`m` plus last-`k` memories given the head sum.
fn head_tail_drift(p: f64, m: usize, k: usize) -> f64 {
    (2.0 * p - 1.0) / (m as f64 + k as f64 * (2.0 - 2.0 * p))
}

pub(super) fn sigma_first1_last1(p: f64) -> f64 {
    1.0 + (2.0 * p - 1.0) * (4.0 * p * p - 24.0 * p + 19.0) / (3.0 - 2.0 * p).powi(3)
}

pub(super) fn sigma_first2_last1_equal(p: f64) -> f64 {
    1.0 + (2.0 * p - 1.0) * (5.0 - 5.0 * p - p * p) / (2.0 - p).powi(3)
}

pub(super) fn sigma_first2_last1_mixed(p: f64) -> f64 {
    (1.0 + p) / (2.0 - p)
}

pub(super) fn sigma_last2(p: f64) -> f64 {
    1.0 + (2.0 * p - 1.0) * (5.0 - 2.0 * p) / (2.0 * (1.0 - p) * (3.0 - 2.0 * p))
}

/// `E(T_n)` from the catalog.
pub fn mean_formula(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<FormulaResult> {
    check(spec, params, n)?;
    let p = params.p;
    let a = 2.0 * p - 1.0;
    let nf = n as f64;
    match spec {
        MemorySpec::Full => Ok(FormulaResult::exact(
            full_rule_mean(params, n)?,
            "full memory: a_n S_n is a martingale",
        )),
        MemorySpec::FirstM(m) => {
            if n <= m {
                return Ok(FormulaResult::exact(
                    full_rule_mean(params, n)?,
                    "first-m memory: full rule inside the head",
                ));
            }
            let (h, branches) = head_branches(spec, params, m)?;
            let mean: f64 = branches
                .iter()
                .map(|b| b.weight * (b.t_h as f64 + (n - h) as f64 * a * b.s_m as f64 / m as f64))
                .sum();
            let slope: f64 = branches.iter().map(|b| b.weight * a * b.s_m as f64 / m as f64).sum();
            let mut out = FormulaResult::exact(mean, "first-m memory: i.i.d. steps after the head");
            out.leading = Some(Leading { power: 1, coefficient: slope });
            Ok(out)
        }
        MemorySpec::LastK(1) => {
            let l = params.start.len().max(1);
            let mu = last_start_mean(params);
            let value = start_sum_mean(params) + mu * a * (1.0 - a.powi((n - l) as i32)) / (1.0 - a);
            let mut out = FormulaResult::exact(value, "last-step memory: geometric step means");
            out.offset = Some(start_sum_mean(params) + mu * a / (1.0 - a));
            Ok(out)
        }
        MemorySpec::LastK(2) => {
            let half = a / 2.0;
            let (m1, m2) = match params.start.as_slice() {
                [x1, x2, ..] => (*x1 as f64, *x2 as f64),
                _ => {
                    let m1 = start_sum_mean(params);
                    (m1, a * m1)
                }
            };
            let limit = (m1 * (1.0 - half) + m2) / (2.0 - 2.0 * p);
            Ok(FormulaResult::asymptotic(
                limit,
                "O(q^n), q < 1",
                Some(Leading { power: 0, coefficient: limit }),
                Some(limit),
                "last-two-steps memory: summable step means",
            ))
        }
        MemorySpec::FirstMLastK(m, k) if matches!((m, k), (1, 1) | (2, 1) | (1, 2) | (2, 2)) => {
            if let (2, 1, [x1, x2]) = (m, k, params.start.as_slice()) {
                if x1 != x2 {
                    return Ok(FormulaResult::exact(0.0, "first-two plus last step, mixed start: zero mean"));
                }
            }
            let head_mean = full_rule_mean(params, m)?;
            let slope = head_tail_drift(p, m, k) * head_mean;
            let offset = match (m, k) {
                (1, 1) if params.start.len() <= 1 => Some(start_sum_mean(params) * 8.0 * (1.0 - p) / (3.0 - 2.0 * p).powi(2)),
                (2, 1) => {
                    let (pp, mm) = equal_pair_probs(params);
                    Some((pp - mm) * 3.0 * (1.0 - p) * (7.0 - 2.0 * p) / (2.0 * (2.0 - p).powi(2)))
                }
                _ => None,
            };
            let order = if offset.is_some() { "o(1)" } else { "o(n)" };
            Ok(FormulaResult::asymptotic(
                slope * nf + offset.unwrap_or(0.0),
                order,
                Some(Leading { power: 1, coefficient: slope }),
                offset,
                "first plus last steps: linear drift set by the head",
            ))
        }
        _ => Err(no_formula("mean", spec)),
    }
}

/// `Var(T_n)` from the catalog.
pub fn variance_formula(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<FormulaResult> {
    check(spec, params, n)?;
    let p = params.p;
    let a = 2.0 * p - 1.0;
    let nf = n as f64;
    match spec {
        MemorySpec::FirstM(m) => {
            let (h, branches) = head_branches(spec, params, m)?;
            if n < h {
                return Err(no_formula("variance", spec));
            }
            let rest = (n - h) as f64;
            let mut within = 0.0;
            let mut first = 0.0;
            let mut second = 0.0;
            for b in &branches {
                let drift = a * b.s_m as f64 / m as f64;
                let r = (1.0 + drift) / 2.0;
                let mean = b.t_h as f64 + rest * drift;
                within += b.weight * 4.0 * r * (1.0 - r) * rest;
                first += b.weight * mean;
                second += b.weight * mean * mean;
            }
            let spread = (second - first * first).max(0.0);
            let mut out = FormulaResult::exact(within + spread, "first-m memory: branch mixture of i.i.d. walks");
            out.leading = Some(if spread > 0.0 {
                let slopes: Vec<(f64, f64)> = branches.iter().map(|b| (b.weight, a * b.s_m as f64 / m as f64)).collect();
                let m1: f64 = slopes.iter().map(|(w, s)| w * s).sum();
                let m2: f64 = slopes.iter().map(|(w, s)| w * s * s).sum();
                Leading { power: 2, coefficient: m2 - m1 * m1 }
            } else {
                Leading { power: 1, coefficient: within / rest.max(1.0) }
            });
            Ok(out)
        }
        MemorySpec::LastK(1) => {
            let s = p / (1.0 - p);
            Ok(FormulaResult::asymptotic(
                s * nf,
                "O(1)",
                Some(Leading { power: 1, coefficient: s }),
                None,
                "last-step memory: Markov chain variance",
            ))
        }
        MemorySpec::LastK(2) => {
            let s = sigma_last2(p);
            Ok(FormulaResult::asymptotic(
                s * nf,
                "o(n)",
                Some(Leading { power: 1, coefficient: s }),
                None,
                "last-two-steps memory: second-order Markov chain variance",
            ))
        }
        MemorySpec::FirstMLastK(1, 1) => {
            let s = sigma_first1_last1(p);
            let r = if params.start.is_empty() { params.r } else { (params.start[0] as f64 + 1.0) / 2.0 };
            let slope = a / (3.0 - 2.0 * p);
            let off = 8.0 * (1.0 - p) / (3.0 - 2.0 * p).powi(2);
            let spread = 4.0 * r * (1.0 - r) * (slope * nf + off).powi(2);
            let leading = if spread > 0.0 {
                Leading { power: 2, coefficient: 4.0 * r * (1.0 - r) * slope * slope }
            } else {
                Leading { power: 1, coefficient: s }
            };
            Ok(FormulaResult::asymptotic(
                spread + s * nf,
                "o(n)",
                Some(leading),
                None,
                "first plus last step: per-branch variance with start mixture",
            ))
        }
        MemorySpec::FirstMLastK(2, 1) => {
            let (pp, mm) = equal_pair_probs(params);
            let mix = 1.0 - pp - mm;
            let slope = a / (2.0 - p);
            let off = 3.0 * (1.0 - p) * (7.0 - 2.0 * p) / (2.0 * (2.0 - p).powi(2));
            let branch_mean = slope * nf + off;
            let spread = ((pp + mm) - (pp - mm).powi(2)) * branch_mean * branch_mean;
            let within = (pp + mm) * sigma_first2_last1_equal(p) + mix * sigma_first2_last1_mixed(p);
            let leading = if spread > 1e-300 {
                Leading { power: 2, coefficient: ((pp + mm) - (pp - mm).powi(2)) * slope * slope }
            } else {
                Leading { power: 1, coefficient: within }
            };
            Ok(FormulaResult::asymptotic(
                spread.max(0.0) + within * nf,
                "o(n)",
                Some(leading),
                None,
                "first two plus last step: equal and mixed start branches",
            ))
        }
        _ => Err(no_formula("variance", spec)),
    }
}
