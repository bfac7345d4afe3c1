use crate::error::{Error, Result};
use crate::model::{up_probability, validate, MemorySpec, WalkParams};

use super::{Conditioning, ExactPMF};

pub const MAX_ENUMERATE_N: usize = 24;

/// Enumeration output: the law of `T_n` and the marginals `P(X_j = +1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub pmf: ExactPMF,
    /// `marginal_up[j - 1] = P(X_j = +1)` for `j = 1..=n`.
    pub marginal_up: Vec<f64>,
}

struct Walker<'a> {
    spec: MemorySpec,
    p: f64,
    n: usize,
    /// `partial[i] = T_i`, with `partial[0] = 0`.
    partial: Vec<i64>,
    by_up: &'a mut [f64],
    marginal_up: &'a mut [f64],
}

impl Walker<'_> {
    fn window(&self, j: usize) -> (i64, usize) {
        let (a, b) = self.spec.intervals(j);
        let mut s = self.partial[*a.end()] - self.partial[*a.start() - 1];
        let mut len = a.end() + 1 - a.start();
        if let Some(b) = b {
            s += self.partial[*b.end()] - self.partial[*b.start() - 1];
            len += b.end() + 1 - b.start();
        }
        (s, len)
    }

    fn descend(&mut self, j: usize, weight: f64) {
        if j == self.n {
            let u = (self.partial[j] + j as i64) / 2;
            self.by_up[u as usize] += weight;
            return;
        }
        let (s, len) = self.window(j);
        let q = up_probability(self.p, s, len);
        self.marginal_up[j] += weight * q;
        let t = self.partial[j];
        for (x, w) in [(1i64, q), (-1i64, 1.0 - q)] {
            if w > 0.0 {
                self.partial.push(t + x);
                self.descend(j + 1, weight * w);
                self.partial.pop();
            }
        }
    }
}

/// Exact law of `T_n` by summing over every path (`n <= 24`).
pub fn enumerate(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<ExactPMF> {
    Ok(enumerate_detailed(spec, params, n)?.pmf)
}

pub fn enumerate_detailed(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<Enumeration> {
    validate(params, spec, false)?;
    if n > MAX_ENUMERATE_N {
        return Err(Error::Unsupported(format!("enumeration needs n <= {MAX_ENUMERATE_N}, got {n}")));
    }
    if n == 0 || params.start.len() > n {
        return Err(Error::InvalidParams("n must be at least 1 and cover the start prefix".into()));
    }
    let mut by_up = vec![0.0; n + 1];
    let mut marginal_up = vec![0.0; n];
    for (prefix, weight) in params.initial_branches() {
        let mut partial = vec![0i64];
        for (i, &x) in prefix.iter().enumerate() {
            if x == 1 {
                marginal_up[i] += weight;
            }
            partial.push(partial[i] + x as i64);
        }
        let mut walker = Walker {
            spec,
            p: params.p,
            n,
            partial,
            by_up: &mut by_up,
            marginal_up: &mut marginal_up,
        };
        walker.descend(prefix.len(), weight);
    }
    Ok(Enumeration {
        pmf: ExactPMF::from_up_counts(n, by_up, Conditioning::of(params)),
        marginal_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_memory_two_steps() {
        let pmf = enumerate(MemorySpec::Full, &WalkParams::new(0.6, 0.6), 2).unwrap();
        assert!((pmf.prob(2) - 0.36).abs() < 1e-15);
        assert!((pmf.prob(0) - 0.40).abs() < 1e-15);
        assert!((pmf.prob(-2) - 0.24).abs() < 1e-15);
    }

    #[test]
    fn last_step_mean() {
        let params = WalkParams::new(0.75, 0.5).with_start(&[1]);
        let pmf = enumerate(MemorySpec::LastK(1), &params, 3).unwrap();
        assert!((pmf.mean() - 1.75).abs() < 1e-14);
        assert!((pmf.total_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn marginals() {
        let e = enumerate_detailed(MemorySpec::FirstM(1), &WalkParams::new(0.75, 0.75), 4).unwrap();
        assert_eq!(e.marginal_up[0], 0.75);
        // P(X_j = +1) = r p + (1 - r)(1 - p) after the first step
        for &q in &e.marginal_up[1..] {
            assert!((q - 0.625).abs() < 1e-15);
        }
    }

    #[test]
    fn refuses_large_n() {
        assert!(matches!(
            enumerate(MemorySpec::Full, &WalkParams::new(0.6, 0.6), 25),
            Err(Error::Unsupported(_))
        ));
    }
}
