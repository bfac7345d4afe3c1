use crate::error::{Error, Result};
use crate::model::{up_probability, validate, MemorySpec, WalkParams};

use super::{Conditioning, ExactPMF};

/// Largest DP table (window states times `n + 1`) the forward pass allocates.
pub const DP_MAX_CELLS: usize = 1 << 27;

/// How bit `t` of a state at time `j + 1` comes from a state at time `j`.
enum Source {
    Old(usize),
    New,
}

fn transition_map(spec: MemorySpec, j: usize) -> (Vec<Source>, usize) {
    let old = spec.resolve(j);
    let new = spec.resolve(j + 1);
    let map = new
        .iter()
        .map(|i| match old.iter().position(|o| o == i) {
            Some(pos) => Source::Old(pos),
            None => Source::New,
        })
        .collect();
    (map, old.len())
}

/// Exact law of `T_n` for bounded windows by a forward pass over
/// `(window state, number of up steps)`.
///
/// A state is a bit mask over the ordered memory set `I_j`, bit set meaning
/// the step is `+1`.
pub fn dp_distribution(spec: MemorySpec, params: &WalkParams, n: usize) -> Result<ExactPMF> {
    validate(params, spec, false)?;
    let w = spec
        .window_bound()
        .ok_or_else(|| Error::Unsupported(format!("dp needs a bounded window; `{spec}` is unbounded")))?;
    if n == 0 || params.start.len() > n {
        return Err(Error::InvalidParams("n must be at least 1 and cover the start prefix".into()));
    }
    if w > 20 || (1usize << w).saturating_mul(n + 1) > DP_MAX_CELLS {
        return Err(Error::Capacity(format!("dp table 2^{w} x {} exceeds {DP_MAX_CELLS} cells", n + 1)));
    }
    let stride = n + 1;
    let mut cur = vec![0.0f64; (1 << w) * stride];
    let mut nxt = vec![0.0f64; (1 << w) * stride];

    let branches = params.initial_branches();
    let start_len = branches[0].0.len();
    let idx = spec.resolve(start_len);
    for (prefix, weight) in &branches {
        let mut mask = 0usize;
        for (b, &i) in idx.iter().enumerate() {
            if prefix[i - 1] == 1 {
                mask |= 1 << b;
            }
        }
        let u = prefix.iter().filter(|&&x| x == 1).count();
        cur[mask * stride + u] += weight;
    }

    let mut states = 1usize << idx.len();
    for j in start_len..n {
        let (map, len) = transition_map(spec, j);
        let new_states = 1usize << map.len();
        nxt[..new_states * stride].iter_mut().for_each(|v| *v = 0.0);
        for mask in 0..states {
            let row = &cur[mask * stride..mask * stride + j + 1];
            if row.iter().all(|&v| v == 0.0) {
                continue;
            }
            let ones = mask.count_ones() as i64;
            let q = up_probability(params.p, 2 * ones - len as i64, len);
            let mut carried = 0usize;
            let mut new_bit = 0usize;
            for (t, src) in map.iter().enumerate() {
                match *src {
                    Source::Old(pos) => carried |= ((mask >> pos) & 1) << t,
                    Source::New => new_bit = 1 << t,
                }
            }
            let up = (carried | new_bit) * stride;
            let down = carried * stride;
            for (u, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    nxt[up + u + 1] += v * q;
                    nxt[down + u] += v * (1.0 - q);
                }
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
        states = new_states;
    }

    let mut by_up = vec![0.0; n + 1];
    for mask in 0..states {
        for (u, slot) in by_up.iter_mut().enumerate() {
            *slot += cur[mask * stride + u];
        }
    }
    Ok(ExactPMF::from_up_counts(n, by_up, Conditioning::of(params)))
}
