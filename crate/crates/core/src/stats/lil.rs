use serde::{Deserialize, Serialize};

use crate::engine::{Centering, Trajectory};
use crate::error::{Error, Result};

pub const LIL_MIN_CHECKPOINTS: usize = 10;
const LIL_MIN_N: usize = 1000;

/// Cross-path running records at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub j: usize,
    /// Largest running maximum over all paths.
    pub upper: f64,
    /// Smallest running minimum over all paths.
    pub lower: f64,
    /// Path average of the running maxima.
    pub mean_upper: f64,
    pub mean_lower: f64,
}

/// Running records of `(T_j - centering) / scale(j)`; descriptive only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilDiagnostic {
    pub label: String,
    pub times: Vec<usize>,
    /// Per path `(max, min)` over all used checkpoints.
    pub per_path: Vec<(f64, f64)>,
    pub envelope: Vec<EnvelopePoint>,
}

/// `sqrt(c * n * log log n)`; not positive for `n <= e`.
pub fn loglog_scale(c: f64) -> impl Fn(usize) -> f64 {
    move |n| {
        let n = n as f64;
        let ll = n.ln().ln();
        if ll > 0.0 {
            (c * n * ll).sqrt()
        } else {
            f64::NAN
        }
    }
}

fn shift(centering: Centering, path: &Trajectory, j: usize) -> Result<f64> {
    match centering {
        Centering::None => Ok(0.0),
        Centering::Drift { slope, prefix } => {
            if prefix == 0 || path.head.len() < prefix {
                return Err(Error::InvalidParams(format!(
                    "centering needs the first {prefix} steps, path stores {}",
                    path.head.len()
                )));
            }
            let s: i64 = path.head[..prefix].iter().map(|&x| x as i64).sum();
            Ok(j as f64 * slope * s as f64 / prefix as f64)
        }
    }
}

/// Running maxima and minima of the normalised checkpoint values, starting
/// from the first checkpoint at or after `from`.
pub fn lil_diagnostic(
    paths: &[Trajectory],
    centering: Centering,
    scale: &dyn Fn(usize) -> f64,
    from: usize,
) -> Result<LilDiagnostic> {
    let first = paths.first().ok_or_else(|| Error::InvalidParams("no paths".into()))?;
    if first.n < LIL_MIN_N {
        return Err(Error::InvalidParams(format!("n = {} is below {LIL_MIN_N}", first.n)));
    }
    let times: Vec<usize> = first.checkpoints.iter().map(|c| c.0).filter(|&j| j >= from).collect();
    if times.len() < LIL_MIN_CHECKPOINTS {
        return Err(Error::InvalidParams(format!(
            "{} checkpoints at or after {from}; need at least {LIL_MIN_CHECKPOINTS}",
            times.len()
        )));
    }
    let scales: Vec<f64> = times.iter().map(|&j| scale(j)).collect();
    if let Some((j, s)) = times.iter().zip(&scales).find(|(_, s)| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::Domain(format!("scale at n = {j} is {s}")));
    }

    let mut running: Vec<Vec<(f64, f64)>> = Vec::with_capacity(paths.len());
    for path in paths {
        let values: Vec<(usize, i64)> = path.checkpoints.iter().copied().filter(|c| c.0 >= from).collect();
        if values.iter().map(|c| c.0).ne(times.iter().copied()) {
            return Err(Error::InvalidParams("paths have different checkpoint schedules".into()));
        }
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        let mut series = Vec::with_capacity(times.len());
        for (&(j, t), s) in values.iter().zip(&scales) {
            let z = (t as f64 - shift(centering, path, j)?) / s;
            hi = hi.max(z);
            lo = lo.min(z);
            series.push((hi, lo));
        }
        running.push(series);
    }

    let count = paths.len() as f64;
    let envelope = times
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let col = running.iter().map(|s| s[i]);
            EnvelopePoint {
                j,
                upper: col.clone().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
                lower: col.clone().map(|r| r.1).fold(f64::INFINITY, f64::min),
                mean_upper: col.clone().map(|r| r.0).sum::<f64>() / count,
                mean_lower: col.map(|r| r.1).sum::<f64>() / count,
            }
        })
        .collect();
    Ok(LilDiagnostic {
        label: "diagnostic only; no verdict".into(),
        times,
        per_path: running.iter().map(|s| *s.last().unwrap()).collect(),
        envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate_path, Record};
    use crate::model::{MemorySpec, WalkParams};
    use crate::rng::{stream, DOMAIN_STEPS};

    fn paths(count: u64, n: usize) -> Vec<Trajectory> {
        let params = WalkParams::new(0.75, 0.5);
        (0..count)
            .map(|i| {
                let mut rng = stream(5, DOMAIN_STEPS, i);
                simulate_path(MemorySpec::FirstM(1), &params, n, &mut rng, &Record::DefaultCheckpoints).unwrap()
            })
            .collect()
    }

    #[test]
    fn envelope_is_monotone() {
        let ps = paths(20, 1 << 14);
        let centering = Centering::Drift { slope: 0.5, prefix: 1 };
        let d = lil_diagnostic(&ps, centering, &loglog_scale(8.0 * 0.75 * 0.25), 4).unwrap();
        for w in d.envelope.windows(2) {
            assert!(w[1].upper >= w[0].upper && w[1].mean_upper >= w[0].mean_upper);
            assert!(w[1].lower <= w[0].lower);
        }
        assert!(d.label.contains("diagnostic"));
    }

    #[test]
    fn undefined_scale_and_short_schedules_are_refused() {
        let ps = paths(2, 1 << 12);
        assert!(matches!(
            lil_diagnostic(&ps, Centering::None, &loglog_scale(1.0), 1),
            Err(Error::Domain(_))
        ));
        assert!(lil_diagnostic(&ps, Centering::None, &loglog_scale(1.0), 1 << 10).is_err());
        assert!(lil_diagnostic(&paths(2, 500), Centering::None, &loglog_scale(1.0), 4).is_err());
    }
}
