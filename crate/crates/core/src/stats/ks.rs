use super::{mixture_cdf, GofReport, Verdict};
use crate::analytic::LimitLaw;
use crate::error::{Error, Result};

pub const KS_MIN_SAMPLE: usize = 100;

/// `sup_x |F_n(x) - F(x)|` for a continuous `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // CDF series converging fast for small lambda
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Two-sided Kolmogorov-Smirnov test against an atom-free mixture law.
pub fn ks_test(sample: &[f64], law: &LimitLaw, alpha: f64) -> Result<GofReport> {
    law.check()?;
    if law.has_atoms() {
        return Err(Error::InvalidParams(
            "the law has point masses; the KS test needs a continuous law (use the atoms test)".into(),
        ));
    }
    if sample.len() < KS_MIN_SAMPLE {
        return Err(Error::InvalidParams(format!(
            "KS test needs at least {KS_MIN_SAMPLE} values, got {}",
            sample.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let d = ks_statistic(sample, |x| mixture_cdf(law, x));
    let p = kolmogorov_sf((sample.len() as f64).sqrt() * d);
    Ok(GofReport {
        test: "ks".into(),
        statistic: d,
        p_value: Some(p),
        alpha: Some(alpha),
        verdict: Verdict::from_bool(p >= alpha),
        sample_size: sample.len(),
        law: law.describe(),
        components: Vec::new(),
        notes: Vec::new(),
    })
}
