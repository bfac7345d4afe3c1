//! Log-gamma differences and the full-memory martingale scaling `a_n`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const STIRLING_MIN: f64 = 20.0;

/// Tail of the Stirling series for `ln Gamma(z)` after `(z - 1/2) ln z - z + ln(2 pi)/2`.
fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * z2)) / z2) / z2) / z2) / z
}

/// `ln Gamma(x + h) - ln Gamma(x)` without cancellation for large `x`.
pub fn ln_gamma_ratio(x: f64, h: f64) -> f64 {
    if x >= STIRLING_MIN && x + h >= STIRLING_MIN {
        h * x.ln() + (x + h - 0.5) * (h / x).ln_1p() - h + stirling_tail(x + h) - stirling_tail(x)
    } else {
        ln_gamma(x + h) - ln_gamma(x)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("gamma scaling needs 0 < p < 1, got {p}")));
    }
    Ok(())
}

/// `ln a_n` with `a_n = Gamma(n) Gamma(2p) / Gamma(n + 2p - 1)`.
pub fn ln_gamma_scaling(n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Err(Error::Domain("gamma scaling needs n >= 1".into()));
    }
    Ok(ln_gamma(2.0 * p) - ln_gamma_ratio(n as f64, 2.0 * p - 1.0))
}

/// `a_n`, the factor making `a_n S_n` a martingale under full memory.
pub fn gamma_scaling(n: usize, p: f64) -> Result<f64> {
    Ok(ln_gamma_scaling(n, p)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_walk_has_unit_scaling() {
        for n in [1, 2, 10, 1000, 1_000_000] {
            assert!((gamma_scaling(n, 0.5).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_steps() {
        assert!((gamma_scaling(2, 0.75).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((gamma_scaling(1, 0.3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_product_form() {
        // a_{n+1} = a_n * n / (n + 2p - 1)
        for p in [0.1, 0.6, 0.75, 0.9] {
            let mut a = 1.0;
            for n in 1..200 {
                let got = gamma_scaling(n, p).unwrap();
                assert!((got / a - 1.0).abs() < 1e-12, "p={p} n={n}");
                a *= n as f64 / (n as f64 + 2.0 * p - 1.0);
            }
        }
    }

    #[test]
    fn large_n_follows_power_law() {
        let (n, p) = (1_000_000usize, 0.9);
        let h = 2.0 * p - 1.0;
        let got = ln_gamma_scaling(n, p).unwrap();
        assert!(got.is_finite());
        let trend = ln_gamma(2.0 * p) + (1.0 - 2.0 * p) * (n as f64).ln();
        assert!((got - trend).abs() < 1e-7);
        let corrected = trend - h * (h - 1.0) / (2.0 * n as f64);
        assert!((got - corrected).abs() < 1e-8);
    }

    #[test]
    fn ratio_branches_agree() {
        for h in [-0.8, 0.2, 0.5, 1.5] {
            let x = STIRLING_MIN + 1.0;
            let direct = ln_gamma(x + h) - ln_gamma(x);
            assert!((ln_gamma_ratio(x, h) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn domain() {
        assert!(gamma_scaling(5, 0.0).is_err());
        assert!(gamma_scaling(5, 1.0).is_err());
    }
}
