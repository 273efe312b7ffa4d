//! Gaussian mechanism calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-measurement privacy parameters and the resulting noise scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseCalibration {
    pub epsilon: f64,
    pub delta: f64,
    pub measurements: usize,
    pub eps_q: f64,
    pub delta_q: f64,
    pub sigma: f64,
}

/// Splits `(epsilon, delta)` uniformly over `measurements` queries of
/// l2-sensitivity 1 and returns `sigma = sqrt(2 ln(1.25 / delta_q)) / eps_q`.
pub fn calibrate(epsilon: f64, delta: f64, measurements: usize) -> Result<NoiseCalibration> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if measurements == 0 {
        return Err(Error::Parameter("no measurements to calibrate".into()));
    }
    let eps_q = epsilon / measurements as f64;
    let delta_q = delta / measurements as f64;
    let sigma = (2.0 * (1.25 / delta_q).ln()).sqrt() / eps_q;
    Ok(NoiseCalibration { epsilon, delta, measurements, eps_q, delta_q, sigma })
}

/// A calibration that adds no noise, for exact measurements.
pub fn noiseless(measurements: usize) -> NoiseCalibration {
    NoiseCalibration {
        epsilon: f64::INFINITY,
        delta: 0.0,
        measurements,
        eps_q: f64::INFINITY,
        delta_q: 0.0,
        sigma: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let c = calibrate(1917.0, 1917.0 * 1e-5, 1917).unwrap();
        assert!((c.eps_q - 1.0).abs() < 1e-12);
        assert!((c.delta_q - 1e-5).abs() < 1e-18);
        // sqrt(2 ln 125000), evaluated at 30 digits with an arbitrary-precision library.
        assert!((c.sigma - 4.844_805_262_605_389).abs() < 1e-12, "{}", c.sigma);
        assert_eq!(calibrate(2.0, 1e-5, 1).unwrap().eps_q, 2.0);
        let half = calibrate(0.5, 1e-5, 3).unwrap().sigma;
        let full = calibrate(1.0, 1e-5, 3).unwrap().sigma;
        assert!((half - 2.0 * full).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_budgets() {
        assert!(calibrate(0.0, 1e-5, 3).is_err());
        assert!(calibrate(1.0, 1.0, 3).is_err());
        assert!(calibrate(1.0, 1e-5, 0).is_err());
    }
}
