use serde::Serialize;

use super::{Estimator, ExponentEstimate};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Least-squares fit of `log|error| = log C + p · log Δt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceFit {
    #[serde(rename = "constant_C")]
    pub constant_c: f64,
    pub order_p: f64,
    /// Largest absolute residual of the fit, in natural-log units.
    pub residual: f64,
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
}

pub fn fit_order(dts: &[f64], errors: &[f64]) -> Result<ConvergenceFit> {
    if dts.len() != errors.len() {
        return Err(Error::FitUndefined(format!(
            "{} step sizes but {} errors",
            dts.len(),
            errors.len()
        )));
    }
    if dts.len() < 3 {
        return Err(Error::FitUndefined(format!(
            "need at least 3 step sizes, got {}",
            dts.len()
        )));
    }
    if let Some(&dt) = dts.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::FitUndefined(format!(
            "step size {dt} is not positive"
        )));
    }
    if let Some((dt, e)) = dts
        .iter()
        .zip(errors)
        .find(|(_, e)| !(e.is_finite() && **e > 0.0))
    {
        return Err(Error::FitUndefined(format!(
            "error {e} at dt = {dt} is below resolution"
        )));
    }

    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUndefined("all step sizes are equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceFit {
        constant_c: intercept.exp(),
        order_p: slope,
        residual,
        dts: dts.to_vec(),
        errors: errors.to_vec(),
    })
}

/// One step size of a sweep; a failed estimator precondition is kept in
/// `outcome` instead of aborting the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub dt: f64,
    pub continuum: f64,
    pub outcome: Result<ExponentEstimate>,
}

impl SweepRow {
    pub fn abs_error(&self) -> Option<f64> {
        self.outcome
            .as_ref()
            .ok()
            .map(|e| (e.value - self.continuum).abs())
    }
}

pub fn sweep_rows(p: &ModelParams, dts: &[f64], estimator: &Estimator) -> Vec<SweepRow> {
    let continuum = estimator.continuum(p);
    dts.iter()
        .map(|&dt| SweepRow {
            dt,
            continuum,
            outcome: estimator.estimate(p, dt),
        })
        .collect()
}

/// Errors against the continuum exponent of the estimator's sense, fitted
/// with [`fit_order`]. The first estimator failure is returned as is.
pub fn sweep_dt(p: &ModelParams, dts: &[f64], estimator: &Estimator) -> Result<ConvergenceFit> {
    if dts.len() < 3 {
        return Err(Error::invalid(
            "dts",
            format!("need at least 3 step sizes, got {}", dts.len()),
        ));
    }
    let continuum = estimator.continuum(p);
    let errors = dts
        .iter()
        .map(|&dt| Ok((estimator.estimate(p, dt)?.value - continuum).abs()))
        .collect::<Result<Vec<f64>>>()?;
    fit_order(dts, &errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::DEFAULT_NODES;
    use approx::assert_relative_eq;

    const DTS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

    fn p(l: f64, e: f64, s: f64) -> ModelParams {
        ModelParams::new(l, e, s).unwrap()
    }

    #[test]
    fn fit_recovers_power_law() {
        let dts = [0.1, 0.01, 0.001];
        let errors: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powf(1.5)).collect();
        let fit = fit_order(&dts, &errors).unwrap();
        assert_relative_eq!(fit.order_p, 1.5, max_relative = 1e-12);
        assert_relative_eq!(fit.constant_c, 3.0, max_relative = 1e-11);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_order(&[0.1, 0.01], &[1.0, 0.1]).is_err());
        let err = fit_order(&[0.1, 0.01, 0.001], &[1.0, 0.0, 0.1]).unwrap_err();
        assert!(matches!(&err, Error::FitUndefined(m) if m.contains("below resolution")));
        assert!(fit_order(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn mean_square_sweep_is_first_order() {
        let fit = sweep_dt(&p(8.0, 2.0, 4.0), &DTS, &Estimator::MsExact).unwrap();
        assert!((0.9..=1.1).contains(&fit.order_p), "{}", fit.order_p);
        // Independent high-precision errors |log(base)/(2Δt) − 18|.
        let expected = [1.794481, 0.2064016, 0.02096343, 0.002099634];
        for (e, x) in fit.errors.iter().zip(expected) {
            assert_relative_eq!(*e, x, max_relative = 1e-5);
        }
    }

    #[test]
    fn almost_sure_sweep_order() {
        let est = Estimator::AsQuadrature {
            nodes: DEFAULT_NODES,
        };
        let fit = sweep_dt(&p(6.0, 0.5, 4.0), &DTS, &est).unwrap();
        assert!(fit.order_p >= 0.45, "{}", fit.order_p);
    }

    #[test]
    fn deterministic_sweep() {
        let est = Estimator::AsQuadrature {
            nodes: DEFAULT_NODES,
        };
        let dts = [0.1, 0.05, 0.02, 0.01];
        let fit = sweep_dt(&p(1.0, 0.0, 0.0), &dts, &est).unwrap();
        for (dt, e) in dts.iter().zip(&fit.errors) {
            assert_relative_eq!(*e, ((1.0 + dt).ln() / dt - 1.0).abs(), max_relative = 1e-12);
        }
        assert!((fit.order_p - 1.0).abs() < 0.05);
    }

    #[test]
    fn rows_keep_failures() {
        let q = p(1.0, 0.0, 4.0);
        let rows = sweep_rows(
            &q,
            &[0.05, 1e-3, 1e-4],
            &Estimator::AsQuadrature { nodes: 201 },
        );
        assert!(matches!(
            rows[0].outcome,
            Err(Error::GammaRestriction { .. })
        ));
        assert!(rows[0].abs_error().is_none());
        assert!(rows[1].abs_error().is_some());
        assert!(sweep_dt(
            &q,
            &[0.05, 1e-3, 1e-4],
            &Estimator::AsQuadrature { nodes: 201 }
        )
        .is_err());
    }
}
