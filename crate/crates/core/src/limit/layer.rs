use serde::{Deserialize, Serialize};

use super::compatibility_defect;
use crate::decay::{fit_rate, window, FitModel, RateFit};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::propagator::{geometric_times, kuznetsov_state_at, GridPropagator};
use crate::spectral::{norm, FieldTriple, NormSpec, SpectralField};

/// Predicted initial-layer profile for data with defect `psi_c`.
#[derive(Debug, Clone)]
pub struct LayerProfile {
    pub psi_c: SpectralField,
    pub tau: f64,
}

impl LayerProfile {
    pub fn new(data: &FieldTriple, params: &Params) -> Result<Self> {
        Ok(LayerProfile { psi_c: compatibility_defect(data, params.delta())?, tau: params.tau() })
    }

    /// Predicted size `tau^2` of the layer in `psi` itself.
    pub fn amplitude_law(&self) -> f64 {
        self.tau * self.tau
    }

    /// Predicted decay rate `1/tau`.
    pub fn rate_law(&self) -> f64 {
        1.0 / self.tau
    }

    /// `(f, f', f'')` of `z - 1 + e^{-z}` at `z = t/tau`, scaled back to `t`:
    /// layer value, first and second time derivative per unit of `psi_c`.
    pub fn shape(&self, t: f64) -> [f64; 3] {
        let z = t / self.tau;
        let e = (-z).exp();
        let t2 = self.tau * self.tau;
        [t2 * (z - 1.0 + e), self.tau * (1.0 - e), e]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerStatus {
    /// The data are compatible, so no layer is expected.
    NoLayerPredicted,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerOptions {
    /// Samples on `[0, 5 tau]`.
    #[serde(default = "default_dense")]
    pub dense_points: usize,
    /// Samples on `(5 tau, t_end]`.
    #[serde(default = "default_coarse")]
    pub coarse_points: usize,
    pub t_end: f64,
}

fn default_dense() -> usize {
    201
}

fn default_coarse() -> usize {
    60
}

impl LayerOptions {
    pub fn new(t_end: f64) -> Self {
        LayerOptions { dense_points: default_dense(), coarse_points: default_coarse(), t_end }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub tau: f64,
    pub status: LayerStatus,
    pub defect_norm: f64,
    pub times: Vec<f64>,
    /// Projection of `psi_tt - phi_tt` on the unit defect direction.
    pub projection: Vec<f64>,
    /// `projection` minus the same projection for the compatible companion data.
    pub fast: Vec<f64>,
    /// `|g(0) - ||psi_c|||`.
    pub initial_identity_error: f64,
    /// Largest `L2` norm of the fast field over time, relative to the largest `||psi_tt||`.
    pub fast_to_signal: f64,
    pub fit: Option<RateFit>,
    /// Fitted rate times `tau`.
    pub rate_ratio: Option<f64>,
}

/// Separates the fast `e^{-t/tau}` component of `psi_tt - phi_tt` and fits its rate.
///
/// The fast component is obtained by subtracting the run from compatible data
/// with the same `(psi_0, psi_1)`.
pub fn layer_probe(params: &Params, data: &FieldTriple, opts: &LayerOptions) -> Result<LayerReport> {
    params.ensure_dissipative()?;
    let tau = params.tau();
    if opts.dense_points < 20 || opts.t_end <= 5.0 * tau {
        return Err(Error::Precondition("need at least 20 dense samples and t_end > 5 tau".into()));
    }
    let profile = LayerProfile::new(data, params)?;
    let defect_norm = norm(&profile.psi_c, NormSpec::L2)?;
    let mut compat = data.clone();
    compat.u_tt = compat.u_tt.sub(&profile.psi_c)?;

    let mut times: Vec<f64> = (0..opts.dense_points).map(|i| 5.0 * tau * i as f64 / (opts.dense_points - 1) as f64).collect();
    times.extend(geometric_times(5.0 * tau, opts.t_end, opts.coarse_points + 1).into_iter().skip(1));

    let prop = GridPropagator::new(params, data.grid().clone())?;
    let direction = (defect_norm > 0.0).then(|| profile.psi_c.scale(1.0 / defect_norm));
    let (mut projection, mut fast) = (Vec::new(), Vec::new());
    let (mut fast_max, mut signal_max) = (0.0f64, 0.0f64);
    for &t in &times {
        let phi = kuznetsov_state_at(params.delta(), data, t)?;
        let full = prop.state_at(data, t)?;
        let base = prop.state_at(&compat, t)?;
        let diff = full.u_tt.sub(&phi.u_tt)?;
        let diff_compat = base.u_tt.sub(&phi.u_tt)?;
        let fast_field = diff.sub(&diff_compat)?;
        fast_max = fast_max.max(norm(&fast_field, NormSpec::L2)?);
        signal_max = signal_max.max(norm(&full.u_tt, NormSpec::L2)?);
        if let Some(dir) = &direction {
            let g = dir.inner(&diff)?.re;
            projection.push(g);
            fast.push(g - dir.inner(&diff_compat)?.re);
        }
    }
    let fast_to_signal = if signal_max > 0.0 { fast_max / signal_max } else { 0.0 };
    let Some(_) = direction else {
        return Ok(LayerReport {
            tau,
            status: LayerStatus::NoLayerPredicted,
            defect_norm,
            times,
            projection,
            fast,
            initial_identity_error: 0.0,
            fast_to_signal,
            fit: None,
            rate_ratio: None,
        });
    };
    let initial_identity_error = (projection[0] - defect_norm).abs();
    let (tw, fw) = window(&times, &fast, 0.2 * tau, 3.0 * tau);
    let fit = fit_rate(&tw, &fw, FitModel::Exp)?;
    Ok(LayerReport {
        tau,
        status: LayerStatus::Fitted,
        defect_norm,
        times,
        projection,
        fast,
        initial_identity_error,
        fast_to_signal,
        rate_ratio: Some(fit.exponent_or_rate * tau),
        fit: Some(fit),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::spectral::{synthesize_data, DataSpec, Grid, Profile};

    fn data(params: &Params, defect: f64) -> FieldTriple {
        let g = Arc::new(Grid::radial_composite(1, 12.0, 12, 16).unwrap());
        let spec = DataSpec::gaussian([1.0, 0.0, 0.0], 0.5);
        let spec = if defect == 0.0 {
            spec.compatible()
        } else {
            spec.incompatible(Profile::Gaussian { amplitude: defect, width: 4.0 })
        };
        synthesize_data(&g, params, &spec, 0).unwrap()
    }

    #[test]
    fn layer_profile_derivatives_start_at_zero_zero_one() {
        let p = LayerProfile { psi_c: SpectralField::zeros(Arc::new(Grid::radial(1, 1.0, 32).unwrap()), crate::spectral::Quantity::Other), tau: 0.1 };
        assert_eq!(p.shape(0.0), [0.0, 0.0, 1.0]);
        assert_eq!(p.rate_law(), 10.0);
        assert!((p.amplitude_law() - 0.01).abs() < 1e-16);
    }

    #[test]
    fn compatible_data_report_no_layer() {
        let p = Params::new(0.05, 1.0).unwrap();
        let r = layer_probe(&p, &data(&p, 0.0), &LayerOptions::new(2.0)).unwrap();
        assert_eq!(r.status, LayerStatus::NoLayerPredicted);
        assert!(r.fast_to_signal <= 1e-10);
    }

    #[test]
    fn defect_decays_at_the_relaxation_rate() {
        let p = Params::new(0.05, 1.0).unwrap();
        let r = layer_probe(&p, &data(&p, 1.0), &LayerOptions::new(2.0)).unwrap();
        assert_eq!(r.status, LayerStatus::Fitted);
        assert!(r.initial_identity_error <= 1e-12 * r.defect_norm);
        let ratio = r.rate_ratio.unwrap();
        assert!((ratio - 1.0).abs() <= 0.05, "rate ratio {ratio}");
    }
}
