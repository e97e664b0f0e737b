//! Small-relaxation limit: convergence to the viscous wave equation, the
//! phase-space energy bound, the formal expansion and the initial layer.

mod energy;
mod expansion;
mod layer;
mod nonlinear;
mod sweep;

pub use energy::{energy_inequality_check, EnergyLedger, ForcingSpec};
pub use expansion::{expansion_terms, ExpansionTerms};
pub use layer::{layer_probe, LayerOptions, LayerProfile, LayerReport, LayerStatus};
pub use nonlinear::{nonlinear_limit_probe, NonlinearProbeOptions, NonlinearProbeReport, EXPLORATORY};
pub use sweep::{singular_limit_sweep, LimitNorm, SweepEntry, SweepOptions, SweepReport};

use crate::error::Result;
use crate::spectral::{FieldTriple, Quantity, SpectralField};

/// `psi_2 - Laplace psi_0 - delta Laplace psi_1`, the part of the third datum the
/// viscous wave equation cannot match.
pub fn compatibility_defect(data: &FieldTriple, delta: f64) -> Result<SpectralField> {
    data.u.grid().ensure_same(data.u_tt.grid())?;
    data.u_t.grid().ensure_same(data.u_tt.grid())?;
    let c: Vec<_> = data
        .u
        .grid()
        .xi_abs()
        .iter()
        .zip(data.u.coeffs().iter().zip(data.u_t.coeffs()).zip(data.u_tt.coeffs()))
        .map(|(&r, ((p0, p1), p2))| p2 + (p0 + p1 * delta) * (r * r))
        .collect();
    Ok(SpectralField::from_coeffs(data.u.grid().clone(), c, Quantity::Other))
}

/// Least-squares slope of `ln y` against `ln x`; `None` without two distinct abscissae.
pub(crate) fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx <= 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::params::Params;
    use crate::spectral::{norm, synthesize_data, DataSpec, Grid, NormSpec, Profile};

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::radial_composite(2, 12.0, 12, 16).unwrap())
    }

    #[test]
    fn compatible_data_has_no_defect() {
        let p = Params::new(0.1, 1.0).unwrap();
        let d = synthesize_data(&grid(), &p, &DataSpec::gaussian([1.0, 0.5, 0.0], 0.7).compatible(), 0).unwrap();
        let c = compatibility_defect(&d, 1.0).unwrap();
        assert!(c.coeffs().iter().all(|z| z.norm() <= 1e-14));
    }

    #[test]
    fn pure_third_datum_is_its_own_defect() {
        let p = Params::new(0.1, 1.0).unwrap();
        let d = synthesize_data(&grid(), &p, &DataSpec::gaussian([0.0, 0.0, 2.0], 0.5), 0).unwrap();
        let c = compatibility_defect(&d, 1.0).unwrap();
        assert_eq!(c.coeffs(), d.u_tt.coeffs());
    }

    #[test]
    fn defect_norm_scales_with_amplitude() {
        let g = grid();
        let p = Params::new(0.1, 1.0).unwrap();
        let shape = SpectralField::from_radial_fn(g.clone(), Quantity::Psi, |r| Complex64::new((-0.5 * r * r).exp(), 0.0));
        let spec = DataSpec::gaussian([1.0, 1.0, 0.0], 0.3)
            .incompatible(Profile::Gaussian { amplitude: 3.0, width: 0.5 });
        let d = synthesize_data(&g, &p, &spec, 0).unwrap();
        let c = compatibility_defect(&d, 1.0).unwrap();
        let want = 3.0 * norm(&shape, NormSpec::L2).unwrap();
        assert!((norm(&c, NormSpec::L2).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn slope_of_a_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|t: &f64| 3.0 * t * t).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[0.1, 0.1], &[1.0, 1.0]).is_none());
    }
}
