//! Norms computed from Fourier coefficients.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::GridKind;
use super::transform::TorusFft;
use crate::error::{Error, Result};

/// A norm of a single field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSpec {
    L2,
    /// Homogeneous Sobolev norm with weight `|xi|^s`.
    Hdot(f64),
    /// Sup norm: grid maximum on a torus, `(2 pi)^{-n} ||f^||_1` on a radial grid.
    LinfBound,
    /// `||f^||_1`, counting measure on a torus.
    L1Fourier,
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::L2 => write!(f, "L2"),
            NormSpec::Hdot(s) => write!(f, "Hdot({s})"),
            NormSpec::LinfBound => write!(f, "Linf"),
            NormSpec::L1Fourier => write!(f, "L1F"),
        }
    }
}

/// Computes `spec` of `field`.
///
/// `Hdot(s)` with `s < 0` is rejected.
pub fn norm(field: &SpectralField, spec: NormSpec) -> Result<f64> {
    let grid = field.grid();
    let c = field.coeffs();
    match (grid.kind(), spec) {
        (_, NormSpec::Hdot(s)) if !s.is_finite() => Err(Error::Precondition(format!("bad exponent {s}"))),
        (_, NormSpec::Hdot(s)) if s < 0.0 => Err(Error::Unsupported(format!("negative order Hdot({s})"))),
        (_, NormSpec::L2) => Ok(weighted_l2(field, |_| 1.0)),
        (_, NormSpec::Hdot(s)) => Ok(weighted_l2(field, |r| sobolev_weight(r, s))),
        (GridKind::Radial { .. }, NormSpec::L1Fourier) => Ok(radial_l1(field)),
        (GridKind::Radial { .. }, NormSpec::LinfBound) => {
            Ok((2.0 * PI).powi(-(grid.dim() as i32)) * radial_l1(field))
        }
        (GridKind::Torus { .. }, NormSpec::L1Fourier) => Ok(c.iter().map(|z| z.norm()).sum()),
        (GridKind::Torus { .. }, NormSpec::LinfBound) => {
            let fft = TorusFft::new(grid.clone())?;
            Ok(fft.inverse(c).iter().fold(0.0, |m, v| m.max(v.abs())))
        }
    }
}

fn sobolev_weight(r: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if r == 0.0 {
        0.0
    } else {
        r.powf(2.0 * s)
    }
}

fn weighted_l2(field: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = field.grid();
    let measure = grid.mode_measure();
    grid.xi_abs()
        .iter()
        .zip(&measure)
        .zip(field.coeffs())
        .map(|((&r, &m), c)| m * weight(r) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn radial_l1(field: &SpectralField) -> f64 {
    let measure = field.grid().mode_measure();
    measure.iter().zip(field.coeffs()).map(|(m, c)| m * c.norm()).sum()
}

/// `(||u||_2^2 + ||grad u||_2^2 + ||u_t||_2^2)^{1/2}`.
pub fn energy_norm(u: &SpectralField, u_t: &SpectralField) -> Result<f64> {
    u.grid().ensure_same(u_t.grid())?;
    let a = weighted_l2(u, |r| 1.0 + r * r);
    let b = weighted_l2(u_t, |_| 1.0);
    Ok((a * a + b * b).sqrt())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::spectral::field::Quantity;
    use crate::spectral::grid::Grid;

    fn gaussian(grid: Arc<Grid>) -> SpectralField {
        SpectralField::from_radial_fn(grid, Quantity::Psi, |r| Complex64::new((-r * r).exp(), 0.0))
    }

    #[test]
    fn radial_gaussian_l2_in_three_dimensions() {
        let g = Arc::new(Grid::radial(3, 20.0, 64).unwrap());
        let want = (4.0 * PI * (2.0 * PI).sqrt() / 16.0).sqrt();
        assert!((norm(&gaussian(g), NormSpec::L2).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn radial_hdot_and_linf_closed_forms() {
        let g = Arc::new(Grid::radial(3, 20.0, 64).unwrap());
        let f = gaussian(g);
        // 4 pi int r^4 e^{-2 r^2} dr = 4 pi * 3 sqrt(pi) / (8 * 2^{5/2})
        let hdot1 = (4.0 * PI * 3.0 * PI.sqrt() / (8.0 * 2f64.powf(2.5))).sqrt();
        assert!((norm(&f, NormSpec::Hdot(1.0)).unwrap() - hdot1).abs() < 1e-12);
        // (2 pi)^{-3} int e^{-r^2} = (2 pi)^{-3} pi^{3/2}
        let linf = PI.powf(1.5) / (2.0 * PI).powi(3);
        assert!((norm(&f, NormSpec::LinfBound).unwrap() - linf).abs() < 1e-13);
    }

    #[test]
    fn zero_field_and_hdot_zero() {
        let g = Arc::new(Grid::radial(2, 10.0, 64).unwrap());
        let z = SpectralField::zeros(g.clone(), Quantity::Psi);
        for spec in [NormSpec::L2, NormSpec::Hdot(1.5), NormSpec::LinfBound, NormSpec::L1Fourier] {
            assert_eq!(norm(&z, spec).unwrap(), 0.0);
        }
        let f = gaussian(g);
        assert_eq!(norm(&f, NormSpec::Hdot(0.0)).unwrap(), norm(&f, NormSpec::L2).unwrap());
        assert!(norm(&f, NormSpec::Hdot(-1.0)).is_err());
    }

    #[test]
    fn parseval_for_sine() {
        let g = Arc::new(Grid::torus(1, 32, 2.0 * PI).unwrap());
        let fft = TorusFft::new(g.clone()).unwrap();
        let vals: Vec<f64> = (0..32).map(|j| (3.0 * fft.point(j)[0]).sin()).collect();
        let f = fft.to_spectral(&vals, Quantity::Psi).unwrap();
        let physical = (vals.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / 32.0).sqrt();
        assert!((norm(&f, NormSpec::L2).unwrap() - physical).abs() < 1e-12);
        assert!((physical - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn torus_l2_matches_physical_sum() {
        let g = Arc::new(Grid::torus(2, 16, 5.0).unwrap());
        let fft = TorusFft::new(g.clone()).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|j| (j as f64 * 0.37).sin() + 0.2).collect();
        let f = fft.to_spectral(&vals, Quantity::Psi).unwrap();
        let h2 = (5.0f64 / 16.0).powi(2);
        let want = (vals.iter().map(|v| v * v).sum::<f64>() * h2).sqrt();
        assert!((norm(&f, NormSpec::L2).unwrap() - want).abs() < 1e-12);
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((norm(&f, NormSpec::LinfBound).unwrap() - max).abs() < 1e-12);
        assert!(norm(&f, NormSpec::Hdot(-0.5)).is_err());
    }
}
