//! Discretisations of frequency space.

use serde::{Deserialize, Serialize};

use super::quadrature::Rule;
use crate::error::{Error, Result};

/// Which discretisation of frequency space a grid uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// Radially symmetric functions on `R^n`, sampled at quadrature nodes in `|xi|`.
    Radial {
        dim: usize,
        r_max: f64,
        #[serde(default = "default_panels")]
        panels: usize,
        order: usize,
    },
    /// Periodic box `[0, length)^n` with `n` points per axis.
    Torus { dim: usize, n: usize, length: f64 },
}

fn default_panels() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    Radial { r_max: f64, panels: usize, order: usize, weights: Vec<f64> },
    Torus { n: usize, length: f64, freq: Vec<f64> },
}

/// A frequency grid: one entry of `xi_abs` per stored mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    kind: GridKind,
    xi_abs: Vec<f64>,
}

/// Surface area of the unit sphere in `R^n`, counting both points of `S^0`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

impl Grid {
    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        match *spec {
            GridSpec::Radial { dim, r_max, panels, order } => {
                Self::radial_composite(dim, r_max, panels, order)
            }
            GridSpec::Torus { dim, n, length } => Self::torus(dim, n, length),
        }
    }

    /// Single Gauss-Legendre rule on `[0, r_max]`.
    pub fn radial(dim: usize, r_max: f64, order: usize) -> Result<Self> {
        Self::radial_composite(dim, r_max, 1, order)
    }

    /// `panels` equal panels on `[0, r_max]` with `order` nodes each.
    pub fn radial_composite(dim: usize, r_max: f64, panels: usize, order: usize) -> Result<Self> {
        check_dim(dim)?;
        if panels * order < 32 {
            return Err(Error::InvalidGrid(format!(
                "radial quadrature needs at least 32 nodes, got {}",
                panels * order
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        let rule = Rule::composite(0.0, r_max, panels, order)?;
        Ok(Grid {
            dim,
            kind: GridKind::Radial { r_max, panels, order, weights: rule.weights },
            xi_abs: rule.nodes,
        })
    }

    /// Periodic box of side `length` with `n` (even, at least 8) points per axis.
    pub fn torus(dim: usize, n: usize, length: f64) -> Result<Self> {
        check_dim(dim)?;
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("points per axis must be even and >= 8, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        let base = 2.0 * std::f64::consts::PI / length;
        let freq: Vec<f64> = (0..n).map(|i| base * signed_index(i, n) as f64).collect();
        let total = n.pow(dim as u32);
        let xi_abs = (0..total)
            .map(|m| {
                let mut s = 0.0;
                let mut rest = m;
                for _ in 0..dim {
                    let k = freq[rest % n];
                    s += k * k;
                    rest /= n;
                }
                s.sqrt()
            })
            .collect();
        Ok(Grid { dim, kind: GridKind::Torus { n, length, freq }, xi_abs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, GridKind::Torus { .. })
    }

    pub fn len(&self) -> usize {
        self.xi_abs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_abs.is_empty()
    }

    /// `|xi|` of every stored mode.
    pub fn xi_abs(&self) -> &[f64] {
        &self.xi_abs
    }

    pub fn spec(&self) -> GridSpec {
        match &self.kind {
            GridKind::Radial { r_max, panels, order, .. } => GridSpec::Radial {
                dim: self.dim,
                r_max: *r_max,
                panels: *panels,
                order: *order,
            },
            GridKind::Torus { n, length, .. } => GridSpec::Torus { dim: self.dim, n: *n, length: *length },
        }
    }

    /// Integration weight of each mode for `integral |f^|^2` type sums.
    ///
    /// Radial: `|S^{n-1}| w_k r_k^{n-1}`. Torus: the box volume `L^n`.
    pub fn mode_measure(&self) -> Vec<f64> {
        match &self.kind {
            GridKind::Radial { weights, .. } => {
                let area = sphere_area(self.dim);
                self.xi_abs
                    .iter()
                    .zip(weights)
                    .map(|(&r, &w)| area * w * r.powi(self.dim as i32 - 1))
                    .collect()
            }
            GridKind::Torus { length, .. } => vec![length.powi(self.dim as i32); self.len()],
        }
    }

    /// Signed integer wave index of a torus mode along each axis (axis 0 slowest).
    pub fn torus_index(&self, mode: usize) -> Option<[i64; 3]> {
        let GridKind::Torus { n, .. } = &self.kind else { return None };
        let mut out = [0i64; 3];
        let mut rest = mode;
        for axis in (0..self.dim).rev() {
            out[axis] = signed_index(rest % n, *n);
            rest /= n;
        }
        Some(out)
    }

    /// Wave vector of a torus mode; unused axes are zero.
    pub fn wavevector(&self, mode: usize) -> Option<[f64; 3]> {
        let GridKind::Torus { n, freq, .. } = &self.kind else { return None };
        let mut out = [0.0; 3];
        let mut rest = mode;
        for axis in (0..self.dim).rev() {
            out[axis] = freq[rest % n];
            rest /= n;
        }
        Some(out)
    }

    /// True when the mode carries the Nyquist index along some axis.
    pub fn is_nyquist(&self, mode: usize) -> bool {
        match (&self.kind, self.torus_index(mode)) {
            (GridKind::Torus { n, .. }, Some(idx)) => {
                idx[..self.dim].iter().any(|&k| k == (*n / 2) as i64)
            }
            _ => false,
        }
    }

    /// Smallest nonzero `|xi|` on a torus, the lattice spacing `2 pi / L`.
    pub fn lattice_spacing(&self) -> Option<f64> {
        match &self.kind {
            GridKind::Torus { length, .. } => Some(2.0 * std::f64::consts::PI / length),
            GridKind::Radial { .. } => None,
        }
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if std::ptr::eq(self, other) || self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec(), other.spec())))
        }
    }
}

/// FFT index to signed wave number; the Nyquist index maps to `+n/2`.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_frequencies_match_fft_ordering() {
        let g = Grid::torus(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let ks: Vec<f64> = (0..8).map(|m| g.wavevector(m).unwrap()[0]).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
        assert!(g.is_nyquist(4));
        assert!(!g.is_nyquist(3));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::torus(4, 16, 1.0).is_err());
        assert!(Grid::torus(2, 15, 1.0).is_err());
        assert!(Grid::torus(2, 6, 1.0).is_err());
        assert!(Grid::radial(3, 10.0, 16).is_err());
        assert!(Grid::radial(0, 10.0, 64).is_err());
    }

    #[test]
    fn torus_mode_layout_is_row_major() {
        let g = Grid::torus(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        // mode index = i0 * 8 + i1
        assert_eq!(g.torus_index(8 + 7).unwrap()[..2], [1, -1]);
        let k = g.wavevector(3 * 8 + 4).unwrap();
        assert_eq!((k[0], k[1]), (3.0, 4.0));
        assert!((g.xi_abs()[3 * 8 + 4] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn radial_measure_integrates_gaussian() {
        // integral over R^3 of exp(-|xi|^2) = pi^{3/2}
        let g = Grid::radial(3, 12.0, 96).unwrap();
        let got: f64 = g
            .mode_measure()
            .iter()
            .zip(g.xi_abs())
            .map(|(m, r)| m * (-r * r).exp())
            .sum();
        assert!((got - std::f64::consts::PI.powf(1.5)).abs() < 1e-12);
    }
}
