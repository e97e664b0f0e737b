//! Moving between Fourier coefficients and physical values.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{Quantity, SpectralField};
use super::grid::{Grid, GridKind};
use crate::error::{Error, Result};

/// Planned n-dimensional FFTs for one torus grid.
///
/// Immutable after construction, so it can be shared across threads.
pub struct TorusFft {
    grid: Arc<Grid>,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusFft").field("n", &self.n).field("dim", &self.grid.dim()).finish()
    }
}

impl TorusFft {
    pub fn new(grid: Arc<Grid>) -> Result<Self> {
        let GridKind::Torus { n, .. } = grid.kind() else {
            return Err(Error::Unsupported("FFT transforms need a torus grid".into()));
        };
        let n = *n;
        let mut planner = FftPlanner::new();
        Ok(TorusFft {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            grid,
            n,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn along_axes(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let dim = self.grid.dim();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Fourier-series coefficients of grid values (row-major, axis 0 slowest).
    pub fn forward_complex(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid.len());
        let mut data = values.to_vec();
        self.along_axes(&mut data, &self.forward);
        let norm = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        data
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let data: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_complex(&data)
    }

    /// Grid values `sum_k c_k exp(i k x_j)`.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.grid.len());
        let mut data = coeffs.to_vec();
        self.along_axes(&mut data, &self.inverse);
        data
    }

    /// Real part of the grid values; fields built from real data are real.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(coeffs).into_iter().map(|c| c.re).collect()
    }

    pub fn to_physical(&self, field: &SpectralField) -> Result<Vec<f64>> {
        self.grid.ensure_same(field.grid())?;
        Ok(self.inverse(field.coeffs()))
    }

    pub fn to_spectral(&self, values: &[f64], quantity: Quantity) -> Result<SpectralField> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                self.grid.len()
            )));
        }
        Ok(SpectralField::from_coeffs(self.grid.clone(), self.forward(values), quantity))
    }

    /// Physical coordinates of grid point `j` along each axis.
    pub fn point(&self, j: usize) -> [f64; 3] {
        let GridKind::Torus { n, length, .. } = self.grid.kind() else { unreachable!() };
        let h = length / *n as f64;
        let mut out = [0.0; 3];
        let mut rest = j;
        for axis in (0..self.grid.dim()).rev() {
            out[axis] = h * (rest % n) as f64;
            rest /= n;
        }
        out
    }
}

/// Multiplies by `i k_axis`; the Nyquist coefficient along `axis` is dropped.
pub fn derivative(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = field.grid();
    let GridKind::Torus { n, .. } = grid.kind() else {
        return Err(Error::Unsupported("directional derivatives need a torus grid".into()));
    };
    if axis >= grid.dim() {
        return Err(Error::Precondition(format!("axis {axis} out of range")));
    }
    let half = (*n / 2) as i64;
    let coeffs = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, &c)| {
            let idx = grid.torus_index(m).expect("torus grid");
            if idx[axis] == half {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, grid.wavevector(m).expect("torus grid")[axis])
            }
        })
        .collect();
    Ok(SpectralField::from_coeffs(grid.clone(), coeffs, field.quantity()))
}

/// Multiplies by `-|xi|^2`.
pub fn laplacian(field: &SpectralField) -> SpectralField {
    field.map(|r, c| -c * (r * r))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn roundtrip_on_random_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=3 {
            let g = Arc::new(Grid::torus(dim, 8, 3.0).unwrap());
            let fft = TorusFft::new(g.clone()).unwrap();
            let x: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = fft.inverse(&fft.forward(&x));
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "dim {dim}: {err}");
        }
    }

    #[test]
    fn single_cosine_lands_on_its_modes() {
        let g = Arc::new(Grid::torus(2, 8, 2.0 * PI).unwrap());
        let fft = TorusFft::new(g.clone()).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|j| (2.0 * fft.point(j)[1]).cos()).collect();
        let c = fft.forward(&vals);
        assert!((c[2].re - 0.5).abs() < 1e-14);
        assert!((c[6].re - 0.5).abs() < 1e-14);
        let rest: f64 = c.iter().enumerate().filter(|(m, _)| *m != 2 && *m != 6).map(|(_, z)| z.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn derivative_of_sine() {
        let g = Arc::new(Grid::torus(1, 16, 2.0 * PI).unwrap());
        let fft = TorusFft::new(g.clone()).unwrap();
        let vals: Vec<f64> = (0..16).map(|j| (3.0 * fft.point(j)[0]).sin()).collect();
        let f = fft.to_spectral(&vals, Quantity::Psi).unwrap();
        let d = fft.to_physical(&derivative(&f, 0).unwrap()).unwrap();
        for j in 0..16 {
            assert!((d[j] - 3.0 * (3.0 * fft.point(j)[0]).cos()).abs() < 1e-12);
        }
    }
}
