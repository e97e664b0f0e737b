//! Reproducible initial data.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::{FieldTriple, Quantity, SpectralField};
use super::grid::{Grid, GridKind};
use crate::error::{Error, Result};
use crate::params::Params;

/// Shape of one initial field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `amplitude * exp(-width |xi|^2)` in frequency space; on a torus the
    /// bump is centred in the box.
    Gaussian { amplitude: f64, width: f64 },
    /// Random coefficients supported in `k_min <= |xi| <= k_max`.
    Random { amplitude: f64, k_min: f64, k_max: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Zero
    }
}

/// Initial data `(psi_0, psi_1, psi_2)` description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub psi0: Profile,
    #[serde(default)]
    pub psi1: Profile,
    #[serde(default)]
    pub psi2: Profile,
    /// Replace `psi_2` by `Laplace psi_0 + delta Laplace psi_1 + defect`.
    #[serde(default)]
    pub compatible: bool,
    /// Compatibility defect added to the compatible `psi_2`.
    #[serde(default)]
    pub defect: Profile,
    /// Remove the zero mode of every slot (torus only).
    #[serde(default)]
    pub zero_mean: bool,
    /// Overall factor applied after everything else.
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl DataSpec {
    pub fn gaussian(amplitudes: [f64; 3], width: f64) -> Self {
        let g = |a: f64| if a == 0.0 { Profile::Zero } else { Profile::Gaussian { amplitude: a, width } };
        DataSpec {
            psi0: g(amplitudes[0]),
            psi1: g(amplitudes[1]),
            psi2: g(amplitudes[2]),
            compatible: false,
            defect: Profile::Zero,
            zero_mean: false,
            scale: 1.0,
        }
    }

    pub fn compatible(mut self) -> Self {
        self.compatible = true;
        self
    }

    /// Compatible data plus the given defect in `psi_2`.
    pub fn incompatible(mut self, defect: Profile) -> Self {
        self.compatible = true;
        self.defect = defect;
        self
    }

    pub fn zero_mean(mut self) -> Self {
        self.zero_mean = true;
        self
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// Builds the initial triple on `grid`. Identical inputs give identical coefficients.
pub fn synthesize_data(grid: &Arc<Grid>, params: &Params, spec: &DataSpec, seed: u64) -> Result<FieldTriple> {
    if spec.zero_mean && !grid.is_torus() {
        return Err(Error::Unsupported("zero-mean data only makes sense on a torus".into()));
    }
    let slot = |p: &Profile, k: u64, q: Quantity| profile_field(grid, p, seed.wrapping_mul(3).wrapping_add(k), q);
    let psi0 = slot(&spec.psi0, 0, Quantity::Psi)?;
    let psi1 = slot(&spec.psi1, 1, Quantity::PsiT)?;
    let psi2 = if spec.compatible {
        let defect = slot(&spec.defect, 3, Quantity::PsiTt)?;
        compatible_second(&psi0, &psi1, params.delta())?.add(&defect)?
    } else {
        if spec.defect != Profile::Zero {
            return Err(Error::Config("a defect needs `compatible = true`".into()));
        }
        slot(&spec.psi2, 2, Quantity::PsiTt)?
    };
    let mut triple = FieldTriple::new(psi0, psi1, psi2)?;
    if spec.zero_mean {
        for f in [&mut triple.u, &mut triple.u_t, &mut triple.u_tt] {
            f.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(if spec.scale == 1.0 { triple } else { triple.scale(spec.scale) })
}

/// `Laplace psi_0 + delta Laplace psi_1` in frequency space.
pub fn compatible_second(psi0: &SpectralField, psi1: &SpectralField, delta: f64) -> Result<SpectralField> {
    let lap0 = psi0.map(|r, c| -c * (r * r));
    let lap1 = psi1.map(|r, c| -c * (r * r));
    Ok(lap0.combine(1.0, &lap1, delta)?.with_quantity(Quantity::PsiTt))
}

fn profile_field(grid: &Arc<Grid>, profile: &Profile, seed: u64, q: Quantity) -> Result<SpectralField> {
    match *profile {
        Profile::Zero => Ok(SpectralField::zeros(grid.clone(), q)),
        Profile::Gaussian { amplitude, width } => {
            if !(width > 0.0) {
                return Err(Error::Precondition(format!("gaussian width must be positive, got {width}")));
            }
            Ok(gaussian(grid, amplitude, width, q))
        }
        Profile::Random { amplitude, k_min, k_max } => {
            if !(k_min >= 0.0 && k_max > k_min) {
                return Err(Error::Precondition(format!("bad band [{k_min}, {k_max}]")));
            }
            Ok(random_band(grid, amplitude, k_min, k_max, seed, q))
        }
    }
}

fn gaussian(grid: &Arc<Grid>, amplitude: f64, width: f64, q: Quantity) -> SpectralField {
    match grid.kind() {
        GridKind::Radial { .. } => SpectralField::from_radial_fn(grid.clone(), q, |r| {
            Complex64::new(amplitude * (-width * r * r).exp(), 0.0)
        }),
        GridKind::Torus { length, .. } => {
            let vol = length.powi(grid.dim() as i32);
            let coeffs = (0..grid.len())
                .map(|m| {
                    let idx = grid.torus_index(m).expect("torus");
                    let sign = if idx.iter().sum::<i64>().rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let r = grid.xi_abs()[m];
                    Complex64::new(sign * amplitude * (-width * r * r).exp() / vol, 0.0)
                })
                .collect();
            SpectralField::from_coeffs(grid.clone(), coeffs, q)
        }
    }
}

fn random_band(grid: &Arc<Grid>, amplitude: f64, k_min: f64, k_max: f64, seed: u64, q: Quantity) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match grid.kind() {
        GridKind::Radial { .. } => {
            let bumps: Vec<(f64, f64)> =
                (0..4).map(|_| (rng.gen_range(k_min..k_max), rng.gen_range(-1.0..1.0))).collect();
            let w = (k_max - k_min) / 8.0;
            SpectralField::from_radial_fn(grid.clone(), q, |r| {
                if r < k_min || r > k_max {
                    return Complex64::new(0.0, 0.0);
                }
                let v: f64 = bumps.iter().map(|&(c, a)| a * (-((r - c) / w).powi(2)).exp()).sum();
                Complex64::new(amplitude * v, 0.0)
            })
        }
        GridKind::Torus { length, .. } => {
            let vol = length.powi(grid.dim() as i32);
            let raw: Vec<Complex64> = grid
                .xi_abs()
                .iter()
                .enumerate()
                .map(|(m, &r)| {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if r < k_min || r > k_max || grid.is_nyquist(m) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        z * (amplitude / vol)
                    }
                })
                .collect();
            let coeffs = (0..grid.len()).map(|m| 0.5 * (raw[m] + raw[mirror(grid, m)].conj())).collect();
            SpectralField::from_coeffs(grid.clone(), coeffs, q)
        }
    }
}

/// Index of the mode `-k` on a torus.
pub fn mirror(grid: &Grid, mode: usize) -> usize {
    let GridKind::Torus { n, .. } = grid.kind() else { return mode };
    let idx = grid.torus_index(mode).expect("torus");
    idx[..grid.dim()]
        .iter()
        .fold(0usize, |acc, &k| acc * n + (-k).rem_euclid(*n as i64) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::transform::TorusFft;

    fn params() -> Params {
        Params::dissipative(0.1, 1.0).unwrap()
    }

    #[test]
    fn same_seed_same_data() {
        let g = Arc::new(Grid::torus(2, 16, 10.0).unwrap());
        let spec = DataSpec {
            psi0: Profile::Random { amplitude: 1.0, k_min: 0.5, k_max: 3.0 },
            ..DataSpec::gaussian([0.0, 1.0, 0.0], 1.0)
        };
        let a = synthesize_data(&g, &params(), &spec, 11).unwrap();
        let b = synthesize_data(&g, &params(), &spec, 11).unwrap();
        let c = synthesize_data(&g, &params(), &spec, 12).unwrap();
        assert_eq!(a.u.coeffs(), b.u.coeffs());
        assert_ne!(a.u.coeffs(), c.u.coeffs());
    }

    #[test]
    fn torus_data_is_real_and_gaussian_is_centred() {
        let g = Arc::new(Grid::torus(2, 32, 20.0).unwrap());
        let spec = DataSpec {
            psi1: Profile::Random { amplitude: 1.0, k_min: 0.0, k_max: 4.0 },
            ..DataSpec::gaussian([1.0, 0.0, 0.0], 2.0)
        };
        let d = synthesize_data(&g, &params(), &spec, 5).unwrap();
        let fft = TorusFft::new(g.clone()).unwrap();
        for f in [&d.u, &d.u_t] {
            let v = fft.inverse_complex(f.coeffs());
            assert!(v.iter().all(|z| z.im.abs() < 1e-12));
        }
        let u = fft.inverse(d.u.coeffs());
        let peak = (0..u.len()).max_by(|&i, &j| u[i].total_cmp(&u[j])).unwrap();
        let x = fft.point(peak);
        assert_eq!((x[0], x[1]), (10.0, 10.0));
        // physical peak of the inverse transform of exp(-a|xi|^2): (4 pi a)^{-n/2}
        assert!((u[peak] - 1.0 / (4.0 * std::f64::consts::PI * 2.0)).abs() < 1e-10);
    }

    #[test]
    fn compatible_and_zero_mean_options() {
        let g = Arc::new(Grid::torus(1, 16, 10.0).unwrap());
        let spec = DataSpec::gaussian([1.0, 1.0, 0.0], 1.0).compatible().zero_mean();
        let d = synthesize_data(&g, &params(), &spec, 0).unwrap();
        for k in 1..16 {
            let r = g.xi_abs()[k];
            let want = -(r * r) * (d.u.coeffs()[k] + d.u_t.coeffs()[k]);
            assert!((d.u_tt.coeffs()[k] - want).norm() < 1e-15);
        }
        assert_eq!(d.u.coeffs()[0], Complex64::new(0.0, 0.0));
        assert!(synthesize_data(&Arc::new(Grid::radial(1, 5.0, 32).unwrap()), &params(), &spec, 0).is_err());
    }

    #[test]
    fn random_zero_mean_and_zero_defect() {
        let g = Arc::new(Grid::torus(2, 16, 10.0).unwrap());
        let band = Profile::Random { amplitude: 1.0, k_min: 0.0, k_max: 3.0 };
        let spec = DataSpec { psi0: band, psi1: band, psi2: band, ..DataSpec::gaussian([0.0; 3], 1.0) }.zero_mean();
        let d = synthesize_data(&g, &params(), &spec, 7).unwrap();
        assert_eq!(d.u_t.coeffs()[0], Complex64::new(0.0, 0.0));
        assert_eq!(d.u_tt.coeffs()[0], Complex64::new(0.0, 0.0));
        let base = DataSpec::gaussian([1.0, 0.5, 0.0], 1.0);
        let zero_defect = Profile::Gaussian { amplitude: 0.0, width: 1.0 };
        let a = synthesize_data(&g, &params(), &base.compatible(), 1).unwrap();
        let b = synthesize_data(&g, &params(), &base.incompatible(zero_defect), 1).unwrap();
        assert_eq!(a.u_tt.coeffs(), b.u_tt.coeffs());
        assert!(synthesize_data(&g, &params(), &DataSpec { defect: band, ..base }, 1).is_err());
    }
}
