//! Growth and decay laws: reference rates, band splitting and rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Growth coefficient of the solution's `L2` norm in dimension `n`.
pub fn dn_coefficient(n: usize, t: f64) -> f64 {
    match n {
        1 => (1.0 + t).sqrt(),
        2 => (std::f64::consts::E + t).ln().sqrt(),
        _ => (1.0 + t).powf(0.5 - n as f64 / 4.0),
    }
}

/// Which estimate a measured norm is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimate {
    /// `||psi||_2` for `L1 & L2` data: the growth coefficient `D_n`.
    Solution,
    /// `||d_t^l psi||_2` for `L1 & L2` data.
    TimeDerivative,
    /// `||d_t^l psi||_2` for data only in `L2`.
    TimeDerivativeL2Data,
    /// `|| |D|^{s+2-l} d_t^l psi ||_2` for `L1 & L2` data.
    Sobolev,
    /// Same norm for data only in `L2`.
    SobolevL2Data,
    /// Small-data nonlinear solution, `||psi||_2`.
    NonlinearSolution,
    /// Small-data nonlinear solution, `||d_t^l psi||_2`.
    NonlinearTimeDerivative,
    /// Small-data nonlinear solution, `|| |D|^{s+2-l} d_t^l psi ||_2`.
    NonlinearSobolev,
}

/// A reference rate: either a power of `1+t` or the growth coefficient `D_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedRate {
    Power(f64),
    Growth { dim: usize },
}

impl ExpectedRate {
    /// Power of `1+t`, or `None` for the logarithmic law in two dimensions.
    pub fn as_power(&self) -> Option<f64> {
        match *self {
            ExpectedRate::Power(p) => Some(p),
            ExpectedRate::Growth { dim: 2 } => None,
            ExpectedRate::Growth { dim: 1 } => Some(0.5),
            ExpectedRate::Growth { dim } => Some(0.5 - dim as f64 / 4.0),
        }
    }

    /// Model to fit when checking this rate.
    pub fn model(&self) -> FitModel {
        match self.as_power() {
            Some(_) => FitModel::Power,
            None => FitModel::LogHalf,
        }
    }
}

/// Reference rate of `estimate` in dimension `n` for time derivative `l` and regularity `s`.
pub fn expected_rate(n: usize, estimate: Estimate, l: usize, s: f64) -> Result<ExpectedRate> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    if l > 2 {
        return Err(Error::Precondition(format!("time derivative order {l} exceeds 2")));
    }
    let (nf, lf) = (n as f64, l as f64);
    Ok(match estimate {
        Estimate::Solution | Estimate::NonlinearSolution => ExpectedRate::Growth { dim: n },
        Estimate::TimeDerivative | Estimate::NonlinearTimeDerivative => {
            if l == 0 {
                ExpectedRate::Growth { dim: n }
            } else {
                ExpectedRate::Power(0.5 - lf / 2.0 - nf / 4.0)
            }
        }
        Estimate::TimeDerivativeL2Data => ExpectedRate::Power(0.5 - lf / 2.0),
        Estimate::Sobolev | Estimate::NonlinearSobolev => ExpectedRate::Power(-0.5 - s / 2.0 - nf / 4.0),
        Estimate::SobolevL2Data => ExpectedRate::Power(-0.5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `amplitude * (1+t)^exponent`
    Power,
    /// `sqrt(offset + amplitude^2 ln(e+t))`
    #[serde(alias = "loghalf")]
    LogHalf,
    /// `amplitude * exp(-rate t)`
    Exp,
}

/// Result of fitting one model to a positive time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: FitModel,
    /// Power for `Power`, decay rate for `Exp`, `1/2` for `LogHalf`.
    pub exponent_or_rate: f64,
    pub amplitude: f64,
    /// Intercept of the affine law for `LogHalf`; zero otherwise.
    pub offset: f64,
    /// Root-mean-square residual in log space.
    pub rms_residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits with a larger log-space residual are reported as unreliable.
pub const RELIABLE_RESIDUAL: f64 = 0.1;

impl RateFit {
    pub fn reliable(&self) -> bool {
        self.rms_residual <= RELIABLE_RESIDUAL
    }

    pub fn predict(&self, t: f64) -> f64 {
        match self.model {
            FitModel::Power => self.amplitude * (1.0 + t).powf(self.exponent_or_rate),
            FitModel::LogHalf => {
                (self.offset + self.amplitude * self.amplitude * (std::f64::consts::E + t).ln()).max(0.0).sqrt()
            }
            FitModel::Exp => self.amplitude * (-self.exponent_or_rate * t).exp(),
        }
    }
}

/// Least-squares line `y = a + b x`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn rms(r: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = r.collect();
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Fits `model` to `(times, values)`.
///
/// Needs at least 8 positive samples; the power and logarithmic models also
/// need `1+t` to span 1.5 decades.
pub fn fit_rate(times: &[f64], values: &[f64], model: FitModel) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::InsufficientData("times and values differ in length".into()));
    }
    if times.len() < 8 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 8", times.len())));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InsufficientData(format!("nonpositive or non-finite value {v}")));
    }
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t_max > t_min) {
        return Err(Error::InsufficientData("times do not span an interval".into()));
    }
    if model != FitModel::Exp && ((1.0 + t_max) / (1.0 + t_min)).log10() < 1.5 {
        return Err(Error::InsufficientData(format!(
            "window [{t_min}, {t_max}] spans less than 1.5 decades in 1+t"
        )));
    }
    let logy: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let base = RateFit {
        model,
        exponent_or_rate: 0.0,
        amplitude: 0.0,
        offset: 0.0,
        rms_residual: 0.0,
        window: (t_min, t_max),
        samples: times.len(),
    };
    Ok(match model {
        FitModel::Power => {
            let x: Vec<f64> = times.iter().map(|t| (1.0 + t).ln()).collect();
            let (a, b) = line_fit(&x, &logy);
            let res = rms(x.iter().zip(&logy).map(|(x, y)| y - a - b * x));
            RateFit { exponent_or_rate: b, amplitude: a.exp(), rms_residual: res, ..base }
        }
        FitModel::Exp => {
            let (a, b) = line_fit(times, &logy);
            let res = rms(times.iter().zip(&logy).map(|(x, y)| y - a - b * x));
            RateFit { exponent_or_rate: -b, amplitude: a.exp(), rms_residual: res, ..base }
        }
        FitModel::LogHalf => {
            let x: Vec<f64> = times.iter().map(|t| (std::f64::consts::E + t).ln()).collect();
            let y2: Vec<f64> = values.iter().map(|v| v * v).collect();
            let (a, b) = line_fit(&x, &y2);
            let res = if x.iter().any(|x| a + b * x <= 0.0) {
                f64::INFINITY
            } else {
                rms(x.iter().zip(&logy).map(|(x, y)| y - 0.5 * (a + b * x).ln()))
            };
            let amplitude = if b > 0.0 { b.sqrt() } else { f64::NAN };
            RateFit { exponent_or_rate: 0.5, amplitude, offset: a, rms_residual: res, ..base }
        }
    })
}

/// Restricts a series to `lo <= t <= hi`.
pub fn window(times: &[f64], values: &[f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    times.iter().zip(values).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, v)| (*t, *v)).unzip()
}

/// Sharp split by `|xi|` into `|xi| < eps`, `eps <= |xi| <= n_cut` and `|xi| > n_cut`.
pub fn band_split(field: &SpectralField, eps: f64, n_cut: f64) -> Result<(SpectralField, SpectralField, SpectralField)> {
    if !(eps > 0.0 && n_cut > eps) {
        return Err(Error::Precondition(format!("need 0 < eps < n_cut, got {eps}, {n_cut}")));
    }
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let low = field.map(|r, c| if r < eps { c } else { zero });
    let mid = field.map(|r, c| if (eps..=n_cut).contains(&r) { c } else { zero });
    let high = field.map(|r, c| if r > n_cut { c } else { zero });
    Ok((low, mid, high))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::spectral::{norm, Grid, NormSpec, Quantity};

    #[test]
    fn growth_coefficient_values() {
        assert_eq!(dn_coefficient(1, 3.0), 2.0);
        let e = std::f64::consts::E;
        assert!((dn_coefficient(2, e * e - e) - 2f64.sqrt()).abs() < 1e-15);
        assert!((dn_coefficient(3, 15.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_rates() {
        assert_eq!(expected_rate(3, Estimate::TimeDerivative, 2, 0.0).unwrap(), ExpectedRate::Power(-1.25));
        assert_eq!(expected_rate(2, Estimate::NonlinearSolution, 0, 0.0).unwrap().model(), FitModel::LogHalf);
        assert_eq!(expected_rate(3, Estimate::Sobolev, 0, 1.0).unwrap(), ExpectedRate::Power(-1.75));
        assert_eq!(expected_rate(3, Estimate::TimeDerivativeL2Data, 1, 0.0).unwrap(), ExpectedRate::Power(0.0));
        assert_eq!(expected_rate(3, Estimate::SobolevL2Data, 2, 1.0).unwrap(), ExpectedRate::Power(-0.5));
        assert!(expected_rate(3, Estimate::Sobolev, 3, 1.0).is_err());
    }

    #[test]
    fn synthetic_fits_recover_parameters() {
        let t: Vec<f64> = (0..20).map(|i| 10f64.powf(i as f64 * 3.0 / 19.0)).collect();
        let y: Vec<f64> = t.iter().map(|t| 5.0 * (1.0 + t).powf(-1.25)).collect();
        let f = fit_rate(&t, &y, FitModel::Power).unwrap();
        assert!((f.exponent_or_rate + 1.25).abs() < 1e-9 && (f.amplitude - 5.0).abs() < 1e-9);

        let y: Vec<f64> = t.iter().map(|t| 2.0 * (std::f64::consts::E + t).ln().sqrt()).collect();
        let f = fit_rate(&t, &y, FitModel::LogHalf).unwrap();
        assert!((f.amplitude - 2.0).abs() < 1e-9 && f.rms_residual < 1e-12);

        let t: Vec<f64> = (0..16).map(|i| 0.02 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-t / 0.05).exp()).collect();
        let f = fit_rate(&t, &y, FitModel::Exp).unwrap();
        assert!((f.exponent_or_rate - 20.0).abs() < 1e-6);
    }

    #[test]
    fn fit_preconditions() {
        let t: Vec<f64> = (0..8).map(|i| 10.0 + i as f64).collect();
        let y = vec![1.0; 8];
        assert!(fit_rate(&t, &y, FitModel::Power).is_err());
        let t: Vec<f64> = (0..8).map(|i| 10f64.powi(i)).collect();
        assert!(fit_rate(&t[..7], &y[..7], FitModel::Power).is_err());
        let mut y2 = y.clone();
        y2[3] = 0.0;
        assert!(fit_rate(&t, &y2, FitModel::Power).is_err());
        assert!(fit_rate(&t, &y, FitModel::Power).is_ok());
    }

    #[test]
    fn band_split_partitions_exactly() {
        let g = Arc::new(Grid::radial_composite(3, 10.0, 20, 16).unwrap());
        let f = SpectralField::from_radial_fn(g.clone(), Quantity::Psi, |r| Complex64::new((-r * r).exp(), 0.1 * r));
        let (lo, mid, hi) = band_split(&f, 0.5, 4.0).unwrap();
        let sum = lo.add(&mid).unwrap().add(&hi).unwrap();
        assert!(sum.coeffs().iter().zip(f.coeffs()).all(|(a, b)| (a - b).norm() <= 1e-15));
        // 4 pi int_0^{1/2} r^2 e^{-2 r^2} dr by a fine independent rule
        let fine = crate::spectral::Rule::gauss_legendre(0.0, 0.5, 40).unwrap();
        let want = (4.0 * std::f64::consts::PI * fine.integrate(|r| r * r * (-2.0 * r * r).exp())).sqrt();
        let lo_real = lo.map(|_, c| Complex64::new(c.re, 0.0));
        assert!((norm(&lo_real, NormSpec::L2).unwrap() - want).abs() < 1e-12);
        assert!(band_split(&f, 2.0, 1.0).is_err());
    }

    #[test]
    fn unit_frequency_lands_in_the_middle_band() {
        let g = Arc::new(Grid::torus(1, 8, 2.0 * std::f64::consts::PI).unwrap());
        let f = SpectralField::from_radial_fn(g, Quantity::Psi, |r| Complex64::new(if r == 1.0 { 1.0 } else { 0.0 }, 0.0));
        let (lo, mid, hi) = band_split(&f, 0.1, 10.0).unwrap();
        assert_eq!(norm(&lo, NormSpec::L2).unwrap(), 0.0);
        assert_eq!(norm(&hi, NormSpec::L2).unwrap(), 0.0);
        assert!(norm(&mid, NormSpec::L2).unwrap() > 0.0);
    }
}
