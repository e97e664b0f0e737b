//! Roots of the per-mode characteristic cubic
//! `tau l^3 + l^2 + (delta + tau) r^2 l + r^2 = 0` with `r = |xi|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Params, Regime};

/// Relative separation below which two roots count as coincident.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// The three roots of one mode.
///
/// Ordering: a complex pair comes first (positive imaginary part first) and
/// the real root last. Three real roots are sorted by decreasing real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRoots {
    pub xi: f64,
    pub roots: [Complex64; 3],
    pub discriminant: f64,
    pub degenerate: bool,
}

impl ModeRoots {
    pub fn has_complex_pair(&self) -> bool {
        self.roots[0].im != 0.0
    }

    /// Smallest pairwise distance relative to the larger of the two moduli.
    pub fn relative_separation(&self) -> f64 {
        let r = &self.roots;
        [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| {
                let scale = r[i].norm().max(r[j].norm());
                if scale == 0.0 {
                    0.0
                } else {
                    (r[i] - r[j]).norm() / scale
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Discriminant of the cubic; positive means three distinct real roots.
pub fn discriminant(params: &Params, xi: f64) -> f64 {
    let (a, b, c, d) = coefficients(params, xi);
    18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d
}

fn coefficients(params: &Params, xi: f64) -> (f64, f64, f64, f64) {
    let x2 = xi * xi;
    (params.tau(), 1.0, (params.delta() + params.tau()) * x2, x2)
}

/// Sum of the moduli of the four terms of the polynomial at `l`, the natural
/// scale for judging a residual.
pub fn residual_scale(params: &Params, xi: f64, l: Complex64) -> f64 {
    let (a, b, c, d) = coefficients(params, xi);
    let m = l.norm();
    a * m.powi(3) + b * m * m + c.abs() * m + d
}

/// Value of the characteristic polynomial at `l`.
pub fn residual(params: &Params, xi: f64, l: Complex64) -> Complex64 {
    let (a, b, c, d) = coefficients(params, xi);
    ((l * a + b) * l + c) * l + d
}

/// Roots of mode `|xi| = xi`.
pub fn mode_roots(params: &Params, xi: f64) -> Result<ModeRoots> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::Precondition(format!("|xi| must be finite and nonnegative, got {xi}")));
    }
    let (a, b, c, d) = coefficients(params, xi);
    let mut roots = solve_cubic([a, b, c, d]);
    order_roots(&mut roots);
    let mut out = ModeRoots { xi, roots, discriminant: discriminant(params, xi), degenerate: false };
    out.degenerate = out.relative_separation() <= DEGENERACY_TOL;
    Ok(out)
}

fn order_roots(roots: &mut [Complex64; 3]) {
    roots.sort_by(|x, y| {
        let cx = x.im != 0.0;
        let cy = y.im != 0.0;
        cy.cmp(&cx).then(y.im.total_cmp(&x.im)).then(y.re.total_cmp(&x.re))
    });
}

/// Roots of `a x^3 + b x^2 + c x + d` with real coefficients and `a != 0`.
///
/// One real root by safeguarded Newton iteration, deflation to a quadratic
/// and a Newton polish of every root against the full cubic.
pub fn solve_cubic(coef: [f64; 4]) -> [Complex64; 3] {
    let [a, b, c, d] = coef;
    let (p2, p1, p0) = (b / a, c / a, d / a);
    let eval = |x: f64| ((x + p2) * x + p1) * x + p0;
    let deriv = |x: f64| (3.0 * x + 2.0 * p2) * x + p1;

    let r = real_root(eval, deriv, 1.0 + p2.abs().max(p1.abs()).max(p0.abs()));

    let (bq, cq) = if r == 0.0 {
        (p2, p1)
    } else {
        let cq = -p0 / r;
        let bq = if r * r >= cq.abs() { (cq - p1) / r } else { p2 + r };
        (bq, cq)
    };
    let disc = bq * bq - 4.0 * cq;
    let mut roots = if disc < 0.0 {
        let w = 0.5 * (-disc).sqrt();
        let z = polish(coef, Complex64::new(-0.5 * bq, w));
        let z = if z.im == 0.0 { Complex64::new(z.re, w) } else { z };
        [z, z.conj(), Complex64::new(r, 0.0)]
    } else {
        let q = -0.5 * (bq + bq.signum() * disc.sqrt());
        let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q, cq / q) };
        [x1, x2, r].map(|x| Complex64::new(x, 0.0))
    };
    for z in roots.iter_mut().filter(|z| z.im == 0.0) {
        *z = Complex64::new(polish_real(coef, z.re), 0.0);
    }
    roots
}

fn real_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, bound: f64) -> f64 {
    let (mut lo, mut hi) = (-bound, bound);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return 0.0;
    }
    let mut x = 0.0;
    for _ in 0..400 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dfx = df(x);
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    x
}

fn eval_poly(coef: [f64; 4], z: Complex64) -> (Complex64, Complex64) {
    let [a, b, c, d] = coef;
    let p = ((z * a + b) * z + c) * z + d;
    let dp = (z * (3.0 * a) + 2.0 * b) * z + c;
    (p, dp)
}

/// Newton steps kept only while they reduce the residual.
fn polish(coef: [f64; 4], mut z: Complex64) -> Complex64 {
    let (mut p, mut dp) = eval_poly(coef, z);
    for _ in 0..4 {
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, dpc) = eval_poly(coef, cand);
        if pc.norm() >= p.norm() {
            break;
        }
        z = cand;
        p = pc;
        dp = dpc;
    }
    z
}

fn polish_real(coef: [f64; 4], x: f64) -> f64 {
    polish(coef, Complex64::new(x, 0.0)).re
}

/// Where an asymptotic expansion of the roots applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    Low,
    High,
}

/// Limits of the low and high frequency bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    pub low_max: f64,
    pub high_min: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands { low_max: 0.1, high_min: 10.0 }
    }
}

/// Leading low-frequency behaviour, ordered like [`ModeRoots`].
pub fn low_frequency_roots(params: &Params, xi: f64) -> [Complex64; 3] {
    let x2 = xi * xi;
    let re = -0.5 * params.delta() * x2;
    [
        Complex64::new(re, xi),
        Complex64::new(re, -xi),
        Complex64::new(-1.0 / params.tau() + params.delta() * x2, 0.0),
    ]
}

/// Leading high-frequency behaviour, ordered like [`ModeRoots`].
pub fn high_frequency_roots(params: &Params, xi: f64) -> [Complex64; 3] {
    let (tau, delta) = (params.tau(), params.delta());
    let s = delta + tau;
    let re = -delta / (2.0 * tau * s);
    let im = (s / tau).sqrt() * xi;
    [Complex64::new(re, im), Complex64::new(re, -im), Complex64::new(-1.0 / s, 0.0)]
}

/// Asymptotic roots when `xi` lies in one of the bands.
pub fn asymptotic_roots(params: &Params, xi: f64, bands: Bands) -> Option<(Band, [Complex64; 3])> {
    if xi <= bands.low_max {
        Some((Band::Low, low_frequency_roots(params, xi)))
    } else if xi >= bands.high_min {
        Some((Band::High, high_frequency_roots(params, xi)))
    } else {
        None
    }
}

/// Which family of roots leaves the closed left half plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootFamily {
    Real,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Set when some root at the probe frequency has nonnegative real part.
    pub unstable: Option<RootFamily>,
}

/// Regime from the sign of `delta`, with the unstable root family at `probe_xi`.
pub fn classify_regime(params: &Params, probe_xi: f64) -> Result<RegimeReport> {
    let regime = params.regime();
    let roots = mode_roots(params, probe_xi)?;
    let unstable = if roots.has_complex_pair() && roots.roots[0].re >= 0.0 {
        Some(RootFamily::Oscillatory)
    } else if roots.roots.iter().any(|z| z.im == 0.0 && z.re >= 0.0) {
        Some(RootFamily::Real)
    } else {
        None
    };
    Ok(RegimeReport { regime, unstable })
}

/// Worst relative errors of the root solver over random `(tau, delta, |xi|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSampleAudit {
    pub samples: usize,
    /// Polynomial residual over [`residual_scale`].
    pub worst_residual: f64,
    /// Root sum against `-1/tau`.
    pub worst_sum: f64,
    /// Root product against `-|xi|^2/tau`.
    pub worst_product: f64,
    /// Largest real part over all roots with `|xi| > 0`.
    pub max_real_part: f64,
}

impl RootSampleAudit {
    pub fn passed(&self, tol: f64) -> bool {
        self.worst_residual <= tol && self.worst_sum <= tol && self.worst_product <= tol && self.max_real_part < 0.0
    }
}

/// Samples `log10 tau` in `[-3, 0.5)`, `log10(delta/tau)` in `[0.01, 2)` and
/// `log10 |xi|` in `[-3, 3)`.
pub fn root_sample_audit(samples: usize, seed: u64) -> Result<RootSampleAudit> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut a = RootSampleAudit {
        samples,
        worst_residual: 0.0,
        worst_sum: 0.0,
        worst_product: 0.0,
        max_real_part: f64::NEG_INFINITY,
    };
    for _ in 0..samples {
        let tau = 10f64.powf(rng.gen_range(-3.0..0.5));
        let delta = tau * 10f64.powf(rng.gen_range(0.01..2.0));
        let xi = 10f64.powf(rng.gen_range(-3.0..3.0));
        let par = Params::dissipative(tau, delta)?;
        let m = mode_roots(&par, xi)?;
        for l in m.roots {
            a.worst_residual = a.worst_residual.max(residual(&par, xi, l).norm() / residual_scale(&par, xi, l));
        }
        let big = m.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let sum: Complex64 = m.roots.iter().sum();
        a.worst_sum = a.worst_sum.max((sum + 1.0 / tau).norm() / (1.0 / tau).max(big));
        let prod: Complex64 = m.roots.iter().product();
        let pscale = m.roots.iter().map(|z| z.norm()).product::<f64>().max(xi * xi / tau);
        a.worst_product = a.worst_product.max((prod + xi * xi / tau).norm() / pscale);
        a.max_real_part = a.max_real_part.max(m.max_real_part());
    }
    Ok(a)
}

/// Accuracy of the leading low- and high-frequency root expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticAudit {
    pub low_xi: Vec<f64>,
    /// Largest root error against [`low_frequency_roots`].
    pub low_error: Vec<f64>,
    /// Log-log slope of `low_error`.
    pub low_order: f64,
    pub high_xi: f64,
    pub high_real_root: f64,
    /// Relative distance of the real root from `-1/(delta + tau)`.
    pub high_relative_error: f64,
}

/// Expansion errors on `points` geometric frequencies in `[low.0, low.1]` and at `high_xi`.
pub fn asymptotic_audit(params: &Params, low: (f64, f64), points: usize, high_xi: f64) -> Result<AsymptoticAudit> {
    if !(low.0 > 0.0 && low.1 > low.0 && points >= 2) {
        return Err(Error::Precondition("need 0 < low.0 < low.1 and at least two points".into()));
    }
    let r = (low.1 / low.0).ln() / (points - 1) as f64;
    let low_xi: Vec<f64> = (0..points).map(|i| low.0 * (r * i as f64).exp()).collect();
    let low_error = low_xi
        .iter()
        .map(|&xi| {
            let exact = mode_roots(params, xi)?.roots;
            let approx = low_frequency_roots(params, xi);
            Ok(exact.iter().zip(&approx).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = low_xi.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = low_error.iter().map(|x| x.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / points as f64, ly.iter().sum::<f64>() / points as f64);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let high = mode_roots(params, high_xi)?;
    let high_real_root = high.roots[2].re;
    let target = -1.0 / (params.delta() + params.tau());
    Ok(AsymptoticAudit {
        low_xi,
        low_error,
        low_order: sxy / sxx,
        high_xi,
        high_real_root,
        high_relative_error: ((high_real_root - target) / target).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(tau: f64, delta: f64) -> Params {
        Params::new(tau, delta).unwrap()
    }

    #[test]
    fn zero_frequency_roots() {
        let m = mode_roots(&p(0.1, 1.0), 0.0).unwrap();
        assert!(m.degenerate);
        let mut res: Vec<f64> = m.roots.iter().map(|z| z.re).collect();
        res.sort_by(f64::total_cmp);
        assert!((res[0] + 10.0).abs() < 1e-12);
        assert_eq!(&res[1..], &[0.0, 0.0]);
    }

    #[test]
    fn unit_frequency_has_a_complex_pair() {
        let par = p(0.1, 1.0);
        let m = mode_roots(&par, 1.0).unwrap();
        assert!(m.discriminant < 0.0);
        assert!(m.has_complex_pair() && m.roots[0].im > 0.0);
        assert_eq!(m.roots[1], m.roots[0].conj());
        for z in m.roots {
            assert!(residual(&par, 1.0, z).norm() < 1e-12);
        }
    }

    #[test]
    fn narrow_band_with_three_real_roots() {
        // discriminant / r^2 is a quadratic in r^2 whose vertex sits at b / (8 tau s^3)
        let (tau, delta) = (0.1f64, 1.0f64);
        let s = tau + delta;
        let b = 18.0 * tau * s + s * s - 27.0 * tau * tau;
        let xi = (b / (8.0 * tau * s.powi(3))).sqrt();
        let par = p(tau, delta);
        let m = mode_roots(&par, xi).unwrap();
        assert!(m.discriminant > 0.0);
        assert!(m.roots.iter().all(|z| z.im == 0.0));
        assert!(m.roots[0].re > m.roots[1].re && m.roots[1].re > m.roots[2].re);
        for z in m.roots {
            assert!(residual(&par, xi, z).norm() < 1e-12);
        }
    }

    #[test]
    fn large_frequency_matches_high_band() {
        let par = p(0.1, 1.0);
        let m = mode_roots(&par, 1000.0).unwrap();
        let real = m.roots[2].re;
        assert!((real + 1.0 / 1.1).abs() / (1.0 / 1.1) < 1e-2);
        assert!(m.roots[0].im > 0.0 && m.roots[1] == m.roots[0].conj());
    }

    #[test]
    fn chaotic_regime_flags_a_family() {
        let r = classify_regime(&p(0.1, -0.5), 100.0).unwrap();
        assert_eq!(r.regime, Regime::Chaotic);
        assert_eq!(r.unstable, Some(RootFamily::Real));
        let r = classify_regime(&p(0.1, -0.05), 100.0).unwrap();
        assert_eq!(r.unstable, Some(RootFamily::Oscillatory));
        let r = classify_regime(&p(0.1, 1.0), 100.0).unwrap();
        assert_eq!(r.unstable, None);
    }

    #[test]
    fn rejects_negative_frequency() {
        assert!(mode_roots(&p(0.1, 1.0), -1.0).is_err());
    }
}
