//! Fields stored as Fourier coefficients on a shared grid.

use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::Result;

/// What a field represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Psi,
    PsiT,
    PsiTt,
    Forcing,
    Other,
}

/// Fourier coefficients of one field on a grid.
///
/// On a torus the coefficients are those of the Fourier series,
/// `f(x) = sum_k c_k exp(i k x)`. On a radial grid they are samples of the
/// Fourier transform at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    quantity: Quantity,
}

impl SpectralField {
    pub fn zeros(grid: Arc<Grid>, quantity: Quantity) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        SpectralField { grid, coeffs, quantity }
    }

    /// Panics if `coeffs` has the wrong length; callers build it from the grid.
    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>, quantity: Quantity) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count must match the grid");
        SpectralField { grid, coeffs, quantity }
    }

    /// Field whose coefficient at each mode is `f(|xi|)`.
    pub fn from_radial_fn(grid: Arc<Grid>, quantity: Quantity, f: impl Fn(f64) -> Complex64) -> Self {
        let coeffs = grid.xi_abs().iter().map(|&r| f(r)).collect();
        SpectralField { grid, coeffs, quantity }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn with_quantity(mut self, quantity: Quantity) -> Self {
        self.quantity = quantity;
        self
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|_, c| c * a)
    }

    /// Applies `f(|xi|, c)` mode by mode.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let coeffs = self.grid.xi_abs().iter().zip(&self.coeffs).map(|(&r, &c)| f(r, c)).collect();
        SpectralField { grid: self.grid.clone(), coeffs, quantity: self.quantity }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x * a + y * b).collect();
        Ok(SpectralField { grid: self.grid.clone(), coeffs, quantity: self.quantity })
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Mode-by-mode Hermitian inner product `sum conj(a_k) b_k` (unweighted).
    pub fn dot(&self, other: &SpectralField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    /// Weighted inner product matching the L2 norm of the grid.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .grid
            .mode_measure()
            .iter()
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum())
    }
}

/// Three fields describing `(u, u_t, u_tt)` at one instant.
#[derive(Debug, Clone)]
pub struct FieldTriple {
    pub u: SpectralField,
    pub u_t: SpectralField,
    pub u_tt: SpectralField,
}

impl FieldTriple {
    pub fn new(u: SpectralField, u_t: SpectralField, u_tt: SpectralField) -> Result<Self> {
        u.grid().ensure_same(u_t.grid())?;
        u.grid().ensure_same(u_tt.grid())?;
        Ok(FieldTriple {
            u: u.with_quantity(Quantity::Psi),
            u_t: u_t.with_quantity(Quantity::PsiT),
            u_tt: u_tt.with_quantity(Quantity::PsiTt),
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        FieldTriple {
            u: SpectralField::zeros(grid.clone(), Quantity::Psi),
            u_t: SpectralField::zeros(grid.clone(), Quantity::PsiT),
            u_tt: SpectralField::zeros(grid, Quantity::PsiTt),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn slot(&self, slot: Slot) -> &SpectralField {
        match slot {
            Slot::Psi => &self.u,
            Slot::PsiT => &self.u_t,
            Slot::PsiTt => &self.u_tt,
        }
    }

    /// Coefficients of one mode as `[u, u_t, u_tt]`.
    pub fn mode(&self, k: usize) -> [Complex64; 3] {
        [self.u.coeffs()[k], self.u_t.coeffs()[k], self.u_tt.coeffs()[k]]
    }

    pub fn combine(&self, a: f64, other: &FieldTriple, b: f64) -> Result<Self> {
        Ok(FieldTriple {
            u: self.u.combine(a, &other.u, b)?,
            u_t: self.u_t.combine(a, &other.u_t, b)?,
            u_tt: self.u_tt.combine(a, &other.u_tt, b)?,
        })
    }

    pub fn sub(&self, other: &FieldTriple) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        FieldTriple { u: self.u.scale(a), u_t: self.u_t.scale(a), u_tt: self.u_tt.scale(a) }
    }

    /// Builds a triple from per-mode values.
    pub fn from_modes(grid: Arc<Grid>, modes: &[[Complex64; 3]]) -> Self {
        let pick = |j: usize| modes.iter().map(|m| m[j]).collect::<Vec<_>>();
        FieldTriple {
            u: SpectralField::from_coeffs(grid.clone(), pick(0), Quantity::Psi),
            u_t: SpectralField::from_coeffs(grid.clone(), pick(1), Quantity::PsiT),
            u_tt: SpectralField::from_coeffs(grid, pick(2), Quantity::PsiTt),
        }
    }
}

/// Which time derivative of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Psi,
    PsiT,
    PsiTt,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Psi, Slot::PsiT, Slot::PsiTt];

    pub fn order(self) -> usize {
        match self {
            Slot::Psi => 0,
            Slot::PsiT => 1,
            Slot::PsiTt => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::Psi => "psi",
            Slot::PsiT => "psi_t",
            Slot::PsiTt => "psi_tt",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Arc::new(Grid::torus(1, 8, 1.0).unwrap());
        let b = Arc::new(Grid::torus(1, 16, 1.0).unwrap());
        let fa = SpectralField::zeros(a, Quantity::Psi);
        let fb = SpectralField::zeros(b, Quantity::Psi);
        assert!(fa.add(&fb).is_err());
    }

    #[test]
    fn equal_grids_from_different_allocations_combine() {
        let a = Arc::new(Grid::torus(2, 8, 1.0).unwrap());
        let b = Arc::new(Grid::torus(2, 8, 1.0).unwrap());
        let fa = SpectralField::from_radial_fn(a, Quantity::Psi, |r| Complex64::new(r, 0.0));
        let fb = SpectralField::from_radial_fn(b, Quantity::Psi, |r| Complex64::new(r, 1.0));
        let d = fb.sub(&fa).unwrap();
        assert!(d.coeffs().iter().all(|c| (c - Complex64::new(0.0, 1.0)).norm() < 1e-15));
    }
}
