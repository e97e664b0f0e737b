//! Gauss-Legendre rules on intervals, plain and composite.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on a finite interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss-Legendre rule with `order` nodes on `[a, b]`.
    pub fn gauss_legendre(a: f64, b: f64, order: usize) -> Result<Self> {
        Self::composite(a, b, 1, order)
    }

    /// `panels` equal sub-intervals of `[a, b]`, each carrying an `order`-point rule.
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidGrid(format!("bad interval [{a}, {b}]")));
        }
        if panels == 0 {
            return Err(Error::InvalidGrid("need at least one panel".into()));
        }
        let base = GaussLegendre::new(order)
            .map_err(|_| Error::InvalidGrid(format!("quadrature order {order} is too small")))?;
        let mut pairs: Vec<(f64, f64)> = base.as_node_weight_pairs().to_vec();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for &(x, w) in &pairs {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Ok(Rule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixty_four_nodes_on_zero_twenty() {
        let r = Rule::gauss_legendre(0.0, 20.0, 64).unwrap();
        assert_eq!(r.len(), 64);
        assert!(r.nodes.iter().all(|&x| x > 0.0 && x < 20.0));
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!((r.weights.iter().sum::<f64>() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = Rule::gauss_legendre(-1.0, 2.0, 8).unwrap();
        // x^15 integrates to (2^16 - 1) / 16
        let got = r.integrate(|x| x.powi(15));
        let want = (2f64.powi(16) - 1.0) / 16.0;
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn composite_integrates_oscillatory_function() {
        let r = Rule::composite(0.0, 10.0, 200, 8).unwrap();
        let got = r.integrate(|x| (50.0 * x).sin());
        let want = (1.0 - (500.0f64).cos()) / 50.0;
        assert!((got - want).abs() < 1e-12);
    }
}
