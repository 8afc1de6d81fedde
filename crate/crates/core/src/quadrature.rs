//! Gauss–Legendre node sets on finite intervals.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureNodes {
    count: usize,
    rule: QuadratureRule,
}

impl QuadratureNodes {
    pub const MIN: usize = 2;
    pub const MAX: usize = 4096;

    pub fn gauss_legendre(count: usize) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&count) {
            return Err(Error::NodeCount(count));
        }
        Ok(QuadratureNodes {
            count,
            rule: QuadratureRule::GaussLegendre,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// `(node, weight)` pairs mapped onto `[a, b]`, in ascending node order.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(NonZeroUsize::new(self.count).expect("count >= 2"));
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut pts: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (mid + half * x, half * w))
            .collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on_interval(a, b).iter().map(|&(x, w)| w * f(x)).sum()
    }
}

impl Default for QuadratureNodes {
    fn default() -> Self {
        QuadratureNodes {
            count: 32,
            rule: QuadratureRule::GaussLegendre,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_count_bounds() {
        assert_eq!(QuadratureNodes::gauss_legendre(1), Err(Error::NodeCount(1)));
        assert_eq!(
            QuadratureNodes::gauss_legendre(4097),
            Err(Error::NodeCount(4097))
        );
        assert!(QuadratureNodes::gauss_legendre(2).is_ok());
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let q = QuadratureNodes::gauss_legendre(4).unwrap();
        // ∫_0^2 x^7 dx = 32
        assert!((q.integrate(0.0, 2.0, |x| x.powi(7)) - 32.0).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let q = QuadratureNodes::gauss_legendre(32).unwrap();
        let s: f64 = q.on_interval(-1.5, 2.5).iter().map(|p| p.1).sum();
        assert!((s - 4.0).abs() < 1e-13);
    }
}
