//! Circular integration contours and their trapezoidal quadrature rules.
//!
//! The weights fold the `1/(2πi)` prefactor and the arc-length Jacobian into a
//! single complex number, so that
//!
//! ```text
//! Σ_j ω_j f(z_j) ≈ (1/2πi) ∮ f(z) dz
//! ```
//!
//! with no extra scaling at the call site.

use std::f64::consts::PI;

use crate::error::{NepError, Result};
use crate::c64;

/// A circle in the complex plane. Eigenvalues strictly inside it are targeted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    center: c64,
    radius: f64,
}

impl Contour {
    pub fn new(center: c64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(NepError::invalid(format!(
                "contour radius must be positive and finite, got {radius}"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(NepError::invalid("contour center must be finite"));
        }
        Ok(Contour { center, radius })
    }

    pub fn center(&self) -> c64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `true` iff `|λ - center| < radius`; the boundary itself is outside.
    pub fn contains(&self, lambda: c64) -> bool {
        (lambda - self.center).norm() < self.radius
    }

    /// Distance from the center in units of the radius.
    pub fn relative_distance(&self, lambda: c64) -> f64 {
        (lambda - self.center).norm() / self.radius
    }

    /// N-point trapezoidal rule on the circle, first node at angle zero.
    pub fn trapezoid_rule(&self, count: usize) -> Result<QuadratureRule> {
        trapezoid_rule(self, count)
    }
}

/// Nodes and weights of a quadrature rule on a contour.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    center: c64,
    radius: f64,
    nodes: Vec<c64>,
    weights: Vec<c64>,
}

impl QuadratureRule {
    pub fn center(&self) -> c64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[c64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[c64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(z_j, ω_j)` pairs in node order.
    pub fn iter(&self) -> impl Iterator<Item = (c64, c64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Applies the rule to a scalar function: `Σ_j ω_j f(z_j)`, summed in node order.
    pub fn integrate(&self, f: impl Fn(c64) -> c64) -> c64 {
        self.iter()
            .fold(c64::new(0.0, 0.0), |acc, (z, w)| acc + w * f(z))
    }

    /// Value of the rational filter `b(λ) = Σ_j ω_j / (z_j - λ)` that the rule
    /// implicitly applies to an eigenvalue λ.
    pub fn filter(&self, lambda: c64) -> c64 {
        self.integrate(|z| 1.0 / (z - lambda))
    }
}

pub fn trapezoid_rule(contour: &Contour, count: usize) -> Result<QuadratureRule> {
    if count < 2 {
        return Err(NepError::invalid(format!(
            "quadrature needs at least 2 nodes, got {count}"
        )));
    }
    let n = count as f64;
    let (nodes, weights) = (0..count)
        .map(|j| {
            let offset = c64::from_polar(contour.radius, 2.0 * PI * j as f64 / n);
            (contour.center + offset, offset / n)
        })
        .unzip();
    Ok(QuadratureRule {
        center: contour.center,
        radius: contour.radius,
        nodes,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn four_nodes_on_unit_circle_are_roots_of_unity() {
        let rule = Contour::new(c(0.0, 0.0), 1.0)
            .unwrap()
            .trapezoid_rule(4)
            .unwrap();
        let nodes = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (j, (z, w)) in rule.iter().enumerate() {
            assert_abs_diff_eq!((z - nodes[j]).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((w - nodes[j] / 4.0).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Contour::new(c(0.0, 0.0), 0.0).is_err());
        assert!(Contour::new(c(0.0, 0.0), -1.0).is_err());
        assert!(Contour::new(c(f64::NAN, 0.0), 1.0).is_err());
        let contour = Contour::new(c(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            contour.trapezoid_rule(1),
            Err(NepError::InvalidParameter(_))
        ));
        assert!(contour.trapezoid_rule(0).is_err());
    }

    #[test]
    fn contains_is_strict() {
        let a = Contour::new(c(1.0, 1.0), 0.5).unwrap();
        assert!(a.contains(c(1.0, 1.0)));
        let b = Contour::new(c(0.0, 0.0), 0.25).unwrap();
        assert!(b.contains(c(0.1, 0.0)));
        assert!(!b.contains(c(0.25, 0.0)));
        assert!(b.contains(c(-0.2, 0.0)));
        assert!(!b.contains(c(0.0, -0.3)));
    }

    #[test]
    fn filter_at_half_radius_matches_geometric_series() {
        let contour = Contour::new(c(0.3, -0.2), 2.0).unwrap();
        let lambda = contour.center() + c(0.0, 1.0);
        for n in [8usize, 16, 32] {
            let rule = contour.trapezoid_rule(n).unwrap();
            let expected = 1.0 / (1.0 - 0.5f64.powi(n as i32));
            let got = rule.filter(lambda);
            assert_abs_diff_eq!(got.re, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn filter_is_exact_at_center_and_weights_sum_to_zero(
            cr in -10.0f64..10.0, ci in -10.0f64..10.0,
            radius in 1e-3f64..1e3, n in 2usize..300,
        ) {
            let contour = Contour::new(c(cr, ci), radius).unwrap();
            let rule = contour.trapezoid_rule(n).unwrap();
            prop_assert_eq!(rule.len(), n);
            let at_center = rule.filter(contour.center());
            prop_assert!((at_center - 1.0).norm() < 1e-14);
            let sum: c64 = rule.weights().iter().sum();
            prop_assert!(sum.norm() < 1e-14 * radius.max(1.0));
            for z in rule.nodes() {
                prop_assert!(((z - contour.center()).norm() - radius).abs() < 1e-14 * radius.max(1.0) * 4.0);
            }
        }

        #[test]
        fn nodes_and_weights_map_under_scale_and_shift(
            cr in -5.0f64..5.0, ci in -5.0f64..5.0, radius in 0.1f64..10.0,
            scale in 0.1f64..10.0, tr in -5.0f64..5.0, ti in -5.0f64..5.0, n in 2usize..64,
        ) {
            let old = Contour::new(c(cr, ci), radius).unwrap();
            let new = Contour::new(c(tr, ti), radius * scale).unwrap();
            let (a, b) = (old.trapezoid_rule(n).unwrap(), new.trapezoid_rule(n).unwrap());
            for ((z0, w0), (z1, w1)) in a.iter().zip(b.iter()) {
                let mapped = new.center() + scale * (z0 - old.center());
                prop_assert!((mapped - z1).norm() < 1e-12 * (1.0 + z1.norm()));
                prop_assert!((scale * w0 - w1).norm() < 1e-12 * (1.0 + w1.norm()));
            }
        }
    }
}
