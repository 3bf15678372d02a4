//! Geometric validity of a morphed shape.

use super::curve::OriginCurve;
use super::radial::RadialMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// A boundary radius fell below the minimum physical radius.
    RadiusTooSmall,
    /// Adjacent collocation planes intersect inside the shape: the local
    /// curvature radius of the origin curve is smaller than the largest
    /// boundary radius in that plane.
    PlaneIntersection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub valid: bool,
    /// First failing (k, j) index and what failed, when invalid.
    pub failure: Option<(usize, usize, FailureKind)>,
}

impl ValidityReport {
    fn ok() -> Self {
        Self {
            valid: true,
            failure: None,
        }
    }

    fn fail(k: usize, j: usize, kind: FailureKind) -> Self {
        Self {
            valid: false,
            failure: Some((k, j, kind)),
        }
    }
}

/// Checks a shape against its origin curve. A shape is valid when
/// (a) every radius is at least `r_min`, and (b) at every interior plane
/// the curvature radius of the spine exceeds the largest boundary radius,
/// so consecutive perpendicular planes cannot cross inside the shape.
pub fn validate_shape(shape: &RadialMatrix, curve: &OriginCurve, r_min: f64) -> ValidityReport {
    debug_assert!(r_min > 0.0);
    let n_phi = shape.grid().n_phi();
    let n_s = shape.grid().n_s();
    debug_assert_eq!(n_s, curve.n_s());

    for j in 0..n_s {
        for k in 0..n_phi {
            if shape.radius(k, j) < r_min {
                return ValidityReport::fail(k, j, FailureKind::RadiusTooSmall);
            }
        }
    }
    for j in 1..n_s.saturating_sub(1) {
        let kappa = curve.curvature(j);
        if kappa <= 0.0 {
            continue;
        }
        let limit = 1.0 / kappa;
        for k in 0..n_phi {
            if shape.radius(k, j) >= limit {
                return ValidityReport::fail(k, j, FailureKind::PlaneIntersection);
            }
        }
    }
    ValidityReport::ok()
}
