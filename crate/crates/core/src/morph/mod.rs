//! Shape representation and morphing.
//!
//! A shape is a [`RadialMatrix`]: boundary radii sampled on a
//! [`CollocationGrid`] of perpendicular planes along an [`OriginCurve`].
//! Homeomorphic baselines sampled on one grid can be blended into new
//! designs with [`morph_radial`]; the blend weights are the search space
//! of the optimizer.

mod baselines;
mod curve;
mod grid;
mod project;
mod radial;
mod validity;
mod vec3;

pub use baselines::{generate_baselines, BaselineGenSpec, BaselineSet};
pub use curve::OriginCurve;
pub use grid::CollocationGrid;
pub use project::{project_to_3d, SurfacePointCloud};
pub use radial::{load_radial, save_radial, RadialMatrix};
pub use validity::{validate_shape, FailureKind, ValidityReport};
pub use vec3::Vec3;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorphError {
    #[error("weight sum is zero (|sum| < 1e-12)")]
    ZeroWeightSum,
    #[error("grids differ: {left:?} vs {right:?} (n_s, n_phi)")]
    GridMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected {expected} radii, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite radius at (k={k}, j={j})")]
    NonFiniteRadius { k: usize, j: usize },
    #[error("{0} baselines but {1} weights")]
    WeightCountMismatch(usize, usize),
    #[error("weight out of range: {0}")]
    WeightOutOfRange(String),
    #[error("invalid grid: {0}")]
    GridInvalid(String),
    #[error("invalid generator spec: {0}")]
    SpecInvalid(String),
    #[error("parse error at line {line}, field {field}: {message}")]
    ParseError {
        line: usize,
        field: String,
        message: String,
    },
    #[error("shape failed validity: {0:?}")]
    InvalidShape(ValidityReport),
    #[error("io error: {0}")]
    Io(String),
}

impl MorphError {
    fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        MorphError::ParseError {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}

/// The six-dimensional design vector: five tube weights plus the first hub
/// weight. The second hub weight is pinned to `0.5 - alpha1`, so the hub
/// weight sum is 0.5 by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphWeights {
    pub tube: [f64; 5],
    pub hub_alpha1: f64,
}

pub const WEIGHT_MIN: f64 = -0.5;
pub const WEIGHT_MAX: f64 = 1.0;

impl MorphWeights {
    pub fn new(tube: [f64; 5], hub_alpha1: f64) -> Result<Self, MorphError> {
        let w = Self { tube, hub_alpha1 };
        w.validate()?;
        Ok(w)
    }

    pub fn hub_alpha2(&self) -> f64 {
        0.5 - self.hub_alpha1
    }

    pub fn validate(&self) -> Result<(), MorphError> {
        for (p, &w) in self.tube.iter().enumerate() {
            if !(WEIGHT_MIN..=WEIGHT_MAX).contains(&w) {
                return Err(MorphError::WeightOutOfRange(format!(
                    "tube weight w{} = {w} outside [{WEIGHT_MIN}, {WEIGHT_MAX}]",
                    p + 1
                )));
            }
        }
        if !(WEIGHT_MIN..=WEIGHT_MAX).contains(&self.hub_alpha1) {
            return Err(MorphError::WeightOutOfRange(format!(
                "alpha1 = {} outside [{WEIGHT_MIN}, {WEIGHT_MAX}]",
                self.hub_alpha1
            )));
        }
        if self.tube.iter().sum::<f64>().abs() < 1e-12 {
            return Err(MorphError::ZeroWeightSum);
        }
        Ok(())
    }

    pub fn as_vector(&self) -> [f64; 6] {
        [
            self.tube[0],
            self.tube[1],
            self.tube[2],
            self.tube[3],
            self.tube[4],
            self.hub_alpha1,
        ]
    }

    pub fn from_vector(v: &[f64]) -> Result<Self, MorphError> {
        if v.len() != 6 {
            return Err(MorphError::WeightOutOfRange(format!(
                "design vector has {} entries, need 6",
                v.len()
            )));
        }
        Self::new([v[0], v[1], v[2], v[3], v[4]], v[5])
    }
}

/// Blends baseline radial matrices:
/// `R[k][j] = |sum_p w_p * R_p[k][j]| / |sum_p w_p|`.
///
/// The magnitude in the numerator keeps every output radius nonnegative
/// even under negative (extrapolating) weights, and the normalization makes
/// the blend invariant under positive scaling of the weight vector.
pub fn morph_radial(baselines: &[RadialMatrix], weights: &[f64]) -> Result<RadialMatrix, MorphError> {
    if baselines.is_empty() || baselines.len() != weights.len() {
        return Err(MorphError::WeightCountMismatch(
            baselines.len(),
            weights.len(),
        ));
    }
    let grid = baselines[0].grid();
    for b in &baselines[1..] {
        if !b.grid().same_dims(grid) {
            return Err(MorphError::GridMismatch {
                left: (grid.n_s(), grid.n_phi()),
                right: (b.grid().n_s(), b.grid().n_phi()),
            });
        }
    }
    let wsum = weights.iter().sum::<f64>();
    if wsum.abs() < 1e-12 {
        return Err(MorphError::ZeroWeightSum);
    }
    let inv = 1.0 / wsum.abs();
    let n = grid.n_s() * grid.n_phi();
    let mut radii = vec![0.0f64; n];
    for (b, &w) in baselines.iter().zip(weights) {
        for (acc, &r) in radii.iter_mut().zip(b.radii()) {
            *acc += w * r;
        }
    }
    for r in radii.iter_mut() {
        *r = r.abs() * inv;
    }
    RadialMatrix::new(grid.clone(), radii)
}

/// Morphs a full design: the five tube baselines under `w.tube` and the two
/// hub baselines under `(alpha1, 0.5 - alpha1)`. The hub weight sum is 0.5
/// by construction, so only the tube morph can hit [`MorphError::ZeroWeightSum`].
pub fn morph_design(
    baselines: &BaselineSet,
    w: &MorphWeights,
) -> Result<(RadialMatrix, RadialMatrix), MorphError> {
    w.validate()?;
    let tube = morph_radial(baselines.tube(), &w.tube)?;
    let hub = morph_radial(baselines.hub(), &[w.hub_alpha1, w.hub_alpha2()])?;
    Ok((tube, hub))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(r: f64) -> RadialMatrix {
        // Smallest legal grid, constant radius; handy for forced arithmetic.
        let grid = CollocationGrid::new(2, 3, 1.0).unwrap();
        RadialMatrix::from_fn(grid, |_, _| r).unwrap()
    }

    #[test]
    fn unit_weight_reproduces_the_baseline_exactly() {
        let set = generate_baselines(&BaselineGenSpec {
            n_s: 16,
            n_phi: 12,
            ..BaselineGenSpec::default()
        })
        .unwrap();
        for p in 0..5 {
            let mut w = [0.0; 5];
            w[p] = 1.0;
            let out = morph_radial(set.tube(), &w).unwrap();
            assert_eq!(out.radii(), set.tube()[p].radii(), "baseline {p}");
        }
    }

    #[test]
    fn two_baseline_blend_is_the_weighted_mean() {
        let a = one_by_one(2.0);
        let b = one_by_one(4.0);
        let out = morph_radial(&[a, b], &[0.75, 0.25]).unwrap();
        assert_eq!(out.radius(0, 0), 2.5);
    }

    #[test]
    fn cancelling_weights_yield_a_zero_radius() {
        let a = one_by_one(2.0);
        let b = one_by_one(4.0);
        let out = morph_radial(&[a, b], &[1.0, -0.5]).unwrap();
        assert_eq!(out.radius(0, 0), 0.0);
        // and the zero radius is then rejected by validate_shape
        let curve = OriginCurve::straight(Vec3::ZERO, Vec3::Z, 1.0, 2).unwrap();
        assert!(!validate_shape(&out, &curve, 1e-3).valid);
    }

    #[test]
    fn zero_weight_sum_is_an_error() {
        let a = one_by_one(2.0);
        let b = one_by_one(4.0);
        assert_eq!(
            morph_radial(&[a.clone(), b.clone()], &[0.5, -0.5]),
            Err(MorphError::ZeroWeightSum)
        );
        assert_eq!(
            morph_radial(&[a, b], &[0.5]).unwrap_err(),
            MorphError::WeightCountMismatch(2, 1)
        );
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let a = one_by_one(2.0);
        let grid = CollocationGrid::new(3, 3, 1.0).unwrap();
        let b = RadialMatrix::from_fn(grid, |_, _| 4.0).unwrap();
        assert!(matches!(
            morph_radial(&[a, b], &[0.5, 0.5]),
            Err(MorphError::GridMismatch { .. })
        ));
    }

    #[test]
    fn weights_are_bounded_and_alpha2_complements() {
        assert!(MorphWeights::new([0.0, 0.0, 1.2, 0.0, 0.0], 0.5).is_err());
        assert!(MorphWeights::new([0.0; 5], 0.5).is_err());
        let w = MorphWeights::new([1.0, -0.5, 0.25, 0.0, 0.0], -0.25).unwrap();
        assert_eq!(w.hub_alpha2(), 0.75);
        let v = w.as_vector();
        assert_eq!(MorphWeights::from_vector(&v).unwrap(), w);
    }

    #[test]
    fn sharp_heel_design_is_tube_one_with_hub_one() {
        let set = generate_baselines(&BaselineGenSpec {
            n_s: 16,
            n_phi: 12,
            ..BaselineGenSpec::default()
        })
        .unwrap();
        // alpha1 = 0.5 puts zero weight on the second hub: the morphed hub
        // is the first baseline hub itself.
        let w = MorphWeights::new([1.0, 0.0, 0.0, 0.0, 0.0], 0.5).unwrap();
        let (tube, hub) = morph_design(&set, &w).unwrap();
        assert_eq!(tube.radii(), set.tube()[0].radii());
        assert_eq!(hub.radii(), set.hub()[0].radii());
    }

    #[test]
    fn alpha_one_extrapolates_past_the_first_hub() {
        let set = generate_baselines(&BaselineGenSpec {
            n_s: 16,
            n_phi: 12,
            ..BaselineGenSpec::default()
        })
        .unwrap();
        let w = MorphWeights::new([1.0, 0.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(w.hub_alpha2(), -0.5);
        let (_, hub) = morph_design(&set, &w).unwrap();
        // hub = |1.0*h1 - 0.5*h2| / 0.5 = |2*h1 - h2|
        let h1 = &set.hub()[0];
        let h2 = &set.hub()[1];
        for i in 0..hub.radii().len() {
            let expect = (2.0 * h1.radii()[i] - h2.radii()[i]).abs();
            assert!((hub.radii()[i] - expect).abs() < 1e-15);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn weight_vec() -> impl Strategy<Value = [f64; 5]> {
            // Keep away from the zero-sum singularity so the property holds.
            prop::array::uniform5(-0.5f64..1.0)
                .prop_filter("nonzero sum", |w| w.iter().sum::<f64>().abs() > 1e-3)
        }

        proptest! {
            // "Relative" is measured against the matrix scale: entries
            // where the weighted sum nearly cancels are rounding residues
            // with no meaningful elementwise relative error.
            #[test]
            fn positive_scaling_leaves_the_morph_unchanged(w in weight_vec(), c in prop::sample::select(vec![0.5f64, 2.0, 10.0])) {
                let set = generate_baselines(&BaselineGenSpec {
                    n_s: 8,
                    n_phi: 6,
                    ..BaselineGenSpec::default()
                }).unwrap();
                let base = morph_radial(set.tube(), &w).unwrap();
                let scaled_w: Vec<f64> = w.iter().map(|x| c * x).collect();
                let scaled = morph_radial(set.tube(), &scaled_w).unwrap();
                let scale = base.radii().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for (a, b) in base.radii().iter().zip(scaled.radii()) {
                    prop_assert!((a - b).abs() <= 1e-12 * scale.max(1.0) + 1e-12 * a.abs());
                }
            }

            #[test]
            fn outputs_are_nonnegative_for_any_weights(w in weight_vec()) {
                let set = generate_baselines(&BaselineGenSpec {
                    n_s: 8,
                    n_phi: 6,
                    ..BaselineGenSpec::default()
                }).unwrap();
                let out = morph_radial(set.tube(), &w).unwrap();
                prop_assert!(out.radii().iter().all(|&r| r >= 0.0));
            }

            #[test]
            fn shared_inlet_column_is_preserved(w in weight_vec()) {
                let set = generate_baselines(&BaselineGenSpec {
                    n_s: 8,
                    n_phi: 6,
                    ..BaselineGenSpec::default()
                }).unwrap();
                let out = morph_radial(set.tube(), &w).unwrap();
                let inlet = set.tube()[0].plane(0);
                for (k, &r) in out.plane(0).iter().enumerate() {
                    prop_assert!((r - inlet[k]).abs() <= 1e-12 * inlet[k].abs().max(1.0));
                }
            }
        }
    }
}
