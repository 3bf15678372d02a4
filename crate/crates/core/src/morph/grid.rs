//! Shared collocation grid for radial matrices.

use super::MorphError;

/// Discretization shared by every baseline and morphed shape: `n_s`
/// streamwise planes at equally spaced arc positions `s_j` in `[0, S]`,
/// and `n_phi` polar angles `phi_k = 2*pi*k / n_phi` within each plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    n_s: usize,
    n_phi: usize,
    arc_length: f64,
    arc_positions: Vec<f64>,
    angles: Vec<f64>,
}

impl CollocationGrid {
    /// Builds the canonical grid for a curve of the given arc length.
    pub fn new(n_s: usize, n_phi: usize, arc_length: f64) -> Result<Self, MorphError> {
        if n_s < 2 {
            return Err(MorphError::GridInvalid(format!("n_s = {n_s}, need >= 2")));
        }
        if n_phi < 3 {
            return Err(MorphError::GridInvalid(format!("n_phi = {n_phi}, need >= 3")));
        }
        if !(arc_length > 0.0) || !arc_length.is_finite() {
            return Err(MorphError::GridInvalid(format!(
                "arc_length = {arc_length}, need finite > 0"
            )));
        }
        let arc_positions = (0..n_s)
            .map(|j| arc_length * j as f64 / (n_s - 1) as f64)
            .collect();
        let angles = (0..n_phi)
            .map(|k| std::f64::consts::TAU * k as f64 / n_phi as f64)
            .collect();
        Ok(Self {
            n_s,
            n_phi,
            arc_length,
            arc_positions,
            angles,
        })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    /// Arc position `s_j` of plane `j`.
    pub fn arc_position(&self, j: usize) -> f64 {
        self.arc_positions[j]
    }

    pub fn arc_positions(&self) -> &[f64] {
        &self.arc_positions
    }

    /// Polar angle `phi_k` of ray `k`.
    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// True when both grids have identical plane and angle counts.
    pub fn same_dims(&self, other: &CollocationGrid) -> bool {
        self.n_s == other.n_s && self.n_phi == other.n_phi
    }
}
