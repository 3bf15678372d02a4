//! Projection of radial matrices back into 3-D surface point clouds.

use std::fmt::Write as _;

use super::curve::OriginCurve;
use super::radial::RadialMatrix;
use super::validity::validate_shape;
use super::vec3::Vec3;
use super::MorphError;

/// Surface samples ordered row-major by plane `j` then angle `k`, plus the
/// grid dimensions needed to tessellate them into quads.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePointCloud {
    pub n_s: usize,
    pub n_phi: usize,
    pub points: Vec<Vec3>,
}

impl SurfacePointCloud {
    pub fn point(&self, k: usize, j: usize) -> Vec3 {
        self.points[j * self.n_phi + k]
    }

    /// OBJ-style export: one `v x y z` line per sample in storage order,
    /// then quad faces between adjacent planes, wrapping around in `k`.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
        }
        let idx = |k: usize, j: usize| j * self.n_phi + k + 1;
        for j in 0..self.n_s - 1 {
            for k in 0..self.n_phi {
                let k1 = (k + 1) % self.n_phi;
                let _ = writeln!(
                    out,
                    "f {} {} {} {}",
                    idx(k, j),
                    idx(k1, j),
                    idx(k1, j + 1),
                    idx(k, j + 1)
                );
            }
        }
        out
    }
}

/// Projects a valid shape onto its origin curve:
/// `point(k, j) = sample(j) + R[k][j] * (cos(phi_k) * u(j) + sin(phi_k) * v(j))`.
pub fn project_to_3d(
    shape: &RadialMatrix,
    curve: &OriginCurve,
    r_min: f64,
) -> Result<SurfacePointCloud, MorphError> {
    if shape.grid().n_s() != curve.n_s() {
        return Err(MorphError::GridMismatch {
            left: (shape.grid().n_s(), shape.grid().n_phi()),
            right: (curve.n_s(), shape.grid().n_phi()),
        });
    }
    let report = validate_shape(shape, curve, r_min);
    if !report.valid {
        return Err(MorphError::InvalidShape(report));
    }
    let (n_s, n_phi) = (shape.grid().n_s(), shape.grid().n_phi());
    let mut points = Vec::with_capacity(n_s * n_phi);
    for j in 0..n_s {
        let (c, u, v) = (curve.sample(j), curve.frame_u(j), curve.frame_v(j));
        for k in 0..n_phi {
            let phi = shape.grid().angle(k);
            let dir = u * phi.cos() + v * phi.sin();
            points.push(c + dir * shape.radius(k, j));
        }
    }
    Ok(SurfacePointCloud { n_s, n_phi, points })
}
