//! Origin curves: the swept spines that collocation planes sit on.

use super::vec3::Vec3;
use super::MorphError;

/// A sampled space curve with per-plane frames. The curve lies in the x-z
/// plane, so the binormal `y` is constant and the transported frame never
/// twists: `frame_v = y` everywhere and `frame_u = y x tangent`, which puts
/// `phi = 0` in the x-z plane at every station.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginCurve {
    samples: Vec<Vec3>,
    tangents: Vec<Vec3>,
    frames_u: Vec<Vec3>,
    frames_v: Vec<Vec3>,
    curvatures: Vec<f64>,
    arc_positions: Vec<f64>,
}

impl OriginCurve {
    /// Straight segment from `start` along unit direction `dir`.
    pub fn straight(start: Vec3, dir: Vec3, length: f64, n_s: usize) -> Result<Self, MorphError> {
        if n_s < 2 {
            return Err(MorphError::GridInvalid(format!("n_s = {n_s}, need >= 2")));
        }
        if !(length > 0.0) {
            return Err(MorphError::GridInvalid(format!("length = {length}, need > 0")));
        }
        if dir.y != 0.0 {
            return Err(MorphError::GridInvalid(
                "origin curve direction must lie in the x-z plane".into(),
            ));
        }
        let t = dir.normalized();
        let u = Vec3::Y.cross(t);
        let mut samples = Vec::with_capacity(n_s);
        let mut arc_positions = Vec::with_capacity(n_s);
        for j in 0..n_s {
            let s = length * j as f64 / (n_s - 1) as f64;
            samples.push(start + t * s);
            arc_positions.push(s);
        }
        Ok(Self {
            samples,
            tangents: vec![t; n_s],
            frames_u: vec![u; n_s],
            frames_v: vec![Vec3::Y; n_s],
            curvatures: vec![0.0; n_s],
            arc_positions,
        })
    }

    /// Quarter-turn spine used by the generated draft-tube baselines:
    /// a vertical entry segment (tangent -z), a circular elbow of radius
    /// `r_elbow` turning to horizontal, and a straight exit run (tangent +x).
    pub fn quarter_turn(
        l_in: f64,
        r_elbow: f64,
        l_out: f64,
        n_s: usize,
    ) -> Result<Self, MorphError> {
        if n_s < 2 {
            return Err(MorphError::GridInvalid(format!("n_s = {n_s}, need >= 2")));
        }
        if !(l_in > 0.0 && r_elbow > 0.0 && l_out > 0.0) {
            return Err(MorphError::GridInvalid(format!(
                "quarter-turn lengths must be > 0 (got {l_in}, {r_elbow}, {l_out})"
            )));
        }
        let elbow_len = r_elbow * std::f64::consts::FRAC_PI_2;
        let total = l_in + elbow_len + l_out;
        // Elbow centre sits at +x of the entry segment's end.
        let centre = Vec3::new(r_elbow, 0.0, -l_in);
        let elbow_end = Vec3::new(r_elbow, 0.0, -l_in - r_elbow);

        let mut samples = Vec::with_capacity(n_s);
        let mut tangents = Vec::with_capacity(n_s);
        let mut curvatures = Vec::with_capacity(n_s);
        let mut arc_positions = Vec::with_capacity(n_s);
        for j in 0..n_s {
            let s = total * j as f64 / (n_s - 1) as f64;
            let (p, t, kappa) = if s <= l_in {
                (Vec3::new(0.0, 0.0, -s), -Vec3::Z, if s == l_in { 1.0 / r_elbow } else { 0.0 })
            } else if s <= l_in + elbow_len {
                let theta = (s - l_in) / r_elbow;
                let p = centre + Vec3::new(-theta.cos(), 0.0, -theta.sin()) * r_elbow;
                let t = Vec3::new(theta.sin(), 0.0, -theta.cos());
                (p, t, 1.0 / r_elbow)
            } else {
                let d = s - l_in - elbow_len;
                (elbow_end + Vec3::X * d, Vec3::X, 0.0)
            };
            samples.push(p);
            tangents.push(t);
            curvatures.push(kappa);
            arc_positions.push(s);
        }
        let frames_u = tangents.iter().map(|&t| Vec3::Y.cross(t)).collect();
        let frames_v = vec![Vec3::Y; n_s];
        Ok(Self {
            samples,
            tangents,
            frames_u,
            frames_v,
            curvatures,
            arc_positions,
        })
    }

    pub fn n_s(&self) -> usize {
        self.samples.len()
    }

    pub fn arc_length(&self) -> f64 {
        *self.arc_positions.last().unwrap()
    }

    pub fn sample(&self, j: usize) -> Vec3 {
        self.samples[j]
    }

    pub fn tangent(&self, j: usize) -> Vec3 {
        self.tangents[j]
    }

    pub fn frame_u(&self, j: usize) -> Vec3 {
        self.frames_u[j]
    }

    pub fn frame_v(&self, j: usize) -> Vec3 {
        self.frames_v[j]
    }

    /// Local curvature of the spine at plane `j` (0 on straight segments).
    pub fn curvature(&self, j: usize) -> f64 {
        self.curvatures[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: Vec3, b: Vec3, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn quarter_turn_endpoints_and_tangents() {
        let c = OriginCurve::quarter_turn(0.6, 1.6, 2.8, 129).unwrap();
        assert_close(c.sample(0), Vec3::ZERO, 0.0);
        assert_close(c.tangent(0), -Vec3::Z, 0.0);
        assert_close(c.tangent(128), Vec3::X, 0.0);
        let end = c.sample(128);
        assert_close(end, Vec3::new(1.6 + 2.8, 0.0, -0.6 - 1.6), 1e-12);
    }

    #[test]
    fn tangents_turn_monotonically_from_inlet_to_outlet() {
        let c = OriginCurve::quarter_turn(0.6, 1.6, 2.8, 65).unwrap();
        // Turn angle from -z measured in the x-z plane.
        let mut prev = -1.0e-15;
        for j in 0..c.n_s() {
            let t = c.tangent(j);
            let angle = t.x.atan2(-t.z);
            assert!(angle >= prev - 1e-12, "plane {j} turned backwards");
            prev = angle;
        }
        assert!((prev - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn frames_are_orthonormal_and_continuous() {
        let c = OriginCurve::quarter_turn(0.6, 1.6, 2.8, 65).unwrap();
        for j in 0..c.n_s() {
            let (u, v, t) = (c.frame_u(j), c.frame_v(j), c.tangent(j));
            assert!((u.norm() - 1.0).abs() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(u.dot(v).abs() < 1e-12);
            assert!(u.dot(t).abs() < 1e-12);
            assert!(v.dot(t).abs() < 1e-12);
            // phi = 0 stays in the x-z plane
            assert_eq!(u.y, 0.0);
            if j > 0 {
                assert!(c.frame_u(j).dot(c.frame_u(j - 1)) > 0.9, "frame flip at {j}");
            }
        }
    }

    #[test]
    fn straight_curve_along_z_matches_cylinder_frames() {
        let c = OriginCurve::straight(Vec3::ZERO, Vec3::Z, 2.0, 5).unwrap();
        assert_close(c.frame_u(0), Vec3::X, 0.0);
        assert_close(c.frame_v(0), Vec3::Y, 0.0);
        assert_eq!(c.curvature(2), 0.0);
        assert_close(c.sample(4), Vec3::new(0.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn elbow_curvature_is_one_over_radius() {
        let c = OriginCurve::quarter_turn(1.0, 2.0, 1.0, 101).unwrap();
        let mid = 50;
        assert!((c.curvature(mid) - 0.5).abs() < 1e-12);
        assert_eq!(c.curvature(0), 0.0);
        assert_eq!(c.curvature(100), 0.0);
    }
}
