//! Deterministic parametric generators for the baseline shapes.
//!
//! Published draft-tube geometries exist as drawings, not coordinates, so
//! the toolkit ships analytic archetypes with the documented qualitative
//! features: a sharp-heel tube, two low-head diffuser variants, and two
//! "averaged plus radical feature" tubes, all sharing one inlet circle and
//! one quarter-turn spine; plus a profiled hub and a cone hub sharing inlet
//! radius, end radius, and length. Real geometry can be substituted through
//! the radial-matrix file format.

use super::curve::OriginCurve;
use super::grid::CollocationGrid;
use super::radial::RadialMatrix;
use super::MorphError;

/// Knobs for the generated baseline family. Lengths scale with the inlet
/// diameter; `outlet_aspect` is the horizontal-to-vertical axis ratio of
/// the tube outlet cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineGenSpec {
    pub n_s: usize,
    pub n_phi: usize,
    pub inlet_diameter: f64,
    pub outlet_aspect: f64,
}

impl Default for BaselineGenSpec {
    fn default() -> Self {
        Self {
            n_s: 64,
            n_phi: 72,
            inlet_diameter: 1.0,
            outlet_aspect: 1.6,
        }
    }
}

/// Five tube baselines and two hub baselines on their shared spines.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSet {
    tube: Vec<RadialMatrix>,
    hub: Vec<RadialMatrix>,
    tube_labels: Vec<&'static str>,
    hub_labels: Vec<&'static str>,
    tube_curve: OriginCurve,
    hub_curve: OriginCurve,
    inlet_diameter: f64,
}

impl BaselineSet {
    pub fn tube(&self) -> &[RadialMatrix] {
        &self.tube
    }

    pub fn hub(&self) -> &[RadialMatrix] {
        &self.hub
    }

    pub fn tube_labels(&self) -> &[&'static str] {
        &self.tube_labels
    }

    pub fn hub_labels(&self) -> &[&'static str] {
        &self.hub_labels
    }

    pub fn tube_curve(&self) -> &OriginCurve {
        &self.tube_curve
    }

    pub fn hub_curve(&self) -> &OriginCurve {
        &self.hub_curve
    }

    pub fn inlet_diameter(&self) -> f64 {
        self.inlet_diameter
    }

    /// Default minimum physical radius: 1e-3 of the inlet diameter.
    pub fn default_r_min(&self) -> f64 {
        1e-3 * self.inlet_diameter
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Generates the shipped baseline family. All five tubes carry the same
/// inlet column (bitwise) and sit on one quarter-turn spine; both hubs are
/// axisymmetric on a straight vertical spine.
pub fn generate_baselines(spec: &BaselineGenSpec) -> Result<BaselineSet, MorphError> {
    if !(spec.inlet_diameter > 0.0) || !spec.inlet_diameter.is_finite() {
        return Err(MorphError::SpecInvalid(format!(
            "inlet_diameter = {}, need finite > 0",
            spec.inlet_diameter
        )));
    }
    if !(spec.outlet_aspect > 0.0) || !spec.outlet_aspect.is_finite() {
        return Err(MorphError::SpecInvalid(format!(
            "outlet_aspect = {}, need finite > 0",
            spec.outlet_aspect
        )));
    }
    if spec.n_s < 2 || spec.n_phi < 3 {
        return Err(MorphError::SpecInvalid(format!(
            "grid {}x{} too small (need n_s >= 2, n_phi >= 3)",
            spec.n_s, spec.n_phi
        )));
    }

    let d = spec.inlet_diameter;
    let r0 = 0.5 * d;
    let (l_in, r_elbow, l_out) = (0.6 * d, 1.6 * d, 2.8 * d);
    let tube_curve = OriginCurve::quarter_turn(l_in, r_elbow, l_out, spec.n_s)?;
    let s_total = tube_curve.arc_length();
    let grid = CollocationGrid::new(spec.n_s, spec.n_phi, s_total)?;

    // Heel parameter: where the elbow ends and the straight diffuser begins.
    let t_heel = (l_in + r_elbow * std::f64::consts::FRAC_PI_2) / s_total;

    let sharp_heel = move |t: f64| {
        if t <= t_heel {
            r0
        } else {
            r0 + (0.95 * d - r0) * (t - t_heel) / (1.0 - t_heel)
        }
    };
    let low_head_a = move |t: f64| r0 + 0.55 * d * smoothstep(t);
    let low_head_b = move |t: f64| r0 + 0.60 * d * t * t * t;
    let mean3 = move |t: f64| (sharp_heel(t) + low_head_a(t) + low_head_b(t)) / 3.0;
    let rounded_outlet = move |t: f64| {
        let z = (1.0 - t) / 0.15;
        mean3(t) + 0.12 * d * t * t * (-z * z).exp()
    };
    let circular_diffuser = move |t: f64| {
        if t <= t_heel {
            mean3(t)
        } else {
            let m = mean3(t_heel);
            let u = (t - t_heel) / (1.0 - t_heel);
            m + (1.05 * d - m) * (std::f64::consts::FRAC_PI_2 * u).sin()
        }
    };

    // Outlet cross-section factor: unit-area ellipse with horizontal
    // semi-axis sqrt(aspect) along frame_v and vertical 1/sqrt(aspect)
    // along frame_u. Blends in smoothly from a circle at the inlet.
    let aspect = spec.outlet_aspect;
    let ellipse = move |phi: f64| {
        let (s, c) = phi.sin_cos();
        1.0 / (aspect * c * c + s * s / aspect).sqrt()
    };

    let profiles: [&dyn Fn(f64) -> f64; 5] = [
        &sharp_heel,
        &low_head_a,
        &low_head_b,
        &rounded_outlet,
        &circular_diffuser,
    ];
    let mut tube = Vec::with_capacity(5);
    for (p, profile) in profiles.iter().enumerate() {
        let circular = p == 4;
        let m = RadialMatrix::from_fn(grid.clone(), |k, j| {
            let t = j as f64 / (spec.n_s - 1) as f64;
            let rho = profile(t);
            if circular {
                rho
            } else {
                rho * ellipse(grid.angle(k)).powf(smoothstep(t))
            }
        })?;
        tube.push(m);
    }

    let l_hub = 0.8 * d;
    let hub_curve = OriginCurve::straight(
        super::vec3::Vec3::ZERO,
        -super::vec3::Vec3::Z,
        l_hub,
        spec.n_s,
    )?;
    let hub_grid = CollocationGrid::new(spec.n_s, spec.n_phi, l_hub)?;
    let (rh0, rh1) = (0.25 * d, 0.03 * d);
    let cone = move |t: f64| rh0 + (rh1 - rh0) * t;
    let kaplan = move |t: f64| {
        // Polynomial bulge that is exactly zero at both ends.
        let w = 4.0 * t * (1.0 - t);
        cone(t) + 0.08 * d * w * w
    };
    let hub_profiles: [&dyn Fn(f64) -> f64; 2] = [&kaplan, &cone];
    let mut hub = Vec::with_capacity(2);
    for profile in hub_profiles {
        let m = RadialMatrix::from_fn(hub_grid.clone(), |_, j| {
            profile(j as f64 / (spec.n_s - 1) as f64)
        })?;
        hub.push(m);
    }

    Ok(BaselineSet {
        tube,
        hub,
        tube_labels: vec![
            "sharp-heel",
            "low-head-a",
            "low-head-b",
            "avg-rounded-outlet",
            "avg-circular-diffuser",
        ],
        hub_labels: vec!["kaplan-profile", "cone"],
        tube_curve,
        hub_curve,
        inlet_diameter: d,
    })
}

#[cfg(test)]
mod tests {
    use super::super::validity::validate_shape;
    use super::*;

    #[test]
    fn default_family_is_valid_and_complete() {
        let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
        assert_eq!(set.tube().len(), 5);
        assert_eq!(set.hub().len(), 2);
        let r_min = set.default_r_min();
        for (m, label) in set.tube().iter().zip(set.tube_labels()) {
            let report = validate_shape(m, set.tube_curve(), r_min);
            assert!(report.valid, "{label}: {:?}", report.failure);
        }
        for (m, label) in set.hub().iter().zip(set.hub_labels()) {
            let report = validate_shape(m, set.hub_curve(), r_min);
            assert!(report.valid, "{label}: {:?}", report.failure);
        }
    }

    #[test]
    fn all_tubes_share_the_inlet_column_bitwise() {
        let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
        let inlet = set.tube()[0].plane(0);
        for m in set.tube() {
            assert_eq!(m.plane(0), inlet);
        }
        assert!(inlet.iter().all(|&r| r == 0.5));
    }

    #[test]
    fn cone_hub_is_linear_in_s_at_every_angle() {
        let set = generate_baselines(&BaselineGenSpec {
            n_s: 16,
            n_phi: 8,
            ..Default::default()
        })
        .unwrap();
        let cone = &set.hub()[1];
        for k in 0..8 {
            for j in 1..15 {
                let second_diff =
                    cone.radius(k, j + 1) - 2.0 * cone.radius(k, j) + cone.radius(k, j - 1);
                assert!(second_diff.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hubs_share_inlet_radius_end_radius_and_length() {
        let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
        let (h1, h2) = (&set.hub()[0], &set.hub()[1]);
        let last = set.hub_curve().n_s() - 1;
        for k in 0..h1.grid().n_phi() {
            assert!((h1.radius(k, 0) - h2.radius(k, 0)).abs() < 1e-12);
            assert!((h1.radius(k, last) - h2.radius(k, last)).abs() < 1e-12);
        }
        assert_eq!(h1.grid().arc_length(), h2.grid().arc_length());
    }

    #[test]
    fn sharp_heel_profile_has_a_slope_break_at_the_heel() {
        let spec = BaselineGenSpec {
            n_s: 64,
            n_phi: 12,
            ..Default::default()
        };
        let set = generate_baselines(&spec).unwrap();
        let tube1 = &set.tube()[0];
        // Discrete slope of R[0][j] along j; the largest slope jump must
        // land at the heel plane, and be an order of magnitude above the
        // smooth background.
        let profile: Vec<f64> = (0..spec.n_s).map(|j| tube1.radius(0, j)).collect();
        let slopes: Vec<f64> = profile.windows(2).map(|w| w[1] - w[0]).collect();
        let jumps: Vec<f64> = slopes.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let (j_max, &max_jump) = jumps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();

        let d = spec.inlet_diameter;
        let s_total = set.tube_curve().arc_length();
        let t_heel = (0.6 * d + 1.6 * d * std::f64::consts::FRAC_PI_2) / s_total;
        let expected_j = (t_heel * (spec.n_s - 1) as f64).floor() as usize;
        assert!(
            j_max == expected_j || j_max + 1 == expected_j,
            "kink at {j_max}, heel at {expected_j}"
        );
        let background: f64 = jumps
            .iter()
            .enumerate()
            .filter(|(j, _)| j.abs_diff(j_max) > 2)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        assert!(max_jump > 10.0 * background, "{max_jump} vs {background}");
    }

    #[test]
    fn rejects_nonpositive_dimensions() {
        let bad = BaselineGenSpec {
            inlet_diameter: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            generate_baselines(&bad),
            Err(MorphError::SpecInvalid(_))
        ));
        let bad = BaselineGenSpec {
            outlet_aspect: -1.0,
            ..Default::default()
        };
        assert!(generate_baselines(&bad).is_err());
        let bad = BaselineGenSpec {
            n_s: 1,
            ..Default::default()
        };
        assert!(generate_baselines(&bad).is_err());
    }
}
