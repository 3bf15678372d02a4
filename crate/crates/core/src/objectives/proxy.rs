//! Desk-scale geometric stand-in for the flow objective.
//!
//! The proxy rewards a large outlet-to-inlet area ratio (the ideal-diffuser
//! recovery `1 - (A_in/A_out)^2`), penalizes streamwise area growth beyond
//! a separation-like relative slope threshold, and penalizes large boundary
//! radii where the spine curves. It is deterministic, smooth on the valid
//! region, and exactly zero for shapes the validity check rejects, so the
//! optimizer sees the same penalization rule an expensive evaluator would
//! apply.

use crate::morph::{
    morph_design, validate_shape, BaselineSet, MorphWeights, OriginCurve, RadialMatrix,
};
use crate::optimizer::{EvalError, Objective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyParams {
    pub lambda_sep: f64,
    pub lambda_curv: f64,
    /// Relative area-slope threshold, 1/length.
    pub tau: f64,
    /// Minimum physical radius.
    pub r_min: f64,
}

impl ProxyParams {
    /// Defaults scaled to a baseline family's inlet diameter.
    pub fn for_baselines(baselines: &BaselineSet) -> Self {
        let d = baselines.inlet_diameter();
        Self {
            lambda_sep: 1.0,
            lambda_curv: 0.5,
            tau: 0.35 / d,
            r_min: 1e-3 * d,
        }
    }
}

/// Cross-section area of the polar polygon in plane `j`.
fn plane_area(shape: &RadialMatrix, j: usize) -> f64 {
    let grid = shape.grid();
    let n_phi = grid.n_phi();
    let mut acc = 0.0;
    for k in 0..n_phi {
        let k1 = (k + 1) % n_phi;
        let (r0, r1) = (shape.radius(k, j), shape.radius(k1, j));
        let (phi0, phi1) = (grid.angle(k), grid.angle(k1));
        let (x0, y0) = (r0 * phi0.cos(), r0 * phi0.sin());
        let (x1, y1) = (r1 * phi1.cos(), r1 * phi1.sin());
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc.abs()
}

/// Scores a tube shape that already passed validity.
pub fn proxy_score_shape(shape: &RadialMatrix, curve: &OriginCurve, p: &ProxyParams) -> f64 {
    let n_s = shape.grid().n_s();
    let areas: Vec<f64> = (0..n_s).map(|j| plane_area(shape, j)).collect();
    let a_in = areas[0];
    let a_out = areas[n_s - 1];
    let diffuser = 1.0 - (a_in / a_out) * (a_in / a_out);

    let mut separation = 0.0;
    for j in 0..n_s - 1 {
        let ds = shape.grid().arc_position(j + 1) - shape.grid().arc_position(j);
        let rel_slope = (areas[j + 1] - areas[j]) / ds / areas[j];
        let excess = (rel_slope - p.tau).max(0.0);
        separation += excess * excess;
    }

    let curvature = (0..n_s)
        .map(|j| shape.max_radius_in_plane(j) * curve.curvature(j))
        .sum::<f64>()
        / n_s as f64;

    diffuser - p.lambda_sep * separation - p.lambda_curv * curvature
}

/// Full design objective: morph, validate tube and hub, then score the
/// tube. Any invalid design (including a vanishing tube weight sum) scores
/// exactly 0 with the validity flag cleared.
pub fn shape_proxy_objective(
    w: &MorphWeights,
    baselines: &BaselineSet,
    p: &ProxyParams,
) -> (f64, bool) {
    let (tube, hub) = match morph_design(baselines, w) {
        Ok(pair) => pair,
        Err(_) => return (0.0, false),
    };
    if !validate_shape(&tube, baselines.tube_curve(), p.r_min).valid {
        return (0.0, false);
    }
    if !validate_shape(&hub, baselines.hub_curve(), p.r_min).valid {
        return (0.0, false);
    }
    (proxy_score_shape(&tube, baselines.tube_curve(), p), true)
}

/// Proxy value of every unit-weight baseline design (each tube paired with
/// each pure hub), labelled. The best of these is the bar an optimized
/// morph has to clear.
pub fn baseline_proxy_values(baselines: &BaselineSet, p: &ProxyParams) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (t, t_label) in baselines.tube_labels().iter().enumerate() {
        // alpha1 = 0.5 selects hub 1 alone; alpha1 = 0 selects hub 2 alone.
        for (alpha1, h_label) in [(0.5, baselines.hub_labels()[0]), (0.0, baselines.hub_labels()[1])]
        {
            let mut tube_w = [0.0; 5];
            tube_w[t] = 1.0;
            let w = MorphWeights {
                tube: tube_w,
                hub_alpha1: alpha1,
            };
            let (value, valid) = shape_proxy_objective(&w, baselines, p);
            debug_assert!(valid, "baseline {t_label}+{h_label} must be valid");
            out.push((format!("{t_label}+{h_label}"), value));
        }
    }
    out
}

/// The proxy bound to a baseline family, usable as a run objective.
pub struct ProxyObjective {
    baselines: BaselineSet,
    params: ProxyParams,
}

impl ProxyObjective {
    pub fn new(baselines: BaselineSet) -> Self {
        let params = ProxyParams::for_baselines(&baselines);
        Self { baselines, params }
    }

    pub fn with_params(baselines: BaselineSet, params: ProxyParams) -> Self {
        Self { baselines, params }
    }

    pub fn baselines(&self) -> &BaselineSet {
        &self.baselines
    }

    pub fn params(&self) -> &ProxyParams {
        &self.params
    }

    pub fn evaluate_weights(&self, w: &MorphWeights) -> (f64, bool) {
        shape_proxy_objective(w, &self.baselines, &self.params)
    }
}

impl Objective for ProxyObjective {
    fn evaluate_batch(&mut self, designs: &[Vec<f64>]) -> Result<Vec<(f64, bool)>, EvalError> {
        Ok(designs
            .iter()
            .map(|v| match MorphWeights::from_vector(v) {
                Ok(w) => self.evaluate_weights(&w),
                Err(_) => (0.0, false),
            })
            .collect())
    }
}
