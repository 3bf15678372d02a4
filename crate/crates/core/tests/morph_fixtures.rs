//! Frozen regression fixtures for the generated baseline family and a
//! reference extrapolating morph (weights 0.90, -0.14, 0.22, -0.25, 0.99
//! with hub weight 0.99 — a design with negative and >0.5 weights that is
//! still geometrically valid).

use morphopt::morph::{
    generate_baselines, morph_design, project_to_3d, validate_shape, BaselineGenSpec,
    MorphWeights,
};

fn close(a: f64, b: f64) {
    assert!(
        (a - b).abs() <= 1e-12 * b.abs().max(1.0),
        "{a} != {b} (diff {:e})",
        (a - b).abs()
    );
}

#[test]
fn optimal_style_morph_matches_frozen_values() {
    let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
    let w = MorphWeights::new([0.90, -0.14, 0.22, -0.25, 0.99], 0.99).unwrap();
    let (tube, hub) = morph_design(&set, &w).unwrap();

    assert!(validate_shape(&tube, set.tube_curve(), set.default_r_min()).valid);
    assert!(validate_shape(&hub, set.hub_curve(), set.default_r_min()).valid);

    close(tube.radii().iter().sum(), 2976.0928838384125);
    close(hub.radii().iter().sum(), 1028.3212556743415);
    assert_eq!(tube.radius(0, 0), 0.5);
    close(tube.radius(0, 32), 0.518176261314704);
    close(tube.radius(0, 63), 0.9084845521043718);
    close(tube.radius(18, 32), 0.5620462638643723);
    close(tube.radius(36, 63), 0.9084845521043718);
    close(tube.radius(54, 48), 0.8718943379299305);
    close(hub.radius(0, 16), 0.28510755200879373);
    close(hub.radius(12, 48), 0.16578323846545423);
}

#[test]
fn optimal_style_morph_projection_matches_frozen_points() {
    let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
    let w = MorphWeights::new([0.90, -0.14, 0.22, -0.25, 0.99], 0.99).unwrap();
    let (tube, _) = morph_design(&set, &w).unwrap();
    let cloud = project_to_3d(&tube, set.tube_curve(), set.default_r_min()).unwrap();

    let cases = [
        ((0usize, 0usize), (-0.5, 0.0, 0.0)),
        ((18, 32), (1.4903796268021254, 0.5620462638643723, -2.196240387216148)),
        ((36, 63), (4.4, 0.0, -1.2915154478956283)),
    ];
    for ((k, j), (x, y, z)) in cases {
        let p = cloud.point(k, j);
        assert!((p.x - x).abs() < 1e-12, "x at ({k},{j}): {} vs {x}", p.x);
        assert!((p.y - y).abs() < 1e-12, "y at ({k},{j}): {} vs {y}", p.y);
        assert!((p.z - z).abs() < 1e-12, "z at ({k},{j}): {} vs {z}", p.z);
    }

    // Distance back to the spine equals the radius everywhere.
    for j in [0, 17, 40, 63] {
        for k in [0, 11, 36, 59] {
            let c = set.tube_curve().sample(j);
            let p = cloud.point(k, j);
            let d = ((p.x - c.x).powi(2) + (p.y - c.y).powi(2) + (p.z - c.z).powi(2)).sqrt();
            close(d, tube.radius(k, j));
        }
    }
}

#[test]
fn sharp_heel_top_profile_matches_frozen_values() {
    let set = generate_baselines(&BaselineGenSpec::default()).unwrap();
    let tube1 = &set.tube()[0];
    let expect = [
        (0usize, 0.5),
        (20, 0.47276299555188706),
        (33, 0.4408570234503397),
        (34, 0.44940113368647744),
        (35, 0.4600700391940941),
        (50, 0.611639353541254),
        (63, 0.75104094428999),
    ];
    for (j, r) in expect {
        close(tube1.radius(0, j), r);
    }
}
