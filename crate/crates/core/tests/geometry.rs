use illumwave::geometry::stl::{icosphere, write_binary};
use illumwave::geometry::*;
use illumwave::Error;
use proptest::prelude::*;

fn spheroid() -> IlluminatingBody {
    IlluminatingBody::spheroid(Vec3::new(0.1, -0.2, 0.05), 1.0, 1.3).unwrap()
}

fn oblate() -> IlluminatingBody {
    IlluminatingBody::spheroid(Vec3::zeros(), 1.2, 0.9).unwrap()
}

fn sphere() -> IlluminatingBody {
    IlluminatingBody::sphere(Vec3::new(0.3, 0.0, -0.1), 0.8).unwrap()
}

fn coords(s: f64, theta: f64, phi: f64) -> IlluminatingCoords {
    IlluminatingCoords {
        patch: 0,
        s,
        sigma: [theta, phi],
    }
}

/// Central-difference derivative of a vector function of one variable.
fn fd(f: impl Fn(f64) -> Vec3, x: f64, h: f64) -> Vec3 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coordinates_round_trip(s in -0.3f64..4.0, theta in 0.05f64..3.09, phi in -3.1f64..3.1) {
        for body in [sphere(), spheroid(), oblate()] {
            let x = body.from_illuminating_coords(&coords(s, theta, phi)).unwrap();
            let c = body.to_illuminating_coords(&x).unwrap();
            let back = body.from_illuminating_coords(&c).unwrap();
            prop_assert!((back - x).norm() <= 1e-10, "{:?}", (back - x).norm());
            prop_assert!((c.s - s).abs() <= 1e-10);
        }
    }

    #[test]
    fn gradient_split_is_orthogonal(
        theta in 0.05f64..3.09,
        phi in -3.1f64..3.1,
        g in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let body = spheroid();
        let frame = body.surface_frame(0, [theta, phi]).unwrap();
        let g = Vec3::from(g);
        let split = decompose_gradient(&g, &frame);
        prop_assert!((split.norm_sq() - g.norm_squared()).abs() <= 1e-12 * (1.0 + g.norm_squared()));
    }

    #[test]
    fn rodrigues_relation(theta in 0.1f64..3.0, phi in -3.0f64..3.0) {
        for body in [spheroid(), oblate()] {
            let f = body.surface_frame(0, [theta, phi]).unwrap();
            let dn = [
                fd(|t| body.normal([t, phi]), theta, 1e-5),
                fd(|p| body.normal([theta, p]), phi, 1e-5),
            ];
            for i in 0..2 {
                let err = (dn[i] - f.kappa_param[i] * f.d_sigma[i]).norm();
                prop_assert!(err <= 1e-6, "i = {i}: {err}");
            }
        }
    }

    #[test]
    fn jacobian_matches_numerical_determinant(s in -0.2f64..3.0, theta in 0.1f64..3.0, phi in -3.0f64..3.0) {
        let body = spheroid();
        let c = coords(s, theta, phi);
        let map = |s: f64, t: f64, p: f64| body.from_illuminating_coords(&coords(s, t, p)).unwrap();
        let h = 1e-5;
        let cols = [
            fd(|v| map(v, theta, phi), s, h),
            fd(|v| map(s, v, phi), theta, h),
            fd(|v| map(s, theta, v), phi, h),
        ];
        let det = cols[0].dot(&cols[1].cross(&cols[2])).abs();
        let j = body.jacobian_metric(&c).unwrap().jacobian;
        prop_assert!((det - j).abs() <= 1e-6 * j.max(1e-3), "det {det} vs {j}");
    }

    #[test]
    fn ball_signed_distance_is_exact(p in prop::array::uniform3(-3.0f64..3.0)) {
        let obs = Obstacle::from_spec(
            &ObstacleSpec::Ball { center: [0.2, 0.0, 0.0], radius: 0.7 },
            None,
        ).unwrap();
        let x = Vec3::from(p);
        let d = (x - Vec3::new(0.2, 0.0, 0.0)).norm() - 0.7;
        prop_assert!((obs.signed_distance(&x) - d).abs() < 1e-12);
        prop_assert_eq!(obs.contains(&x), d < 0.0);
    }

    #[test]
    fn sphere_level_is_radius(p in prop::array::uniform3(-4.0f64..4.0)) {
        let body = IlluminatingBody::sphere(Vec3::zeros(), 0.7).unwrap();
        let x = Vec3::from(p);
        prop_assume!(x.norm() > 1e-3);
        let c = body.to_illuminating_coords(&x).unwrap();
        prop_assert!((c.s + body.rho2m() - x.norm()).abs() <= 1e-10);
    }
}

#[test]
fn spheroid_radii_bracket_rho2m() {
    let body = spheroid();
    let pole = body.surface_frame(0, [0.0, 0.0]).unwrap();
    let equator = body.surface_frame(0, [std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
    assert!((pole.rho1() - 1.0 / 1.3).abs() < 1e-12);
    assert!((equator.rho2() - 1.69).abs() < 1e-12);
    assert!((body.rho2m() - 1.69).abs() < 1e-12);
}

#[test]
fn mesh_obstacle_certifies_like_ball() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.stl");
    write_binary(&path, &icosphere(Vec3::zeros(), 0.5, 3)).unwrap();
    let text = r#"{"body": {"kind": "sphere", "radii": [1.0]},
                   "obstacle": {"kind": "mesh", "path": "ball.stl"},
                   "sampling": {"surface_samples": 10000}}"#;
    let scene = Scene::from_json(text, Some(dir.path())).unwrap();
    let cert = illuminate(&scene, 3);
    assert!(cert.pass, "{:?}", cert.failed_conditions());
    // Vertices sit on the sphere and faces inside it.
    assert!(cert.aggregates.min_s0_plus_rho1 > 0.48 && cert.aggregates.min_s0_plus_rho1 <= 0.5 + 1e-9);
    assert!(cert.aggregates.eta0.abs() < 1e-12);
}

#[test]
fn missing_mesh_file_is_io_error() {
    let text = r#"{"body": {"kind": "sphere", "radii": [1.0]},
                   "obstacle": {"kind": "mesh", "path": "/nonexistent/obstacle.stl"}}"#;
    assert!(matches!(Scene::from_json(text, None), Err(Error::Io { .. })));
}

#[test]
fn certificate_is_deterministic_per_seed() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/scenes/dogbone.json")).unwrap();
    let scene = Scene::from_json(&text, None).unwrap();
    let a = illuminate(&scene, 7);
    let b = illuminate(&scene, 7);
    assert_eq!(a.aggregates, b.aggregates);
    assert!(a.pass);
    assert!(a.aggregates.eta0 > 0.0 && a.aggregates.eta0 < 1.0);
}

#[test]
fn obstacle_poking_out_of_body_fails() {
    let text = r#"{"body": {"kind": "sphere", "radii": [0.5]},
                   "obstacle": {"kind": "ball", "center": [0.4, 0, 0], "radius": 0.4}}"#;
    let scene = Scene::from_json(text, None).unwrap();
    let cert = illuminate(&scene, 0);
    assert!(!cert.pass);
}
