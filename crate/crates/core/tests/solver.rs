use illumwave::analysis::linear_compare;
use illumwave::geometry::{decompose_gradient, Vec3};
use illumwave::solver::*;
use illumwave::Error;

/// Sphere body, concentric ball obstacle, reflecting box of half-width 2.
fn small(h: f64, nonlinear: bool, amplitude: f64, t_final: f64) -> SolverConfig {
    let text = format!(
        r#"{{
          "scene": {{"body": {{"kind": "sphere", "radii": [0.6]}},
                    "obstacle": {{"kind": "ball", "center": [0, 0, 0], "radius": 0.5}}}},
          "h": {h}, "t_final": {t_final}, "nonlinear": {nonlinear}, "m": 1.2,
          "bump": {{"center": [1.2, 0.2, 0.0], "radius": 0.55, "amplitude": {amplitude}}},
          "cadence": 0.25, "outer_boundary": "reflecting", "box_half_width": 2.0,
          "checkpoints": [1.0]
        }}"#
    );
    SolverConfig::from_json(&text, None).unwrap()
}

#[test]
fn linear_energy_is_conserved_to_round_off() {
    let out = run_simulation(small(0.1, false, 1.0, 3.0)).unwrap();
    let e0 = out.series.records[0].energy;
    for r in &out.series.records {
        assert!(((r.energy - e0) / e0).abs() < 1e-11, "t = {}: {}", r.t, r.energy);
    }
}

#[test]
fn nonlinear_energy_drift_is_small() {
    let out = run_simulation(small(0.1, true, 1.0, 3.0)).unwrap();
    let e0 = out.series.records[0].energy;
    let drift = out.series.records.iter().map(|r| ((r.energy - e0) / e0).abs()).fold(0.0, f64::max);
    assert!(drift < 5e-3, "drift {drift}");
}

#[test]
fn zero_data_stays_zero() {
    let out = run_simulation(small(0.1, true, 0.0, 1.0)).unwrap();
    for r in &out.series.records {
        assert_eq!((r.energy, r.l6_d, r.flux_0_t, r.phi), (0.0, 0.0, 0.0, 0.0));
    }
    assert!(out.state.u_curr.iter().all(|&v| v == 0.0));
}

#[test]
fn runs_are_bitwise_deterministic() {
    let a = run_simulation(small(0.1, true, 1.0, 1.0)).unwrap();
    let b = run_simulation(small(0.1, true, 1.0, 1.0)).unwrap();
    assert_eq!(a.series.to_csv(), b.series.to_csv());
    assert_eq!(a.state, b.state);
}

#[test]
fn checkpoint_restart_reproduces_the_run() {
    let cfg = small(0.1, true, 1.0, 2.0);
    let sim = Simulation::new(cfg).unwrap();
    let out = sim.run();
    let dir = tempfile::tempdir().unwrap();
    let cp = out.checkpoint(1.0).unwrap();
    cp.write(dir.path(), "cp").unwrap();
    let back = Checkpoint::read(dir.path(), "cp", sim.config.dt()).unwrap();
    assert_eq!(&back, cp);
    let mut state = back.restore();
    while state.step_index < out.state.step_index {
        step(&mut state, &sim.grid, true).unwrap();
    }
    advance(&mut state, &sim.grid, true).unwrap();
    assert_eq!(state.u_curr, out.state.u_curr);
    assert!(out.checkpoint(1.5).is_err());
}

#[test]
fn flux_is_monotone_and_bounded() {
    let out = run_simulation(small(0.1, true, 1.0, 3.0)).unwrap();
    let recs = &out.series.records;
    for w in recs.windows(2) {
        assert!(w[1].flux_0_t >= w[0].flux_0_t);
    }
    let budget = std::f64::consts::SQRT_2 * recs[0].energy_exterior_cone;
    assert!(recs.last().unwrap().flux_0_t <= budget + 0.05 * recs[0].energy * std::f64::consts::SQRT_2);
    out.series.check_invariants().unwrap();
}

#[test]
fn phi_tangential_part_matches_frame_decomposition() {
    let sim = Simulation::new(small(0.1, true, 1.0, 1.0)).unwrap();
    let out = sim.run();
    let g = &sim.grid;
    let (mut via_identity, mut via_frame) = (0.0, 0.0);
    for node in &g.exterior {
        let f = node_fields(&out.state, g, node.index as usize);
        let ds = f.grad_u.dot(&node.nu());
        via_identity += (f.grad_u.norm_squared() - ds * ds).max(0.0);
        let (_, frame) = sim.scene.body.locate(&g.point(node.index as usize)).unwrap();
        via_frame += decompose_gradient(&f.grad_u, &frame).tangential_sq();
    }
    assert!(via_identity > 0.0);
    // ν is stored in single precision on the node list.
    assert!((via_identity - via_frame).abs() <= 1e-6 * via_frame, "{via_identity} vs {via_frame}");
}

#[test]
fn linear_comparison_vanishes_for_linear_runs() {
    let sim = Simulation::new(small(0.1, false, 1.0, 2.0)).unwrap();
    let out = sim.run();
    let cmp = linear_compare(&sim, out.checkpoint(1.0).unwrap(), 2.0).unwrap();
    assert_eq!(cmp.max(), 0.0);
    assert_eq!(cmp.times.first(), Some(&1.0));
}

#[test]
fn small_data_scatters_like_linear() {
    let sim = Simulation::new(small(0.1, true, 0.1, 2.0)).unwrap();
    let out = sim.run();
    let e = out.series.records[0].energy;
    let cmp = linear_compare(&sim, out.checkpoint(1.0).unwrap(), 2.0).unwrap();
    assert!(cmp.max() <= 1e-3 * e, "{} vs {e}", cmp.max());
}

#[test]
fn uncertified_scene_is_refused() {
    let mut cfg = small(0.1, false, 1.0, 1.0);
    cfg.scene = SceneRef::Inline(
        serde_json::from_str(
            r#"{"body": {"kind": "spheroid", "radii": [1, 1, 3]},
                "obstacle": {"kind": "ball", "center": [0, 0, 0], "radius": 0.5}}"#,
        )
        .unwrap(),
    );
    cfg.box_half_width = Some(4.0);
    assert!(matches!(Simulation::new(cfg), Err(Error::Uncertified(_))));
}

#[test]
fn guard_box_must_contain_the_light_cone() {
    let mut cfg = small(0.1, false, 1.0, 4.0);
    cfg.outer_boundary = OuterBoundary::Guard;
    assert!(matches!(Simulation::new(cfg.clone()), Err(Error::Config(_))));
    cfg.box_half_width = None;
    let sim = Simulation::new(cfg).unwrap();
    assert!(sim.grid.half_width >= 1.2 + 0.55 + 4.0);
}

#[test]
fn misaligned_times_are_config_errors() {
    let mut cfg = small(0.1, false, 1.0, 1.0);
    cfg.checkpoints = vec![0.33];
    assert!(matches!(Simulation::new(cfg), Err(Error::Config(_))));
    let mut cfg = small(0.1, false, 1.0, 1.0);
    cfg.cfl = 0.9;
    assert!(matches!(Simulation::new(cfg), Err(Error::Config(_))));
}

#[test]
fn mask_classifies_every_node() {
    let sim = Simulation::new(small(0.1, false, 1.0, 1.0)).unwrap();
    let g = &sim.grid;
    let c = g.counts();
    assert_eq!(c.exterior + c.ghost + c.interior + c.wall, g.len());
    assert_eq!(c.exterior, g.exterior.len());
    for node in &g.exterior {
        let x = g.point(node.index as usize);
        assert!(!sim.scene.obstacle.contains(&x));
        assert!((node.level - x.norm()).abs() < 1e-10);
        assert!((node.nu() - x / x.norm()).norm() < 1e-6);
    }
    assert!(g.exterior.windows(2).all(|w| w[0].level <= w[1].level));
    let origin = Vec3::zeros();
    assert!(sim.scene.obstacle.contains(&origin));
}
