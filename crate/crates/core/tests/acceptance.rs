//! End-to-end acceptance run. Criteria execute sequentially in one test so
//! that at most one large grid is alive at a time; each prints a PASS/FAIL
//! line and the test fails at the end if any criterion failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use illumwave::analysis::*;
use illumwave::geometry::*;
use illumwave::multiplier::*;
use illumwave::solver::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Central-difference derivative of a vector function of one variable.
fn fd(f: impl Fn(f64) -> Vec3, x: f64, h: f64) -> Vec3 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn coords(s: f64, theta: f64, phi: f64) -> IlluminatingCoords {
    IlluminatingCoords {
        patch: 0,
        s,
        sigma: [theta, phi],
    }
}

fn bodies() -> Vec<(&'static str, IlluminatingBody)> {
    vec![
        ("sphere", IlluminatingBody::sphere(Vec3::new(0.3, 0.0, -0.1), 0.8).unwrap()),
        ("prolate", IlluminatingBody::spheroid(Vec3::new(0.1, -0.2, 0.05), 1.0, 1.3).unwrap()),
        ("oblate", IlluminatingBody::spheroid(Vec3::zeros(), 1.2, 0.9).unwrap()),
    ]
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for (_, body) in bodies() {
        for _ in 0..10_000 {
            let c = coords(
                rng.random_range(-0.3..4.0),
                rng.random_range(0.02..std::f64::consts::PI - 0.02),
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            );
            let x = body.from_illuminating_coords(&c).unwrap();
            let back = body.from_illuminating_coords(&body.to_illuminating_coords(&x).unwrap()).unwrap();
            worst = worst.max((back - x).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-10 && secs < 5.0, format!("max error {worst:.2e}, {secs:.2} s"))
}

fn rodrigues_and_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut rod, mut jac): (f64, f64) = (0.0, 0.0);
    for (_, body) in bodies() {
        for _ in 0..1000 {
            let theta = rng.random_range(0.1..3.0);
            let phi = rng.random_range(-3.0..3.0);
            let s = rng.random_range(-0.2..3.0);
            let f = body.surface_frame(0, [theta, phi]).unwrap();
            let dn = [
                fd(|t| body.normal([t, phi]), theta, 1e-5),
                fd(|p| body.normal([theta, p]), phi, 1e-5),
            ];
            for i in 0..2 {
                rod = rod.max((dn[i] - f.kappa_param[i] * f.d_sigma[i]).norm());
            }
            let map = |s: f64, t: f64, p: f64| body.from_illuminating_coords(&coords(s, t, p)).unwrap();
            let cols = [
                fd(|v| map(v, theta, phi), s, 1e-5),
                fd(|v| map(s, v, phi), theta, 1e-5),
                fd(|v| map(s, theta, v), phi, 1e-5),
            ];
            let det = cols[0].dot(&cols[1].cross(&cols[2])).abs();
            let j = body.jacobian_metric(&coords(s, theta, phi)).unwrap().jacobian;
            jac = jac.max((det - j).abs() / j.max(1e-3));
        }
    }
    outcome(
        rod <= 1e-6 && jac <= 1e-6,
        format!("Rodrigues {rod:.2e}, Jacobian relative {jac:.2e}"),
    )
}

fn star_shaped_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let body = IlluminatingBody::sphere(Vec3::zeros(), 0.9).unwrap();
    let mut err = [0.0f64; 4];
    let mut n = 0;
    while n < 10_000 {
        let x = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if x.norm() < 0.05 {
            continue;
        }
        let g = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let u = rng.random_range(-1.5..1.5);
        let ut = rng.random_range(-1.0..1.0);
        let s = FieldSample::at(&body, &x, u, ut, g, rng.random_range(0.0..5.0), 1.5).unwrap();
        err[0] = err[0].max((s.level() - x.norm()).abs());
        err[1] = err[1].max((div_alpha(&s.coords, &s.frame, s.rho2m).unwrap() - 3.0).abs());
        err[2] = err[2].max((h_alpha(&g, &s.coords, &s.frame, s.rho2m).unwrap() - g.norm_squared()).abs());
        err[3] = err[3].max((qpr_densities(&s).unwrap().r - u.powi(6) / 3.0).abs());
        n += 1;
    }
    outcome(
        err[0] <= 1e-10 && err[1] <= 1e-10 && err[2] <= 1e-12 && err[3] <= 1e-12,
        format!(
            "level {:.1e}, divα {:.1e}, H_α {:.1e}, R {:.1e}",
            err[0], err[1], err[2], err[3]
        ),
    )
}

fn ball(body: &str, center: [f64; 3], r: f64) -> String {
    format!(r#"{{"body": {body}, "obstacle": {{"kind": "ball", "center": {center:?}, "radius": {r}}}}}"#)
}

fn dogbone(c: f64) -> String {
    format!(
        r#"{{"body": {{"kind": "spheroid", "radii": [1, 1, {c}]}},
            "obstacle": {{"kind": "dogbone", "lobe_radius": 0.6, "lobe_offset": 0.45, "neck_radius": 0.5}}}}"#
    )
}

fn snake(amplitude: f64) -> String {
    format!(
        r#"{{"body": {{"kind": "sphere", "radii": [1.0]}},
            "obstacle": {{"kind": "snake", "length": 1.2, "amplitude": {amplitude}, "wavelength": 1.2, "tube_radius": 0.2}}}}"#
    )
}

fn condition_implication() -> Outcome {
    let prolate = |c: f64| format!(r#"{{"kind": "spheroid", "radii": [1, 1, {c}]}}"#);
    let oblate = |c: f64| format!(r#"{{"kind": "spheroid", "radii": [{c}, {c}, 1]}}"#);
    let mut good = Vec::new();
    for rb in [0.6, 0.8, 1.0] {
        let body = format!(r#"{{"kind": "sphere", "radii": [{rb}]}}"#);
        good.push(ball(&body, [0.0; 3], 0.5));
        good.push(ball(&body, [0.1, 0.0, 0.0], 0.45));
        good.push(ball(&body, [0.0, 0.15, 0.05], 0.4));
    }
    for c in [1.02, 1.04, 1.05] {
        good.push(ball(&prolate(c), [0.0; 3], 0.5));
        good.push(ball(&oblate(c), [0.0; 3], 0.5));
    }
    for c in [1.02, 1.05, 1.08, 1.1] {
        good.push(dogbone(c));
    }
    good.push(snake(0.05));
    let bad = vec![
        ball(&prolate(1.07), [0.0; 3], 0.5),
        ball(&oblate(1.2), [0.0; 3], 0.5),
        ball(&prolate(3.0), [0.0; 3], 0.5),
        ball(r#"{"kind": "sphere", "radii": [0.5]}"#, [0.4, 0.0, 0.0], 0.4),
        snake(0.2),
    ];
    let certify = |text: &String| illuminate(&Scene::from_json(text, None).unwrap(), 0);
    let (mut certified, mut implied, mut with_eta) = (0, 0, 0);
    for text in &good {
        let c = certify(text);
        let a = &c.aggregates;
        certified += c.pass as usize;
        implied += (a.cond8_margin > 0.0 && a.eta0 < 1.0) as usize;
        with_eta += (a.eta0 > 0.0) as usize;
    }
    let failed = bad.iter().filter(|t| !certify(t).pass).count();
    outcome(
        certified == good.len() && implied == good.len() && failed == bad.len(),
        format!(
            "{certified}/{} certified, {implied} with cond8 > 0 and η₀ < 1 ({with_eta} with η₀ > 0), {failed}/{} failing scenes reported",
            good.len(),
            bad.len()
        ),
    )
}

fn identity_residual_order() -> Outcome {
    let start = Instant::now();
    let scene = Scene::from_json(&dogbone(1.1), None).unwrap();
    let setup = IdentitySetup {
        body: &scene.body,
        obstacle: Some(&scene.obstacle),
        m: 3.0,
    };
    let points = [
        (Vec3::new(1.6, 0.2, 0.1), 0.3),
        (Vec3::new(0.3, 1.4, -0.5), 0.5),
        (Vec3::new(-0.9, 0.4, 1.5), 0.2),
    ];
    let mut orders = Vec::new();
    for id in ["linear_x1", "gaussian", "standing"] {
        let sol = Manufactured::from_id(id).unwrap();
        let rows = residual_table(&setup, &sol, &points, 0.04, 4).unwrap();
        orders.push((id, fitted_order(&rows)));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = orders.iter().all(|(_, o)| o.is_some_and(|o| (o - 2.0).abs() <= 0.5));
    let text: Vec<String> = orders.iter().map(|(id, o)| format!("{id} {:.3}", o.unwrap_or(f64::NAN))).collect();
    outcome(ok && secs < 60.0, format!("orders {}, {secs:.1} s", text.join(", ")))
}

fn energy_conservation() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (nonlinear, tol) in [(false, 1e-3), (true, 5e-3)] {
        let text = format!(
            r#"{{"scene": {{"body": {{"kind": "sphere", "radii": [0.6]}},
                         "obstacle": {{"kind": "ball", "center": [0, 0, 0], "radius": 0.5}}}},
                "h": 0.015625, "cfl": 0.5, "t_final": 8.0, "nonlinear": {nonlinear}, "m": 1.2,
                "bump": {{"center": [1.0, 0.0, 0.0], "radius": 0.4, "amplitude": 1.0}},
                "cadence": 1.0, "outer_boundary": "reflecting", "box_half_width": 1.5}}"#
        );
        let start = Instant::now();
        let series = run_simulation(SolverConfig::from_json(&text, None).unwrap()).unwrap().series;
        let secs = start.elapsed().as_secs_f64();
        let e0 = series.records[0].energy;
        let drift = series.records.iter().map(|r| ((r.energy - e0) / e0).abs()).fold(0.0, f64::max);
        ok &= series.meta.complete && drift <= tol && secs < 600.0;
        detail.push(format!(
            "{} drift {drift:.2e} (≤ {tol:.0e}) in {secs:.0} s",
            if nonlinear { "nonlinear" } else { "linear" }
        ));
    }
    outcome(ok, detail.join("; "))
}

/// Baseline run config at grid spacing `h`, without checkpoints.
fn run_config(name: &str, h: f64) -> SolverConfig {
    let mut cfg = SolverConfig::load(&configs().join("runs").join(name)).unwrap();
    cfg.h = h;
    cfg.checkpoints.clear();
    cfg
}

fn simulate(cfg: SolverConfig) -> DecaySeries {
    let out = run_simulation(cfg).unwrap();
    assert!(out.series.meta.complete, "{:?}", out.series.meta.failure);
    out.series
}

struct Runs {
    ball: [DecaySeries; 2],
    dogbone: [DecaySeries; 2],
}

fn exterior_cone(ball_linear: &DecaySeries, runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, s) in [
        ("linear h=1/8", ball_linear),
        ("nonlinear h=1/8", &runs.ball[0]),
        ("nonlinear h=1/16", &runs.ball[1]),
    ] {
        let c = exterior_cone_check(s).unwrap();
        ok &= c.pass;
        detail.push(format!("{name} min margin {:.4}", c.min_margin()));
    }
    let mut inside = run_config("ball_nonlinear.json", 0.125);
    inside.m = Some(3.5);
    let s = simulate(inside);
    let c = exterior_cone_check(&s).unwrap();
    let worst = c.max_lhs_over_energy();
    ok &= worst <= 1e-3;
    detail.push(format!("data inside M: max LHS/E {worst:.2e}"));
    outcome(ok, detail.join("; "))
}

fn l6_norm(series: &DecaySeries, t: f64) -> f64 {
    let r = series.records.iter().find(|r| (r.t - t).abs() < 1e-9).unwrap();
    r.l6_omega.powf(1.0 / 6.0)
}

fn l6_decay(runs: &Runs) -> Outcome {
    let [coarse, fine] = &runs.ball;
    let ratio = |s: &DecaySeries| l6_norm(s, 8.0) / l6_norm(s, 0.0);
    let (rc, rf) = (ratio(coarse), ratio(fine));
    let (nc, nf) = (l6_norm(coarse, 8.0), l6_norm(fine, 8.0));
    let agree = (nc - nf).abs() / nf;
    outcome(
        rc <= 0.2 && rf <= 0.2 && agree <= 0.1,
        format!("‖u(8)‖₆/‖u(0)‖₆ = {rc:.4} (h=1/8), {rf:.4} (h=1/16); h vs h/2 differ by {:.1}%", 100.0 * agree),
    )
}

fn audit(runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, pair, zero_eta) in [("concentric", &runs.ball, true), ("dogbone", &runs.dogbone, false)] {
        let reports: Vec<AuditReport> = pair.iter().map(|s| inequality_audit(s, DEFAULT_BETA).unwrap()).collect();
        let eta0 = reports[0].eta0;
        ok &= if zero_eta { eta0 == 0.0 } else { eta0 > 0.0 && eta0 < 1.0 };
        let mut worst_margin = f64::INFINITY;
        let mut worst_drift: f64 = 0.0;
        for r in &reports {
            ok &= r.pass;
            for e in &r.entries {
                worst_margin = worst_margin.min(e.min_margin());
            }
        }
        for e in &reports[0].entries {
            let (Some(a), Some(b)) = (e.constants, reports[1].entry(&e.name).and_then(|f| f.constants)) else {
                continue;
            };
            for d in fit_stability(&a, &b, STABILITY_TOLERANCE) {
                ok &= d.stable;
                // Constants with negligible contribution may drift freely.
                if !d.stable || d.relative <= STABILITY_TOLERANCE {
                    worst_drift = worst_drift.max(d.relative);
                }
            }
        }
        let gronwall = reports.iter().all(|r| r.entry("gronwall").is_some_and(|e| e.pass));
        ok &= gronwall;
        detail.push(format!(
            "{name} η₀ = {eta0:.4}: min margin {worst_margin:.4}, max constant drift {:.1}%, Gronwall {}",
            100.0 * worst_drift,
            if gronwall { "holds" } else { "violated" }
        ));
    }
    outcome(ok, detail.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("runs/ball_nonlinear.json")).unwrap()).unwrap();
    cfg["scene"] = configs().join("scenes/concentric.json").to_string_lossy().into();
    cfg["t_final"] = 2.0.into();
    cfg["checkpoints"] = serde_json::json!([]);
    let path = dir.path().join("run.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let csv = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_illumwave"))
            .args(["simulate", "--threads", "1", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("series.csv")).unwrap()
    };
    let (a, b) = (csv("a"), csv("b"));
    outcome(a == b && !a.is_empty(), format!("{} bytes, identical: {}", a.len(), a == b))
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 geometry round trip", round_trip()),
        ("2 Rodrigues and Jacobian", rodrigues_and_jacobian()),
        ("3 star-shaped reduction", star_shaped_reduction()),
        ("4 condition implication", condition_implication()),
        ("5 divergence-identity residual order", identity_residual_order()),
        ("6 energy conservation", energy_conservation()),
    ];

    let mut ball_linear = run_config("ball_nonlinear.json", 0.125);
    ball_linear.nonlinear = false;
    let ball_linear = simulate(ball_linear);
    let runs = Runs {
        ball: [0.125, 0.0625].map(|h| simulate(run_config("ball_nonlinear.json", h))),
        dogbone: [0.125, 0.0625].map(|h| simulate(run_config("dogbone_nonlinear.json", h))),
    };
    results.push(("7 exterior-cone estimate", exterior_cone(&ball_linear, &runs)));
    results.push(("8 L6 decay trend", l6_decay(&runs)));
    results.push(("9 decay inequality audit", audit(&runs)));
    results.push(("10 determinism", determinism()));

    // Written to the process stdout directly so the verdicts show up
    // without --nocapture.
    let mut out = std::io::stdout().lock();
    for (name, o) in &results {
        writeln!(out, "{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail).unwrap();
    }
    drop(out);
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
