//! Sample-based illumination certificates and scene documents.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::body::{BodySpec, IlluminatingBody};
use crate::geometry::obstacle::{Obstacle, ObstacleSpec};
use crate::geometry::Vec3;

/// Minimum number of boundary samples for a resolved certificate.
pub const MIN_SURFACE_SAMPLES: usize = 10_000;
/// Largest relative change of an aggregate under 2× refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default = "default_surface_samples")]
    pub surface_samples: usize,
    #[serde(default = "default_march_step")]
    pub ray_march_step: f64,
    /// Half-width of the box over which `a₀` is sampled; defaults to twice
    /// the scene radius.
    #[serde(default)]
    pub box_half_width: Option<f64>,
    #[serde(default = "default_volume_samples")]
    pub volume_samples_per_axis: usize,
}

fn default_surface_samples() -> usize {
    MIN_SURFACE_SAMPLES
}

fn default_march_step() -> f64 {
    0.01
}

fn default_volume_samples() -> usize {
    24
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            surface_samples: default_surface_samples(),
            ray_march_step: default_march_step(),
            box_half_width: None,
            volume_samples_per_axis: default_volume_samples(),
        }
    }
}

/// JSON scene: illuminating body, obstacle and certificate sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub body: BodySpec,
    pub obstacle: ObstacleSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

/// A scene with its geometry constructed.
#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub body: IlluminatingBody,
    pub obstacle: Obstacle,
}

impl Scene {
    pub fn new(spec: SceneSpec, base_dir: Option<&Path>) -> Result<Self> {
        let body = IlluminatingBody::from_spec(&spec.body)?;
        let obstacle = Obstacle::from_spec(&spec.obstacle, base_dir)?;
        if spec.sampling.ray_march_step <= 0.0 || !spec.sampling.ray_march_step.is_finite() {
            return Err(Error::Config("sampling.ray_march_step must be positive".into()));
        }
        Ok(Scene {
            spec,
            body,
            obstacle,
        })
    }

    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let spec: SceneSpec = serde_json::from_str(text).map_err(|e| Error::Json {
            path: PathBuf::from("<scene>"),
            source: e,
        })?;
        Self::new(spec, base_dir)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SceneSpec = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::new(spec, path.parent())
    }

    /// Radius of a ball about the origin containing both `C` and `V`.
    pub fn radius(&self) -> f64 {
        (self.body.center().norm() + self.body.max_extent()).max(self.obstacle.bounding_radius())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSample {
    pub x0: [f64; 3],
    pub x1: [f64; 3],
    pub sigma: [f64; 2],
    pub s0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub ray_clear: bool,
    pub nu_dot_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub x0: [f64; 3],
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub min_s0_plus_rho1: f64,
    pub cond8_margin: f64,
    pub eta0: f64,
    pub a0: f64,
    pub min_nu_dot_n: f64,
    pub s0_min: f64,
    pub s0_max: f64,
}

impl Aggregates {
    fn values(&self) -> [(&'static str, f64); 4] {
        [
            ("min_s0_plus_rho1", self.min_s0_plus_rho1),
            ("cond8_margin", self.cond8_margin),
            ("eta0", self.eta0),
            ("a0", self.a0),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminationCertificate {
    pub rho2m: f64,
    pub surface_samples: usize,
    pub refined_surface_samples: usize,
    pub ray_march_step: f64,
    pub box_half_width: f64,
    pub volume_samples_per_axis: usize,
    pub aggregates: Aggregates,
    pub refined: Aggregates,
    pub conditions: Vec<ConditionVerdict>,
    pub pass: bool,
    pub failures: Vec<SampleFailure>,
    pub samples: Vec<CertificateSample>,
}

impl IlluminationCertificate {
    /// `ε = 1 − √η₀`.
    pub fn epsilon(&self) -> f64 {
        1.0 - self.aggregates.eta0.max(0.0).sqrt()
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failed_conditions(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

enum Probe {
    Ok(CertificateSample),
    Fail(CertificateSample, String),
    NoRay(String),
}

fn probe(body: &IlluminatingBody, obstacle: &Obstacle, x0: Vec3, step: f64) -> Probe {
    let (c, frame) = match body.locate(&x0) {
        Ok(v) => v,
        Err(e) => return Probe::NoRay(e.to_string()),
    };
    let nu = frame.normal;
    let n = obstacle.normal(&x0);
    let mut sample = CertificateSample {
        x0: x0.into(),
        x1: frame.position.into(),
        sigma: c.sigma,
        s0: c.s,
        rho1: frame.rho1(),
        rho2: frame.rho2(),
        ray_clear: true,
        nu_dot_n: nu.dot(&n),
    };
    // March outward until the ray leaves the obstacle's bounding sphere. The
    // signed distance is 1-Lipschitz, so it bounds the admissible stride.
    let exit = obstacle.bounding_radius() + step;
    let tol = 1e-9 * (1.0 + x0.norm()) + 1e-3 * step * step;
    let mut t = step;
    while t < 4.0 * exit + step {
        let x = x0 + t * nu;
        let d = obstacle.signed_distance(&x);
        if d < -tol {
            sample.ray_clear = false;
            let reason = format!("ray re-enters the obstacle at distance {t:.4e} from x0");
            return Probe::Fail(sample, reason);
        }
        if x.norm() > exit && (x + nu).norm() > x.norm() {
            break;
        }
        t += d.max(step);
    }
    Probe::Ok(sample)
}

struct Pass {
    samples: Vec<CertificateSample>,
    failures: Vec<SampleFailure>,
    aggregates: Aggregates,
    volume_failures: usize,
}

fn run_pass(scene: &Scene, n: usize, seed: u64, half_width: f64, per_axis: usize) -> Pass {
    let body = &scene.body;
    let obstacle = &scene.obstacle;
    let step = scene.spec.sampling.ray_march_step;
    let points = obstacle.sample_surface(n, seed);
    let probes: Vec<Probe> = points
        .par_iter()
        .map(|&x0| probe(body, obstacle, x0, step))
        .collect();

    let rho2m = body.rho2m();
    let mut samples = Vec::with_capacity(probes.len());
    let mut failures = Vec::new();
    for (index, (p, x0)) in probes.into_iter().zip(&points).enumerate() {
        match p {
            Probe::Ok(s) => samples.push(s),
            Probe::Fail(s, reason) => {
                failures.push(SampleFailure {
                    index,
                    x0: s.x0,
                    reason,
                });
                samples.push(s);
            }
            Probe::NoRay(reason) => failures.push(SampleFailure {
                index,
                x0: (*x0).into(),
                reason: format!("no ray found: {reason}"),
            }),
        }
    }

    let mut agg = Aggregates {
        min_s0_plus_rho1: f64::INFINITY,
        cond8_margin: f64::INFINITY,
        eta0: if samples.is_empty() { f64::INFINITY } else { f64::NEG_INFINITY },
        a0: f64::INFINITY,
        min_nu_dot_n: f64::INFINITY,
        s0_min: f64::INFINITY,
        s0_max: f64::NEG_INFINITY,
    };
    for s in &samples {
        let (s1, s2) = (s.s0 + s.rho1, s.s0 + s.rho2);
        agg.min_s0_plus_rho1 = agg.min_s0_plus_rho1.min(s1);
        agg.cond8_margin = agg.cond8_margin.min(s1 - 2.0 * (rho2m - s.rho1));
        agg.eta0 = agg.eta0.max((rho2m - s.rho1) / s1 + (rho2m - s.rho2) / s2);
        agg.min_nu_dot_n = agg.min_nu_dot_n.min(s.nu_dot_n);
        agg.s0_min = agg.s0_min.min(s.s0);
        agg.s0_max = agg.s0_max.max(s.s0);
        let r = Vec3::from(s.x0).norm();
        if r > 0.0 {
            agg.a0 = agg.a0.min((s.s0 + rho2m) / r);
        }
    }
    if obstacle.is_none() {
        agg.eta0 = 0.0;
    }

    // Volume part of a₀: exterior nodes of a uniform lattice over the box.
    let m = per_axis.max(2);
    let coord = |i: usize| -half_width + 2.0 * half_width * i as f64 / (m - 1) as f64;
    let volume: Vec<Option<f64>> = (0..m * m * m)
        .into_par_iter()
        .map(|idx| {
            let x = Vec3::new(coord(idx / (m * m)), coord((idx / m) % m), coord(idx % m));
            let r = x.norm();
            if r == 0.0 || obstacle.contains(&x) {
                return Some(f64::INFINITY);
            }
            body.to_illuminating_coords(&x).ok().map(|c| (c.s + rho2m) / r)
        })
        .collect();
    let mut volume_failures = 0;
    for v in volume {
        match v {
            Some(q) => agg.a0 = agg.a0.min(q),
            None => volume_failures += 1,
        }
    }

    Pass {
        samples,
        failures,
        aggregates: agg,
        volume_failures,
    }
}

fn relative_change(a: f64, b: f64, floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Certify that `scene.obstacle` is illuminated from the exterior by
/// `scene.body` at the scene's sampling density.
pub fn illuminate(scene: &Scene, seed: u64) -> IlluminationCertificate {
    let sampling = &scene.spec.sampling;
    let n = sampling.surface_samples;
    let half_width = sampling.box_half_width.unwrap_or(2.0 * scene.radius());
    let per_axis = sampling.volume_samples_per_axis;
    let base = run_pass(scene, n, seed, half_width, per_axis);
    let refined = run_pass(
        scene,
        2 * n,
        seed.wrapping_add(1),
        half_width,
        2 * per_axis - 1,
    );

    let agg = base.aggregates;
    let mut conditions = Vec::new();
    let mut add = |name: &str, pass: bool, detail: String| {
        conditions.push(ConditionVerdict {
            name: name.to_string(),
            pass,
            detail,
        })
    };

    let no_ray = base
        .failures
        .iter()
        .filter(|f| f.reason.starts_with("no ray"))
        .count();
    add(
        "rays_exist",
        no_ray == 0,
        format!("{no_ray} of {n} boundary samples have no ray"),
    );
    let blocked = base.samples.iter().filter(|s| !s.ray_clear).count();
    add(
        "rays_clear",
        blocked == 0,
        format!("{blocked} rays re-enter the obstacle"),
    );
    add(
        "exterior_coordinates",
        base.volume_failures == 0,
        format!(
            "{} exterior lattice points without illuminating coordinates",
            base.volume_failures
        ),
    );
    add(
        "min_s0_plus_rho1",
        agg.min_s0_plus_rho1 > 0.0,
        format!("min(s0 + rho1) = {:.6e}", agg.min_s0_plus_rho1),
    );
    add(
        "cond8",
        agg.cond8_margin > 0.0,
        format!("min(s0 + rho1 - 2(rho2M - rho1)) = {:.6e}", agg.cond8_margin),
    );

    let floor = 1e-9 * scene.body.rho2m();
    let mut worst = ("", 0.0);
    for ((name, a), (_, b)) in agg.values().into_iter().zip(refined.aggregates.values()) {
        let change = if a.is_finite() && b.is_finite() {
            relative_change(a, b, floor)
        } else if a == b {
            0.0
        } else {
            f64::INFINITY
        };
        if change > worst.1 {
            worst = (name, change);
        }
    }
    let resolved = n >= MIN_SURFACE_SAMPLES && worst.1 < REFINEMENT_TOLERANCE;
    let detail = if n < MIN_SURFACE_SAMPLES {
        format!("under-resolved: {n} boundary samples, need at least {MIN_SURFACE_SAMPLES}")
    } else if worst.1 >= REFINEMENT_TOLERANCE {
        format!(
            "under-resolved: 2x refinement changes {} by {:.3}%",
            worst.0,
            100.0 * worst.1
        )
    } else {
        format!("largest change under 2x refinement {:.3e}", worst.1)
    };
    add("resolution", resolved, detail);

    let pass = conditions.iter().all(|c| c.pass);
    IlluminationCertificate {
        rho2m: scene.body.rho2m(),
        surface_samples: n,
        refined_surface_samples: 2 * n,
        ray_march_step: sampling.ray_march_step,
        box_half_width: half_width,
        volume_samples_per_axis: per_axis,
        aggregates: agg,
        refined: refined.aggregates,
        conditions,
        pass,
        failures: base.failures,
        samples: base.samples,
    }
}
