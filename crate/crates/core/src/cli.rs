//! Command-line front end: `geometry-check`, `verify-identity`, `simulate`
//! and `audit`. Exit codes: 0 pass, 1 usage or configuration error, 2
//! mathematical or geometric failure.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    exterior_cone_check, inequality_audit, l6_decay_report, spacetime_norms, AuditReport, ConeCheck, DecaySeries,
    L6DecayReport, DEFAULT_BETA,
};
use crate::error::{Error, Result};
use crate::geometry::{illuminate, Scene, Vec3};
use crate::multiplier::{fitted_order, residual_table, IdentitySetup, Manufactured, ResidualRow};
use crate::solver::{SceneRef, Simulation, SimulationOutput, SolverConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "illumwave", version, about = "Illuminating-coordinate decay diagnostics for the quintic wave equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify that a scene is illuminated from its exterior.
    GeometryCheck(CommonArgs),
    /// Check the multiplier identity on a manufactured solution.
    VerifyIdentity(CommonArgs),
    /// Run the finite-difference solver.
    Simulate(CommonArgs),
    /// Audit the decay inequalities on a run (simulating first if needed).
    Audit(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "ILLUM_WAVE_THREADS")]
    pub threads: Option<usize>,
    /// Sampling seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::Inversion { .. }
        | Error::Instability { .. }
        | Error::Uncertified(_)
        | Error::AuditRefused(_)
        | Error::Fit(_) => EXIT_FAIL,
        Error::Stencil { .. } | Error::Config(_) | Error::Missing(_) | Error::Io { .. } | Error::Json { .. } => {
            EXIT_ERROR
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    let common = match &cli.command {
        Command::GeometryCheck(a) | Command::VerifyIdentity(a) | Command::Simulate(a) | Command::Audit(a) => a,
    };
    if let Some(n) = common.threads {
        // The global pool can only be built once per process; later calls
        // keep the first setting.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = std::fs::create_dir_all(&common.out)
        .map_err(|e| Error::io(&common.out, e))
        .and_then(|_| match &cli.command {
            Command::GeometryCheck(a) => cmd_geometry_check(a),
            Command::VerifyIdentity(a) => cmd_verify_identity(a),
            Command::Simulate(a) => cmd_simulate(a),
            Command::Audit(a) => cmd_audit(a),
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(crate::solver::config::hex(&Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

/// Provenance of a command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_path: String,
    pub config_hash: String,
    pub scene_hash: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<ManifestEntry>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn scene_hash(scene: &Scene) -> String {
    let text = serde_json::to_string(&scene.spec).expect("scene serializes");
    crate::solver::config::hex(&Sha256::digest(text.as_bytes()))
}

struct ManifestBuilder {
    command: &'static str,
    args_threads: Option<usize>,
    config_path: PathBuf,
    started: u64,
}

impl ManifestBuilder {
    fn new(command: &'static str, args: &CommonArgs) -> Self {
        ManifestBuilder {
            command,
            args_threads: args.threads,
            config_path: args.config.clone(),
            started: unix_now(),
        }
    }

    fn finish(self, out: &Path, config_hash: String, scene_hash: String, seed: u64, files: &[PathBuf]) -> Result<()> {
        let outputs = files
            .iter()
            .map(|p| {
                Ok(ManifestEntry {
                    path: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        let manifest = RunManifest {
            command: self.command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_path: self.config_path.display().to_string(),
            config_hash,
            scene_hash,
            seed,
            threads: self.args_threads,
            started_unix: self.started,
            finished_unix: unix_now(),
            outputs,
        };
        write_json(&out.join("manifest.json"), &manifest)
    }
}

fn cmd_geometry_check(args: &CommonArgs) -> Result<i32> {
    let manifest = ManifestBuilder::new("geometry-check", args);
    let scene = Scene::load(&args.config)?;
    let seed = args.seed.unwrap_or(0);
    let cert = illuminate(&scene, seed);
    let path = args.out.join("certificate.json");
    write_json(&path, &cert)?;
    let a = &cert.aggregates;
    println!(
        "eta0 = {:e}, cond8_margin = {:e}, min_s0_plus_rho1 = {:e}, min_nu_dot_n = {:e}",
        a.eta0, a.cond8_margin, a.min_s0_plus_rho1, a.min_nu_dot_n
    );
    for c in &cert.conditions {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let hash = scene_hash(&scene);
    manifest.finish(&args.out, hash.clone(), hash, seed, &[path])?;
    Ok(if cert.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn default_levels() -> usize {
    4
}

fn default_h0() -> f64 {
    0.04
}

/// Input of `verify-identity`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub scene: SceneRef,
    /// One of `zero`, `linear_x1`, `gaussian`, `standing`.
    pub solution: String,
    /// Evaluation points `[x, y, z, t]`.
    pub points: Vec<[f64; 4]>,
    #[serde(default = "default_h0")]
    pub h0: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Cone offset; defaults to `ρ₂M`.
    #[serde(default)]
    pub m: Option<f64>,
}

impl VerifyConfig {
    pub fn load(path: &Path) -> Result<(Self, Scene)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: VerifyConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        if cfg.levels < 2 || !(cfg.h0 > 0.0) || cfg.points.is_empty() {
            return Err(Error::Config("need levels >= 2, h0 > 0 and at least one point".into()));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let scene = match &cfg.scene {
            SceneRef::Path(p) => Scene::load(&base.join(p))?,
            SceneRef::Inline(spec) => Scene::new(spec.clone(), Some(base))?,
        };
        Ok((cfg, scene))
    }
}

pub fn residual_csv(rows: &[ResidualRow]) -> String {
    let mut out = String::from("h,residual,order\n");
    for r in rows {
        let order = r.order.map(|o| format!("{o:e}")).unwrap_or_default();
        out.push_str(&format!("{:e},{:e},{}\n", r.h, r.residual, order));
    }
    out
}

fn cmd_verify_identity(args: &CommonArgs) -> Result<i32> {
    let manifest = ManifestBuilder::new("verify-identity", args);
    let (cfg, scene) = VerifyConfig::load(&args.config)?;
    let sol = Manufactured::from_id(&cfg.solution)?;
    let m = cfg.m.unwrap_or_else(|| scene.body.rho2m());
    let setup = IdentitySetup {
        body: &scene.body,
        obstacle: (!scene.obstacle.is_none()).then_some(&scene.obstacle),
        m,
    };
    let points: Vec<(Vec3, f64)> = cfg.points.iter().map(|p| (Vec3::new(p[0], p[1], p[2]), p[3])).collect();
    let rows = residual_table(&setup, &sol, &points, cfg.h0, cfg.levels)?;
    let csv = residual_csv(&rows);
    print!("{csv}");
    let path = args.out.join("residuals.csv");
    std::fs::write(&path, &csv).map_err(|e| Error::io(&path, e))?;
    let text = std::fs::read(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let config_hash = crate::solver::config::hex(&Sha256::digest(&text));
    manifest.finish(&args.out, config_hash, scene_hash(&scene), 0, &[path])?;
    let all_zero = rows.iter().all(|r| r.residual == 0.0);
    let order = fitted_order(&rows);
    match order {
        Some(o) => println!("fitted order {o:.3}"),
        None => println!("fitted order undefined (residuals vanish)"),
    }
    Ok(if all_zero || order.is_some_and(|o| o >= 1.5) { EXIT_PASS } else { EXIT_FAIL })
}

fn load_run_config(args: &CommonArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Simulate and write `series.csv`, `series.json`, checkpoints and the manifest.
fn simulate_to(args: &CommonArgs, command: &'static str) -> Result<(Simulation, SimulationOutput)> {
    let manifest = ManifestBuilder::new(command, args);
    let sim = Simulation::new(load_run_config(args)?)?;
    let out = sim.run();
    let csv = args.out.join("series.csv");
    let json = args.out.join("series.json");
    out.series.write_csv(&csv)?;
    out.series.write_json(&json)?;
    let mut files = vec![csv, json];
    for c in &out.checkpoints {
        files.extend(c.write(&args.out, &format!("checkpoint_t{:.6}", c.t))?);
    }
    manifest.finish(
        &args.out,
        sim.config.hash(),
        scene_hash(&sim.scene),
        sim.config.seed,
        &files,
    )?;
    Ok((sim, out))
}

fn cmd_simulate(args: &CommonArgs) -> Result<i32> {
    let (_, out) = simulate_to(args, "simulate")?;
    let s = &out.series;
    if let Some(last) = s.last() {
        println!("t = {}, E = {:e}, L6_D = {:e}, flux = {:e}", last.t, last.energy, last.l6_d, last.flux_0_t);
    }
    if let Some(f) = &s.meta.failure {
        eprintln!("run stopped early: {f}");
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_PASS)
}

/// Everything `audit` writes to `audit.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditOutput {
    pub config_hash: String,
    pub exterior_cone: ConeCheck,
    /// `None` when the scene certificate refuses the audit.
    pub inequalities: Option<AuditReport>,
    pub refused: Option<String>,
    pub l6_decay: L6DecayReport,
    pub l5l10_total: f64,
    pub l4l12_total: f64,
    pub pass: bool,
}

/// Plot-ready CSV of the decay functionals.
pub fn functionals_csv(series: &DecaySeries) -> String {
    let f = crate::analysis::decay_functionals(series);
    let mut out = String::from("t,phi,psi,L6_omega,energy_exterior_cone,flux_0_t\n");
    for (k, r) in series.records.iter().enumerate() {
        out.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}\n",
            r.t, f.phi[k], f.psi[k], r.l6_omega, r.energy_exterior_cone, r.flux_0_t
        ));
    }
    out
}

pub fn audit_series(series: &DecaySeries, beta: f64) -> Result<AuditOutput> {
    series.check_invariants()?;
    let cone = exterior_cone_check(series)?;
    let (inequalities, refused) = match inequality_audit(series, beta) {
        Ok(r) => (Some(r), None),
        Err(Error::AuditRefused(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let norms = spacetime_norms(series);
    let pass = cone.pass && inequalities.as_ref().is_some_and(|r| r.pass);
    Ok(AuditOutput {
        config_hash: series.meta.config_hash.clone(),
        exterior_cone: cone,
        inequalities,
        refused,
        l6_decay: l6_decay_report(series),
        l5l10_total: norms.total_l5l10(),
        l4l12_total: norms.total_l4l12(),
        pass,
    })
}

fn cmd_audit(args: &CommonArgs) -> Result<i32> {
    let cfg = load_run_config(args)?;
    let existing = args.out.join("series.json");
    let series = match DecaySeries::read_json(&existing) {
        Ok(s) if s.meta.config_hash == cfg.hash() => s,
        _ => simulate_to(args, "audit")?.1.series,
    };
    if let Some(f) = &series.meta.failure {
        eprintln!("run stopped early: {f}");
        return Ok(EXIT_FAIL);
    }
    let report = audit_series(&series, DEFAULT_BETA)?;
    write_json(&args.out.join("audit.json"), &report)?;
    let path = args.out.join("functionals.csv");
    std::fs::write(&path, functionals_csv(&series)).map_err(|e| Error::io(&path, e))?;
    let c = &report.exterior_cone;
    println!(
        "{} exterior_cone: min margin {:e} (tolerance {})",
        verdict(c.pass),
        c.min_margin(),
        c.tolerance
    );
    match &report.inequalities {
        Some(r) => {
            for e in &r.entries {
                println!("{} {}: min margin {:e}", verdict(e.pass), e.name, e.min_margin());
            }
        }
        None => println!("FAIL inequalities: {}", report.refused.as_deref().unwrap_or("refused")),
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
