use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Scene, SceneSpec, Vec3};

/// Scene given inline or as a path relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneRef {
    Path(PathBuf),
    Inline(SceneSpec),
}

/// Initial displacement `A(1 − |x − x₀|²/r²)⁴` on `|x − x₀| < r`, zero velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub amplitude: f64,
}

impl BumpSpec {
    pub fn value(&self, x: &Vec3) -> f64 {
        let q = (x - Vec3::from(self.center)).norm_squared() / (self.radius * self.radius);
        if q < 1.0 {
            self.amplitude * (1.0 - q).powi(4)
        } else {
            0.0
        }
    }

    /// Largest `|x|` on the support.
    pub fn support_radius(&self) -> f64 {
        Vec3::from(self.center).norm() + self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBoundary {
    /// Box large enough that no signal reaches its faces by `t_final`.
    #[default]
    Guard,
    /// Homogeneous Dirichlet box faces; energy is still conserved but waves
    /// reflect back.
    Reflecting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scene: SceneRef,
    pub h: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    #[serde(default)]
    pub nonlinear: bool,
    pub bump: BumpSpec,
    /// Cone offset `M`; defaults to `ρ₂M`.
    #[serde(default)]
    pub m: Option<f64>,
    /// Time between records.
    #[serde(default = "default_cadence")]
    pub cadence: f64,
    #[serde(default)]
    pub outer_boundary: OuterBoundary,
    #[serde(default)]
    pub box_half_width: Option<f64>,
    /// Times at which both stored levels are kept for restarts.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    /// Seed of the certificate's boundary sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_cadence() -> f64 {
    0.25
}

impl SolverConfig {
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: SolverConfig = serde_json::from_str(text).map_err(|e| Error::Json {
            path: base_dir.map(Path::to_path_buf).unwrap_or_default(),
            source: e,
        })?;
        cfg.base_dir = base_dir.map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: SolverConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Load the referenced scene and inline it, so the config is
    /// self-contained.
    pub fn resolve_scene(&mut self) -> Result<Scene> {
        let scene = match &self.scene {
            SceneRef::Inline(spec) => Scene::new(spec.clone(), self.base_dir.as_deref())?,
            SceneRef::Path(p) => {
                let full = match &self.base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                Scene::load(&full)?
            }
        };
        self.scene = SceneRef::Inline(scene.spec.clone());
        Ok(scene)
    }

    pub fn dt(&self) -> f64 {
        self.cfl * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return bad(format!("cfl must lie in (0, 0.5], got {}", self.cfl));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if !(self.cadence > 0.0) {
            return bad(format!("cadence must be positive, got {}", self.cadence));
        }
        if !(self.bump.radius > 0.0) || !self.bump.amplitude.is_finite() {
            return bad("bump.radius must be positive and bump.amplitude finite".into());
        }
        if self.outer_boundary == OuterBoundary::Reflecting && self.box_half_width.is_none() {
            return bad("reflecting outer boundary requires box_half_width".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&bytes))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
