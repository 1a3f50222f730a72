//! Illuminating bodies, obstacles, illuminating coordinates and certificates.

pub mod body;
pub mod certificate;
pub mod coords;
pub mod obstacle;
pub mod stl;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use body::{BodyKind, BodySpec, IlluminatingBody, Patch, PatchId, SurfaceFrame};
pub use certificate::{illuminate, Aggregates, IlluminationCertificate, SamplingSpec, Scene, SceneSpec};
pub use coords::{decompose_gradient, GradientSplit, IlluminatingCoords, Metric, RegionFlags};
pub use obstacle::{Obstacle, ObstacleSpec};
