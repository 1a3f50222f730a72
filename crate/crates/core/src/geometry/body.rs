//! Convex illuminating bodies with closed-form curvature-line charts.
//!
//! Both built-in bodies are surfaces of revolution about the `z` axis through
//! their center. The chart is `(θ, φ)`: `θ ∈ [0, π]` runs along meridians
//! (from the north pole) and `φ ∈ [-π, π]` is the azimuth. Meridians and
//! parallels are the lines of curvature of any surface of revolution, so the
//! chart is a curvature-line parametrization everywhere except at the two
//! poles, where the azimuthal tangent vanishes (the poles are umbilic, so the
//! pointwise frame quantities still have well-defined limits).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Index of a chart on the illuminating surface.
pub type PatchId = usize;

/// Parameter rectangle of one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub id: PatchId,
    pub sigma1: (f64, f64),
    pub sigma2: (f64, f64),
}

impl Patch {
    pub fn contains(&self, sigma: [f64; 2]) -> bool {
        let eps = 1e-12;
        sigma[0] >= self.sigma1.0 - eps
            && sigma[0] <= self.sigma1.1 + eps
            && sigma[1] >= self.sigma2.0 - eps
            && sigma[1] <= self.sigma2.1 + eps
    }
}

/// Frame quantities of the illuminating surface at one parameter point.
///
/// `d_sigma[i]` is `∂X⁰/∂σᵢ` and `kappa_param[i]` the principal curvature of
/// the curvature line along which `σᵢ` varies, so Rodrigues' relation reads
/// `∂ν/∂σᵢ = kappa_param[i] · d_sigma[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    pub position: Vec3,
    pub normal: Vec3,
    pub d_sigma: [Vec3; 2],
    /// Unit tangents along the two parameter lines (well defined at the poles).
    pub unit_tangent: [Vec3; 2],
    pub kappa_param: [f64; 2],
    /// `1/kappa_param`, exact on a sphere.
    pub rho_param: [f64; 2],
    /// `Λ = |X⁰_σ₁||X⁰_σ₂|`.
    pub area_factor: f64,
}

impl SurfaceFrame {
    /// Parameter index carrying the larger curvature `κ₁`.
    fn first(&self) -> usize {
        if self.kappa_param[0] >= self.kappa_param[1] {
            0
        } else {
            1
        }
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa_param[self.first()]
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa_param[1 - self.first()]
    }

    pub fn rho1(&self) -> f64 {
        self.rho_param[self.first()]
    }

    pub fn rho2(&self) -> f64 {
        self.rho_param[1 - self.first()]
    }

    /// Unit tangents ordered as `(κ₁ direction, κ₂ direction)`.
    pub fn principal_tangents(&self) -> [Vec3; 2] {
        let f = self.first();
        [self.unit_tangent[f], self.unit_tangent[1 - f]]
    }

    /// Metric lengths `|X⁰_σᵢ|` ordered as `(κ₁, κ₂)`.
    pub fn principal_lengths(&self) -> [f64; 2] {
        let f = self.first();
        [self.d_sigma[f].norm(), self.d_sigma[1 - f].norm()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Sphere,
    Spheroid,
}

/// Scene description of an illuminating body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub kind: BodyKind,
    #[serde(default)]
    pub center: [f64; 3],
    /// `[R]` or `[R, R, R]` for a sphere; `[a, a, c]` for a spheroid with
    /// symmetry axis along `z`.
    pub radii: Vec<f64>,
}

/// A strictly convex surface of revolution: sphere or spheroid.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminatingBody {
    center: Vec3,
    equatorial: f64,
    polar: f64,
    patches: Vec<Patch>,
    rho2m: f64,
}

impl IlluminatingBody {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        Self::spheroid(center, radius, radius)
    }

    pub fn spheroid(center: Vec3, equatorial: f64, polar: f64) -> Result<Self> {
        if !(equatorial > 0.0 && polar > 0.0 && equatorial.is_finite() && polar.is_finite()) {
            return Err(Error::Config(format!(
                "body radii must be positive and finite, got ({equatorial}, {polar})"
            )));
        }
        let rho2m = (polar * polar / equatorial).max(equatorial * equatorial / polar);
        Ok(Self {
            center,
            equatorial,
            polar,
            patches: vec![Patch {
                id: 0,
                sigma1: (0.0, PI),
                sigma2: (-PI, PI),
            }],
            rho2m,
        })
    }

    pub fn from_spec(spec: &BodySpec) -> Result<Self> {
        let center = Vec3::from(spec.center);
        match spec.kind {
            BodyKind::Sphere => {
                let r = match spec.radii.as_slice() {
                    [r] => *r,
                    [a, b, c] if a == b && b == c => *a,
                    _ => {
                        return Err(Error::Config(
                            "body.radii for a sphere must be [R] or [R, R, R]".into(),
                        ))
                    }
                };
                Self::sphere(center, r)
            }
            BodyKind::Spheroid => match spec.radii.as_slice() {
                [a, b, c] if a == b => Self::spheroid(center, *a, *c),
                [a, c] => Self::spheroid(center, *a, *c),
                _ => Err(Error::Config(
                    "body.radii for a spheroid must be [a, a, c] (axis along z)".into(),
                )),
            },
        }
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn equatorial_radius(&self) -> f64 {
        self.equatorial
    }

    pub fn polar_radius(&self) -> f64 {
        self.polar
    }

    pub fn is_sphere(&self) -> bool {
        self.equatorial == self.polar
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    /// Largest principal radius of curvature over the whole surface.
    pub fn rho2m(&self) -> f64 {
        self.rho2m
    }

    /// Largest distance from the center to a point of the surface.
    pub fn max_extent(&self) -> f64 {
        self.equatorial.max(self.polar)
    }

    fn patch(&self, id: PatchId) -> Result<&Patch> {
        self.patches
            .get(id)
            .ok_or_else(|| Error::Domain(format!("unknown patch id {id}")))
    }

    /// Position on the surface, without the frame.
    pub fn position(&self, sigma: [f64; 2]) -> Vec3 {
        let (st, ct) = sigma[0].sin_cos();
        let (sp, cp) = sigma[1].sin_cos();
        self.center + Vec3::new(self.equatorial * st * cp, self.equatorial * st * sp, self.polar * ct)
    }

    /// Outward unit normal, without the rest of the frame.
    pub fn normal(&self, sigma: [f64; 2]) -> Vec3 {
        let (st, ct) = sigma[0].sin_cos();
        let (sp, cp) = sigma[1].sin_cos();
        let (a, c) = (self.equatorial, self.polar);
        let w = (c * c * st * st + a * a * ct * ct).sqrt();
        Vec3::new(c * st * cp, c * st * sp, a * ct) / w
    }

    pub fn surface_frame(&self, patch: PatchId, sigma: [f64; 2]) -> Result<SurfaceFrame> {
        let p = self.patch(patch)?;
        if !p.contains(sigma) || !sigma.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "parameter ({}, {}) outside patch {patch}",
                sigma[0], sigma[1]
            )));
        }
        Ok(self.frame_unchecked(sigma))
    }

    pub(crate) fn frame_unchecked(&self, sigma: [f64; 2]) -> SurfaceFrame {
        let (a, c) = (self.equatorial, self.polar);
        let (st, ct) = sigma[0].sin_cos();
        let (sp, cp) = sigma[1].sin_cos();
        let w = (c * c * st * st + a * a * ct * ct).sqrt();
        let position = self.center + Vec3::new(a * st * cp, a * st * sp, c * ct);
        let normal = Vec3::new(c * st * cp, c * st * sp, a * ct) / w;
        let d_theta = Vec3::new(a * ct * cp, a * ct * sp, -c * st);
        let d_phi = Vec3::new(-a * st * sp, a * st * cp, 0.0);
        let (kappa_param, rho_param) = if a == c {
            ([1.0 / a; 2], [a; 2])
        } else {
            let rho = [w * w * w / (a * c), a * w / c];
            ([1.0 / rho[0], 1.0 / rho[1]], rho)
        };
        SurfaceFrame {
            position,
            normal,
            d_sigma: [d_theta, d_phi],
            unit_tangent: [d_theta / w, Vec3::new(-sp, cp, 0.0)],
            kappa_param,
            rho_param,
            area_factor: w * a * st.abs(),
        }
    }

    /// Closest point on the surface within the meridian half-plane of `x`.
    ///
    /// Returns `(θ, φ, s)` where `s` is the signed distance along the normal.
    pub(crate) fn foot_point(&self, x: Vec3) -> Option<(f64, f64, f64)> {
        let q = x - self.center;
        let rho = q.x.hypot(q.y);
        let z = q.z;
        let phi = if rho > 0.0 { q.y.atan2(q.x) } else { 0.0 };
        let (a, c) = (self.equatorial, self.polar);
        if a == c {
            let r = rho.hypot(z);
            if r == 0.0 {
                return None;
            }
            return Some((rho.atan2(z), phi, r - a));
        }

        let dist2 = |t: f64| {
            let (st, ct) = t.sin_cos();
            (rho - a * st).powi(2) + (z - c * ct).powi(2)
        };
        // Half-derivative of dist2 and its derivative.
        let g = |t: f64| {
            let (st, ct) = t.sin_cos();
            -(rho - a * st) * a * ct + (z - c * ct) * c * st
        };
        let dg = |t: f64| {
            let (st, ct) = t.sin_cos();
            a * a * ct * ct + a * rho * st - a * a * st * st + c * c * st * st + c * z * ct
                - c * c * ct * ct
        };
        let newton = |mut t: f64, lo: f64, hi: f64| -> Option<f64> {
            let (mut lo, mut hi) = (lo, hi);
            for _ in 0..100 {
                let gv = g(t);
                if gv > 0.0 {
                    hi = hi.min(t);
                } else {
                    lo = lo.max(t);
                }
                let d = dg(t);
                let mut next = if d > 0.0 { t - gv / d } else { f64::NAN };
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                    return Some(next);
                }
                t = next;
                if hi - lo < 1e-16 {
                    return Some(t);
                }
            }
            if g(t).abs() < 1e-12 * (1.0 + rho + z.abs()) {
                Some(t)
            } else {
                None
            }
        };
        let finish = |t: f64| {
            let sigma = [t, phi];
            let s = (x - self.position(sigma)).dot(&self.normal(sigma));
            (t, phi, s)
        };

        // Fast path: outside the body the distance along a half meridian has a
        // single local minimum, bracketed by g(0) <= 0 <= g(π).
        let outside = (rho / a).powi(2) + (z / c).powi(2) > 1.0;
        if outside {
            let seed = (a * rho).atan2(c * z);
            if let Some(t) = newton(seed, 0.0, PI) {
                return Some(finish(t));
            }
        }

        // Multi-start: scan 64 seeds, refine every bracketed minimum of dist2,
        // keep the closest foot.
        const SEEDS: usize = 64;
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |t: f64| {
            let d = dist2(t);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((t, d));
            }
        };
        consider(0.0);
        consider(PI);
        let grid: Vec<f64> = (0..=SEEDS).map(|i| PI * i as f64 / SEEDS as f64).collect();
        for w in grid.windows(2) {
            let (l, r) = (w[0], w[1]);
            if g(l) <= 0.0 && g(r) >= 0.0 {
                if let Some(t) = newton(0.5 * (l + r), l, r) {
                    consider(t);
                }
            }
        }
        best.map(|(t, _)| finish(t))
    }
}
