//! Obstacles `V` described by signed distance functions or closed meshes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::stl::{self, Triangle};
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleSpec {
    /// Free space: `Ω = ℝ³`.
    None,
    Ball {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    /// Two balls on the `z` axis bridged by a cylindrical neck, blended with
    /// a polynomial smooth minimum of width `blend`.
    Dogbone {
        #[serde(default)]
        center: [f64; 3],
        lobe_radius: f64,
        lobe_offset: f64,
        neck_radius: f64,
        #[serde(default = "default_blend")]
        blend: f64,
    },
    /// Tube of radius `tube_radius` swept along the planar curve
    /// `(τ, amplitude·sin(2πτ/wavelength), 0)`, `|τ| ≤ length/2`.
    Snake {
        #[serde(default)]
        center: [f64; 3],
        length: f64,
        amplitude: f64,
        wavelength: f64,
        tube_radius: f64,
    },
    /// Watertight binary STL mesh.
    Mesh { path: PathBuf },
}

fn default_blend() -> f64 {
    0.1
}

#[derive(Debug, Clone)]
pub enum Obstacle {
    None,
    Ball {
        center: Vec3,
        radius: f64,
    },
    Dogbone {
        center: Vec3,
        lobe_radius: f64,
        lobe_offset: f64,
        neck_radius: f64,
        blend: f64,
    },
    Snake {
        center: Vec3,
        tube_radius: f64,
        polyline: Vec<Vec3>,
        half_extent: Vec3,
    },
    Mesh {
        triangles: Vec<Triangle>,
        lo: Vec3,
        hi: Vec3,
    },
}

/// Polynomial smooth minimum.
fn smin(a: f64, b: f64, k: f64) -> f64 {
    if k <= 0.0 {
        return a.min(b);
    }
    let h = (k - (a - b).abs()).max(0.0) / k;
    a.min(b) - h * h * k * 0.25
}

fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
fn closest_point_on_triangle(p: Vec3, [a, b, c]: &Triangle) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Signed solid angle of a triangle seen from `p` (Van Oosterom–Strackee).
fn solid_angle(p: Vec3, [a, b, c]: &Triangle) -> f64 {
    let (ra, rb, rc) = (a - p, b - p, c - p);
    let (la, lb, lc) = (ra.norm(), rb.norm(), rc.norm());
    let num = ra.dot(&rb.cross(&rc));
    let den = la * lb * lc + ra.dot(&rb) * lc + rb.dot(&rc) * la + rc.dot(&ra) * lb;
    2.0 * num.atan2(den)
}

impl Obstacle {
    pub fn from_spec(spec: &ObstacleSpec, base_dir: Option<&Path>) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("obstacle.{name} must be positive, got {v}")))
            }
        };
        Ok(match spec {
            ObstacleSpec::None => Obstacle::None,
            ObstacleSpec::Ball { center, radius } => Obstacle::Ball {
                center: Vec3::from(*center),
                radius: positive("radius", *radius)?,
            },
            ObstacleSpec::Dogbone {
                center,
                lobe_radius,
                lobe_offset,
                neck_radius,
                blend,
            } => {
                if *blend < 0.0 || *lobe_offset < 0.0 {
                    return Err(Error::Config(
                        "obstacle.blend and obstacle.lobe_offset must be non-negative".into(),
                    ));
                }
                Obstacle::Dogbone {
                    center: Vec3::from(*center),
                    lobe_radius: positive("lobe_radius", *lobe_radius)?,
                    lobe_offset: *lobe_offset,
                    neck_radius: positive("neck_radius", *neck_radius)?,
                    blend: *blend,
                }
            }
            ObstacleSpec::Snake {
                center,
                length,
                amplitude,
                wavelength,
                tube_radius,
            } => {
                let length = positive("length", *length)?;
                let wavelength = positive("wavelength", *wavelength)?;
                let tube_radius = positive("tube_radius", *tube_radius)?;
                let center = Vec3::from(*center);
                let n = 400;
                let polyline = (0..=n)
                    .map(|i| {
                        let tau = -0.5 * length + length * i as f64 / n as f64;
                        center + Vec3::new(tau, amplitude * (2.0 * PI * tau / wavelength).sin(), 0.0)
                    })
                    .collect();
                Obstacle::Snake {
                    center,
                    tube_radius,
                    polyline,
                    half_extent: Vec3::new(
                        0.5 * length + tube_radius,
                        amplitude.abs() + tube_radius,
                        tube_radius,
                    ),
                }
            }
            ObstacleSpec::Mesh { path } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Self::from_triangles(stl::read_binary(&full)?)?
            }
        })
    }

    pub fn from_triangles(triangles: Vec<Triangle>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Config("mesh obstacle has no triangles".into()));
        }
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in triangles.iter().flatten() {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        Ok(Obstacle::Mesh { triangles, lo, hi })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Obstacle::None)
    }

    /// Negative inside `V`, positive in `Ω`. Exact for the ball and the mesh,
    /// a sign-correct Lipschitz bound for the blended shapes.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        match self {
            Obstacle::None => f64::INFINITY,
            Obstacle::Ball { center, radius } => (x - center).norm() - radius,
            Obstacle::Dogbone {
                center,
                lobe_radius,
                lobe_offset,
                neck_radius,
                blend,
            } => {
                let p = x - center;
                let off = Vec3::new(0.0, 0.0, *lobe_offset);
                let top = (p - off).norm() - lobe_radius;
                let bottom = (p + off).norm() - lobe_radius;
                let neck = segment_distance(p, -off, off) - neck_radius;
                smin(smin(top, bottom, *blend), neck, *blend)
            }
            Obstacle::Snake {
                tube_radius,
                polyline,
                ..
            } => {
                let d = polyline
                    .windows(2)
                    .map(|w| segment_distance(*x, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min);
                d - tube_radius
            }
            Obstacle::Mesh { triangles, .. } => {
                let d = triangles
                    .iter()
                    .map(|t| (closest_point_on_triangle(*x, t) - x).norm_squared())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                if self.winding_number(x) > 0.5 {
                    -d
                } else {
                    d
                }
            }
        }
    }

    fn winding_number(&self, x: &Vec3) -> f64 {
        match self {
            Obstacle::Mesh { triangles, lo, hi } => {
                if (0..3).any(|k| x[k] < lo[k] || x[k] > hi[k]) {
                    return 0.0;
                }
                triangles.iter().map(|t| solid_angle(*x, t)).sum::<f64>() / (4.0 * PI)
            }
            _ => 0.0,
        }
    }

    /// Inside test for the closed set `V̄`.
    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            Obstacle::None => false,
            Obstacle::Mesh { .. } => self.winding_number(x) > 0.5,
            _ => self.signed_distance(x) <= 0.0,
        }
    }

    /// Outward unit normal `n`, from the gradient of the signed distance.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        match self {
            Obstacle::None => Vec3::zeros(),
            Obstacle::Ball { center, .. } => (x - center).normalize(),
            _ => self.sdf_gradient(x, 1e-6).normalize(),
        }
    }

    fn sdf_gradient(&self, x: &Vec3, h: f64) -> Vec3 {
        let mut g = Vec3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            g[k] = (self.signed_distance(&(x + e)) - self.signed_distance(&(x - e))) / (2.0 * h);
        }
        g
    }

    /// Axis-aligned bounding box `(lo, hi)` of `V`.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        match self {
            Obstacle::None => None,
            Obstacle::Ball { center, radius } => {
                Some((center - Vec3::repeat(*radius), center + Vec3::repeat(*radius)))
            }
            Obstacle::Dogbone {
                center,
                lobe_radius,
                lobe_offset,
                neck_radius,
                blend,
            } => {
                let r = lobe_radius.max(*neck_radius) + blend;
                let e = Vec3::new(r, r, lobe_offset + r);
                Some((center - e, center + e))
            }
            Obstacle::Snake {
                center, half_extent, ..
            } => Some((center - half_extent, center + half_extent)),
            Obstacle::Mesh { lo, hi, .. } => Some((*lo, *hi)),
        }
    }

    /// Largest `|x|` over `V̄` (bounded by the box corners).
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Obstacle::None => 0.0,
            Obstacle::Ball { center, radius } => center.norm() + radius,
            _ => {
                let (lo, hi) = self.bounds().unwrap();
                let c = Vec3::new(lo.x.abs().max(hi.x.abs()), lo.y.abs().max(hi.y.abs()), lo.z.abs().max(hi.z.abs()));
                c.norm()
            }
        }
    }

    /// Deterministic samples of `∂V` for a given seed.
    pub fn sample_surface(&self, n: usize, seed: u64) -> Vec<Vec3> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Obstacle::None => Vec::new(),
            Obstacle::Ball { center, radius } => {
                let offset: f64 = rng.random();
                fibonacci_sphere(n, offset)
                    .into_iter()
                    .map(|d| center + *radius * d)
                    .collect()
            }
            Obstacle::Mesh { triangles, .. } => {
                let areas: Vec<f64> = triangles
                    .iter()
                    .map(|t| 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm())
                    .collect();
                let total: f64 = areas.iter().sum();
                let mut cumulative = Vec::with_capacity(areas.len());
                let mut acc = 0.0;
                for a in &areas {
                    acc += a / total;
                    cumulative.push(acc);
                }
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let i = cumulative.partition_point(|&c| c < u).min(triangles.len() - 1);
                        let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
                        if r1 + r2 > 1.0 {
                            r1 = 1.0 - r1;
                            r2 = 1.0 - r2;
                        }
                        let [a, b, c] = triangles[i];
                        a + r1 * (b - a) + r2 * (c - a)
                    })
                    .collect()
            }
            _ => {
                let (lo, hi) = self.bounds().unwrap();
                let pad = Vec3::repeat(0.05 * (hi - lo).max());
                let (lo, hi) = (lo - pad, hi + pad);
                let mut out = Vec::with_capacity(n);
                let mut attempts = 0usize;
                while out.len() < n && attempts < 50 * n + 1000 {
                    attempts += 1;
                    let mut x = Vec3::new(
                        lo.x + (hi.x - lo.x) * rng.random::<f64>(),
                        lo.y + (hi.y - lo.y) * rng.random::<f64>(),
                        lo.z + (hi.z - lo.z) * rng.random::<f64>(),
                    );
                    if let Some(p) = self.project(&mut x) {
                        out.push(p);
                    }
                }
                out
            }
        }
    }

    /// Newton projection onto the zero level set along the gradient.
    fn project(&self, x: &mut Vec3) -> Option<Vec3> {
        for _ in 0..60 {
            let f = self.signed_distance(x);
            if f.abs() < 1e-12 {
                return Some(*x);
            }
            let g = self.sdf_gradient(x, 1e-7);
            let g2 = g.norm_squared();
            if g2 < 1e-8 {
                return None;
            }
            *x -= g * (f / g2);
        }
        None
    }
}

/// Quasi-uniform unit vectors on the sphere.
pub fn fibonacci_sphere(n: usize, offset: f64) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let a = golden * i as f64 + 2.0 * PI * offset;
            Vec3::new(r * a.cos(), r * a.sin(), z)
        })
        .collect()
}
