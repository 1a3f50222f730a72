//! Closed-form fields and the finite-difference check of
//! `∂_t Q + div P + R = (□u + u⁵) Nu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{IlluminatingBody, Obstacle, Vec3};
use crate::multiplier::densities::{multiplier_value, qpr_densities, FieldSample};

/// A smooth field `u(t, x)` with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Manufactured {
    Zero,
    /// `u = x₁`.
    LinearX1,
    /// `u = exp(−|x − x₀|² − t²)`.
    Gaussian {
        #[serde(default)]
        center: [f64; 3],
    },
    /// `u = sin(k·x) cos(|k| t)`, a free wave.
    Standing { k: [f64; 3] },
}

/// `u`, `u_t`, `∇u` and `□u = u_tt − Δu` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub du_dt: f64,
    pub grad_u: Vec3,
    pub box_u: f64,
}

impl Manufactured {
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "zero" => Manufactured::Zero,
            "linear_x1" => Manufactured::LinearX1,
            "gaussian" => Manufactured::Gaussian { center: [0.0; 3] },
            "standing" => Manufactured::Standing { k: [1.0, 2.0, -1.5] },
            other => {
                return Err(Error::Config(format!(
                    "unknown manufactured solution id {other:?} (expected zero, linear_x1, gaussian or standing)"
                )))
            }
        })
    }

    pub fn jet(&self, t: f64, x: &Vec3) -> Jet {
        match *self {
            Manufactured::Zero => Jet {
                u: 0.0,
                du_dt: 0.0,
                grad_u: Vec3::zeros(),
                box_u: 0.0,
            },
            Manufactured::LinearX1 => Jet {
                u: x.x,
                du_dt: 0.0,
                grad_u: Vec3::x(),
                box_u: 0.0,
            },
            Manufactured::Gaussian { center } => {
                let d = x - Vec3::from(center);
                let u = (-d.norm_squared() - t * t).exp();
                Jet {
                    u,
                    du_dt: -2.0 * t * u,
                    grad_u: -2.0 * u * d,
                    box_u: (4.0 * t * t - 2.0) * u - (4.0 * d.norm_squared() - 6.0) * u,
                }
            }
            Manufactured::Standing { k } => {
                let k = Vec3::from(k);
                let w = k.norm();
                let (sx, cx) = k.dot(x).sin_cos();
                let (st, ct) = (w * t).sin_cos();
                Jet {
                    u: sx * ct,
                    du_dt: -w * sx * st,
                    grad_u: cx * ct * k,
                    box_u: 0.0,
                }
            }
        }
    }
}

/// Geometry shared by identity evaluations.
#[derive(Debug, Clone, Copy)]
pub struct IdentitySetup<'a> {
    pub body: &'a IlluminatingBody,
    pub obstacle: Option<&'a Obstacle>,
    pub m: f64,
}

impl IdentitySetup<'_> {
    fn sample(&self, sol: &Manufactured, t: f64, x: &Vec3) -> Result<FieldSample> {
        let j = sol.jet(t, x);
        FieldSample::at(self.body, x, j.u, j.du_dt, j.grad_u, t, self.m)
    }
}

/// `|∂_t Q + div P + R − (□u + u⁵) Nu|` with `∂_t Q` and `div P` taken by
/// central differences of step `h`.
pub fn identity_residual(setup: &IdentitySetup, sol: &Manufactured, x: &Vec3, t: f64, h: f64) -> Result<f64> {
    let stencil_error = |p: &Vec3, reason: String| Error::Stencil {
        x: p.x,
        y: p.y,
        z: p.z,
        reason,
    };
    let mut points = vec![*x];
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        points.push(x + e);
        points.push(x - e);
    }
    if let Some(obs) = setup.obstacle {
        if let Some(p) = points.iter().find(|p| obs.contains(p)) {
            return Err(stencil_error(p, "lies inside the obstacle".into()));
        }
    }
    let sample = |t: f64, p: &Vec3| {
        setup
            .sample(sol, t, p)
            .map_err(|e| stencil_error(p, format!("has no valid illuminating coordinates ({e})")))
    };

    let centre = sample(t, x)?;
    let d0 = qpr_densities(&centre)?;
    let dq_dt = (qpr_densities(&sample(t + h, x)?)?.q - qpr_densities(&sample(t - h, x)?)?.q) / (2.0 * h);
    let mut div_p = 0.0;
    for k in 0..3 {
        let plus = qpr_densities(&sample(t, &points[1 + 2 * k])?)?;
        let minus = qpr_densities(&sample(t, &points[2 + 2 * k])?)?;
        div_p += (plus.p[k] - minus.p[k]) / (2.0 * h);
    }
    let jet = sol.jet(t, x);
    let defect = (jet.box_u + jet.u.powi(5)) * multiplier_value(&centre);
    Ok((dq_dt + div_p + d0.r - defect).abs())
}

/// One row of a residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub h: f64,
    pub residual: f64,
    /// `log₂(residual(2h)/residual(h))`; `None` on the first row or when a
    /// residual vanishes.
    pub order: Option<f64>,
}

/// Residuals (maximum over `points`) at `h₀, h₀/2, …` with observed orders.
pub fn residual_table(
    setup: &IdentitySetup,
    sol: &Manufactured,
    points: &[(Vec3, f64)],
    h0: f64,
    levels: usize,
) -> Result<Vec<ResidualRow>> {
    let mut rows: Vec<ResidualRow> = Vec::with_capacity(levels);
    for l in 0..levels {
        let h = h0 / f64::powi(2.0, l as i32);
        let mut residual: f64 = 0.0;
        for (x, t) in points {
            residual = residual.max(identity_residual(setup, sol, x, *t, h)?);
        }
        let order = rows
            .last()
            .filter(|prev| prev.residual > 0.0 && residual > 0.0)
            .map(|prev| (prev.residual / residual).log2());
        rows.push(ResidualRow { h, residual, order });
    }
    Ok(rows)
}

/// Least-squares slope of `log residual` against `log h` over nonzero rows.
pub fn fitted_order(rows: &[ResidualRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.residual > 0.0)
        .map(|r| (r.h.ln(), r.residual.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
