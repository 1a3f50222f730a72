use crate::error::{Error, Result};
use crate::geometry::{decompose_gradient, IlluminatingBody, IlluminatingCoords, SurfaceFrame, Vec3};

/// Field values at one point together with its illuminating geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub u: f64,
    pub du_dt: f64,
    pub grad_u: Vec3,
    pub coords: IlluminatingCoords,
    pub frame: SurfaceFrame,
    pub rho2m: f64,
    pub t: f64,
    pub m: f64,
}

impl FieldSample {
    /// Locate `x` in the body's illuminating coordinates and attach fields.
    #[allow(clippy::too_many_arguments)]
    pub fn at(
        body: &IlluminatingBody,
        x: &Vec3,
        u: f64,
        du_dt: f64,
        grad_u: Vec3,
        t: f64,
        m: f64,
    ) -> Result<Self> {
        if m < body.rho2m() {
            return Err(Error::Config(format!(
                "M = {m} is smaller than rho2M = {}",
                body.rho2m()
            )));
        }
        let (coords, frame) = body.locate(x)?;
        Ok(FieldSample {
            u,
            du_dt,
            grad_u,
            coords,
            frame,
            rho2m: body.rho2m(),
            t,
            m,
        })
    }

    /// `s + ρ₂M`.
    pub fn level(&self) -> f64 {
        self.coords.s + self.rho2m
    }

    /// `α = (s + ρ₂M) ν`.
    pub fn alpha(&self) -> Vec3 {
        self.level() * self.frame.normal
    }

    pub fn energy_density(&self) -> f64 {
        energy_density(self.u, self.du_dt, &self.grad_u)
    }
}

/// `Q`, `P`, `R` of the multiplier identity together with `Nu` and `e(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierDensities {
    pub q: f64,
    pub p: Vec3,
    pub r: f64,
    pub nu: f64,
    pub e: f64,
}

/// `e(u) = ½(u_t² + |∇u|²) + u⁶/6`.
pub fn energy_density(u: f64, du_dt: f64, grad_u: &Vec3) -> f64 {
    0.5 * (du_dt * du_dt + grad_u.norm_squared()) + u.powi(6) / 6.0
}

fn ray_factors(c: &IlluminatingCoords, frame: &SurfaceFrame) -> Result<(f64, f64)> {
    let f1 = frame.kappa1() * c.s + 1.0;
    let f2 = frame.kappa2() * c.s + 1.0;
    if f1 > 0.0 && f2 > 0.0 {
        Ok((c.s + frame.rho1(), c.s + frame.rho2()))
    } else {
        Err(Error::Domain(format!(
            "degenerate ray: κs + 1 = ({f1:.3e}, {f2:.3e}) at s = {}",
            c.s
        )))
    }
}

/// `div α = 3 + Σᵢ (ρ₂M − ρᵢ)/(s + ρᵢ)`.
pub fn div_alpha(c: &IlluminatingCoords, frame: &SurfaceFrame, rho2m: f64) -> Result<f64> {
    let (d1, d2) = ray_factors(c, frame)?;
    Ok(3.0 + (rho2m - frame.rho1()) / d1 + (rho2m - frame.rho2()) / d2)
}

/// `H_α(∇u, ∇u) = |∇u|² + Σᵢ (ρ₂M − ρᵢ)/(s + ρᵢ) |∇*ᵢu|²`.
pub fn h_alpha(grad_u: &Vec3, c: &IlluminatingCoords, frame: &SurfaceFrame, rho2m: f64) -> Result<f64> {
    let (d1, d2) = ray_factors(c, frame)?;
    let split = decompose_gradient(grad_u, frame);
    Ok(grad_u.norm_squared()
        + (rho2m - frame.rho1()) / d1 * split.tangential[0].powi(2)
        + (rho2m - frame.rho2()) / d2 * split.tangential[1].powi(2))
}

/// Multiplier `Nu = u + α·∇u + (t + M) u_t`.
pub fn multiplier_value(sample: &FieldSample) -> f64 {
    sample.u + sample.alpha().dot(&sample.grad_u) + (sample.t + sample.m) * sample.du_dt
}

pub fn qpr_densities(sample: &FieldSample) -> Result<MultiplierDensities> {
    let div = div_alpha(&sample.coords, &sample.frame, sample.rho2m)?;
    let h = h_alpha(&sample.grad_u, &sample.coords, &sample.frame, sample.rho2m)?;
    let FieldSample { u, du_dt: ut, grad_u: g, t, m, .. } = *sample;
    let alpha = sample.alpha();
    let tm = t + m;
    let g2 = g.norm_squared();
    let u6 = u.powi(6) / 6.0;
    let ag = alpha.dot(&g);
    let q = tm * (0.5 * g2 + u6 + 0.5 * ut * ut) + ut * ag + u * ut;
    let p = (0.5 * g2 + u6 - 0.5 * ut * ut) * alpha - (tm * ut + ag + u) * g;
    let r = (div - 3.0) * 0.5 * ut * ut + (1.0 - div) * 0.5 * g2 + (5.0 - div) * u6 + h;
    Ok(MultiplierDensities {
        q,
        p,
        r,
        nu: u + ag + tm * ut,
        e: energy_density(u, ut, &g),
    })
}

/// `Q − P·ν` on the mantle `s + ρ₂M = t + M`, directly and in closed form
/// `(s + ρ₂M)(u_t + ∂_s u)² + u(u_t + ∂_s u)`.
pub fn mantle_density(sample: &FieldSample) -> Result<(f64, f64)> {
    let level = sample.level();
    let tm = sample.t + sample.m;
    if (level - tm).abs() > 1e-9 * (1.0 + tm.abs()) {
        return Err(Error::Domain(format!(
            "sample is off the mantle: s + rho2M = {level}, t + M = {tm}"
        )));
    }
    let d = qpr_densities(sample)?;
    let direct = d.q - d.p.dot(&sample.frame.normal);
    let w = sample.du_dt + sample.grad_u.dot(&sample.frame.normal);
    Ok((direct, level * w * w + sample.u * w))
}

/// Boundary integrand `½ |∇u·n|² (α·n)` on `∂V`.
pub fn boundary_density(grad_u: &Vec3, n: &Vec3, alpha: &Vec3) -> f64 {
    0.5 * grad_u.dot(n).powi(2) * alpha.dot(n)
}

/// `I(T)` of the time-slice computation: the two null-direction squares plus
/// `(T + M) u⁶/6`.
pub fn time_slice_i(sample: &FieldSample) -> f64 {
    let level = sample.level();
    let tm = sample.t + sample.m;
    let ds = sample.grad_u.dot(&sample.frame.normal) + sample.u / level;
    0.25 * (tm + level) * (sample.du_dt + ds).powi(2)
        + 0.25 * (tm - level) * (sample.du_dt - ds).powi(2)
        + tm * sample.u.powi(6) / 6.0
}

/// Right side `Q + (T+M)/2 (u²/(s+ρ₂M)² + 2u∂_s u/(s+ρ₂M)) − (T+M)|∇*u|²/2`
/// of the `I(T)` expansion.
pub fn time_slice_i_expansion(sample: &FieldSample) -> Result<f64> {
    let d = qpr_densities(sample)?;
    let level = sample.level();
    let tm = sample.t + sample.m;
    let split = decompose_gradient(&sample.grad_u, &sample.frame);
    let u = sample.u;
    Ok(d.q + 0.5 * tm * (u * u / (level * level) + 2.0 * u * split.normal / level)
        - 0.5 * tm * split.tangential_sq())
}

/// Weight `(s + ρ₁)(s + ρ₂)/(s + ρ₂M)²` of the time-slice computation and its
/// `s`-derivative.
pub fn slice_weight(s: f64, rho1: f64, rho2: f64, rho2m: f64) -> (f64, f64) {
    let (a, b, c) = (s + rho1, s + rho2, s + rho2m);
    let w = a * b / (c * c);
    let dw = ((rho2m - rho1) * b + (rho2m - rho2) * a) / (c * c * c);
    (w, dw)
}
