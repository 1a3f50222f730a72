use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use crate::geometry::Vec3;
use crate::multiplier::flux_density;
use crate::solver::grid::{ExteriorNode, Grid};
use crate::solver::state::WaveState;

const CHUNK: usize = 1 << 15;

/// Pointwise data at an exterior node at the time of `u_curr`: value,
/// centred time derivative and centred gradient.
#[derive(Debug, Clone, Copy)]
pub struct NodeFields {
    pub u: f64,
    pub du_dt: f64,
    pub grad_u: Vec3,
}

/// Fields at level `n`; requires `u_next` from [`crate::solver::advance`].
pub fn node_fields(state: &WaveState, grid: &Grid, idx: usize) -> NodeFields {
    let n = grid.n;
    let plane = n * n;
    let u = &state.u_curr;
    let inv = 0.5 / grid.h;
    NodeFields {
        u: u[idx],
        du_dt: (state.u_next[idx] - state.u_prev[idx]) / (2.0 * state.dt),
        grad_u: Vec3::new(
            (u[idx + plane] - u[idx - plane]) * inv,
            (u[idx + n] - u[idx - n]) * inv,
            (u[idx + 1] - u[idx - 1]) * inv,
        ),
    }
}

/// Integrals over the exterior at one record time `T`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegionIntegrals {
    /// `∫_{D(T)} u⁶/6`.
    pub l6_d: f64,
    /// `∫_{s+ρ₂M > T+M} e(u)`.
    pub energy_exterior_cone: f64,
    /// `∫_Ω u⁶`, `∫_Ω u¹⁰`, `∫_Ω u¹²`.
    pub l6_omega: f64,
    pub l10: f64,
    pub l12: f64,
    /// `∫ |∇*u|²` over `{s + ρ₂M ≤ εT + M}`.
    pub tangential_sq: f64,
    /// `∫ |∂_s u + u/(s + ρ₂M)|²` over `{s + ρ₂M ≤ εT + M}`.
    pub radial_sq: f64,
}

impl RegionIntegrals {
    fn add(mut self, o: &RegionIntegrals) -> Self {
        self.l6_d += o.l6_d;
        self.energy_exterior_cone += o.energy_exterior_cone;
        self.l6_omega += o.l6_omega;
        self.l10 += o.l10;
        self.l12 += o.l12;
        self.tangential_sq += o.tangential_sq;
        self.radial_sq += o.radial_sq;
        self
    }

    fn scale(mut self, w: f64) -> Self {
        self.l6_d *= w;
        self.energy_exterior_cone *= w;
        self.l6_omega *= w;
        self.l10 *= w;
        self.l12 *= w;
        self.tangential_sq *= w;
        self.radial_sq *= w;
        self
    }

    /// `φ(T)`.
    pub fn phi(&self) -> f64 {
        self.tangential_sq + self.radial_sq
    }
}

/// Share of a cell of width `h` on the inner side of a level surface at
/// signed distance `d`. Cells cut by the surface count fractionally, which
/// keeps the moving-region integrals continuous in `T`.
fn cell_fraction(d: f64, h: f64) -> f64 {
    (d / h + 0.5).clamp(0.0, 1.0)
}

/// Midpoint quadrature over exterior cells at the time of `u_curr`. The
/// energy density carries `u⁶/6` only for the nonlinear equation.
pub fn region_integrals(
    state: &WaveState,
    grid: &Grid,
    t: f64,
    m: f64,
    epsilon: f64,
    nonlinear: bool,
) -> RegionIntegrals {
    let cone = t + m;
    let phi_level = epsilon * t + m;
    let partials: Vec<RegionIntegrals> = grid
        .exterior
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = RegionIntegrals::default();
            for node in chunk {
                let f = node_fields(state, grid, node.index as usize);
                let u2 = f.u * f.u;
                let u6 = u2 * u2 * u2;
                acc.l6_omega += u6;
                acc.l10 += u6 * u2 * u2;
                acc.l12 += u6 * u6;
                let inside = cell_fraction(cone - node.level, grid.h);
                let pot = if nonlinear { u6 / 6.0 } else { 0.0 };
                acc.l6_d += inside * u6 / 6.0;
                acc.energy_exterior_cone +=
                    (1.0 - inside) * (0.5 * (f.du_dt * f.du_dt + f.grad_u.norm_squared()) + pot);
                let w = cell_fraction(phi_level - node.level, grid.h);
                if w > 0.0 {
                    let ds = f.grad_u.dot(&node.nu());
                    acc.tangential_sq += w * (f.grad_u.norm_squared() - ds * ds).max(0.0);
                    acc.radial_sq += w * (ds + f.u / node.level).powi(2);
                }
            }
            acc
        })
        .collect();
    let h3 = grid.h.powi(3);
    partials
        .iter()
        .fold(RegionIntegrals::default(), |a, b| a.add(b))
        .scale(h3)
}

/// Mantle slab `{|s + ρ₂M − (t + M)| ≤ h/2}` at the time of `u_curr`.
pub fn mantle_slab(grid: &Grid, t: f64, m: f64) -> &[ExteriorNode] {
    let c = t + m;
    grid.level_range(c - 0.5 * grid.h, c + 0.5 * grid.h)
}

/// Rate of flux through the mantle at the time of `u_curr`:
/// `√2 · h² · Σ_slab (½|ν u_t + ∇u|² + u⁶/6)`, without `u⁶/6` for the
/// linear equation. Returns the rate and the slab size.
pub fn flux_rate(state: &WaveState, grid: &Grid, m: f64, nonlinear: bool) -> (f64, usize) {
    let slab = mantle_slab(grid, state.t, m);
    let partials: Vec<f64> = slab
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|node| {
                    let f = node_fields(state, grid, node.index as usize);
                    let d = flux_density(f.u, f.du_dt, &f.grad_u, &node.nu());
                    if nonlinear {
                        d
                    } else {
                        d - f.u.powi(6) / 6.0
                    }
                })
                .sum::<f64>()
        })
        .collect();
    let sum: f64 = partials.iter().sum();
    (SQRT_2 * grid.h * grid.h * sum, slab.len())
}
