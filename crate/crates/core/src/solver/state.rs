use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::config::SolverConfig;
use crate::solver::grid::{Cell, Grid};

/// Three time levels of the leapfrog scheme.
///
/// Between steps `u_prev`, `u_curr` hold levels `n − 1`, `n`; after
/// [`advance`] `u_next` holds level `n + 1` until [`WaveState::rotate`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub u_next: Vec<f64>,
    /// Time of `u_curr`.
    pub t: f64,
    pub dt: f64,
    pub step_index: usize,
}

impl WaveState {
    pub fn zeros(len: usize, dt: f64) -> Self {
        WaveState {
            u_prev: vec![0.0; len],
            u_curr: vec![0.0; len],
            u_next: vec![0.0; len],
            t: 0.0,
            dt,
            step_index: 0,
        }
    }

    pub fn rotate(&mut self) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.u_next);
        self.step_index += 1;
        self.t = self.step_index as f64 * self.dt;
    }
}

fn laplacian(u: &[f64], idx: usize, plane: usize, n: usize) -> f64 {
    ((u[idx - plane] + u[idx + plane]) + (u[idx - n] + u[idx + n])) + (u[idx - 1] + u[idx + 1]) - 6.0 * u[idx]
}

/// Zero-velocity data: `u⁰` from the bump, `u⁻¹ = u⁰ + ½dt²(Δ_h u⁰ − u⁰⁵)`.
pub fn init_state(config: &SolverConfig, grid: &Grid) -> WaveState {
    let dt = config.dt();
    let mut state = WaveState::zeros(grid.len(), dt);
    let n = grid.n;
    let plane = n * n;
    state.u_curr.par_chunks_mut(plane).enumerate().for_each(|(i, out)| {
        for (l, v) in out.iter_mut().enumerate() {
            let idx = i * plane + l;
            if grid.mask[idx] == Cell::Exterior {
                *v = config.bump.value(&grid.point(idx));
            }
        }
    });
    let c = (dt / grid.h).powi(2);
    let nl = if config.nonlinear { 1.0 } else { 0.0 };
    let curr = &state.u_curr;
    state.u_prev.par_chunks_mut(plane).enumerate().for_each(|(i, out)| {
        for (l, v) in out.iter_mut().enumerate() {
            let idx = i * plane + l;
            if grid.mask[idx] == Cell::Exterior {
                let u = curr[idx];
                *v = u + 0.5 * (c * laplacian(curr, idx, plane, n) - nl * dt * dt * u.powi(5));
            }
        }
    });
    state
}

/// Compute level `n + 1` into `u_next`:
/// `u_next = 2u − u_prev + dt²(Δ_h u − u⁵)` on exterior nodes.
pub fn advance(state: &mut WaveState, grid: &Grid, nonlinear: bool) -> Result<()> {
    let n = grid.n;
    let plane = n * n;
    let dt = state.dt;
    let c = (dt / grid.h).powi(2);
    let dt2 = dt * dt;
    let (prev, curr) = (&state.u_prev, &state.u_curr);
    let bad = state
        .u_next
        .par_chunks_mut(plane)
        .enumerate()
        .map(|(i, out)| {
            if i == 0 || i == n - 1 {
                return None;
            }
            let mut first = None;
            for j in 1..n - 1 {
                for k in 1..n - 1 {
                    let l = j * n + k;
                    let idx = i * plane + l;
                    if grid.mask[idx] != Cell::Exterior {
                        continue;
                    }
                    let u = curr[idx];
                    let mut v = 2.0 * u - prev[idx] + c * laplacian(curr, idx, plane, n);
                    if nonlinear {
                        v -= dt2 * u.powi(5);
                    }
                    if !v.is_finite() && first.is_none() {
                        first = Some(idx);
                    }
                    out[l] = v;
                }
            }
            first
        })
        .collect::<Vec<_>>();
    if let Some(idx) = bad.into_iter().flatten().next() {
        let (i, j, k) = grid.ijk(idx);
        return Err(Error::Instability {
            i,
            j,
            k,
            t: state.t + dt,
        });
    }
    Ok(())
}

/// One leapfrog step.
pub fn step(state: &mut WaveState, grid: &Grid, nonlinear: bool) -> Result<()> {
    advance(state, grid, nonlinear)?;
    state.rotate();
    Ok(())
}

/// Discrete energy between consecutive levels `a = uⁿ`, `b = uⁿ⁺¹`:
/// `½|D_t u|² + ½ D⁺uⁿ·D⁺uⁿ⁺¹`, plus `(uₙ⁶ + uₙ₊₁⁶)/12` for the nonlinear
/// equation, summed over the grid.
///
/// Exactly conserved by the linear scheme.
pub fn energy_between(a: &[f64], b: &[f64], grid: &Grid, dt: f64, nonlinear: bool) -> f64 {
    let n = grid.n;
    let plane = n * n;
    let h = grid.h;
    let partials: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut kin = 0.0;
            let mut pot = 0.0;
            let mut grad = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let idx = i * plane + j * n + k;
                    if grid.mask[idx] == Cell::Exterior {
                        let d = b[idx] - a[idx];
                        kin += d * d;
                        if nonlinear {
                            pot += a[idx].powi(6) + b[idx].powi(6);
                        }
                    }
                    for (s, inside) in [(plane, i + 1 < n), (n, j + 1 < n), (1, k + 1 < n)] {
                        if inside {
                            grad += (a[idx + s] - a[idx]) * (b[idx + s] - b[idx]);
                        }
                    }
                }
            }
            0.5 * kin / (dt * dt) + 0.5 * grad / (h * h) + pot / 12.0
        })
        .collect();
    partials.iter().sum::<f64>() * h * h * h
}

/// Energy between `u_prev` and `u_curr`.
pub fn total_energy(state: &WaveState, grid: &Grid, nonlinear: bool) -> f64 {
    energy_between(&state.u_prev, &state.u_curr, grid, state.dt, nonlinear)
}
