use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{advance, energy_between, Checkpoint, Simulation};

/// `E₀(u − v; t)` where `v` solves the linear equation with the data of `u`
/// at the matching time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearComparison {
    pub t_match: f64,
    pub times: Vec<f64>,
    pub e0_difference: Vec<f64>,
}

impl LinearComparison {
    pub fn max(&self) -> f64 {
        self.e0_difference.iter().copied().fold(0.0, f64::max)
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.par_iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Restart `u` (with the run's own nonlinearity) and `v` (linear) from the
/// checkpoint and step both to `t_final`, recording at the run cadence.
pub fn linear_compare(sim: &Simulation, checkpoint: &Checkpoint, t_final: f64) -> Result<LinearComparison> {
    let g = &sim.grid;
    if checkpoint.n != g.n || (checkpoint.h - g.h).abs() > 1e-12 * g.h || checkpoint.u_curr.len() != g.len() {
        return Err(Error::Missing("checkpoint does not match the simulation grid".into()));
    }
    let dt = sim.config.dt();
    if (checkpoint.dt - dt).abs() > 1e-12 * dt {
        return Err(Error::Missing("checkpoint time step does not match the configuration".into()));
    }
    if t_final < checkpoint.t {
        return Err(Error::Config(format!("t_final {t_final} is before the checkpoint at {}", checkpoint.t)));
    }
    let steps = ((t_final - checkpoint.t) / dt).round() as usize;
    let every = ((sim.config.cadence / dt).round() as usize).max(1);
    let mut u = checkpoint.restore();
    let mut v = checkpoint.restore();
    let mut times = vec![];
    let mut e0 = vec![];
    for n in 0..=steps {
        advance(&mut u, g, sim.config.nonlinear)?;
        advance(&mut v, g, false)?;
        if n % every == 0 || n == steps {
            let w_prev = diff(&u.u_prev, &v.u_prev);
            let w_curr = diff(&u.u_curr, &v.u_curr);
            let w_next = diff(&u.u_next, &v.u_next);
            let e = 0.5 * (energy_between(&w_prev, &w_curr, g, dt, false) + energy_between(&w_curr, &w_next, g, dt, false));
            times.push(u.t);
            e0.push(e);
        }
        if n < steps {
            u.rotate();
            v.rotate();
        }
    }
    Ok(LinearComparison {
        t_match: checkpoint.t,
        times,
        e0_difference: e0,
    })
}
