//! Energy flux through the mantle `s + ρ₂M = t + M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// `½|ν u_t + ∇u|² + u⁶/6`.
pub fn flux_density(u: f64, du_dt: f64, grad_u: &Vec3, nu: &Vec3) -> f64 {
    0.5 * (du_dt * nu + grad_u).norm_squared() + u.powi(6) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxRecord {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub mantle_samples: usize,
}

/// Cumulative flux `flux(t₀, tₙ)` sampled at the solver's time levels.
///
/// Each increment is a left-point quadrature over one time step, so windows
/// between stored levels add exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxLedger {
    times: Vec<f64>,
    cumulative: Vec<f64>,
    samples: Vec<usize>,
}

impl FluxLedger {
    pub fn new(t0: f64) -> Self {
        FluxLedger {
            times: vec![t0],
            cumulative: vec![0.0],
            samples: vec![0],
        }
    }

    /// Append the increment over `[last time, t]` from `count` slab nodes.
    pub fn push(&mut self, t: f64, increment: f64, count: usize) {
        let last = self.cumulative.last().copied().unwrap_or(0.0);
        let n = self.samples.last().copied().unwrap_or(0);
        self.times.push(t);
        self.cumulative.push(last + increment.max(0.0));
        self.samples.push(n + count);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * (1.0 + t.abs());
        let i = self.times.partition_point(|&s| s < t - tol);
        match self.times.get(i) {
            Some(&s) if (s - t).abs() <= tol => Ok(i),
            _ => Err(Error::Missing(format!("no flux history at t = {t}"))),
        }
    }

    /// `flux(a, b)`.
    pub fn flux(&self, a: f64, b: f64) -> Result<FluxRecord> {
        if b < a {
            return Err(Error::Domain(format!("flux window ({a}, {b}) is reversed")));
        }
        let (i, j) = (self.index_of(a)?, self.index_of(b)?);
        Ok(FluxRecord {
            a,
            b,
            value: self.cumulative[j] - self.cumulative[i],
            mantle_samples: self.samples[j] - self.samples[i],
        })
    }
}

/// Alias matching the ledger query.
pub fn flux_accumulate(ledger: &FluxLedger, a: f64, b: f64) -> Result<FluxRecord> {
    ledger.flux(a, b)
}
