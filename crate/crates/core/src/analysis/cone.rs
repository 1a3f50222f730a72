use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::analysis::series::DecaySeries;
use crate::error::{Error, Result};

/// Relative slack of the exterior-cone check, as a fraction of `E`.
pub const CONE_TOLERANCE: f64 = 0.05;

/// `∫_{s+ρ₂M>T+M} e(u)(T) + flux(0,T)/√2 ≤ ∫_{s+ρ₂M>M} e(u)(0)` at every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: f64,
    pub energy: f64,
    pub tolerance: f64,
    /// `(rhs − lhs) / E`, zero when `E = 0`.
    pub margin: Vec<f64>,
    pub pass: bool,
}

impl ConeCheck {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest left-hand side relative to `E`.
    pub fn max_lhs_over_energy(&self) -> f64 {
        let m = self.lhs.iter().copied().fold(0.0, f64::max);
        if self.energy > 0.0 {
            m / self.energy
        } else {
            m
        }
    }
}

pub fn exterior_cone_check(series: &DecaySeries) -> Result<ConeCheck> {
    let first = series
        .records
        .first()
        .filter(|r| r.t.abs() <= 1e-12)
        .ok_or_else(|| Error::Missing("exterior-cone check needs the state at t = 0".into()))?;
    if series.records.len() < 2 {
        return Err(Error::Missing("exterior-cone check needs a state after t = 0".into()));
    }
    let energy = first.energy;
    let rhs = first.energy_exterior_cone;
    let tol = CONE_TOLERANCE * energy;
    let times = series.times();
    let lhs: Vec<f64> = series
        .records
        .iter()
        .map(|r| r.energy_exterior_cone + r.flux_0_t / SQRT_2)
        .collect();
    let pass = lhs.iter().all(|&l| l <= rhs + tol);
    let margin = lhs
        .iter()
        .map(|&l| if energy > 0.0 { (rhs - l) / energy } else { rhs - l })
        .collect();
    Ok(ConeCheck {
        times,
        lhs,
        rhs,
        energy,
        tolerance: CONE_TOLERANCE,
        margin,
        pass,
    })
}
