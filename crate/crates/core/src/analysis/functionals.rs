use serde::{Deserialize, Serialize};

use crate::analysis::series::DecaySeries;
use crate::error::{Error, Result};

/// `φ` per record and its running time average `ψ(T) = (1/T)∫₀ᵀ φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFunctionals {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    /// `∫_{t₀}^{t} φ` by the trapezoid rule.
    pub phi_integral: Vec<f64>,
    pub psi: Vec<f64>,
}

impl DecayFunctionals {
    /// `ψ(T)`, interpolating the cumulative integral linearly between records.
    pub fn psi_at(&self, t: f64) -> Result<f64> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::Missing("empty series".into())),
        };
        let tol = 1e-9 * (1.0 + t.abs());
        if t < first - tol || t > last + tol {
            return Err(Error::Missing(format!("T = {t} outside recorded range [{first}, {last}]")));
        }
        let k = self.times.partition_point(|&s| s < t - tol);
        if (self.times[k] - t).abs() <= tol {
            return Ok(self.psi[k]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        // φ is linear on the interval under the trapezoid rule, so the
        // integral is quadratic; integrate the interpolant exactly.
        let phi_t = self.phi[k - 1] + w * (self.phi[k] - self.phi[k - 1]);
        let integral = self.phi_integral[k - 1] + 0.5 * (t - t0) * (self.phi[k - 1] + phi_t);
        Ok(integral / t)
    }
}

/// Compute `φ` and `ψ` from the recorded region integrals.
///
/// The integral runs from the first record, which is `t = 0` for simulation
/// output. At `T = 0` `ψ` takes its limit `φ(0)`.
pub fn decay_functionals(series: &DecaySeries) -> DecayFunctionals {
    let times = series.times();
    let phi: Vec<f64> = series.records.iter().map(|r| r.phi).collect();
    let mut phi_integral = Vec::with_capacity(phi.len());
    let mut acc = 0.0;
    for k in 0..phi.len() {
        if k > 0 {
            acc += 0.5 * (times[k] - times[k - 1]) * (phi[k] + phi[k - 1]);
        }
        phi_integral.push(acc);
    }
    let psi = times
        .iter()
        .zip(&phi_integral)
        .zip(&phi)
        .map(|((&t, &i), &p)| if t > 0.0 { i / t } else { p })
        .collect();
    DecayFunctionals {
        times,
        phi,
        phi_integral,
        psi,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L6DecayReport {
    pub times: Vec<f64>,
    /// `∫_Ω u⁶` per record.
    pub l6: Vec<f64>,
    /// Max of `∫_Ω u⁶` over `t ∈ [T_final/2, T_final]`.
    pub tail_max: f64,
    /// `L⁶(T_final) / L⁶(0)`, zero for a zero run.
    pub final_ratio: f64,
    /// Least-squares slope of `log L⁶` against `log t` over positive records.
    pub slope: Option<f64>,
}

pub fn l6_decay_report(series: &DecaySeries) -> L6DecayReport {
    let times = series.times();
    let l6: Vec<f64> = series.records.iter().map(|r| r.l6_omega).collect();
    let t_final = times.last().copied().unwrap_or(0.0);
    let tail_max = times
        .iter()
        .zip(&l6)
        .filter(|(&t, _)| t >= 0.5 * t_final)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let final_ratio = match (l6.first(), l6.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    };
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&l6)
        .filter(|(&t, &v)| t > 0.0 && v > 0.0)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    L6DecayReport {
        times,
        l6,
        tail_max,
        final_ratio,
        slope: ls_slope(&pts),
    }
}

pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeNorms {
    pub times: Vec<f64>,
    /// `∫₀ᵗ ‖u‖⁵_{L¹⁰}` and `∫₀ᵗ ‖u‖⁴_{L¹²}`.
    pub l5l10: Vec<f64>,
    pub l4l12: Vec<f64>,
}

impl SpacetimeNorms {
    pub fn total_l5l10(&self) -> f64 {
        self.l5l10.last().copied().unwrap_or(0.0)
    }

    pub fn total_l4l12(&self) -> f64 {
        self.l4l12.last().copied().unwrap_or(0.0)
    }

    /// Increments of both partial sums over `[a, b]`; both must be record times.
    pub fn increment(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let find = |t: f64| {
            self.times
                .iter()
                .position(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
                .ok_or_else(|| Error::Missing(format!("no record at t = {t}")))
        };
        let (i, j) = (find(a)?, find(b)?);
        Ok((self.l5l10[j] - self.l5l10[i], self.l4l12[j] - self.l4l12[i]))
    }
}

pub fn spacetime_norms(series: &DecaySeries) -> SpacetimeNorms {
    SpacetimeNorms {
        times: series.times(),
        l5l10: series.records.iter().map(|r| r.l5l10_partial).collect(),
        l4l12: series.records.iter().map(|r| r.l4l12_partial).collect(),
    }
}
