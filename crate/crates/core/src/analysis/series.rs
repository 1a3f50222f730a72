use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header of the run CSV.
pub const CSV_COLUMNS: [&str; 7] = ["t", "E", "L6_D_t", "flux_0_t", "phi_t", "l5l10_partial", "l4l12_partial"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayRecord {
    pub t: f64,
    pub energy: f64,
    pub l6_d: f64,
    pub flux_0_t: f64,
    pub phi: f64,
    pub energy_exterior_cone: f64,
    pub l6_omega: f64,
    /// `∫_Ω u¹⁰` and `∫_Ω u¹²`.
    pub l10: f64,
    pub l12: f64,
    pub tangential_sq: f64,
    pub radial_sq: f64,
    /// `∫₀ᵗ ‖u‖⁵_{L¹⁰}` and `∫₀ᵗ ‖u‖⁴_{L¹²}` by the trapezoid rule over records.
    pub l5l10_partial: f64,
    pub l4l12_partial: f64,
}

impl DecayRecord {
    pub fn l10_norm(&self) -> f64 {
        self.l10.powf(0.1)
    }

    pub fn l12_norm(&self) -> f64 {
        self.l12.powf(1.0 / 12.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub config_hash: String,
    pub eta0: f64,
    pub epsilon: f64,
    pub m: f64,
    pub a0: f64,
    pub rho2m: f64,
    pub h: f64,
    pub dt: f64,
    pub nonlinear: bool,
    pub complete: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DecaySeries {
    pub meta: SeriesMeta,
    pub records: Vec<DecayRecord>,
}

impl DecaySeries {
    pub fn new(meta: SeriesMeta) -> Self {
        DecaySeries {
            meta,
            records: Vec::new(),
        }
    }

    /// Append a record, filling in the space-time partial sums.
    pub fn push(&mut self, mut rec: DecayRecord) {
        if let Some(prev) = self.records.last() {
            let dt = rec.t - prev.t;
            rec.l5l10_partial =
                prev.l5l10_partial + 0.5 * dt * (prev.l10_norm().powi(5) + rec.l10_norm().powi(5));
            rec.l4l12_partial =
                prev.l4l12_partial + 0.5 * dt * (prev.l12_norm().powi(4) + rec.l12_norm().powi(4));
        } else {
            rec.l5l10_partial = 0.0;
            rec.l4l12_partial = 0.0;
        }
        self.records.push(rec);
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> Option<&DecayRecord> {
        self.records.last()
    }

    /// Record whose time is within `1e-9` of `t`.
    pub fn at(&self, t: f64) -> Option<&DecayRecord> {
        self.records.iter().find(|r| (r.t - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }

    /// Times strictly increasing and all values finite and non-negative.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[1].t <= w[0].t {
                return Err(Error::Domain(format!("record times not increasing at t = {}", w[1].t)));
            }
        }
        for r in &self.records {
            let vals = [
                r.energy,
                r.l6_d,
                r.flux_0_t,
                r.phi,
                r.energy_exterior_cone,
                r.l6_omega,
                r.l10,
                r.l12,
                r.l5l10_partial,
                r.l4l12_partial,
            ];
            if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Domain(format!("record at t = {} has a negative or non-finite value", r.t)));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.records {
            let row = [r.t, r.energy, r.l6_d, r.flux_0_t, r.phi, r.l5l10_partial, r.l4l12_partial];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(self.to_csv().as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("series serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let mut s = DecaySeries::default();
        s.push(DecayRecord {
            t: 0.0,
            energy: 1.5,
            ..Default::default()
        });
        s.push(DecayRecord {
            t: 0.5,
            energy: 1.5,
            ..Default::default()
        });
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,E,L6_D_t,flux_0_t,phi_t,l5l10_partial,l4l12_partial");
        assert_eq!(lines.count(), 2);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn partial_sums_use_trapezoid() {
        let mut s = DecaySeries::default();
        for (t, norm) in [(0.0, 1.0), (1.0, 2.0)] {
            s.push(DecayRecord {
                t,
                l10: f64::powi(norm, 10),
                l12: f64::powi(norm, 12),
                ..Default::default()
            });
        }
        let last = s.last().unwrap();
        assert!((last.l5l10_partial - 0.5 * (1.0 + 32.0)).abs() < 1e-12);
        assert!((last.l4l12_partial - 0.5 * (1.0 + 16.0)).abs() < 1e-12);
    }
}
