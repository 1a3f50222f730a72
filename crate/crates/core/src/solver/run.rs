use crate::analysis::series::{DecayRecord, DecaySeries, SeriesMeta};
use crate::error::{Error, Result};
use crate::geometry::{illuminate, IlluminationCertificate, Scene};
use crate::multiplier::FluxLedger;
use crate::solver::checkpoint::Checkpoint;
use crate::solver::config::SolverConfig;
use crate::solver::grid::{build_grid, Grid};
use crate::solver::integrals::{flux_rate, region_integrals};
use crate::solver::state::{advance, energy_between, init_state, WaveState};

/// A configured run: resolved config, scene, certificate and grid.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SolverConfig,
    pub scene: Scene,
    pub certificate: IlluminationCertificate,
    pub grid: Grid,
    pub m: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub series: DecaySeries,
    pub ledger: FluxLedger,
    pub checkpoints: Vec<Checkpoint>,
    /// Levels `N − 1`, `N`, `N + 1` at `t_final` (or at the failure).
    pub state: WaveState,
}

impl SimulationOutput {
    pub fn checkpoint(&self, t: f64) -> Result<&Checkpoint> {
        self.checkpoints
            .iter()
            .find(|c| (c.t - t).abs() <= 1e-9 * (1.0 + t.abs()))
            .ok_or_else(|| Error::Missing(format!("no checkpoint at t = {t}")))
    }
}

fn step_count(t: f64, dt: f64, what: &str) -> Result<usize> {
    let s = (t / dt).round();
    if (s * dt - t).abs() > 1e-9 * (1.0 + t.abs()) {
        return Err(Error::Config(format!("{what} {t} is not a multiple of dt = {dt}")));
    }
    Ok(s as usize)
}

impl Simulation {
    pub fn new(mut config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let scene = config.resolve_scene()?;
        let certificate = illuminate(&scene, config.seed);
        if !scene.obstacle.is_none() && !certificate.pass {
            return Err(Error::Uncertified(certificate.failed_conditions().join(", ")));
        }
        let rho2m = scene.body.rho2m();
        let m = config.m.unwrap_or(rho2m);
        if m < rho2m {
            return Err(Error::Config(format!("M = {m} is smaller than rho2M = {rho2m}")));
        }
        let dt = config.dt();
        step_count(config.t_final, dt, "t_final")?;
        for &t in &config.checkpoints {
            if t > config.t_final {
                return Err(Error::Config(format!("checkpoint {t} is after t_final")));
            }
            step_count(t, dt, "checkpoint time")?;
        }
        let grid = build_grid(&scene, &config)?;
        Ok(Simulation {
            config,
            scene,
            certificate,
            grid,
            m,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.certificate.epsilon()
    }

    pub fn meta(&self) -> SeriesMeta {
        SeriesMeta {
            config_hash: self.config.hash(),
            eta0: self.certificate.aggregates.eta0,
            epsilon: self.epsilon(),
            m: self.m,
            a0: self.certificate.aggregates.a0,
            rho2m: self.grid.rho2m,
            h: self.grid.h,
            dt: self.config.dt(),
            nonlinear: self.config.nonlinear,
            complete: true,
            failure: None,
        }
    }

    /// Record at the time of `u_curr`; needs `u_next`.
    pub fn record(&self, state: &WaveState, flux_0_t: f64) -> DecayRecord {
        let g = &self.grid;
        let nl = self.config.nonlinear;
        let energy = 0.5
            * (energy_between(&state.u_prev, &state.u_curr, g, state.dt, nl)
                + energy_between(&state.u_curr, &state.u_next, g, state.dt, nl));
        let r = region_integrals(state, g, state.t, self.m, self.epsilon(), nl);
        DecayRecord {
            t: state.t,
            energy,
            l6_d: r.l6_d,
            flux_0_t,
            phi: r.phi(),
            energy_exterior_cone: r.energy_exterior_cone,
            l6_omega: r.l6_omega,
            l10: r.l10,
            l12: r.l12,
            tangential_sq: r.tangential_sq,
            radial_sq: r.radial_sq,
            l5l10_partial: 0.0,
            l4l12_partial: 0.0,
        }
    }

    pub fn run(&self) -> SimulationOutput {
        let cfg = &self.config;
        let dt = cfg.dt();
        let steps = (cfg.t_final / dt).round() as usize;
        let every = ((cfg.cadence / dt).round() as usize).max(1);
        let checkpoint_steps: Vec<usize> = cfg.checkpoints.iter().map(|t| (t / dt).round() as usize).collect();
        let mut state = init_state(cfg, &self.grid);
        let mut series = DecaySeries::new(self.meta());
        let mut ledger = FluxLedger::new(0.0);
        let mut checkpoints = Vec::new();
        let mut last_rate = None;
        for n in 0..=steps {
            if let Err(e) = advance(&mut state, &self.grid, cfg.nonlinear) {
                series.meta.complete = false;
                series.meta.failure = Some(e.to_string());
                break;
            }
            // Trapezoid rule in time over [(n − 1)dt, n dt].
            let (rate, count) = flux_rate(&state, &self.grid, self.m, cfg.nonlinear);
            if let Some(prev) = last_rate {
                ledger.push(n as f64 * dt, 0.5 * dt * (prev + rate), count);
            }
            last_rate = Some(rate);
            if n % every == 0 || n == steps {
                series.push(self.record(&state, ledger.total()));
            }
            if checkpoint_steps.contains(&n) {
                checkpoints.push(Checkpoint::capture(&state, self.grid.n, self.grid.h));
            }
            if n < steps {
                state.rotate();
            }
        }
        SimulationOutput {
            series,
            ledger,
            checkpoints,
            state,
        }
    }
}

pub fn run_simulation(config: SolverConfig) -> Result<SimulationOutput> {
    Ok(Simulation::new(config)?.run())
}
