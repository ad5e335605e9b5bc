//! Packaged runs: single trajectories, the check suite, the temporal
//! convergence study and parameter sweeps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RunConfig;
use super::io;
use crate::coefficients::{LeslieCoefficients, DEFAULT_PARODI_TOL};
use crate::diagnostics::{
    constraint_propagation_experiment, dissipation_balance, energy_report, simulate, EnergyReport,
};
use crate::dynamics::{self, make_initial_data, Preset, State};
use crate::error::Result;
use crate::integrator::{integrate, run, Scheme, StepperConfig, StopReason};
use crate::spectral::{SpectralField, TorusGrid};

/// Result of one configured trajectory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: Vec<EnergyReport>,
    pub stop: StopReason,
    pub steps: usize,
    /// `E^in` of the full-resolution initial data.
    pub e_in: f64,
    pub final_state: State,
    pub snapshots: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn max_constraint_dev(&self) -> f64 {
        self.series.iter().map(|r| r.constraint_dev).fold(0.0, f64::max)
    }

    pub fn final_e_script(&self) -> f64 {
        self.series.last().map_or(f64::NAN, |r| r.e_script)
    }
}

/// Runs the configured trajectory. With `out`, writes `monitors.csv` and
/// `snapshots/NNNN.fld` there.
pub fn simulate_config(cfg: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let grid = cfg.torus()?;
    let coef = cfg.coefficients()?;
    let init = make_initial_data(&cfg.preset(), grid, cfg.cutoff)?;
    let e_in = init.energy(coef.rho1(), cfg.s_ord);
    let rhs = dynamics::system(&coef, grid, cfg.cutoff)?;
    let stepper = cfg.stepper();
    log::info!(
        "simulate: K = {} (eps = {}), N = {}, dt = {}, t_end = {}, E_in = {e_in:e}",
        cfg.cutoff,
        cfg.eps(),
        grid.n(),
        stepper.dt,
        stepper.t_end
    );

    let snap_dir = match out {
        Some(dir) => {
            let d = dir.join("snapshots");
            std::fs::create_dir_all(&d)?;
            Some(d)
        }
        None => None,
    };
    let every = cfg.monitor.snapshot_every;
    let d_in = init.state.d.clone();
    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let mut last_snap_t = f64::NAN;
    let mut monitor = |s: &State| -> Result<()> {
        let row = series.len();
        series.push(energy_report(s, &d_in, &coef, cfg.s_ord)?);
        if let Some(dir) = &snap_dir {
            if row == 0 || (every > 0 && row % every == 0) {
                let p = dir.join(format!("{:04}.fld", snapshots.len()));
                io::write_state(&p, s)?;
                snapshots.push(p);
                last_snap_t = s.t;
            }
        }
        Ok(())
    };
    let summary = run(&init.state, &stepper, rhs.as_ref(), &mut monitor)?;
    if let Some(dir) = &snap_dir {
        if summary.state.t != last_snap_t {
            let p = dir.join(format!("{:04}.fld", snapshots.len()));
            io::write_state(&p, &summary.state)?;
            snapshots.push(p);
        }
    }
    if let Some(dir) = out {
        io::write_series(&dir.join("monitors.csv"), &series)?;
    }
    log::info!("simulate: {} after {} steps", summary.stop, summary.steps);
    Ok(RunOutcome {
        series,
        stop: summary.stop,
        steps: summary.steps,
        e_in,
        final_state: summary.state,
        snapshots,
    })
}

/// One line of the check suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Mu4 = 101, mu3 = 1, rho1 = 1: the global-regime example.
pub fn part3_coefficients() -> LeslieCoefficients {
    LeslieCoefficients::new([0.0, 0.0, 1.0, 101.0, 0.0, 0.0], 1.0, false, DEFAULT_PARODI_TOL)
        .expect("valid coefficients")
}

pub fn unit_wave_map() -> LeslieCoefficients {
    LeslieCoefficients::wave_map(1.0, 1.0).expect("valid coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    /// Largest coefficient change of any field over the run.
    pub max_change: f64,
    pub max_constraint: f64,
    pub stop: StopReason,
}

/// Twist wave `m = 1` under the global-regime coefficients.
pub fn twist_stationarity(grid: TorusGrid, cutoff: f64, dt: f64, t_end: f64) -> Result<StationarityReport> {
    let init = make_initial_data(&Preset::TwistWave { m: 1 }, grid, cutoff)?;
    let s0 = init.state;
    let rhs = dynamics::system(&part3_coefficients(), grid, cutoff)?;
    let (mut change, mut cons) = (0.0f64, 0.0f64);
    let mut mon = |s: &State| -> Result<()> {
        change = change.max(s.max_diff(&s0));
        cons = cons.max(s.constraint_deviation());
        Ok(())
    };
    let out = run(&s0, &StepperConfig::new(dt, Scheme::Rk4If, t_end), rhs.as_ref(), &mut mon)?;
    Ok(StationarityReport {
        max_change: change,
        max_constraint: cons,
        stop: out.stop,
    })
}

/// Largest normalized residual of the wave-map `L2` balance on perturbed
/// twist data.
pub fn wavemap_balance(grid: TorusGrid, cutoff: f64, amplitude: f64, dt: f64, t_end: f64) -> Result<f64> {
    let coef = unit_wave_map();
    let init = make_initial_data(&Preset::PerturbedTwist { m: 1, amplitude }, grid, cutoff)?;
    let (series, _, _) = simulate(&init, &coef, &StepperConfig::new(dt, Scheme::Rk4If, t_end), 4)?;
    Ok(dissipation_balance(&series, &coef)?.max_residual)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierReport {
    /// `max |J J u - J u|` over all trials.
    pub idempotence: f64,
    /// `max |J u - u|_{H^{s-1}} / (eps |u|_{H^s})`.
    pub worst_ratio: f64,
}

/// Mollifier properties on `trials` random fields for each `s` and `eps`.
pub fn mollifier_properties(trials: usize, seed: u64) -> Result<MollifierReport> {
    let grid = TorusGrid::new(2, 48)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = MollifierReport {
        idempotence: 0.0,
        worst_ratio: 0.0,
    };
    for _ in 0..trials {
        let f = SpectralField::random(grid, 2, grid.max_cutoff(), grid.max_cutoff(), 1.0, &mut rng)?;
        for eps in [0.25, 0.125, 0.0625] {
            let j = f.mollify(eps);
            rep.idempotence = rep.idempotence.max(j.mollify(eps).max_coeff_diff(&j));
            for s in [3, 4, 5] {
                let lhs = f.sub(&j).sobolev_norm_sq(s - 1, false)?.sqrt();
                let rhs = eps * f.sobolev_norm_sq(s, false)?.sqrt();
                rep.worst_ratio = rep.worst_ratio.max(lhs / rhs);
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LerayReport {
    pub divergence: f64,
    pub gradient_residual: f64,
    pub idempotence: f64,
}

/// Leray projection properties on `trials` random fields.
pub fn leray_properties(trials: usize, seed: u64) -> Result<LerayReport> {
    let grid = TorusGrid::new(2, 32)?;
    let k = grid.max_cutoff();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LerayReport {
        divergence: 0.0,
        gradient_residual: 0.0,
        idempotence: 0.0,
    };
    for _ in 0..trials {
        let u = SpectralField::random(grid, 2, k, k, 0.0, &mut rng)?;
        let p = u.leray_project()?;
        rep.divergence = rep.divergence.max(p.divergence_defect()?);
        rep.idempotence = rep.idempotence.max(p.leray_project()?.max_coeff_diff(&p));
        let phi = SpectralField::random(grid, 1, k, k, 0.0, &mut rng)?;
        rep.gradient_residual = rep.gradient_residual.max(phi.gradient().leray_project()?.max_coeff());
    }
    Ok(rep)
}

/// Thresholds of the check suite.
pub mod tol {
    pub const STATIONARY_CHANGE: f64 = 1e-9;
    pub const STATIONARY_CONSTRAINT: f64 = 1e-10;
    pub const CONSTRAINT_AT_FINEST: f64 = 1e-6;
    pub const BALANCE: f64 = 1e-5;
    pub const IDEMPOTENCE: f64 = 1e-15;
    pub const LERAY: f64 = 1e-12;
}

/// Structural checks: twist stationarity, constraint propagation, the
/// wave-map balance, and the mollifier and projection contracts.
pub fn check_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    let st = twist_stationarity(TorusGrid::new(2, 64)?, 21.0, 1e-3, 1.0)?;
    out.push(CheckOutcome {
        name: "twist stationarity",
        passed: st.stop == StopReason::Completed
            && st.max_change <= tol::STATIONARY_CHANGE
            && st.max_constraint <= tol::STATIONARY_CONSTRAINT,
        detail: format!("max change {:.3e}, constraint {:.3e}", st.max_change, st.max_constraint),
    });

    let table = constraint_propagation_experiment(
        &Preset::random_small(0.05, 0),
        TorusGrid::new(2, 98)?,
        &[8.0, 16.0, 32.0],
        &unit_wave_map(),
        &StepperConfig::new(5e-3, Scheme::Rk4If, 0.5),
    )?;
    let last = table.rows.last().expect("three rows");
    let mut detail = String::new();
    for r in &table.rows {
        let _ = write!(detail, "K={}: {:.2e}/{:.2e} ", r.cutoff, r.max_constraint, r.max_compat);
    }
    out.push(CheckOutcome {
        name: "constraint propagation",
        passed: table.strictly_decreasing()
            && last.max_constraint <= tol::CONSTRAINT_AT_FINEST
            && last.max_compat <= tol::CONSTRAINT_AT_FINEST,
        detail: detail.trim_end().to_string(),
    });

    let res = wavemap_balance(TorusGrid::new(2, 64)?, 21.0, 1e-2, 1e-3, 1.0)?;
    out.push(CheckOutcome {
        name: "dissipation balance",
        passed: res <= tol::BALANCE,
        detail: format!("normalized residual {res:.3e}"),
    });

    let m = mollifier_properties(100, 7)?;
    out.push(CheckOutcome {
        name: "mollifier",
        passed: m.idempotence <= tol::IDEMPOTENCE && m.worst_ratio <= 1.0,
        detail: format!("idempotence {:.1e}, worst bound ratio {:.4}", m.idempotence, m.worst_ratio),
    });

    let l = leray_properties(100, 11)?;
    out.push(CheckOutcome {
        name: "leray",
        passed: l.divergence <= tol::LERAY && l.gradient_residual <= tol::LERAY && l.idempotence <= tol::LERAY,
        detail: format!(
            "divergence {:.1e}, P grad {:.1e}, idempotence {:.1e}",
            l.divergence, l.gradient_residual, l.idempotence
        ),
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: [f64; 3],
    /// `|y_h - y_{h/2}|` and `|y_{h/2} - y_{h/4}|`, largest coefficient.
    pub differences: [f64; 2],
    pub order: f64,
}

/// Richardson estimate of the temporal order from runs at `dt`, `dt/2` and
/// `dt/4`.
pub fn richardson(
    init: &State,
    coef: &LeslieCoefficients,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
) -> Result<ConvergenceReport> {
    let rhs = dynamics::system(coef, init.grid(), init.cutoff())?;
    let dts = [dt, dt / 2.0, dt / 4.0];
    let finals = dts
        .iter()
        .map(|&h| integrate(init, &StepperConfig::new(h, scheme, t_end), rhs.as_ref()).map(|r| r.state))
        .collect::<Result<Vec<_>>>()?;
    let differences = [finals[0].max_diff(&finals[1]), finals[1].max_diff(&finals[2])];
    Ok(ConvergenceReport {
        dts,
        differences,
        order: (differences[0] / differences[1]).log2(),
    })
}

/// Richardson study on the configured data and coefficients.
pub fn convergence_config(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let grid = cfg.torus()?;
    let init = make_initial_data(&cfg.preset(), grid, cfg.cutoff)?;
    richardson(&init.state, &cfg.coefficients()?, cfg.stepper.scheme, cfg.stepper.dt, cfg.stepper.t_end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub mu4: f64,
    pub rho1: f64,
    pub amplitude: Option<f64>,
    pub stop: String,
    pub max_constraint_dev: f64,
    pub final_e_script: f64,
}

fn preset_amplitude(p: &Preset) -> Option<f64> {
    match *p {
        Preset::PerturbedTwist { amplitude, .. }
        | Preset::RandomSmall { amplitude, .. }
        | Preset::ConstantDirectorShear { amplitude } => Some(amplitude),
        Preset::TwistWave { .. } => None,
    }
}

/// Configurations spanned by the `[sweep]` block, in row-major order.
pub fn sweep_configs(base: &RunConfig) -> Vec<RunConfig> {
    let sw = base.sweep.clone().unwrap_or_default();
    let or_base = |v: &[f64], b: f64| if v.is_empty() { vec![b] } else { v.to_vec() };
    let mu4s = or_base(&sw.mu4, base.coefficients.mu4);
    let rho1s = or_base(&sw.rho1, base.coefficients.rho1);
    let amps: Vec<Option<f64>> = if sw.amplitude.is_empty() {
        vec![None]
    } else {
        sw.amplitude.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for &mu4 in &mu4s {
        for &rho1 in &rho1s {
            for &a in &amps {
                let mut c = base.clone();
                c.sweep = None;
                c.coefficients.mu4 = mu4;
                c.coefficients.rho1 = rho1;
                if let Some(a) = a {
                    c.initial_data = c.initial_data.with_amplitude(a);
                }
                out.push(c);
            }
        }
    }
    out
}

/// Runs every sweep configuration, each in `out/run_NNN`, and writes
/// `out/summary.txt`.
pub fn sweep(base: &RunConfig, out: &Path) -> Result<Vec<SweepRow>> {
    let configs = sweep_configs(base);
    std::fs::create_dir_all(out)?;
    let rows = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let label = format!("run_{i:03}");
            let dir = out.join(&label);
            std::fs::create_dir_all(&dir)?;
            let amplitude = preset_amplitude(&c.initial_data);
            let row = |stop: String, dev: f64, e: f64| SweepRow {
                label: label.clone(),
                mu4: c.coefficients.mu4,
                rho1: c.coefficients.rho1,
                amplitude,
                stop,
                max_constraint_dev: dev,
                final_e_script: e,
            };
            Ok(match simulate_config(c, Some(&dir)) {
                Ok(o) => row(o.stop.to_string(), o.max_constraint_dev(), o.final_e_script()),
                Err(e) => row(format!("error: {e}"), f64::NAN, f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::write(out.join("summary.txt"), sweep_summary(&rows))?;
    Ok(rows)
}

pub fn sweep_summary(rows: &[SweepRow]) -> String {
    let mut s = String::from("label\tmu4\trho1\tamplitude\tstop\tmax_constraint_dev\tfinal_E_script\n");
    for r in rows {
        let amp = r.amplitude.map_or_else(|| "-".to_string(), |a| format!("{a:e}"));
        let _ = writeln!(
            s,
            "{}\t{:e}\t{:e}\t{}\t{}\t{:.6e}\t{:.6e}",
            r.label, r.mu4, r.rho1, amp, r.stop, r.max_constraint_dev, r.final_e_script
        );
    }
    s
}
