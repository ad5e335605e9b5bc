//! Explicit fourth-order time stepping with an exact factor for viscosity.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Rhs, State, Tendency};
use crate::error::{Error, Result};
use crate::spectral::{norm_sq, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 in the variables `exp(mu4/2 lap t) u`; the viscous term
    /// is integrated exactly.
    Rk4If,
    /// Classical RK4 on the full right-hand side.
    Rk4Plain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Steps between monitor samples.
    pub cadence: usize,
}

impl StepperConfig {
    pub fn new(dt: f64, scheme: Scheme, t_end: f64) -> Self {
        Self {
            dt,
            scheme,
            t_end,
            cfl_safety: 1.0,
            cadence: 1,
        }
    }

    pub fn with_cadence(mut self, cadence: usize) -> Self {
        self.cadence = cadence;
        self
    }

    pub fn with_cfl_safety(mut self, cfl_safety: f64) -> Self {
        self.cfl_safety = cfl_safety;
        self
    }

    /// Largest admissible step for a band of radius `cutoff`.
    ///
    /// The wave bound `cfl sqrt(rho1) / K` always applies; the viscous bound
    /// `cfl 2 / (mu4 K^2)` only without the integrating factor.
    pub fn dt_bound(&self, rhs: &dyn Rhs, cutoff: f64) -> f64 {
        let k = cutoff.floor();
        if k == 0.0 {
            return f64::INFINITY;
        }
        let wave = self.cfl_safety * rhs.rho1().sqrt() / k;
        match self.scheme {
            Scheme::Rk4If => wave,
            Scheme::Rk4Plain => {
                let mu4 = rhs.viscosity();
                let visc = if mu4 > 0.0 {
                    self.cfl_safety * 2.0 / (mu4 * k * k)
                } else {
                    f64::INFINITY
                };
                wave.min(visc)
            }
        }
    }

    pub fn validate(&self, rhs: &dyn Rhs, cutoff: f64) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::config(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        if self.cadence == 0 {
            return Err(Error::config("cadence", "must be at least 1"));
        }
        let bound = self.dt_bound(rhs, cutoff);
        if self.dt > bound {
            return Err(Error::StabilityViolation { dt: self.dt, bound });
        }
        Ok(())
    }

    /// Number of uniform steps of size at most `dt` covering `[0, t_end]`.
    pub fn num_steps(&self) -> usize {
        if self.t_end == 0.0 {
            return 0;
        }
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// `exp(-mu4/2 |xi|^2 tau)` applied to `f`.
fn viscous_factor(f: &SpectralField, mu4: f64, tau: f64) -> SpectralField {
    if mu4 == 0.0 || tau == 0.0 {
        return f.clone();
    }
    f.map_modes(|xi| (-0.5 * mu4 * norm_sq(xi) * tau).exp())
}

fn check_finite(s: State) -> Result<State> {
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::NanDetected { t: s.t })
    }
}

/// One step of size `h`.
pub fn step(s: &State, h: f64, scheme: Scheme, rhs: &dyn Rhs) -> Result<State> {
    match scheme {
        Scheme::Rk4Plain => {
            let k1 = rhs.eval(s)?;
            let k2 = rhs.eval(&s.advanced(0.5 * h, &k1))?;
            let k3 = rhs.eval(&s.advanced(0.5 * h, &k2))?;
            let k4 = rhs.eval(&s.advanced(h, &k3))?;
            let mut out = s.clone();
            out.t += h;
            for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
                out.u.axpy(h * w / 6.0, &k.du_dt);
                out.d.axpy(h * w / 6.0, &k.dd_dt);
                out.ddot.axpy(h * w / 6.0, &k.dddot_dt);
            }
            check_finite(out)
        }
        Scheme::Rk4If => check_finite(lawson_rk4(s, h, rhs)?),
    }
}

/// Lawson RK4: the viscous propagator `E(tau)` acts on the velocity only.
fn lawson_rk4(s: &State, h: f64, rhs: &dyn Rhs) -> Result<State> {
    let mu4 = rhs.viscosity();
    let e = |f: &SpectralField, tau: f64| viscous_factor(f, mu4, tau);
    let half = 0.5 * h;

    let n1 = rhs.nonlinear(s)?;
    let mut a = s.advanced(half, &n1);
    a.u = e(&a.u, half);

    let n2 = rhs.nonlinear(&a)?;
    let mut b = s.advanced(half, &n2);
    b.u = e(&s.u, half);
    b.u.axpy(half, &n2.du_dt);

    let n3 = rhs.nonlinear(&b)?;
    let mut c = s.advanced(h, &n3);
    c.u = e(&s.u, h);
    c.u.axpy(h, &e(&n3.du_dt, half));

    let n4 = rhs.nonlinear(&c)?;
    let mut out = s.clone();
    out.t += h;
    out.u = e(&s.u, h);
    let mut mid = n2.du_dt.add(&n3.du_dt);
    mid = e(&mid, half);
    out.u.axpy(h / 6.0, &e(&n1.du_dt, h));
    out.u.axpy(h / 3.0, &mid);
    out.u.axpy(h / 6.0, &n4.du_dt);
    for (k, w) in [(&n1, 1.0), (&n2, 2.0), (&n3, 2.0), (&n4, 1.0)] {
        out.d.axpy(h * w / 6.0, &k.dd_dt);
        out.ddot.axpy(h * w / 6.0, &k.dddot_dt);
    }
    Ok(out)
}

/// Receives snapshots during [`run`].
pub trait Monitor {
    fn observe(&mut self, s: &State) -> Result<()>;
}

impl<F: FnMut(&State) -> Result<()>> Monitor for F {
    fn observe(&mut self, s: &State) -> Result<()> {
        self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    Completed,
    /// A non-finite value appeared in the step starting at `t`.
    BlowUp { t: f64 },
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Completed => write!(f, "completed"),
            StopReason::BlowUp { t } => write!(f, "blow_up@{t}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Last finite state.
    pub state: State,
    pub steps: usize,
    pub stop: StopReason,
}

/// Integrates from `s0` to `s0.t + t_end`, sampling the monitor at step 0,
/// every `cadence` steps, and at the final step.
pub fn run(s0: &State, cfg: &StepperConfig, rhs: &dyn Rhs, monitor: &mut dyn Monitor) -> Result<RunSummary> {
    cfg.validate(rhs, s0.cutoff())?;
    let n = cfg.num_steps();
    if n == 0 {
        return Ok(RunSummary {
            state: s0.clone(),
            steps: 0,
            stop: StopReason::Completed,
        });
    }
    let h = cfg.t_end / n as f64;
    let mut s = s0.clone();
    monitor.observe(&s)?;
    for i in 1..=n {
        let next = match step(&s, h, cfg.scheme, rhs) {
            Ok(next) => next,
            Err(Error::NanDetected { .. }) => {
                log::warn!("non-finite state in the step from t = {}", s.t);
                return Ok(RunSummary {
                    stop: StopReason::BlowUp { t: s.t },
                    state: s,
                    steps: i - 1,
                });
            }
            Err(e) => return Err(e),
        };
        s = next;
        s.t = s0.t + i as f64 * h;
        if i % cfg.cadence == 0 || i == n {
            monitor.observe(&s)?;
        }
    }
    Ok(RunSummary {
        state: s,
        steps: n,
        stop: StopReason::Completed,
    })
}

/// Runs without observation.
pub fn integrate(s0: &State, cfg: &StepperConfig, rhs: &dyn Rhs) -> Result<RunSummary> {
    run(s0, cfg, rhs, &mut |_: &State| Ok(()))
}

/// Zero right-hand side, used to check the stepper's bookkeeping.
pub struct Frozen {
    pub rho1: f64,
}

impl Rhs for Frozen {
    fn viscosity(&self) -> f64 {
        0.0
    }

    fn rho1(&self) -> f64 {
        self.rho1
    }

    fn nonlinear(&self, s: &State) -> Result<Tendency> {
        Ok(Tendency::zeros_like(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{LeslieCoefficients, DEFAULT_PARODI_TOL};
    use crate::dynamics::{make_initial_data, FullSystem, Preset, WaveMapSystem};
    use crate::spectral::TorusGrid;

    fn grid2(n: usize) -> TorusGrid {
        TorusGrid::new(2, n).unwrap()
    }

    #[test]
    fn frozen_system_leaves_state_unchanged() {
        let s = make_initial_data(&Preset::PerturbedTwist { m: 1, amplitude: 0.3 }, grid2(16), 5.0)
            .unwrap()
            .state;
        for scheme in [Scheme::Rk4If, Scheme::Rk4Plain] {
            let next = step(&s, 0.1, scheme, &Frozen { rho1: 1.0 }).unwrap();
            assert_eq!((&next.u, &next.d, &next.ddot), (&s.u, &s.d, &s.ddot));
        }
    }

    #[test]
    fn heat_decay_is_exact_with_integrating_factor() {
        let g = grid2(16);
        let s = make_initial_data(&Preset::ConstantDirectorShear { amplitude: 1.0 }, g, 5.0)
            .unwrap()
            .state;
        let sys = WaveMapSystem::new(1.0, 1.0, g, 5.0).unwrap();
        let out = integrate(&s, &StepperConfig::new(1e-2, Scheme::Rk4If, 1.0), &sys).unwrap();
        let exact = s.u.scaled((-0.5f64).exp());
        let rel = out.state.u.sub(&exact).l2_norm_sq().sqrt() / exact.l2_norm_sq().sqrt();
        assert!(rel < 1e-10, "{rel}");
        assert!((out.state.t - 1.0).abs() < 1e-14);
        // plain RK4 is only fourth-order accurate
        let plain = integrate(&s, &StepperConfig::new(1e-2, Scheme::Rk4Plain, 1.0), &sys).unwrap();
        let rel_plain = plain.state.u.sub(&exact).l2_norm_sq().sqrt() / exact.l2_norm_sq().sqrt();
        assert!(rel_plain > rel && rel_plain < 1e-8);
    }

    #[test]
    fn twist_wave_survives_many_steps() {
        let g = grid2(48);
        let coef = LeslieCoefficients::new([0.0, 0.0, 1.0, 101.0, 0.0, 0.0], 1.0, false, DEFAULT_PARODI_TOL).unwrap();
        let init = make_initial_data(&Preset::TwistWave { m: 1 }, g, 21.0).unwrap();
        let sys = FullSystem::new(coef, g, 21.0).unwrap();
        let mut s = init.state.clone();
        for _ in 0..1000 {
            s = step(&s, 1e-3, Scheme::Rk4If, &sys).unwrap();
        }
        assert!(s.max_diff(&init.state) <= 1e-9);
        assert!(s.constraint_deviation() <= 1e-10);
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let s = make_initial_data(&Preset::TwistWave { m: 1 }, grid2(16), 5.0).unwrap().state;
        let mut seen = 0;
        let out = run(
            &s,
            &StepperConfig::new(0.01, Scheme::Rk4If, 0.0),
            &Frozen { rho1: 1.0 },
            &mut |_: &State| {
                seen += 1;
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(out.state, s);
        assert_eq!(seen, 0);
        assert_eq!(out.stop, StopReason::Completed);
    }

    #[test]
    fn cadence_and_final_sample() {
        let s = make_initial_data(&Preset::TwistWave { m: 1 }, grid2(16), 5.0).unwrap().state;
        let mut times = Vec::new();
        let cfg = StepperConfig::new(0.1, Scheme::Rk4If, 1.05).with_cadence(4);
        let out = run(&s, &cfg, &Frozen { rho1: 1.0 }, &mut |st: &State| {
            times.push(st.t);
            Ok(())
        })
        .unwrap();
        assert_eq!(out.steps, 11);
        assert_eq!(times.len(), 4);
        assert_eq!(times[0], 0.0);
        assert!((times[3] - 1.05).abs() < 1e-15);
    }

    #[test]
    fn stability_bounds() {
        let g = grid2(32);
        let sys = WaveMapSystem::new(1.0, 1.0, g, 10.0).unwrap();
        let plain = StepperConfig::new(0.05, Scheme::Rk4Plain, 1.0);
        assert!(matches!(plain.validate(&sys, 10.0), Err(Error::StabilityViolation { .. })));
        assert!((plain.dt_bound(&sys, 10.0) - 0.02).abs() < 1e-15);
        assert!(StepperConfig::new(0.05, Scheme::Rk4If, 1.0).validate(&sys, 10.0).is_ok());
        assert!(matches!(
            StepperConfig::new(0.2, Scheme::Rk4If, 1.0).validate(&sys, 10.0),
            Err(Error::StabilityViolation { .. })
        ));
        let s = State::zeros(g, 10.0).unwrap();
        assert!(integrate(&s, &StepperConfig::new(10.0, Scheme::Rk4Plain, 20.0), &sys).is_err());
        assert!(StepperConfig::new(-1.0, Scheme::Rk4If, 1.0).validate(&sys, 10.0).is_err());
        let bad = StepperConfig::new(0.01, Scheme::Rk4If, 1.0).with_cfl_safety(1.5);
        assert!(matches!(bad.validate(&sys, 10.0), Err(Error::ConfigInvalid { .. })));
    }

    /// Exploding linear system used to exercise the blow-up path.
    struct Exploding;

    impl Rhs for Exploding {
        fn viscosity(&self) -> f64 {
            0.0
        }
        fn rho1(&self) -> f64 {
            1e12
        }
        fn nonlinear(&self, s: &State) -> Result<Tendency> {
            let mut k = Tendency::zeros_like(s);
            k.dd_dt = s.d.map_modes(|_| 1e300);
            Ok(k)
        }
    }

    #[test]
    fn blow_up_is_reported_not_raised() {
        let s = make_initial_data(&Preset::TwistWave { m: 1 }, grid2(16), 5.0).unwrap().state;
        let out = integrate(&s, &StepperConfig::new(0.1, Scheme::Rk4Plain, 1.0), &Exploding).unwrap();
        assert!(matches!(out.stop, StopReason::BlowUp { .. }));
        assert!(out.state.is_finite());
        assert!(out.steps < 10);
    }

    #[test]
    fn runs_are_deterministic() {
        let g = grid2(24);
        let init = make_initial_data(&Preset::random_small(0.05, 7), g, 7.0).unwrap();
        let sys = WaveMapSystem::new(1.0, 1.0, g, 7.0).unwrap();
        let cfg = StepperConfig::new(0.01, Scheme::Rk4If, 0.1);
        let a = integrate(&init.state, &cfg, &sys).unwrap();
        let b = integrate(&init.state, &cfg, &sys).unwrap();
        assert_eq!(a.state, b.state);
    }
}
