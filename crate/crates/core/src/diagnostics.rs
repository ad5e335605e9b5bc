//! Energy functionals, structural monitors and packaged experiments.
//!
//! Inequalities whose constants are not given numerically are exposed as
//! ratio series with configured stand-in constants. Only identities and
//! constant-free bounds are asserted.

use crate::coefficients::{c0, Constants, LeslieCoefficients};
use crate::dynamics::{self, make_initial_data, InitialData, Preset, State};
use crate::error::{Error, Result};
use crate::integrator::{run, Monitor, StepperConfig, StopReason};
use crate::spectral::{pointwise_max_magnitude, SpectralField, TorusGrid};
use crate::tensorcalc;

/// Terms of `E_eps = |d - J d_in|^2 + |u|^2_{H^s} + rho1 |ddot|^2_{H^s} + |grad d|^2_{H^s}`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTerms {
    pub drift: f64,
    pub velocity: f64,
    pub inertia: f64,
    pub gradient: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.drift + self.velocity + self.inertia + self.gradient
    }
}

/// Terms of the weighted energy used for global decay.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScriptTerms {
    /// `|u|^2_{H^s}`
    pub velocity: f64,
    /// `rho1 (1 - eta) |ddot|^2_{H^s}`
    pub inertia: f64,
    /// `(1 - eta rho1) |grad d|^2_{H^s}`
    pub gradient: f64,
    /// `eta rho1 |ddot + d|^2_{dot H^s}`
    pub mixed: f64,
    /// `eta rho1 |grad^{s+1} d|^2_{L2}`
    pub top: f64,
    /// `eta rho1 |lambda1| |d|^2_{dot H^s}`
    pub director: f64,
}

impl ScriptTerms {
    pub fn total(&self) -> f64 {
        self.velocity + self.inertia + self.gradient + self.mixed + self.top + self.director
    }
}

/// Terms of `|grad u|^2_{H^s} + |ddot|^2_{H^s} + |grad d|^2_{dot H^s}`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissipationTerms {
    pub velocity: f64,
    pub inertia: f64,
    pub gradient: f64,
}

impl DissipationTerms {
    pub fn total(&self) -> f64 {
        self.velocity + self.inertia + self.gradient
    }
}

fn hs(f: &SpectralField, s: usize) -> f64 {
    f.sobolev_norm_sq(s, false).expect("inhomogeneous norms accept every order")
}

fn hs_dot(f: &SpectralField, s: usize) -> Result<f64> {
    f.sobolev_norm_sq(s, true)
}

/// `E_eps` and its terms. `d_in` is mollified at `1/K` before comparison.
pub fn energy_e(s: &State, d_in: &SpectralField, s_ord: usize, rho1: f64) -> Result<(f64, EnergyTerms)> {
    if s_ord == 0 {
        return Err(Error::InvalidOrder(s_ord));
    }
    let jd = d_in.mollify(s.eps());
    let terms = EnergyTerms {
        drift: s.d.sub(&jd).l2_norm_sq(),
        velocity: hs(&s.u, s_ord),
        inertia: rho1 * hs(&s.ddot, s_ord),
        gradient: hs(&s.d.gradient(), s_ord),
    };
    Ok((terms.total(), terms))
}

/// `F_eps = |grad u|^2_{H^s}`.
pub fn dissipation_f(s: &State, s_ord: usize) -> f64 {
    hs(&s.u.gradient(), s_ord)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scripts {
    pub energy: f64,
    pub dissipation: f64,
    pub energy_terms: ScriptTerms,
    pub dissipation_terms: DissipationTerms,
}

/// Weighted energy and dissipation for weight `eta` in `(0, 1/2]`.
pub fn energy_scripts(s: &State, coef: &LeslieCoefficients, s_ord: usize, eta: f64) -> Result<Scripts> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::RegimeMismatch(format!("eta = {eta} outside (0, 1/2]")));
    }
    if s_ord == 0 {
        return Err(Error::InvalidOrder(s_ord));
    }
    let rho1 = coef.rho1();
    let er = eta * rho1;
    let gd = s.d.gradient();
    let u = hs(&s.u, s_ord);
    let w = hs(&s.ddot, s_ord);
    let g = hs(&gd, s_ord);
    let energy_terms = ScriptTerms {
        velocity: u,
        inertia: rho1 * (1.0 - eta) * w,
        gradient: (1.0 - er) * g,
        mixed: er * hs_dot(&s.ddot.add(&s.d), s_ord)?,
        top: er * s.d.derivative_norm_sq(s_ord + 1),
        director: er * coef.lambda1().abs() * hs_dot(&s.d, s_ord)?,
    };
    let dissipation_terms = DissipationTerms {
        velocity: hs(&s.u.gradient(), s_ord),
        inertia: w,
        gradient: hs_dot(&gd, s_ord)?,
    };
    let energy = energy_terms.total();
    debug_assert!(energy >= 0.5 * (u + rho1 * w + g) * (1.0 - 1e-12));
    Ok(Scripts {
        energy,
        dissipation: dissipation_terms.total(),
        energy_terms,
        dissipation_terms,
    })
}

/// One monitor sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e_eps: f64,
    pub f_eps: f64,
    /// NaN when the weight `eta` is not in `(0, 1/2]`.
    pub e_script: f64,
    pub d_script: f64,
    pub terms: EnergyTerms,
    pub script_terms: ScriptTerms,
    pub dissipation_terms: DissipationTerms,
    /// `(|u|^2 + rho1 |ddot|^2 + |grad d|^2) / 2` in `L2`.
    pub l2_energy: f64,
    /// `|grad u|^2_{L2}`.
    pub grad_u_l2: f64,
    pub constraint_dev: f64,
    pub compat_dev: f64,
    pub div_dev: f64,
    pub linf_d: f64,
}

impl EnergyReport {
    pub const COLUMNS: [&'static str; 24] = [
        "t",
        "E_eps",
        "F_eps",
        "E_script",
        "D_script",
        "E_drift",
        "E_u",
        "E_ddot",
        "E_grad",
        "S_u",
        "S_ddot",
        "S_grad",
        "S_mixed",
        "S_top",
        "S_d",
        "D_u",
        "D_ddot",
        "D_grad",
        "L2_energy",
        "grad_u_L2",
        "constraint_dev",
        "compat_dev",
        "div_dev",
        "linf_d",
    ];

    pub fn values(&self) -> Vec<f64> {
        let (e, s, d) = (&self.terms, &self.script_terms, &self.dissipation_terms);
        vec![
            self.t,
            self.e_eps,
            self.f_eps,
            self.e_script,
            self.d_script,
            e.drift,
            e.velocity,
            e.inertia,
            e.gradient,
            s.velocity,
            s.inertia,
            s.gradient,
            s.mixed,
            s.top,
            s.director,
            d.velocity,
            d.inertia,
            d.gradient,
            self.l2_energy,
            self.grad_u_l2,
            self.constraint_dev,
            self.compat_dev,
            self.div_dev,
            self.linf_d,
        ]
    }

    pub fn from_values(v: &[f64]) -> Result<Self> {
        if v.len() != Self::COLUMNS.len() {
            return Err(Error::ShapeMismatch {
                expected: Self::COLUMNS.len(),
                found: v.len(),
            });
        }
        Ok(Self {
            t: v[0],
            e_eps: v[1],
            f_eps: v[2],
            e_script: v[3],
            d_script: v[4],
            terms: EnergyTerms {
                drift: v[5],
                velocity: v[6],
                inertia: v[7],
                gradient: v[8],
            },
            script_terms: ScriptTerms {
                velocity: v[9],
                inertia: v[10],
                gradient: v[11],
                mixed: v[12],
                top: v[13],
                director: v[14],
            },
            dissipation_terms: DissipationTerms {
                velocity: v[15],
                inertia: v[16],
                gradient: v[17],
            },
            l2_energy: v[18],
            grad_u_l2: v[19],
            constraint_dev: v[20],
            compat_dev: v[21],
            div_dev: v[22],
            linf_d: v[23],
        })
    }
}

/// Full monitor sample of a state.
pub fn energy_report(
    s: &State,
    d_in: &SpectralField,
    coef: &LeslieCoefficients,
    s_ord: usize,
) -> Result<EnergyReport> {
    let rho1 = coef.rho1();
    let (e_eps, terms) = energy_e(s, d_in, s_ord, rho1)?;
    let eta = coef.eta();
    let scripts = if eta > 0.0 && eta <= 0.5 {
        Some(energy_scripts(s, coef, s_ord, eta)?)
    } else {
        None
    };
    let d = tensorcalc::to_vec3(&s.d.to_physical());
    let w = tensorcalc::to_vec3(&s.ddot.to_physical());
    let constraint_dev = d.iter().map(|v| (tensorcalc::dot(v, v) - 1.0).abs()).fold(0.0, f64::max);
    let compat_dev = d.iter().zip(&w).map(|(a, b)| tensorcalc::dot(a, b).abs()).fold(0.0, f64::max);
    Ok(EnergyReport {
        t: s.t,
        e_eps,
        f_eps: dissipation_f(s, s_ord),
        e_script: scripts.map_or(f64::NAN, |x| x.energy),
        d_script: scripts.map_or(f64::NAN, |x| x.dissipation),
        terms,
        script_terms: scripts.map_or_else(ScriptTerms::default, |x| x.energy_terms),
        dissipation_terms: scripts.map_or_else(DissipationTerms::default, |x| x.dissipation_terms),
        l2_energy: 0.5 * (s.u.l2_norm_sq() + rho1 * s.ddot.l2_norm_sq() + s.d.derivative_norm_sq(1)),
        grad_u_l2: s.u.derivative_norm_sq(1),
        constraint_dev,
        compat_dev,
        div_dev: s.u.divergence_defect()?,
        linf_d: s.d.linf_norm(),
    })
}

/// Collects an [`EnergyReport`] at every observed state.
pub struct EnergyMonitor {
    coef: LeslieCoefficients,
    d_in: SpectralField,
    s_ord: usize,
    pub series: Vec<EnergyReport>,
}

impl EnergyMonitor {
    pub fn new(coef: LeslieCoefficients, d_in: SpectralField, s_ord: usize) -> Self {
        Self {
            coef,
            d_in,
            s_ord,
            series: Vec::new(),
        }
    }
}

impl Monitor for EnergyMonitor {
    fn observe(&mut self, s: &State) -> Result<()> {
        self.series.push(energy_report(s, &self.d_in, &self.coef, self.s_ord)?);
        Ok(())
    }
}

/// Running integrals `int_{t0}^{t_i} f` of sampled values, exact for cubics
/// on each interval (local four-point interpolation).
pub fn cumulative_integral(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    // 3-point Gauss–Legendre nodes on [-1, 1]
    let gl = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    for i in 0..n - 1 {
        let (lo, hi) = if n >= 4 {
            let lo = i.saturating_sub(1).min(n - 4);
            (lo, lo + 4)
        } else {
            (0, n)
        };
        let (a, b) = (t[i], t[i + 1]);
        let mut sum = 0.0;
        for (x, wgt) in gl {
            let tau = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let mut val = 0.0;
            for j in lo..hi {
                let mut basis = 1.0;
                for k in lo..hi {
                    if k != j {
                        basis *= (tau - t[k]) / (t[j] - t[k]);
                    }
                }
                val += f[j] * basis;
            }
            sum += wgt * val;
        }
        out[i + 1] = out[i] + 0.5 * (b - a) * sum;
    }
    out
}

/// Time derivative of sampled values by centered differences, one-sided at
/// the ends.
pub fn time_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (f[b] - f[a]) / (t[b] - t[a])
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub t: Vec<f64>,
    pub residual: Vec<f64>,
    pub max_residual: f64,
}

/// `[L2 energy(t) - L2 energy(0) + mu4/2 int_0^t |grad u|^2] / L2 energy(0)`
/// along a wave-map trajectory.
pub fn dissipation_balance(series: &[EnergyReport], coef: &LeslieCoefficients) -> Result<BalanceReport> {
    if !coef.is_wave_map() {
        return Err(Error::RegimeMismatch(
            "the L2 balance closes only for wave-map coefficients".into(),
        ));
    }
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let g: Vec<f64> = series.iter().map(|r| r.grad_u_l2).collect();
    let integral = cumulative_integral(&t, &g);
    let e0 = series.first().map_or(0.0, |r| r.l2_energy);
    let norm = if e0 > 0.0 { e0 } else { 1.0 };
    let residual: Vec<f64> = series
        .iter()
        .zip(&integral)
        .map(|(r, i)| (r.l2_energy - e0 + 0.5 * coef.mu4() * i).abs() / norm)
        .collect();
    let max_residual = residual.iter().copied().fold(0.0, f64::max);
    Ok(BalanceReport {
        t,
        residual,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor41Sample {
    pub t: f64,
    pub e_eps: f64,
    pub f_eps: f64,
    /// `dE/dt / 2 + beta F / 4`
    pub lhs: f64,
    pub p: f64,
    pub q: f64,
    /// `P(E) + Q(E) F`
    pub rhs: f64,
    pub ratio: f64,
    /// `E <= 2` and `Q(E) <= beta/4`.
    pub within_t_star: bool,
}

/// `P` and `Q` of the local energy inequality at energy `e`.
///
/// For wave-map coefficients `Q` vanishes and `P` takes its wave-map form.
pub fn inequality_terms(coef: &LeslieCoefficients, k: Constants, grad_din_hs: f64, e: f64) -> (f64, f64) {
    let poly = e * (e + 1.0) * (e + 2.0);
    let g = grad_din_hs;
    if coef.is_wave_map() {
        let p = k.c * (1.0 / coef.rho1().sqrt() + 1.0 / coef.mu4() + g) * poly;
        return (p, 0.0);
    }
    let p = c0(coef, k.c, g) * poly;
    let sum: f64 = (1..=5).map(|i| e.powf(0.5 * i as f64)).sum();
    let q = k.c
        * (coef.mu1() + coef.mu6() + (coef.lambda1().abs() - coef.lambda2()) / coef.rho1().sqrt())
        * (1.0 + g * g)
        * (g + sum);
    (p, q)
}

/// Ratio series of the local energy inequality with configured constants.
pub fn monitor_41(
    series: &[EnergyReport],
    coef: &LeslieCoefficients,
    k: Constants,
    grad_din_hs: f64,
) -> Result<Vec<Monitor41Sample>> {
    let beta = coef.beta();
    if !(beta > 0.0) {
        return Err(Error::RegimeMismatch(format!("beta = {beta} is not positive")));
    }
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let e: Vec<f64> = series.iter().map(|r| r.e_eps).collect();
    let de = time_derivative(&t, &e);
    Ok(series
        .iter()
        .zip(&de)
        .map(|(r, &dedt)| {
            let (p, q) = inequality_terms(coef, k, grad_din_hs, r.e_eps);
            let lhs = 0.5 * dedt + 0.25 * beta * r.f_eps;
            let rhs = p + q * r.f_eps;
            let ratio = if lhs == 0.0 {
                0.0
            } else if rhs == 0.0 {
                f64::INFINITY.copysign(lhs)
            } else {
                lhs / rhs
            };
            Monitor41Sample {
                t: r.t,
                e_eps: r.e_eps,
                f_eps: r.f_eps,
                lhs,
                p,
                q,
                rhs,
                ratio,
                within_t_star: r.e_eps <= 2.0 && q <= 0.25 * beta,
            }
        })
        .collect())
}

/// Smallest `C` with `linf_d <= C (sqrt(E_eps) + |grad d_in|_{H^s}) + 1` over
/// the series.
pub fn fit_linf_constant(series: &[EnergyReport], grad_din_hs: f64) -> f64 {
    series
        .iter()
        .map(|r| {
            let denom = r.e_eps.sqrt() + grad_din_hs;
            if denom > 0.0 {
                (r.linf_d - 1.0).max(0.0) / denom
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Evolves `init` and samples every `cfg.cadence` steps.
pub fn simulate(
    init: &InitialData,
    coef: &LeslieCoefficients,
    cfg: &StepperConfig,
    s_ord: usize,
) -> Result<(Vec<EnergyReport>, State, StopReason)> {
    let s0 = &init.state;
    let rhs = dynamics::system(coef, s0.grid(), s0.cutoff())?;
    let mut mon = EnergyMonitor::new(*coef, s0.d.clone(), s_ord);
    let out = run(s0, cfg, rhs.as_ref(), &mut mon)?;
    Ok((mon.series, out.state, out.stop))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintRow {
    pub cutoff: f64,
    pub max_constraint: f64,
    pub max_compat: f64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintTable {
    pub rows: Vec<ConstraintRow>,
}

impl ConstraintTable {
    fn decreasing(v: &[f64], strict: bool, slack: f64) -> bool {
        v.windows(2).enumerate().all(|(i, w)| {
            let allowance = if i == 0 { 1.0 + slack } else { 1.0 };
            if strict {
                w[1] < w[0] * allowance
            } else {
                w[1] <= w[0] * allowance
            }
        })
    }

    /// Both deviations strictly decrease with the cutoff.
    pub fn strictly_decreasing(&self) -> bool {
        let c: Vec<f64> = self.rows.iter().map(|r| r.max_constraint).collect();
        let w: Vec<f64> = self.rows.iter().map(|r| r.max_compat).collect();
        Self::decreasing(&c, true, 0.0) && Self::decreasing(&w, true, 0.0)
    }

    /// Non-increasing constraint deviation, with 10% slack on the first
    /// pair, and the last value below `tol`.
    pub fn trend_holds(&self, tol: f64) -> bool {
        let c: Vec<f64> = self.rows.iter().map(|r| r.max_constraint).collect();
        Self::decreasing(&c, false, 0.1) && c.last().is_some_and(|&v| v <= tol)
    }
}

/// Runs the same data at each cutoff and records the worst constraint and
/// compatibility deviations over the run.
pub fn constraint_propagation_experiment(
    preset: &Preset,
    grid: TorusGrid,
    cutoffs: &[f64],
    coef: &LeslieCoefficients,
    cfg: &StepperConfig,
) -> Result<ConstraintTable> {
    let rows = cutoffs
        .iter()
        .map(|&k| {
            let init = make_initial_data(preset, grid, k)?;
            constraint_row(&init.state, coef, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConstraintTable { rows })
}

/// Worst deviations along one run from `s0`.
pub fn constraint_row(s0: &State, coef: &LeslieCoefficients, cfg: &StepperConfig) -> Result<ConstraintRow> {
    let rhs = dynamics::system(coef, s0.grid(), s0.cutoff())?;
    let mut worst = (0.0f64, 0.0f64);
    let mut mon = |s: &State| -> Result<()> {
        worst.0 = worst.0.max(s.constraint_deviation());
        worst.1 = worst.1.max(s.compatibility_deviation());
        Ok(())
    };
    let out = run(s0, cfg, rhs.as_ref(), &mut mon)?;
    Ok(ConstraintRow {
        cutoff: s0.cutoff(),
        max_constraint: worst.0,
        max_compat: worst.1,
        stop: out.stop,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub series: Vec<EnergyReport>,
    pub stop: StopReason,
    pub e_in: f64,
    /// Largest `E_script(t_{i+1}) - E_script(t_i)` over the samples.
    pub worst_increase: f64,
    /// Whether every increase is at most `1e-9 E_script(0)`.
    pub monotone: bool,
    /// `int |grad u|^2_{H^s} dt` over the run.
    pub dissipation_integral: f64,
    /// `3 (|lambda1| + 2) E_in`.
    pub integral_bound: f64,
}

impl DecayReport {
    pub fn integral_ok(&self) -> bool {
        self.dissipation_integral <= self.integral_bound
    }
}

/// Evolves small data under global-regime coefficients and checks that the
/// weighted energy does not grow.
pub fn decay_experiment(
    coef: &LeslieCoefficients,
    init: &InitialData,
    cfg: &StepperConfig,
    s_ord: usize,
) -> Result<DecayReport> {
    if !(coef.alpha() > 0.0 && coef.lambda1() < 0.0) {
        return Err(Error::RegimeMismatch(format!(
            "decay needs alpha > 0 and mu2 < mu3 (alpha = {}, lambda1 = {})",
            coef.alpha(),
            coef.lambda1()
        )));
    }
    let e_in = init.energy(coef.rho1(), s_ord);
    let (series, _, stop) = simulate(init, coef, cfg, s_ord)?;
    let e0 = series.first().map_or(0.0, |r| r.e_script);
    let worst_increase = series
        .windows(2)
        .map(|w| w[1].e_script - w[0].e_script)
        .fold(f64::NEG_INFINITY, f64::max);
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let f: Vec<f64> = series.iter().map(|r| r.f_eps).collect();
    let dissipation_integral = cumulative_integral(&t, &f).last().copied().unwrap_or(0.0);
    Ok(DecayReport {
        monotone: series.len() < 2 || worst_increase <= 1e-9 * e0,
        worst_increase,
        dissipation_integral,
        integral_bound: 3.0 * (coef.lambda1().abs() + 2.0) * e_in,
        e_in,
        stop,
        series,
    })
}

/// Largest pointwise magnitude of the director on the storage grid.
pub fn director_sup(s: &State) -> f64 {
    pointwise_max_magnitude(&s.d.to_physical())
}
