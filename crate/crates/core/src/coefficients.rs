//! Leslie material coefficients and the explicit well-posedness constants.
//!
//! The generic constants `C(n, s)` and `C'(n, s)` of the energy estimates are
//! never given numerically, so they enter every formula through [`Constants`]
//! and are stamped into each [`RegimeReport`].

use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on the Parodi relation.
pub const DEFAULT_PARODI_TOL: f64 = 1e-12;

/// Leslie viscosities `mu1..mu6`, inertia `rho1` and the derived transport
/// coefficients `lambda1 = mu2 - mu3`, `lambda2 = mu5 - mu6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    mu: [f64; 6],
    rho1: f64,
    lambda1: f64,
    lambda2: f64,
    parodi_residual: f64,
}

impl LeslieCoefficients {
    /// Validates and builds a coefficient set.
    ///
    /// A Parodi violation larger than `parodi_tol` is an error when
    /// `enforce_parodi` is set and a logged warning otherwise.
    pub fn new(mu: [f64; 6], rho1: f64, enforce_parodi: bool, parodi_tol: f64) -> Result<Self> {
        const NAMES: [&str; 6] = ["mu1", "mu2", "mu3", "mu4", "mu5", "mu6"];
        if !(mu[3] > 0.0) {
            return Err(Error::NonPositiveViscosity(mu[3]));
        }
        for (i, &m) in mu.iter().enumerate() {
            if i != 3 && !(m >= 0.0) {
                return Err(Error::NegativeCoefficient {
                    name: NAMES[i],
                    value: m,
                });
            }
        }
        if !(rho1 > 0.0) {
            return Err(Error::NonPositiveInertia(rho1));
        }
        let parodi_residual = ((mu[1] + mu[2]) - (mu[5] - mu[4])).abs();
        if parodi_residual > parodi_tol {
            if enforce_parodi {
                return Err(Error::ParodiViolation {
                    residual: parodi_residual,
                    tol: parodi_tol,
                });
            }
            warn!("Parodi relation violated by {parodi_residual:e} (not enforced)");
        }
        Ok(Self {
            mu,
            rho1,
            lambda1: mu[1] - mu[2],
            lambda2: mu[4] - mu[5],
            parodi_residual,
        })
    }

    /// Wave-map coefficients: only `mu4` and `rho1` are non-zero.
    pub fn wave_map(mu4: f64, rho1: f64) -> Result<Self> {
        Self::new([0.0, 0.0, 0.0, mu4, 0.0, 0.0], rho1, true, DEFAULT_PARODI_TOL)
    }

    /// The same material with `mu1, mu2, mu3, mu5, mu6` zeroed.
    pub fn wave_map_part(&self) -> Self {
        Self::wave_map(self.mu[3], self.rho1).expect("validated mu4 and rho1")
    }

    pub fn mu(&self) -> [f64; 6] {
        self.mu
    }
    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }
    pub fn mu2(&self) -> f64 {
        self.mu[1]
    }
    pub fn mu3(&self) -> f64 {
        self.mu[2]
    }
    pub fn mu4(&self) -> f64 {
        self.mu[3]
    }
    pub fn mu5(&self) -> f64 {
        self.mu[4]
    }
    pub fn mu6(&self) -> f64 {
        self.mu[5]
    }
    pub fn rho1(&self) -> f64 {
        self.rho1
    }
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn parodi_residual(&self) -> f64 {
        self.parodi_residual
    }

    /// `beta = mu4 - 4 mu6`.
    pub fn beta(&self) -> f64 {
        self.mu[3] - 4.0 * self.mu[5]
    }

    /// True when the Leslie stress vanishes identically.
    pub fn is_wave_map(&self) -> bool {
        self.mu1() == 0.0
            && self.mu2() == 0.0
            && self.mu3() == 0.0
            && self.mu5() == 0.0
            && self.mu6() == 0.0
    }

    /// `eta = 1/2 min{1, 1/rho1, |lambda1|/rho1}`.
    pub fn eta(&self) -> f64 {
        0.5 * 1f64
            .min(1.0 / self.rho1)
            .min(self.lambda1.abs() / self.rho1)
    }

    /// Global-regime margin. Diverges to `-inf` when `lambda1 = 0`.
    pub fn alpha(&self) -> f64 {
        let l1 = self.lambda1.abs();
        if l1 == 0.0 {
            return f64::NEG_INFINITY;
        }
        let l2 = self.lambda2;
        self.beta() - (l1 - 7.0 * l2).powi(2) / self.eta() - 2.0 * (7.0 * l1 - 2.0 * l2).powi(2) / l1
    }
}

/// Stand-ins for the unexhibited constants `C(n, s)` and `C'(n, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c: f64,
    pub c_prime: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c: 1.0,
            c_prime: 1.0,
        }
    }
}

impl Constants {
    pub fn new(c: f64, c_prime: f64) -> Result<Self> {
        let k = Self { c, c_prime };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidConstant {
                name: "C",
                value: self.c,
            });
        }
        if !(self.c_prime > 0.0) {
            return Err(Error::InvalidConstant {
                name: "C'",
                value: self.c_prime,
            });
        }
        Ok(())
    }
}

/// Which well-posedness statement produced a lifespan bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LifespanRegime {
    /// Small data, large `mu4` (`beta > 0`).
    PartI,
    /// Wave-map coefficients, arbitrary finite energy.
    PartII,
    /// Damped, strongly viscous regime with data below `eps1`: global.
    PartIII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifespan {
    pub regime: LifespanRegime,
    /// Guaranteed existence time; `f64::INFINITY` for global solutions.
    pub time: f64,
    /// For Part I, whether `E_in < eps0` holds with the configured `C`.
    pub small_data: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub beta: f64,
    pub eta: f64,
    pub alpha: f64,
    pub theta: f64,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    pub c1: Option<f64>,
    pub c3: f64,
    pub part1_applies: bool,
    pub part2_applies: bool,
    pub part3_applies: bool,
    pub lifespan: Option<Lifespan>,
    pub constants: Constants,
    pub parodi_residual: f64,
}

/// Evaluates every regime constant for `coef` with the configured constants.
pub fn regime_classify(coef: &LeslieCoefficients, k: Constants) -> Result<RegimeReport> {
    k.validate()?;
    let beta = coef.beta();
    let eta = coef.eta();
    let alpha = coef.alpha();
    let theta = alpha.min(eta).min(0.5 * coef.lambda1().abs());
    let part1 = beta > 0.0;
    let part2 = coef.is_wave_map();
    let part3 = alpha > 0.0 && coef.mu2() < coef.mu3();
    Ok(RegimeReport {
        beta,
        eta,
        alpha,
        theta,
        eps0: if part1 { Some(epsilon0(coef, k.c)?) } else { None },
        eps1: if part3 { Some(epsilon1(coef, k)?) } else { None },
        c1: if part1 { Some(c1(coef, k.c)) } else { None },
        c3: c3(coef, k.c_prime),
        part1_applies: part1,
        part2_applies: part2,
        part3_applies: part3,
        lifespan: None,
        constants: k,
        parodi_residual: coef.parodi_residual(),
    })
}

impl RegimeReport {
    /// Attaches the lifespan bound for initial energy `e_in`.
    pub fn with_lifespan(
        mut self,
        coef: &LeslieCoefficients,
        e_in: f64,
        grad_din_hs: f64,
    ) -> Result<Self> {
        self.lifespan = Some(lifespan_bound(coef, e_in, self.constants, grad_din_hs)?);
        Ok(self)
    }

    /// Flat `key = value` document; floats use the shortest round-trip form.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("beta", fmt_f(self.beta));
        put("eta", fmt_f(self.eta));
        put("alpha", fmt_f(self.alpha));
        put("theta", fmt_f(self.theta));
        if let Some(v) = self.eps0 {
            put("eps0", fmt_f(v));
        }
        if let Some(v) = self.eps1 {
            put("eps1", fmt_f(v));
        }
        if let Some(v) = self.c1 {
            put("c1", fmt_f(v));
        }
        put("c3", fmt_f(self.c3));
        put("part1_applies", self.part1_applies.to_string());
        put("part2_applies", self.part2_applies.to_string());
        put("part3_applies", self.part3_applies.to_string());
        if let Some(l) = &self.lifespan {
            put("lifespan_regime", format!("\"{:?}\"", l.regime));
            put("lifespan", fmt_f(l.time));
            put("lifespan_small_data", l.small_data.to_string());
        }
        put("constant_c", fmt_f(self.constants.c));
        put("constant_c_prime", fmt_f(self.constants.c_prime));
        put("parodi_residual", fmt_f(self.parodi_residual));
        out
    }
}

fn fmt_f(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Regime report")?;
        writeln!(f, "  beta  = mu4 - 4 mu6           = {}", self.beta)?;
        writeln!(f, "  eta                           = {}", self.eta)?;
        writeln!(f, "  alpha                         = {}", self.alpha)?;
        writeln!(f, "  theta                         = {}", self.theta)?;
        match self.eps0 {
            Some(v) => writeln!(f, "  eps0                          = {v:e}")?,
            None => writeln!(f, "  eps0                          = n/a (beta <= 0)")?,
        }
        match self.eps1 {
            Some(v) => writeln!(f, "  eps1                          = {v:e}")?,
            None => writeln!(f, "  eps1                          = n/a")?,
        }
        if let Some(v) = self.c1 {
            writeln!(f, "  C1                            = {v}")?;
        }
        writeln!(f, "  C3                            = {}", self.c3)?;
        writeln!(f, "  part I  (local, small data)   : {}", self.part1_applies)?;
        writeln!(f, "  part II (wave map)            : {}", self.part2_applies)?;
        writeln!(f, "  part III (global, small data) : {}", self.part3_applies)?;
        if let Some(l) = &self.lifespan {
            writeln!(f, "  lifespan ({:?})             = {}", l.regime, l.time)?;
        }
        writeln!(
            f,
            "  constants: C = {}, C' = {}",
            self.constants.c, self.constants.c_prime
        )?;
        write!(f, "  Parodi residual               = {:e}", self.parodi_residual)
    }
}

fn inertial_denominator(coef: &LeslieCoefficients, c: f64) -> f64 {
    // sqrt(rho1) multiplies (mu1 + mu6) only
    96.0 * c
        * (coef.rho1().sqrt() * (coef.mu1() + coef.mu6()) + coef.lambda1().abs() - coef.lambda2())
}

/// Small-data threshold of the local regime.
pub fn epsilon0(coef: &LeslieCoefficients, c: f64) -> Result<f64> {
    let beta = coef.beta();
    if !(beta > 0.0) {
        return Err(Error::RegimeMismatch(format!(
            "eps0 requires beta > 0, got {beta}"
        )));
    }
    let q = coef.rho1() * beta * beta / inertial_denominator(coef, c).powi(2);
    // q = inf when the denominator vanishes: the min then falls back to 1.
    Ok(1f64.min(q).min(q * q))
}

/// `C1 = C0(lambda1, lambda2, beta, rho1, 1)`.
pub fn c1(coef: &LeslieCoefficients, c: f64) -> f64 {
    c0(coef, c, 1.0)
}

/// Growth constant of the polynomial term, as a function of `|grad d_in|_{H^s}`.
pub fn c0(coef: &LeslieCoefficients, c: f64, grad_din_hs: f64) -> f64 {
    let sr = coef.rho1().sqrt();
    let l1 = coef.lambda1().abs();
    let l2 = coef.lambda2();
    let g = grad_din_hs;
    c * ((1.0 + l1 - l2 + (l1 - l2) * g * g) / sr
        + g
        + 1.0 / sr.powi(3)
        + ((sr - l2).powi(2) + (l1 - l2).powi(2)) / (coef.rho1() * coef.beta()))
}

/// Wave-map growth constant as stated with the lifespan theorem.
pub fn c2(coef: &LeslieCoefficients, c: f64, grad_din_hs: f64) -> f64 {
    c * (1.0 + 1.0 / coef.mu4() + grad_din_hs)
}

/// Variant of [`c2`] with `1/sqrt(rho1)` in place of `1`, as written in the
/// wave-map proof. Reported alongside, never used for bounds.
pub fn c2_alternate(coef: &LeslieCoefficients, c: f64, grad_din_hs: f64) -> f64 {
    c * (1.0 / coef.rho1().sqrt() + 1.0 / coef.mu4() + grad_din_hs)
}

pub fn c3(coef: &LeslieCoefficients, c_prime: f64) -> f64 {
    let isr = 1.0 / coef.rho1().sqrt();
    4.0 * c_prime
        * (1.0 + isr)
        * (1.0 + coef.mu1() + coef.lambda1().abs() - coef.lambda2() + coef.mu6()
            - coef.rho1() * coef.lambda2()
            + coef.rho1()
            + isr)
}

/// Global small-data threshold.
pub fn epsilon1(coef: &LeslieCoefficients, k: Constants) -> Result<f64> {
    let alpha = coef.alpha();
    if !(alpha > 0.0 && coef.mu2() < coef.mu3()) {
        return Err(Error::RegimeMismatch(format!(
            "eps1 requires alpha > 0 and mu2 < mu3 (alpha = {alpha}, mu2 = {}, mu3 = {})",
            coef.mu2(),
            coef.mu3()
        )));
    }
    let theta = alpha.min(coef.eta()).min(0.5 * coef.lambda1().abs());
    let eps0 = epsilon0(coef, k.c)?;
    let c3 = c3(coef, k.c_prime);
    let tail = theta * theta / (8.0 * c3).powi(2);
    Ok((0.5 * eps0).min(tail) / (coef.lambda1().abs() + 2.0))
}

/// `Y(E) = E (E + 2) / (E + 1)^2`.
pub fn y_of(e_in: f64) -> f64 {
    e_in * (e_in + 2.0) / ((e_in + 1.0) * (e_in + 1.0))
}

/// Lifespan guaranteed for initial energy `e_in`.
///
/// Part III with `e_in <= eps1` gives `+inf`; otherwise wave-map
/// coefficients use the Part II bound and `beta > 0` the Part I bound.
pub fn lifespan_bound(
    coef: &LeslieCoefficients,
    e_in: f64,
    k: Constants,
    grad_din_hs: f64,
) -> Result<Lifespan> {
    k.validate()?;
    if !(e_in > 0.0) {
        return Err(Error::NonPositiveEnergy(e_in));
    }
    if coef.alpha() > 0.0 && coef.mu2() < coef.mu3() && e_in <= epsilon1(coef, k)? {
        return Ok(Lifespan {
            regime: LifespanRegime::PartIII,
            time: f64::INFINITY,
            small_data: true,
        });
    }
    if coef.is_wave_map() {
        let c2 = c2(coef, k.c, grad_din_hs);
        return Ok(Lifespan {
            regime: LifespanRegime::PartII,
            time: (1.0 / y_of(e_in)).ln() / (4.0 * c2),
            small_data: true,
        });
    }
    if coef.beta() > 0.0 {
        if e_in >= 1.0 {
            return Err(Error::RegimeMismatch(format!(
                "local lifespan needs E_in < 1, got {e_in}"
            )));
        }
        return Ok(Lifespan {
            regime: LifespanRegime::PartI,
            time: (1.0 / e_in).ln() / (48.0 * c1(coef, k.c)),
            small_data: e_in < epsilon0(coef, k.c)?,
        });
    }
    Err(Error::RegimeMismatch(format!(
        "no lifespan statement covers beta = {}",
        coef.beta()
    )))
}

/// `W(E_in, T)` and the resulting wave-map energy bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCap {
    pub w: f64,
    /// `E_in + 2 C2 T W (W + 1)(W + 2)`.
    pub bound: f64,
}

pub fn part2_energy_cap(e_in: f64, t: f64, c2: f64) -> Result<EnergyCap> {
    let growth = y_of(e_in) * (4.0 * c2 * t).exp();
    if !(growth < 1.0) {
        return Err(Error::CapDiverged(growth));
    }
    let w = 1.0 / (1.0 - growth).sqrt() - 1.0;
    Ok(EnergyCap {
        w,
        bound: e_in + 2.0 * c2 * t * w * (w + 1.0) * (w + 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn non_parodi(mu: [f64; 6], rho1: f64) -> LeslieCoefficients {
        LeslieCoefficients::new(mu, rho1, false, DEFAULT_PARODI_TOL).unwrap()
    }

    /// mu4 = 101, mu3 - mu2 = 1, everything else zero.
    fn part3_example() -> LeslieCoefficients {
        non_parodi([0.0, 0.0, 1.0, 101.0, 0.0, 0.0], 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn derived_lambdas() {
        let c = non_parodi([0.0, 1.0, 3.0, 1.0, 2.0, 2.0], 1.0);
        assert_eq!(c.lambda1(), -2.0);
        assert_eq!(c.lambda2(), 0.0);
    }

    #[test]
    fn parodi_holds() {
        let c = LeslieCoefficients::new([0.0, 0.0, 2.0, 1.0, 1.0, 3.0], 1.0, true, 1e-12).unwrap();
        assert_eq!(c.parodi_residual(), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            LeslieCoefficients::new([0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, true, 1e-12),
            Err(Error::NonPositiveViscosity(_))
        ));
        assert!(matches!(
            LeslieCoefficients::new([-1.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1.0, true, 1e-12),
            Err(Error::NegativeCoefficient { name: "mu1", .. })
        ));
        assert!(matches!(
            LeslieCoefficients::new([0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 0.0, true, 1e-12),
            Err(Error::NonPositiveInertia(_))
        ));
        assert!(matches!(
            LeslieCoefficients::new([0.0, 0.0, 1.0, 1.0, 0.0, 0.0], 1.0, true, 1e-12),
            Err(Error::ParodiViolation { .. })
        ));
        assert!(LeslieCoefficients::new([0.0, 0.0, 1.0, 1.0, 0.0, 0.0], 1.0, false, 1e-12).is_ok());
    }

    #[test]
    fn part3_example_constants() {
        let r = regime_classify(&part3_example(), Constants::default()).unwrap();
        assert_eq!(r.eta, 0.5);
        assert!(rel(r.alpha, 1.0) < 1e-12);
        assert_eq!(r.theta, 0.5);
        assert!(r.part1_applies && r.part3_applies && !r.part2_applies);
    }

    #[test]
    fn eta_and_beta() {
        let c = non_parodi([0.0, 0.0, 1.0, 1.0, 0.0, 0.0], 2.0);
        assert_eq!(c.eta(), 0.25);
        let c = non_parodi([0.0, 0.0, 0.0, 8.0, 1.0, 1.0], 1.0);
        assert_eq!(c.beta(), 4.0);
    }

    #[test]
    fn eps0_example() {
        // mu6 = 1, lambda2 = 0 => mu5 = 1; lambda1 = -1 => mu3 = 1.
        let c = non_parodi([0.0, 0.0, 1.0, 8.0, 1.0, 1.0], 1.0);
        let e0 = epsilon0(&c, 1.0).unwrap();
        let expected = 256.0 / 192f64.powi(4);
        assert!(rel(e0, expected) < 1e-12);
        assert!(rel(e0, 1.8838e-7) < 1e-4);
        assert!(epsilon0(&c, 2.0).unwrap() < e0);
    }

    #[test]
    fn eps0_vanishes_with_beta() {
        let mut last = f64::INFINITY;
        for mu4 in [4.1, 4.01, 4.001, 4.0001] {
            let c = non_parodi([0.0, 0.0, 1.0, mu4, 1.0, 1.0], 1.0);
            let e = epsilon0(&c, 1.0).unwrap();
            assert!(e < last);
            last = e;
        }
        assert!(last < 1e-20);
        let c = non_parodi([0.0, 0.0, 1.0, 4.0, 1.0, 1.0], 1.0);
        assert!(matches!(epsilon0(&c, 1.0), Err(Error::RegimeMismatch(_))));
    }

    #[test]
    fn eps1_example() {
        let c = part3_example();
        let e1 = epsilon1(&c, Constants::default()).unwrap();
        // C3 = 4 * 2 * (1 + 0 + 1 - 0 + 0 - 0 + 1 + 1) = 32, eps0 = 1
        assert!(rel(c3(&c, 1.0), 32.0) < 1e-15);
        let expected = (0.25 / (8.0f64 * 32.0).powi(2)).min(0.5) / 3.0;
        assert!(rel(e1, expected) < 1e-12);
        let e0 = epsilon0(&c, 1.0).unwrap();
        assert!(e1 <= e0 / (2.0 * 3.0));
        let wm = LeslieCoefficients::wave_map(1.0, 1.0).unwrap();
        assert!(matches!(
            epsilon1(&wm, Constants::default()),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn eps1_vanishes_with_theta() {
        // shrink alpha towards zero through mu4
        let base = 101.0;
        let mut prev = f64::INFINITY;
        for d in [0.5, 0.1, 0.01, 0.001, 1e-4] {
            let c = non_parodi([0.0, 0.0, 1.0, base - 1.0 + d, 0.0, 0.0], 1.0);
            let e1 = epsilon1(&c, Constants::default()).unwrap();
            assert!(e1 < prev);
            prev = e1;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn part2_lifespan_example() {
        let c = LeslieCoefficients::wave_map(1.0, 1.0).unwrap();
        assert_eq!(y_of(1.0), 0.75);
        let l = lifespan_bound(&c, 1.0, Constants::default(), 0.0).unwrap();
        assert_eq!(l.regime, LifespanRegime::PartII);
        assert!(rel(l.time, (4.0f64 / 3.0).ln() / 8.0) < 1e-14);
        assert!(rel(l.time, 0.03596) < 1e-3);
    }

    #[test]
    fn part3_lifespan_infinite() {
        let c = part3_example();
        let e1 = epsilon1(&c, Constants::default()).unwrap();
        let l = lifespan_bound(&c, e1, Constants::default(), 0.0).unwrap();
        assert_eq!(l.time, f64::INFINITY);
        let l = lifespan_bound(&c, 2.0 * e1, Constants::default(), 0.0).unwrap();
        assert_eq!(l.regime, LifespanRegime::PartI);
        assert!(l.time.is_finite());
    }

    #[test]
    fn part1_lifespan_limits() {
        let c = non_parodi([0.0, 0.0, 1.0, 8.0, 1.0, 1.0], 1.0);
        let k = Constants::default();
        let small = lifespan_bound(&c, 1e-300, k, 0.0).unwrap().time;
        let tiny = lifespan_bound(&c, 1e-30, k, 0.0).unwrap().time;
        assert!(small > tiny && small > 1.0);
        let near_one = lifespan_bound(&c, 1.0 - 1e-12, k, 0.0).unwrap().time;
        assert!(near_one > 0.0 && near_one < 1e-12);
        assert!(matches!(
            lifespan_bound(&c, 0.0, k, 0.0),
            Err(Error::NonPositiveEnergy(_))
        ));
    }

    #[test]
    fn energy_cap() {
        let cap = part2_energy_cap(1.0, 0.0, 2.0).unwrap();
        assert!((cap.w - 1.0).abs() < 1e-15);
        assert_eq!(cap.bound, 1.0);
        // E_in = 0.5: Y = 1.25 / 2.25 = 5/9
        let cap = part2_energy_cap(0.5, 0.01, 2.0).unwrap();
        let g = 5.0f64 / 9.0 * 0.08f64.exp();
        let w = 1.0 / (1.0 - g).sqrt() - 1.0;
        assert!(rel(cap.w, w) < 1e-14);
        assert!(rel(cap.bound, 0.5 + 0.04 * w * (w + 1.0) * (w + 2.0)) < 1e-14);
        let t_blow = (1.0 / y_of(1.0)).ln() / 8.0;
        assert!(matches!(
            part2_energy_cap(1.0, t_blow * 1.000001, 2.0),
            Err(Error::CapDiverged(_))
        ));
    }

    #[test]
    fn key_values_carry_constants() {
        let r = regime_classify(&part3_example(), Constants::new(2.0, 3.0).unwrap())
            .unwrap()
            .with_lifespan(&part3_example(), 1e-12, 0.0)
            .unwrap();
        let kv = r.to_key_values();
        assert!(kv.contains("constant_c = 2.0"));
        assert!(kv.contains("constant_c_prime = 3.0"));
        assert!(kv.contains("lifespan = inf"));
        let parsed: toml::Table = kv.parse().unwrap();
        assert_eq!(parsed["theta"].as_float(), Some(0.5));
    }
}
