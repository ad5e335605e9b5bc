use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::State;
use crate::error::{Error, Result};
use crate::spectral::{pointwise_max_magnitude, sample_fn, SpectralField, TorusGrid};

/// Named families of admissible initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    /// `u = 0`, `d = (cos m x1, sin m x1, 0)`, `ddot = 0`.
    TwistWave {
        #[serde(default = "one_u32")]
        m: u32,
    },
    /// Twist wave with an out-of-plane director tilt, a tangential `ddot`
    /// and a divergence-free velocity, all of size `amplitude`.
    PerturbedTwist {
        #[serde(default = "one_u32")]
        m: u32,
        amplitude: f64,
    },
    /// Director near `e3` with random modes `1 <= |xi| <= modes` of size
    /// `amplitude`.
    RandomSmall {
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_modes")]
        modes: f64,
    },
    /// `d = e3`, `ddot = 0`, `u = amplitude (sin x2, 0, ..)`.
    ConstantDirectorShear {
        #[serde(default = "one_f64")]
        amplitude: f64,
    },
}

fn one_u32() -> u32 {
    1
}

fn one_f64() -> f64 {
    1.0
}

fn default_modes() -> f64 {
    DEFAULT_RANDOM_MODES
}

/// Default radius of the active modes of `random_small`.
pub const DEFAULT_RANDOM_MODES: f64 = 4.0;

impl Preset {
    /// `random_small` with the default active radius.
    pub fn random_small(amplitude: f64, seed: u64) -> Self {
        Preset::RandomSmall {
            amplitude,
            seed,
            modes: DEFAULT_RANDOM_MODES,
        }
    }

    /// Preset with default parameters, by name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "twist_wave" => Preset::TwistWave { m: 1 },
            "perturbed_twist" => Preset::PerturbedTwist { m: 1, amplitude: 1e-2 },
            "random_small" => Preset::RandomSmall {
                amplitude: 0.05,
                seed: 0,
                modes: DEFAULT_RANDOM_MODES,
            },
            "constant_director_shear" => Preset::ConstantDirectorShear { amplitude: 1.0 },
            other => return Err(Error::UnknownPreset(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::TwistWave { .. } => "twist_wave",
            Preset::PerturbedTwist { .. } => "perturbed_twist",
            Preset::RandomSmall { .. } => "random_small",
            Preset::ConstantDirectorShear { .. } => "constant_director_shear",
        }
    }

    /// Replaces the random seed, if the preset has one.
    pub fn with_seed(self, new_seed: u64) -> Self {
        match self {
            Preset::RandomSmall { amplitude, modes, .. } => Preset::RandomSmall {
                amplitude,
                seed: new_seed,
                modes,
            },
            other => other,
        }
    }

    /// Replaces the amplitude; `twist_wave` has none and is returned as is.
    pub fn with_amplitude(self, a: f64) -> Self {
        match self {
            Preset::PerturbedTwist { m, .. } => Preset::PerturbedTwist { m, amplitude: a },
            Preset::RandomSmall { seed, modes, .. } => Preset::RandomSmall {
                amplitude: a,
                seed,
                modes,
            },
            Preset::ConstantDirectorShear { .. } => Preset::ConstantDirectorShear { amplitude: a },
            other => other,
        }
    }
}

/// Initial state together with the full-resolution data it was cut from.
#[derive(Debug, Clone)]
pub struct InitialData {
    /// Data truncated to the band, ready to evolve.
    pub state: State,
    /// Data at the full resolution `N/2 - 1` of the storage grid.
    pub raw: State,
    /// `max | |d|^2 - 1 |` of the truncated director on the storage grid.
    pub constraint_residual: f64,
    /// `max |d . ddot|` of the truncated fields on the storage grid.
    pub compat_residual: f64,
}

impl InitialData {
    /// `|u|^2_{H^s} + rho1 |ddot|^2_{H^s} + |grad d|^2_{H^s}` of the
    /// full-resolution data.
    pub fn energy(&self, rho1: f64, s_ord: usize) -> f64 {
        let r = &self.raw;
        r.u.sobolev_norm_sq(s_ord, false).expect("inhomogeneous order")
            + rho1 * r.ddot.sobolev_norm_sq(s_ord, false).expect("inhomogeneous order")
            + r.d.gradient().sobolev_norm_sq(s_ord, false).expect("inhomogeneous order")
    }
}

/// Samples the preset on `grid`, normalizes the director and projects `ddot`
/// onto the tangent space pointwise, then truncates to `cutoff`.
pub fn make_initial_data(preset: &Preset, grid: TorusGrid, cutoff: f64) -> Result<InitialData> {
    let full = grid.max_cutoff();
    let dim = grid.dim();
    let (d, w, u) = match *preset {
        Preset::TwistWave { m } => {
            let m = f64::from(m);
            let d = sample_fn(grid, 3, |x, o| o.copy_from_slice(&[(m * x[0]).cos(), (m * x[0]).sin(), 0.0]));
            (d, vec![vec![0.0; grid.len()]; 3], vec![vec![0.0; grid.len()]; dim])
        }
        Preset::PerturbedTwist { m, amplitude: a } => {
            let m = f64::from(m);
            let d = sample_fn(grid, 3, |x, o| {
                let phi = m * x[0] + a * x[1].sin();
                o.copy_from_slice(&[phi.cos(), phi.sin(), a * (x[0] + x[1]).cos()]);
            });
            let w = sample_fn(grid, 3, |x, o| {
                o.copy_from_slice(&[a * x[1].sin(), a * x[0].cos(), a * (x[0] + x[1]).sin()]);
            });
            let u = sample_fn(grid, dim, |x, o| {
                o[0] = a * x[1].sin();
                o[1] = a * x[0].sin();
            });
            (d, w, u)
        }
        Preset::RandomSmall {
            amplitude: a,
            seed,
            modes,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = unit_sup(SpectralField::random(grid, 3, full, modes, 0.0, &mut rng)?.to_physical());
            let w = unit_sup(SpectralField::random(grid, 3, full, modes, 0.0, &mut rng)?.to_physical());
            let u = SpectralField::random(grid, dim, full, modes, 0.0, &mut rng)?
                .leray_project()?
                .to_physical();
            let d = (0..3)
                .map(|k| {
                    let base = if k == 2 { 1.0 } else { 0.0 };
                    r[k].iter().map(|v| base + a * v).collect()
                })
                .collect();
            let scale = |f: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                f.into_iter().map(|c| c.into_iter().map(|v| a * v).collect()).collect()
            };
            (d, scale(w), scale(unit_sup(u)))
        }
        Preset::ConstantDirectorShear { amplitude: a } => {
            let d = sample_fn(grid, 3, |_, o| o.copy_from_slice(&[0.0, 0.0, 1.0]));
            let u = sample_fn(grid, dim, |x, o| o[0] = a * x[1].sin());
            (d, vec![vec![0.0; grid.len()]; 3], u)
        }
    };
    let mut d = d;
    let mut w = w;
    normalize_samples(&mut d)?;
    tangential(&d, &mut w);
    let raw = State::new(
        0.0,
        SpectralField::to_spectral(grid, &u, full)?.leray_project()?,
        SpectralField::to_spectral(grid, &d, full)?,
        SpectralField::to_spectral(grid, &w, full)?,
    )?;
    let state = raw.truncate(cutoff)?;
    Ok(InitialData {
        constraint_residual: state.constraint_deviation(),
        compat_residual: state.compatibility_deviation(),
        state,
        raw,
    })
}

fn unit_sup(f: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let m = pointwise_max_magnitude(&f);
    if m == 0.0 {
        return f;
    }
    f.into_iter().map(|c| c.into_iter().map(|v| v / m).collect()).collect()
}

pub(super) fn normalize_samples(d: &mut [Vec<f64>]) -> Result<()> {
    for p in 0..d[0].len() {
        let n = (d[0][p].powi(2) + d[1][p].powi(2) + d[2][p].powi(2)).sqrt();
        if !(n > 0.0) {
            return Err(Error::NormalizationFailed { index: p });
        }
        for c in d.iter_mut() {
            c[p] /= n;
        }
    }
    Ok(())
}

/// `w <- w - (w . d) d` at each sample.
fn tangential(d: &[Vec<f64>], w: &mut [Vec<f64>]) {
    for p in 0..d[0].len() {
        let dot: f64 = (0..3).map(|k| d[k][p] * w[k][p]).sum();
        for k in 0..3 {
            w[k][p] -= dot * d[k][p];
        }
    }
}
