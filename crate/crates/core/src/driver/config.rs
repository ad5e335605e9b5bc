use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::{Constants, LeslieCoefficients, DEFAULT_PARODI_TOL};
use crate::dynamics::Preset;
use crate::error::{Error, Result};
use crate::integrator::{Scheme, StepperConfig};
use crate::spectral::TorusGrid;

/// One run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Band limit `K`; the mollifier parameter is `1 / K`.
    pub cutoff: f64,
    #[serde(default = "default_s_ord")]
    pub s_ord: usize,
    /// Overrides the seed of random presets when set.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub grid: GridBlock,
    pub coefficients: CoefficientsBlock,
    pub stepper: StepperBlock,
    pub initial_data: Preset,
    #[serde(default)]
    pub monitor: MonitorBlock,
    #[serde(default)]
    pub constants: ConstantsBlock,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsBlock {
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    #[serde(default)]
    pub mu3: f64,
    pub mu4: f64,
    #[serde(default)]
    pub mu5: f64,
    #[serde(default)]
    pub mu6: f64,
    pub rho1: f64,
    #[serde(default = "yes")]
    pub enforce_parodi: bool,
    #[serde(default = "default_parodi_tol")]
    pub parodi_tol: f64,
}

impl CoefficientsBlock {
    pub fn build(&self) -> Result<LeslieCoefficients> {
        LeslieCoefficients::new(
            [self.mu1, self.mu2, self.mu3, self.mu4, self.mu5, self.mu6],
            self.rho1,
            self.enforce_parodi,
            self.parodi_tol,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperBlock {
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub t_end: f64,
    #[serde(default = "one")]
    pub cfl_safety: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorBlock {
    /// Steps between monitor rows.
    #[serde(default = "one_usize")]
    pub cadence: usize,
    /// Monitor rows between snapshots; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
}

impl Default for MonitorBlock {
    fn default() -> Self {
        Self {
            cadence: 1,
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsBlock {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub c_prime: f64,
}

impl Default for ConstantsBlock {
    fn default() -> Self {
        Self { c: 1.0, c_prime: 1.0 }
    }
}

/// Cartesian grid of runs for `sweep`. Empty lists keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default)]
    pub mu4: Vec<f64>,
    #[serde(default)]
    pub rho1: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
}

fn default_s_ord() -> usize {
    4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_scheme() -> Scheme {
    Scheme::Rk4If
}

fn default_parodi_tol() -> f64 {
    DEFAULT_PARODI_TOL
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map_or_else(|| "config".to_string(), str::to_string);
            Error::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid;
        if !(1..=3).contains(&g.dim) {
            return Err(Error::config("grid.dim", format!("must be 1, 2 or 3, got {}", g.dim)));
        }
        if g.n < 4 || g.n % 2 != 0 {
            return Err(Error::config("grid.n", format!("must be even and at least 4, got {}", g.n)));
        }
        let k = self.cutoff;
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::config("cutoff", format!("must be at least 1, got {k}")));
        }
        if k > (g.n / 2 - 1) as f64 {
            return Err(Error::config(
                "cutoff",
                format!("K = {k} exceeds N/2 - 1 = {} for N = {}", g.n / 2 - 1, g.n),
            ));
        }
        if (g.n as f64) < 3.0 * k + 1.0 {
            return Err(Error::config(
                "grid.n",
                format!("N = {} is below 3K + 1 = {}", g.n, 3.0 * k + 1.0),
            ));
        }
        // integer s > dim/2 + 2
        if 2 * self.s_ord <= g.dim + 4 {
            return Err(Error::config(
                "s_ord",
                format!("must exceed dim/2 + 2 = {}, got {}", g.dim as f64 / 2.0 + 2.0, self.s_ord),
            ));
        }
        self.coefficients.build()?;
        self.constants().map_err(|e| Error::config("constants", e.to_string()))?;
        let st = self.stepper;
        if !(st.dt > 0.0) || !st.dt.is_finite() {
            return Err(Error::config("stepper.dt", format!("must be positive, got {}", st.dt)));
        }
        if !(st.t_end >= 0.0) || !st.t_end.is_finite() {
            return Err(Error::config("stepper.t_end", format!("must be non-negative, got {}", st.t_end)));
        }
        if !(st.cfl_safety > 0.0 && st.cfl_safety <= 1.0) {
            return Err(Error::config("stepper.cfl_safety", format!("must lie in (0, 1], got {}", st.cfl_safety)));
        }
        if self.monitor.cadence == 0 {
            return Err(Error::config("monitor.cadence", "must be at least 1"));
        }
        if let Preset::TwistWave { m } | Preset::PerturbedTwist { m, .. } = self.initial_data {
            if m == 0 {
                return Err(Error::config("initial_data.m", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Mollifier parameter implied by the band limit.
    pub fn eps(&self) -> f64 {
        1.0 / self.cutoff
    }

    pub fn torus(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.dim, self.grid.n)
    }

    pub fn coefficients(&self) -> Result<LeslieCoefficients> {
        self.coefficients.build()
    }

    pub fn constants(&self) -> Result<Constants> {
        Constants::new(self.constants.c, self.constants.c_prime)
    }

    pub fn stepper(&self) -> StepperConfig {
        let s = self.stepper;
        StepperConfig::new(s.dt, s.scheme, s.t_end)
            .with_cfl_safety(s.cfl_safety)
            .with_cadence(self.monitor.cadence)
    }

    /// The configured preset with the top-level seed applied.
    pub fn preset(&self) -> Preset {
        match self.seed {
            Some(seed) => self.initial_data.clone().with_seed(seed),
            None => self.initial_data.clone(),
        }
    }

    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(mut self, seed: Option<u64>, preset: Option<&str>, t_end: Option<f64>) -> Result<Self> {
        if let Some(name) = preset {
            self.initial_data = Preset::from_name(name)?;
        }
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(t) = t_end {
            self.stepper.t_end = t;
        }
        self.validate()?;
        Ok(self)
    }
}
