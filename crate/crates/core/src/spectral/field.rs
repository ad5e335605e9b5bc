use num_complex::Complex64;
use rand::Rng;

use super::fft::Transformer;
use super::grid::{norm_sq, within, TorusGrid};
use crate::error::{Error, Result};

/// Real band-limited field on the torus, stored as Fourier coefficients.
///
/// The convention is `f(x) = sum_xi fhat(xi) exp(i xi.x)`; every component
/// satisfies `fhat(-xi) = conj(fhat(xi))` and vanishes for `|xi| > cutoff`.
/// Vector-valued gradients use the layout `[i * m + k] = d_i f_k` for an
/// `m`-component input.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    cutoff: f64,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid, ncomp: usize, cutoff: f64) -> Result<Self> {
        check_cutoff(grid, cutoff)?;
        Ok(Self {
            grid,
            cutoff,
            comps: vec![vec![Complex64::default(); grid.len()]; ncomp],
        })
    }

    /// Builds a field from raw coefficients, projecting onto the band and
    /// onto Hermitian-symmetric (real) fields.
    pub fn from_coeffs(grid: TorusGrid, cutoff: f64, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        check_cutoff(grid, cutoff)?;
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    found: c.len(),
                });
            }
        }
        let mut out = Self { grid, cutoff, comps };
        out.enforce_band();
        out.symmetrize();
        Ok(out)
    }

    /// Random field whose active modes satisfy `1 <= |xi| <= max_mode`,
    /// with coefficients uniform in the unit square scaled by `|xi|^-decay`.
    pub fn random<R: Rng>(
        grid: TorusGrid,
        ncomp: usize,
        cutoff: f64,
        max_mode: f64,
        decay: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let comps = (0..ncomp)
            .map(|_| {
                (0..grid.len())
                    .map(|flat| {
                        let xi = grid.wavenumber(flat);
                        let (re, im) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        let k2 = norm_sq(xi);
                        if k2 >= 1.0 && within(xi, max_mode) {
                            Complex64::new(re, im) * k2.powf(-0.5 * decay)
                        } else {
                            Complex64::default()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_coeffs(grid, cutoff, comps)
    }

    /// Spectral coefficients of physical samples on the storage grid,
    /// truncated to `cutoff`.
    pub fn to_spectral(grid: TorusGrid, values: &[Vec<f64>], cutoff: f64) -> Result<Self> {
        check_cutoff(grid, cutoff)?;
        for v in values {
            if v.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    found: v.len(),
                });
            }
        }
        let tr = Transformer::new(grid, cutoff, grid.n());
        let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
        Ok(Self {
            grid,
            cutoff,
            comps: tr.analyze(&refs),
        })
    }

    /// Samples `f(x, out)` at the grid points and transforms the samples.
    pub fn from_fn(
        grid: TorusGrid,
        ncomp: usize,
        cutoff: f64,
        f: impl Fn([f64; 3], &mut [f64]),
    ) -> Result<Self> {
        Self::to_spectral(grid, &sample_fn(grid, ncomp, f), cutoff)
    }

    /// Samples every component on the storage grid.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.to_physical_on(self.grid.n())
    }

    /// Samples every component on an `m`-point-per-axis lattice.
    pub fn to_physical_on(&self, m: usize) -> Vec<Vec<f64>> {
        let tr = Transformer::new(self.grid, self.cutoff, m);
        self.synthesize_with(&tr)
    }

    pub(crate) fn synthesize_with(&self, tr: &Transformer) -> Vec<Vec<f64>> {
        let refs: Vec<&[Complex64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        tr.synthesize(&refs)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn coeffs(&self, comp: usize) -> &[Complex64] {
        &self.comps[comp]
    }

    pub fn coeff(&self, comp: usize, xi: [i64; 3]) -> Complex64 {
        self.comps[comp][self.grid.flat_index(xi)]
    }

    pub fn component(&self, comp: usize) -> Self {
        Self {
            grid: self.grid,
            cutoff: self.cutoff,
            comps: vec![self.comps[comp].clone()],
        }
    }

    /// Stacks fields with equal grid and cutoff into one multi-component field.
    pub fn stack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or(Error::ComponentMismatch {
            expected: 1,
            found: 0,
        })?;
        let mut comps = Vec::new();
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::InvalidGrid("stacked fields live on different grids".into()));
            }
            if p.cutoff != first.cutoff {
                return Err(Error::CutoffMismatch(format!(
                    "stacked cutoffs {} and {}",
                    first.cutoff, p.cutoff
                )));
            }
            comps.extend(p.comps.iter().cloned());
        }
        Ok(Self {
            grid: first.grid,
            cutoff: first.cutoff,
            comps,
        })
    }

    pub(crate) fn from_parts(grid: TorusGrid, cutoff: f64, comps: Vec<Vec<Complex64>>) -> Self {
        Self { grid, cutoff, comps }
    }

    pub(crate) fn comps_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    /// Re-declares the band limit without touching coefficients beyond
    /// zeroing modes outside the new band.
    pub fn truncate(&self, cutoff: f64) -> Result<Self> {
        check_cutoff(self.grid, cutoff)?;
        let mut out = self.clone();
        out.cutoff = cutoff;
        out.enforce_band();
        Ok(out)
    }

    /// Applies a real multiplier `w(xi)` to every mode of every component.
    pub fn map_modes(&self, w: impl Fn([i64; 3]) -> f64) -> Self {
        let mut out = self.clone();
        let weights: Vec<f64> = (0..self.grid.len()).map(|f| w(self.grid.wavenumber(f))).collect();
        for c in &mut out.comps {
            for (z, &wt) in c.iter_mut().zip(&weights) {
                *z *= wt;
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= a;
            }
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.comps.len(), other.comps.len());
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (z, w) in c.iter_mut().zip(o) {
                *z += a * w;
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Largest `|fhat(-xi) - conj(fhat(xi))|` over modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.comps {
            for flat in 0..self.grid.len() {
                let xi = self.grid.wavenumber(flat);
                let neg = self.grid.flat_index([-xi[0], -xi[1], -xi[2]]);
                worst = worst.max((c[neg] - c[flat].conj()).norm());
            }
        }
        worst
    }

    /// Largest coefficient modulus outside the band.
    pub fn band_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.comps {
            for (flat, z) in c.iter().enumerate() {
                if !within(self.grid.wavenumber(flat), self.cutoff) {
                    worst = worst.max(z.norm());
                }
            }
        }
        worst
    }

    fn enforce_band(&mut self) {
        let grid = self.grid;
        let n = grid.n() as i64;
        for c in &mut self.comps {
            for (flat, z) in c.iter_mut().enumerate() {
                let xi = grid.wavenumber(flat);
                let nyquist = xi.iter().take(grid.dim()).any(|&k| k == -n / 2);
                if nyquist || !within(xi, self.cutoff) {
                    *z = Complex64::default();
                }
            }
        }
    }

    fn symmetrize(&mut self) {
        let grid = self.grid;
        for c in &mut self.comps {
            let src = c.clone();
            for (flat, z) in c.iter_mut().enumerate() {
                let xi = grid.wavenumber(flat);
                let neg = grid.flat_index([-xi[0], -xi[1], -xi[2]]);
                *z = 0.5 * (src[flat] + src[neg].conj());
            }
        }
    }
}

fn check_cutoff(grid: TorusGrid, cutoff: f64) -> Result<()> {
    if !(cutoff >= 0.0) || cutoff > grid.max_cutoff() {
        return Err(Error::CutoffMismatch(format!(
            "cutoff {cutoff} outside [0, {}] for N = {}",
            grid.max_cutoff(),
            grid.n()
        )));
    }
    Ok(())
}

/// Per-component samples of `f` on the grid points.
pub fn sample_fn(grid: TorusGrid, ncomp: usize, f: impl Fn([f64; 3], &mut [f64])) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; grid.len()]; ncomp];
    let mut buf = vec![0.0; ncomp];
    for p in 0..grid.len() {
        f(grid.coords(p), &mut buf);
        for (c, v) in buf.iter().enumerate() {
            out[c][p] = *v;
        }
    }
    out
}
