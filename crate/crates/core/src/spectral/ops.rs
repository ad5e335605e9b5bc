//! Fourier multipliers: mollifier, Leray projection, derivatives and norms.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{fft_friendly_size, norm_sq, within};
use crate::error::{Error, Result};

impl SpectralField {
    /// Sharp Fourier cutoff keeping `|xi| <= 1/eps`.
    ///
    /// The result's band limit is `min(cutoff, 1/eps)`. Idempotent.
    pub fn mollify(&self, eps: f64) -> Self {
        assert!(eps > 0.0, "mollifier parameter must be positive");
        let radius = (1.0 / eps).min(self.cutoff());
        self.truncate(radius).expect("radius is within the current band")
    }

    /// Projection onto divergence-free fields: `u - xi (xi . u) / |xi|^2`.
    pub fn leray_project(&self) -> Result<Self> {
        let dim = self.grid().dim();
        self.expect_components(dim)?;
        let grid = self.grid();
        let mut out = self.clone();
        let comps = out.comps_mut();
        for flat in 0..grid.len() {
            let xi = grid.wavenumber(flat);
            let k2 = norm_sq(xi);
            if k2 == 0.0 {
                continue;
            }
            let mut dot = Complex64::default();
            for a in 0..dim {
                dot += xi[a] as f64 * comps[a][flat];
            }
            for a in 0..dim {
                comps[a][flat] -= xi[a] as f64 * dot / k2;
            }
        }
        Ok(out)
    }

    /// `[i * m + k] = d_i f_k`.
    pub fn gradient(&self) -> Self {
        let grid = self.grid();
        let dim = grid.dim();
        let m = self.ncomp();
        let mut comps = Vec::with_capacity(dim * m);
        for i in 0..dim {
            for k in 0..m {
                let src = self.coeffs(k);
                comps.push(
                    (0..grid.len())
                        .map(|flat| Complex64::new(0.0, grid.wavenumber(flat)[i] as f64) * src[flat])
                        .collect(),
                );
            }
        }
        SpectralField::from_parts(grid, self.cutoff(), comps)
    }

    /// Divergence of a `dim`-component vector field.
    pub fn divergence(&self) -> Result<Self> {
        let grid = self.grid();
        let dim = grid.dim();
        self.expect_components(dim)?;
        let out = (0..grid.len())
            .map(|flat| {
                let xi = grid.wavenumber(flat);
                (0..dim)
                    .map(|a| Complex64::new(0.0, xi[a] as f64) * self.coeffs(a)[flat])
                    .sum()
            })
            .collect();
        Ok(SpectralField::from_parts(grid, self.cutoff(), vec![out]))
    }

    /// Row divergence of a `dim x dim` tensor stored row-major:
    /// `out_i = sum_j d_j T[j][i]`.
    pub fn tensor_divergence(&self) -> Result<Self> {
        let grid = self.grid();
        let dim = grid.dim();
        self.expect_components(dim * dim)?;
        let comps = (0..dim)
            .map(|i| {
                (0..grid.len())
                    .map(|flat| {
                        let xi = grid.wavenumber(flat);
                        (0..dim)
                            .map(|j| Complex64::new(0.0, xi[j] as f64) * self.coeffs(j * dim + i)[flat])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(SpectralField::from_parts(grid, self.cutoff(), comps))
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|xi| -norm_sq(xi))
    }

    /// `sum_xi w(xi) |fhat(xi)|^2 (2pi)^dim` with `w = sum_{k=k0}^{s} |xi|^{2k}`,
    /// `k0 = 1` for the homogeneous norm. Summed over components.
    pub fn sobolev_norm_sq(&self, s: usize, homogeneous: bool) -> Result<f64> {
        if homogeneous && s == 0 {
            return Err(Error::InvalidOrder(s));
        }
        let k0 = usize::from(homogeneous);
        let grid = self.grid();
        let mut total = 0.0;
        for flat in 0..grid.len() {
            let xi = grid.wavenumber(flat);
            if !within(xi, self.cutoff()) {
                continue;
            }
            let k2 = norm_sq(xi);
            let w: f64 = (k0..=s).map(|k| k2.powi(k as i32)).sum();
            if w == 0.0 {
                continue;
            }
            let amp: f64 = (0..self.ncomp()).map(|c| self.coeffs(c)[flat].norm_sqr()).sum();
            total += w * amp;
        }
        Ok(total * grid.volume())
    }

    /// `|grad^k f|_{L2}^2` for a single order `k`.
    pub fn derivative_norm_sq(&self, k: usize) -> f64 {
        let grid = self.grid();
        let mut total = 0.0;
        for flat in 0..grid.len() {
            let k2 = norm_sq(grid.wavenumber(flat));
            let amp: f64 = (0..self.ncomp()).map(|c| self.coeffs(c)[flat].norm_sqr()).sum();
            total += k2.powi(k as i32) * amp;
        }
        total * grid.volume()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.derivative_norm_sq(0)
    }

    /// `<f, g>_{L2}` summed over components.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut total = 0.0;
        for c in 0..self.ncomp() {
            for (a, b) in self.coeffs(c).iter().zip(other.coeffs(c)) {
                total += (a * b.conj()).re;
            }
        }
        total * self.grid().volume()
    }

    /// Largest pointwise magnitude, sampled on a lattice twice as fine as
    /// the storage grid.
    pub fn linf_norm(&self) -> f64 {
        self.linf_norm_on(fft_friendly_size(2 * self.grid().n()))
    }

    /// Largest pointwise magnitude on an `m`-point lattice.
    pub fn linf_norm_on(&self, m: usize) -> f64 {
        let phys = self.to_physical_on(m);
        pointwise_max_magnitude(&phys)
    }

    /// Largest `|xi . uhat(xi)|` over modes.
    pub fn divergence_defect(&self) -> Result<f64> {
        let grid = self.grid();
        let dim = grid.dim();
        self.expect_components(dim)?;
        let mut worst = 0.0f64;
        for flat in 0..grid.len() {
            let xi = grid.wavenumber(flat);
            let dot: Complex64 = (0..dim).map(|a| xi[a] as f64 * self.coeffs(a)[flat]).sum();
            worst = worst.max(dot.norm());
        }
        Ok(worst)
    }

    fn expect_components(&self, n: usize) -> Result<()> {
        if self.ncomp() != n {
            return Err(Error::ComponentMismatch {
                expected: n,
                found: self.ncomp(),
            });
        }
        Ok(())
    }
}

/// Maximum over points of the Euclidean norm across components.
pub fn pointwise_max_magnitude(phys: &[Vec<f64>]) -> f64 {
    let Some(first) = phys.first() else {
        return 0.0;
    };
    (0..first.len())
        .map(|p| phys.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
