use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, 2pi)^dim` with `n` points per axis.
///
/// Flat indices are row-major with axis 0 (`x1`) slowest. Wavenumbers use the
/// FFT ordering: index `i` maps to `i` for `i < n/2` and `i - n` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per dimension must be even and >= 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// `(2pi)^dim`, the torus volume.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Largest band limit representable without touching the Nyquist mode.
    pub fn max_cutoff(&self) -> f64 {
        (self.n / 2 - 1) as f64
    }

    pub fn wavenumber(&self, flat: usize) -> [i64; 3] {
        lattice_wavenumber(self.dim, self.n, flat)
    }

    /// Physical coordinates of grid point `flat`; unused axes are zero.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            x[a] = (rem % self.n) as f64 * self.spacing();
            rem /= self.n;
        }
        x
    }

    pub fn flat_index(&self, xi: [i64; 3]) -> usize {
        lattice_index(self.dim, self.n, xi)
    }
}

pub(crate) fn lattice_wavenumber(dim: usize, m: usize, flat: usize) -> [i64; 3] {
    let mut xi = [0i64; 3];
    let mut rem = flat;
    let half = m / 2;
    for a in (0..dim).rev() {
        let i = rem % m;
        rem /= m;
        xi[a] = if i < half || (m % 2 == 1 && i == half) {
            i as i64
        } else {
            i as i64 - m as i64
        };
    }
    xi
}

pub(crate) fn lattice_index(dim: usize, m: usize, xi: [i64; 3]) -> usize {
    let mut flat = 0usize;
    for &k in xi.iter().take(dim) {
        flat = flat * m + k.rem_euclid(m as i64) as usize;
    }
    flat
}

pub(crate) fn norm_sq(xi: [i64; 3]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) as f64
}

/// Whether `|xi| <= radius`, with a relative slack for radii computed as `1/eps`.
pub(crate) fn within(xi: [i64; 3], radius: f64) -> bool {
    norm_sq(xi) <= radius * radius * (1.0 + 1e-12)
}

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn fft_friendly_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Lattice size that forms degree-`degree` products of fields band-limited to
/// `radius` without aliasing back into the band.
pub fn dealiased_size(radius: f64, degree: usize) -> usize {
    let kmax = radius.floor() as usize;
    fft_friendly_size((degree + 1) * kmax + 1)
}
