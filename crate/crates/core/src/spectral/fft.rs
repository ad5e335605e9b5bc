//! Multi-dimensional complex FFTs and band-limited real transforms.
//!
//! Real fields are transformed two at a time by packing them into the real and
//! imaginary parts of one complex array.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{lattice_index, within, TorusGrid};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(m: usize) -> Plans {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<usize, Plans>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, map) = &mut *guard;
    if let Some(p) = map.get(&m) {
        return p.clone();
    }
    let p = (planner.plan_fft_forward(m), planner.plan_fft_inverse(m));
    map.insert(m, p.clone());
    p
}

/// Unnormalized FFT over all axes of a `m^dim` row-major array.
#[derive(Clone)]
pub(crate) struct NdFft {
    dim: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl NdFft {
    pub fn new(dim: usize, m: usize) -> Self {
        let (fwd, inv) = plans(m);
        Self { dim, m, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(&*self.fwd, buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(&*self.inv, buf);
    }

    fn run(&self, fft: &dyn Fft<f64>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len());
        let m = self.m;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut lines = Vec::new();
        for axis in 0..self.dim {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(buf, &mut scratch);
                continue;
            }
            // Each block of m*stride holds `stride` lines of length m.
            lines.resize(m * stride, Complex64::default());
            for block in buf.chunks_exact_mut(m * stride) {
                for j in 0..m {
                    for s in 0..stride {
                        lines[s * m + j] = block[j * stride + s];
                    }
                }
                fft.process_with_scratch(&mut lines, &mut scratch);
                for j in 0..m {
                    for s in 0..stride {
                        block[j * stride + s] = lines[s * m + j];
                    }
                }
            }
        }
    }
}

/// Moves band-limited spectra stored on a [`TorusGrid`] to and from physical
/// samples on an `m^dim` lattice.
///
/// `m` may differ from the storage grid: a larger `m` zero-pads for dealiased
/// products or oversampled evaluation.
#[derive(Clone)]
pub struct Transformer {
    grid: TorusGrid,
    m: usize,
    fft: NdFft,
    /// (storage index, lattice index of +xi, lattice index of -xi)
    active: Vec<(usize, usize, usize)>,
}

impl Transformer {
    /// # Panics
    /// If `m` cannot hold the band without aliasing (`m <= 2 * floor(radius)`).
    pub fn new(grid: TorusGrid, radius: f64, m: usize) -> Self {
        let kmax = radius.floor() as usize;
        assert!(m > 2 * kmax, "lattice of {m} points cannot hold band {radius}");
        let dim = grid.dim();
        let active = (0..grid.len())
            .filter_map(|flat| {
                let xi = grid.wavenumber(flat);
                within(xi, radius).then(|| {
                    let neg = [-xi[0], -xi[1], -xi[2]];
                    (flat, lattice_index(dim, m, xi), lattice_index(dim, m, neg))
                })
            })
            .collect();
        Self {
            grid,
            m,
            fft: NdFft::new(dim, m),
            active,
        }
    }

    pub fn lattice_size(&self) -> usize {
        self.m
    }

    pub fn lattice_len(&self) -> usize {
        self.fft.len()
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Physical samples of each spectrum on the lattice.
    pub fn synthesize(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let pairs: Vec<_> = spectra.chunks(2).collect();
        let out: Vec<(Vec<f64>, Option<Vec<f64>>)> = pairs
            .par_iter()
            .map(|pair| {
                let mut buf = vec![Complex64::default(); self.lattice_len()];
                let a = pair[0];
                let b = pair.get(1);
                for &(s, p, _) in &self.active {
                    let vb = b.map_or(Complex64::default(), |b| b[s]);
                    buf[p] = a[s] + Complex64::i() * vb;
                }
                self.fft.inverse(&mut buf);
                let re = buf.iter().map(|z| z.re).collect();
                let im = b.map(|_| buf.iter().map(|z| z.im).collect());
                (re, im)
            })
            .collect();
        let mut res = Vec::with_capacity(spectra.len());
        for (re, im) in out {
            res.push(re);
            if let Some(im) = im {
                res.push(im);
            }
        }
        res
    }

    /// Fourier coefficients of each sample array, truncated to the band and
    /// placed on the storage grid.
    pub fn analyze(&self, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let scale = 1.0 / self.lattice_len() as f64;
        let pairs: Vec<_> = values.chunks(2).collect();
        let out: Vec<(Vec<Complex64>, Option<Vec<Complex64>>)> = pairs
            .par_iter()
            .map(|pair| {
                let a = pair[0];
                let b = pair.get(1);
                let mut buf: Vec<Complex64> = match b {
                    Some(b) => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                    None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                };
                self.fft.forward(&mut buf);
                let n = self.grid.len();
                let mut ca = vec![Complex64::default(); n];
                let mut cb = b.map(|_| vec![Complex64::default(); n]);
                for &(s, p, q) in &self.active {
                    let z = buf[p] * scale;
                    let zc = buf[q].conj() * scale;
                    match cb.as_mut() {
                        Some(cb) => {
                            ca[s] = 0.5 * (z + zc);
                            cb[s] = Complex64::new(0.0, -0.5) * (z - zc);
                        }
                        None => ca[s] = 0.5 * (z + zc),
                    }
                }
                (ca, cb)
            })
            .collect();
        let mut res = Vec::with_capacity(values.len());
        for (a, b) in out {
            res.push(a);
            if let Some(b) = b {
                res.push(b);
            }
        }
        res
    }
}
