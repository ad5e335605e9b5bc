//! Fourier kernel on the periodic torus `[0, 2pi)^dim`.
//!
//! Fields are stored as Fourier coefficients on a [`TorusGrid`] and carry a
//! spherical band limit. Nonlinear products are formed on a zero-padded
//! lattice large enough that truncating back to the band is exact (see
//! [`dealiased_size`]).

mod fft;
mod field;
mod grid;
mod ops;

pub use fft::Transformer;
pub use field::{sample_fn, SpectralField};
pub use grid::{dealiased_size, fft_friendly_size, TorusGrid};
pub use ops::pointwise_max_magnitude;

#[allow(unused_imports)]
pub(crate) use grid::{norm_sq, within};

#[cfg(test)]
mod tests;
