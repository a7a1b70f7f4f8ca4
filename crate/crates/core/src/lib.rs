//! Geometric wavelet and nonwindowed scattering transforms on compact
//! Riemannian manifolds.
//!
//! Everything is expressed in a truncated Laplace–Beltrami eigenbasis held
//! by a [`Spectrum`]: signals are sampled at quadrature nodes, spectral
//! filters act diagonally on eigen-coefficients, and integrals are quadrature
//! sums. On top of that sit the diffusion wavelet bank ([`filters`]), the
//! scattering cascade and its moments ([`scattering`]), and the experiment
//! runners that check frame tightness, nonexpansiveness, isometry invariance,
//! diffeomorphism stability and the Calderón–Zygmund machinery on the circle
//! ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod filters;
pub mod scattering;
pub mod spectra;
pub mod transform;

pub use error::{Error, Result};
pub use filters::{LowPassProfile, ProfileKind, WaveletBank};
pub use scattering::{MomentTable, ScatteringPath};
pub use spectra::{QuadratureNodes, Spectrum};
pub use transform::{Signal, SpectralFilter};
