//! Spectral analysis and synthesis, convolution with spectral filters,
//! quadrature Lᵠ norms, and the vector-valued Littlewood–Paley g-function.
//!
//! Eigenfunctions are real, so the conjugations in the analysis integral
//! and the kernel expansion drop out.

mod io;
mod kernel;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::filters::WaveletBank;
use crate::spectra::Spectrum;

pub use io::{read_signal_raw, read_signal_text, write_signal_raw, write_signal_text, SIGNAL_MAGIC};
pub use kernel::{
    apply_kernel, kernel_decay_constant, kernel_matrix, kernel_matrix_with_cap, kernel_regularity_constant,
    kernel_scale, KernelDecay, KernelRegularity, DEFAULT_KERNEL_NODE_CAP,
};

/// A function sampled at the quadrature nodes of a spectrum.
///
/// Spectral coefficients are computed on first request and cached. The cache
/// is a `OnceLock`, so concurrent first requests may duplicate the work but
/// never observe a partially written vector.
#[derive(Debug, Clone)]
pub struct Signal {
    values: Vec<f64>,
    spectrum: Arc<Spectrum>,
    coefficients: OnceLock<Vec<f64>>,
}

impl Signal {
    pub fn new(spectrum: Arc<Spectrum>, values: Vec<f64>) -> Result<Self> {
        if values.len() != spectrum.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "signal has {} values, spectrum has {} nodes",
                values.len(),
                spectrum.n_nodes()
            )));
        }
        Ok(Self {
            values,
            spectrum,
            coefficients: OnceLock::new(),
        })
    }

    /// Sample `f` at every node (intrinsic coordinates for analytic
    /// backends, ambient coordinates for point clouds).
    pub fn from_fn(spectrum: Arc<Spectrum>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if !spectrum.nodes().has_geometry() {
            return Err(Error::MissingGeometry);
        }
        let values = spectrum.nodes().coords().iter().map(|p| f(p)).collect();
        Self::new(spectrum, values)
    }

    pub fn zeros(spectrum: Arc<Spectrum>) -> Self {
        let n = spectrum.n_nodes();
        Self::new(spectrum, vec![0.0; n]).expect("length matches")
    }

    /// The sampled eigenfunction e_n.
    pub fn mode(spectrum: Arc<Spectrum>, n: usize) -> Result<Self> {
        if n >= spectrum.n_modes() {
            return Err(Error::InvalidArgument(format!(
                "mode {n} out of range for {} modes",
                spectrum.n_modes()
            )));
        }
        let values = spectrum.eigenfunctions().column(n).iter().copied().collect();
        Self::new(spectrum, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// f̂(n) = Σ_i w_i f(x_i) e_n(x_i), cached after the first call.
    pub fn coefficients(&self) -> &[f64] {
        self.coefficients
            .get_or_init(|| quadrature_coefficients(&self.spectrum, &self.values))
    }

    pub fn has_cached_coefficients(&self) -> bool {
        self.coefficients.get().is_some()
    }

    /// Pointwise map producing a fresh signal on the same spectrum.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(Arc::clone(&self.spectrum), self.values.iter().map(|&v| f(v)).collect()).expect("length preserved")
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    /// Pointwise linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Signal, b: f64) -> Result<Self> {
        ensure_same_spectrum(&self.spectrum, &other.spectrum)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(Arc::clone(&self.spectrum), values)
    }

    pub fn sub(&self, other: &Signal) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }
}

pub(crate) fn ensure_same_spectrum(a: &Arc<Spectrum>, b: &Arc<Spectrum>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::SpectrumMismatch)
    }
}

/// A filter acting diagonally on eigen-coefficients and constant on every
/// eigenspace.
#[derive(Debug, Clone)]
pub struct SpectralFilter {
    spectrum: Arc<Spectrum>,
    coefficients: Vec<f64>,
}

impl SpectralFilter {
    /// Validate coefficient count and exact constancy on eigenspaces.
    pub fn new(spectrum: Arc<Spectrum>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != spectrum.n_modes() {
            return Err(Error::InvalidArgument(format!(
                "filter has {} coefficients, spectrum has {} modes",
                coefficients.len(),
                spectrum.n_modes()
            )));
        }
        for space in spectrum.eigenspaces() {
            let first = coefficients[space.start];
            if coefficients[space.clone()].iter().any(|&c| c != first) {
                return Err(Error::InvalidArgument(format!(
                    "filter is not constant on the eigenspace of λ = {}",
                    spectrum.eigenvalue(space.start)
                )));
            }
        }
        Ok(Self { spectrum, coefficients })
    }

    /// ĥ(n) = H(λ_n); constancy on eigenspaces holds by construction.
    pub fn from_response(spectrum: Arc<Spectrum>, response: impl Fn(f64) -> f64) -> Self {
        let coefficients = spectrum.eigenvalues().iter().map(|&l| response(l)).collect();
        Self { spectrum, coefficients }
    }

    pub(crate) fn from_coefficients_unchecked(spectrum: Arc<Spectrum>, coefficients: Vec<f64>) -> Self {
        debug_assert_eq!(coefficients.len(), spectrum.n_modes());
        Self { spectrum, coefficients }
    }

    /// ĥ ≡ 1, the identity on retained modes.
    pub fn identity(spectrum: Arc<Spectrum>) -> Self {
        Self::from_response(spectrum, |_| 1.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }
}

/// Quadrature transform of raw node values, without caching.
pub fn quadrature_coefficients(spectrum: &Spectrum, values: &[f64]) -> Vec<f64> {
    let v = DVector::from_column_slice(values);
    (spectrum.analysis_matrix() * v).data.into()
}

/// f̂(n) = ∫ f e_n dμ by quadrature.
pub fn analyze(f: &Signal) -> &[f64] {
    f.coefficients()
}

/// f(x_i) = Σ_n f̂(n) e_n(x_i). The returned signal caches `coefficients`.
pub fn synthesize(coefficients: &[f64], spectrum: &Arc<Spectrum>) -> Result<Signal> {
    if coefficients.len() != spectrum.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} modes",
            coefficients.len(),
            spectrum.n_modes()
        )));
    }
    let c = DVector::from_column_slice(coefficients);
    let values: Vec<f64> = (spectrum.eigenfunctions() * c).data.into();
    let signal = Signal::new(Arc::clone(spectrum), values)?;
    let _ = signal.coefficients.set(coefficients.to_vec());
    Ok(signal)
}

/// (f ∗ h)(x) = Σ_n f̂(n) ĥ(n) e_n(x).
pub fn convolve(f: &Signal, h: &SpectralFilter) -> Result<Signal> {
    ensure_same_spectrum(f.spectrum(), h.spectrum())?;
    let product: Vec<f64> = f
        .coefficients()
        .iter()
        .zip(h.coefficients())
        .map(|(a, b)| a * b)
        .collect();
    synthesize(&product, f.spectrum())
}

/// (Σ_i w_i |v_i|^q)^{1/q}.
pub fn weighted_lq(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        return values.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
    }
    if q == 1.0 {
        return values.iter().zip(weights).map(|(v, w)| w * v.abs()).sum();
    }
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Lq exponent must lie in [1, ∞), got {q}"
        )))
    }
}

/// ‖f‖_{L^q} by quadrature.
pub fn lq_norm(f: &Signal, q: f64) -> Result<f64> {
    check_exponent(q)?;
    Ok(weighted_lq(f.values(), f.spectrum().weights(), q))
}

pub fn l2_norm(f: &Signal) -> f64 {
    weighted_lq(f.values(), f.spectrum().weights(), 2.0)
}

/// Energy left outside the retained modes: ‖f‖₂² − Σ_n f̂(n)², clamped at 0.
pub fn discarded_energy(f: &Signal) -> f64 {
    let retained: f64 = f.coefficients().iter().map(|c| c * c).sum();
    (l2_norm(f).powi(2) - retained).max(0.0)
}

/// Wavelet coefficients f ∗ ψ_j for every scale of the bank, as an
/// `n_nodes × n_scales` matrix (column k is scale `j_min + k`).
pub fn wavelet_responses(f: &Signal, bank: &WaveletBank) -> Result<DMatrix<f64>> {
    ensure_same_spectrum(f.spectrum(), bank.spectrum())?;
    let coeffs = f.coefficients();
    let modes = coeffs.len();
    let mut products = DMatrix::zeros(modes, bank.n_scales());
    for (k, j) in bank.scales().enumerate() {
        let psi = bank.coefficients(j)?;
        for n in 0..modes {
            products[(n, k)] = coeffs[n] * psi[n];
        }
    }
    Ok(f.spectrum().eigenfunctions() * products)
}

/// ‖T⃗f(x)‖_{ℓ²} = (Σ_j |f ∗ ψ_j(x)|²)^{1/2} at every node.
pub fn g_function(f: &Signal, bank: &WaveletBank) -> Result<Signal> {
    let responses = wavelet_responses(f, bank)?;
    let values = responses
        .row_iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Signal::new(Arc::clone(f.spectrum()), values)
}

/// ‖g_function(f)‖_{L^q} / ‖f‖_{L^q}, the quantity bounded by C_q in the
/// Lᵠ extension of the Littlewood–Paley inequality.
pub fn vector_norm_ratio(f: &Signal, bank: &WaveletBank, q: f64) -> Result<f64> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (1, 2], got {q}")));
    }
    let denominator = lq_norm(f, q)?;
    if denominator == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(lq_norm(&g_function(f, bank)?, q)? / denominator)
}
