//! Propagator cascades, windowed scattering, nonwindowed Lᵠ scattering
//! moments and the ℓ² norm over path grids.
//!
//! The modulus leaves the bandlimited subspace. Every stage therefore
//! re-analyzes its output on the retained modes before the next convolution,
//! and the energy lost to that projection is reported as a diagnostic.

mod cascade;
mod table;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::WaveletBank;
use crate::transform::{convolve, ensure_same_spectrum, lq_norm, Signal};

pub use cascade::{moments, moments_up_to, moments_with_cap, CascadeDiagnostics, DEFAULT_PATH_CAP};
pub use table::{read_moment_csv, scattering_norm, scattering_norm_qpower, MomentTable};

/// A finite sequence of scales (j₁, …, j_m); the empty path has order 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ScatteringPath(Vec<i32>);

impl ScatteringPath {
    pub fn new(scales: Vec<i32>) -> Self {
        Self(scales)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn scales(&self) -> &[i32] {
        &self.0
    }

    /// The path (j₁, …, j_m, j).
    pub fn extend(&self, j: i32) -> Self {
        let mut scales = self.0.clone();
        scales.push(j);
        Self(scales)
    }

    pub fn check_window(&self, bank: &WaveletBank) -> Result<()> {
        for &j in &self.0 {
            bank.coefficients(j)?;
        }
        Ok(())
    }
}

impl From<Vec<i32>> for ScatteringPath {
    fn from(scales: Vec<i32>) -> Self {
        Self(scales)
    }
}

impl fmt::Display for ScatteringPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_moment_exponent(q: f64) -> Result<()> {
    // The theory covers (1, 2]; q = 1 is kept for the L¹ diagnostics.
    if (1.0..=2.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "moment exponent must lie in [1, 2], got {q}"
        )))
    }
}

/// U[j₁,…,j_m]f = |⋯||f ∗ ψ_{j₁}| ∗ ψ_{j₂}| ⋯ ∗ ψ_{j_m}|, with U[∅]f = f.
pub fn propagate(f: &Signal, path: &ScatteringPath, bank: &WaveletBank) -> Result<Signal> {
    ensure_same_spectrum(f.spectrum(), bank.spectrum())?;
    path.check_window(bank)?;
    let mut current = f.clone();
    for &j in path.scales() {
        current = convolve(&current, &bank.filter(j)?)?.map(f64::abs);
    }
    Ok(current)
}

/// S_J[j₁,…,j_m]f = U[j₁,…,j_m]f ∗ φ_J, defined for paths with every j_i ≤ J.
pub fn windowed_scattering(f: &Signal, path: &ScatteringPath, bank: &WaveletBank, big_j: i32) -> Result<Signal> {
    if let Some(&j) = path.scales().iter().find(|&&j| j > big_j) {
        return Err(Error::InvalidArgument(format!(
            "windowed scattering needs every scale ≤ J = {big_j}, path {path} has {j}"
        )));
    }
    let propagated = propagate(f, path, bank)?;
    convolve(&propagated, &bank.lowpass(big_j))
}

/// Comparison of the large-J windowed coefficient with its two candidate
/// limits.
#[derive(Debug, Clone, Serialize)]
pub struct WindowedLimitReport {
    pub path: ScatteringPath,
    pub big_j: i32,
    /// sup − inf of S_J[path]f over the nodes.
    pub spread: f64,
    /// Quadrature mean of S_J[path]f.
    pub value: f64,
    pub l1_norm: f64,
    /// C·vol⁻¹·‖U f‖₁, the limit obtained from the spectral expansion.
    pub spectral_limit: f64,
    /// vol^{−1/2}·‖U f‖₁, the alternative normalization.
    pub half_power_limit: f64,
    pub spectral_gap: f64,
    pub half_power_gap: f64,
}

pub fn windowed_limit_report(
    f: &Signal,
    path: &ScatteringPath,
    bank: &WaveletBank,
    big_j: i32,
) -> Result<WindowedLimitReport> {
    let windowed = windowed_scattering(f, path, bank, big_j)?;
    let values = windowed.values();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let spectrum = f.spectrum();
    let volume = spectrum.volume();
    let value = values.iter().zip(spectrum.weights()).map(|(v, w)| v * w).sum::<f64>() / volume;
    let l1_norm = lq_norm(&propagate(f, path, bank)?, 1.0)?;
    let spectral_limit = bank.profile().zero_value() * l1_norm / volume;
    let half_power_limit = l1_norm / volume.sqrt();
    let gap = |target: f64| {
        if target == 0.0 {
            value.abs()
        } else {
            (value - target).abs() / target.abs()
        }
    };
    Ok(WindowedLimitReport {
        path: path.clone(),
        big_j,
        spread: max - min,
        value,
        l1_norm,
        spectral_limit,
        half_power_limit,
        spectral_gap: gap(spectral_limit),
        half_power_gap: gap(half_power_limit),
    })
}

pub(crate) fn same_spectrum(f: &Signal, bank: &WaveletBank) -> Result<Arc<crate::spectra::Spectrum>> {
    ensure_same_spectrum(f.spectrum(), bank.spectrum())?;
    Ok(Arc::clone(f.spectrum()))
}

#[cfg(test)]
mod tests;
