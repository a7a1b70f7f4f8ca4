//! Node-by-node kernel matrices and empirical decay and regularity constants.
//!
//! Kernels are indexed by the wavelet scale j. The kernel of ψ_j is the
//! kernel of F(t²·) with t² = 2^j, so the decay and regularity envelopes use
//! t = 2^{j/2}.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::SpectralFilter;
use crate::error::{Error, Result};
use crate::filters::WaveletBank;
use crate::spectra::Spectrum;

pub const DEFAULT_KERNEL_NODE_CAP: usize = 4096;

/// K[i][j] = Σ_n ĥ(n) e_n(x_i) e_n(x_j), guarded by the default node cap.
pub fn kernel_matrix(h: &SpectralFilter) -> Result<DMatrix<f64>> {
    kernel_matrix_with_cap(h, DEFAULT_KERNEL_NODE_CAP)
}

pub fn kernel_matrix_with_cap(h: &SpectralFilter, cap: usize) -> Result<DMatrix<f64>> {
    let spectrum = h.spectrum();
    let nodes = spectrum.n_nodes();
    if nodes > cap {
        return Err(Error::KernelCap { nodes, cap });
    }
    let e = spectrum.eigenfunctions();
    let mut scaled = e.clone();
    for (mut column, &c) in scaled.column_iter_mut().zip(h.coefficients()) {
        column *= c;
    }
    Ok(scaled * e.transpose())
}

/// (K f)(x_i) = Σ_j K[i][j] w_j f(x_j).
pub fn apply_kernel(kernel: &DMatrix<f64>, weights: &[f64], values: &[f64]) -> Vec<f64> {
    let weighted = nalgebra::DVector::from_iterator(values.len(), values.iter().zip(weights).map(|(v, w)| v * w));
    (kernel * weighted).data.into()
}

/// The kernel scale t = 2^{j/2} attached to wavelet index j.
pub fn kernel_scale(j: i32) -> f64 {
    2f64.powf(j as f64 / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelDecay {
    pub scale: i32,
    pub t: f64,
    /// sup over node pairs of |K_t(x,y)|·tⁿ·(1 + r/t)^{n+1}.
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelRegularity {
    pub scale: i32,
    pub t: f64,
    pub delta: f64,
    /// sup of |K(x,y) − K(x,z)| / (r(y,z)·t^{−n−1}·(1 + r(x,y)/t)^{−(n+1)}).
    pub constant: f64,
    /// Number of admissible (x, y, z) triples examined.
    pub triples: usize,
}

fn distance_matrix(spectrum: &Spectrum) -> Result<DMatrix<f64>> {
    let n = spectrum.n_nodes();
    let nodes = spectrum.nodes();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| nodes.distance(i, j)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Empirical constant in the pointwise kernel decay bound for ψ_j.
pub fn kernel_decay_constant(bank: &WaveletBank, j: i32) -> Result<KernelDecay> {
    let spectrum = bank.spectrum();
    let kernel = kernel_matrix(&bank.filter(j)?)?;
    let distances = distance_matrix(spectrum)?;
    let t = kernel_scale(j);
    let n = spectrum.dimension() as i32;
    let scale_factor = t.powi(n);
    let constant = kernel
        .iter()
        .zip(distances.iter())
        .map(|(k, r)| k.abs() * scale_factor * (1.0 + r / t).powi(n + 1))
        .fold(0.0, f64::max);
    Ok(KernelDecay { scale: j, t, constant })
}

/// Empirical constant in the kernel regularity bound for ψ_j over triples
/// with 0 < r(y,z) < min(r(x,y)/2, δ).
pub fn kernel_regularity_constant(bank: &WaveletBank, j: i32, delta: f64) -> Result<KernelRegularity> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!("δ must be positive, got {delta}")));
    }
    let spectrum = bank.spectrum();
    let kernel = kernel_matrix(&bank.filter(j)?)?;
    let distances = distance_matrix(spectrum)?;
    let t = kernel_scale(j);
    let n = spectrum.dimension() as i32;
    let size = spectrum.n_nodes();
    let (constant, triples) = (0..size)
        .into_par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            let mut count = 0usize;
            for y in 0..size {
                let rxy = distances[(x, y)];
                let limit = (rxy / 2.0).min(delta);
                let envelope = t.powi(-n - 1) * (1.0 + rxy / t).powi(-(n + 1));
                for z in 0..size {
                    let ryz = distances[(y, z)];
                    if ryz > 0.0 && ryz < limit {
                        count += 1;
                        let ratio = (kernel[(x, y)] - kernel[(x, z)]).abs() / (ryz * envelope);
                        best = best.max(ratio);
                    }
                }
            }
            (best, count)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    Ok(KernelRegularity {
        scale: j,
        t,
        delta,
        constant,
        triples,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::filters::{LowPassProfile, ProfileKind};
    use crate::spectra::build_circle_spectrum;
    use crate::transform::{convolve, Signal};

    #[test]
    fn constant_filter_gives_constant_kernel() {
        let spectrum = Arc::new(build_circle_spectrum(5, 64).unwrap());
        let mut coefficients = vec![0.0; 5];
        coefficients[0] = 1.0;
        let h = SpectralFilter::new(Arc::clone(&spectrum), coefficients).unwrap();
        let k = kernel_matrix(&h).unwrap();
        let expected = 1.0 / (2.0 * std::f64::consts::PI);
        assert!(k.iter().all(|v| (v - expected).abs() < 1e-12));
    }

    #[test]
    fn kernel_application_matches_convolution() {
        let spectrum = Arc::new(build_circle_spectrum(9, 64).unwrap());
        let bank = WaveletBank::new(
            LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap(),
            Arc::clone(&spectrum),
            -3,
            3,
        )
        .unwrap();
        let h = bank.filter(0).unwrap();
        let k = kernel_matrix(&h).unwrap();
        assert!((&k - k.transpose()).amax() < 1e-14);

        let f = Signal::from_fn(Arc::clone(&spectrum), |p| (p[0]).sin() + 0.3 * (3.0 * p[0]).cos()).unwrap();
        let direct = apply_kernel(&k, spectrum.weights(), f.values());
        let spectral = convolve(&f, &h).unwrap();
        for (a, b) in direct.iter().zip(spectral.values()) {
            assert!((a - b).abs() < 1e-10);
        }

        let e1 = Signal::mode(Arc::clone(&spectrum), 1).unwrap();
        let applied = apply_kernel(&k, spectrum.weights(), e1.values());
        let c = h.coefficients()[1];
        for (a, b) in applied.iter().zip(e1.values()) {
            assert!((a - c * b).abs() < 1e-10);
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let spectrum = Arc::new(build_circle_spectrum(3, 64).unwrap());
        let h = SpectralFilter::identity(spectrum);
        assert!(matches!(
            kernel_matrix_with_cap(&h, 32),
            Err(Error::KernelCap { nodes: 64, cap: 32 })
        ));
    }

    #[test]
    fn decay_constant_is_stable_at_fine_scales() {
        // At small t the envelope is resolved by the bandlimit and the kernel
        // behaves like its continuum counterpart.
        let spectrum = Arc::new(build_circle_spectrum(513, 2048).unwrap());
        let profile = LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap();
        let bank = WaveletBank::new(profile, spectrum, -8, -4).unwrap();
        let constants: Vec<f64> = (-8..=-4)
            .map(|j| kernel_decay_constant(&bank, j).unwrap().constant)
            .collect();
        let max = constants.iter().cloned().fold(0.0, f64::max);
        let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.2, "{constants:?}");
    }

    #[test]
    fn regularity_constant_is_finite_and_positive() {
        let spectrum = Arc::new(build_circle_spectrum(33, 128).unwrap());
        let profile = LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap();
        let bank = WaveletBank::new(profile, spectrum, -4, 0).unwrap();
        let report = kernel_regularity_constant(&bank, -2, 0.5).unwrap();
        assert!(report.triples > 0);
        assert!(report.constant.is_finite() && report.constant > 0.0);
        assert!(kernel_regularity_constant(&bank, -2, 0.0).is_err());
    }
}
