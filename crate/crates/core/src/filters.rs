//! Low-pass profiles and the diffusion wavelet bank.
//!
//! A profile G is nonnegative, nonincreasing and Schwartz on ℝ⁺ with
//! G(0) = C > 0. Its dyadic dilations give low-pass filters
//! φ̂_j(n) = G(2^j λ_n), and consecutive differences of their squares give
//! band-pass wavelets ψ̂_j(n) = [G(2^{j−1}λ_n)² − G(2^jλ_n)²]^{1/2}.

use std::ops::RangeInclusive;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;
use crate::transform::SpectralFilter;

/// Radicands above this are round-off and clamp to zero; below it the
/// profile is not monotone.
pub const RADICAND_CLAMP: f64 = -1e-15;

/// Default scale window.
pub const DEFAULT_J_MIN: i32 = -20;
pub const DEFAULT_J_MAX: i32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// G(x) = C·e^{−x}
    Exponential,
    /// G(x) = C·e^{−x²}
    Gaussian,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Exponential => "exponential",
            ProfileKind::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(ProfileKind::Exponential),
            "gaussian" => Ok(ProfileKind::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPassProfile {
    kind: ProfileKind,
    zero_value: f64,
}

/// Construct a low-pass profile with G(0) = `c`.
pub fn make_profile(kind: ProfileKind, c: f64) -> Result<LowPassProfile> {
    LowPassProfile::new(kind, c)
}

impl LowPassProfile {
    pub fn new(kind: ProfileKind, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "profile constant must be positive, got {c}"
            )));
        }
        Ok(Self { kind, zero_value: c })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// C = G(0).
    pub fn zero_value(&self) -> f64 {
        self.zero_value
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Exponential => self.zero_value * (-x).exp(),
            ProfileKind::Gaussian => self.zero_value * (-x * x).exp(),
        }
    }

    /// Every built-in profile restricts a Schwartz function to ℝ⁺.
    pub fn is_schwartz(&self) -> bool {
        true
    }

    /// Scan 10⁴ points spanning [0, 2⁴⁰] for nonnegativity, monotonicity and
    /// decay G(2⁴⁰) < 10⁻¹²·C.
    pub fn check_admissible(&self) -> Result<()> {
        const POINTS: usize = 10_000;
        let mut grid = Vec::with_capacity(POINTS);
        grid.push(0.0);
        let (lo, hi) = (-40.0f64, 40.0f64);
        for k in 0..POINTS - 1 {
            let e = lo + (hi - lo) * k as f64 / (POINTS - 2) as f64;
            grid.push(e.exp2());
        }
        let mut previous = self.eval(0.0);
        if (previous - self.zero_value).abs() > 0.0 {
            return Err(Error::InvalidArgument("G(0) differs from C".into()));
        }
        for &x in &grid[1..] {
            let g = self.eval(x);
            if g.is_nan() || g < 0.0 {
                return Err(Error::InvalidArgument(format!("G({x}) = {g} is negative")));
            }
            if g > previous {
                return Err(Error::InvalidArgument(format!("G increases at x = {x}")));
            }
            previous = g;
        }
        let tail = self.eval(40f64.exp2());
        if tail >= 1e-12 * self.zero_value {
            return Err(Error::InvalidArgument(format!("G(2^40) = {tail} does not decay")));
        }
        Ok(())
    }

    /// Closed form of Σ_{j=j_min}^{j_max} ψ̂_j(λ)² by telescoping.
    pub fn telescoped_sum(&self, lam: f64, j_min: i32, j_max: i32) -> f64 {
        self.eval(f64::from(j_min - 1).exp2() * lam).powi(2) - self.eval(f64::from(j_max).exp2() * lam).powi(2)
    }

    /// ψ̂_j at eigenvalue `lam`.
    pub fn wavelet_coefficient(&self, j: i32, lam: f64) -> Result<f64> {
        let coarse = self.eval(f64::from(j - 1).exp2() * lam);
        let fine = self.eval(f64::from(j).exp2() * lam);
        let radicand = coarse * coarse - fine * fine;
        if radicand < RADICAND_CLAMP {
            return Err(Error::NonMonotoneProfile {
                scale: j,
                eigenvalue: lam,
                radicand,
            });
        }
        Ok(radicand.max(0.0).sqrt())
    }
}

/// Low-pass filter φ̂_J(n) = G(2^J λ_n).
pub fn lowpass_filter(profile: &LowPassProfile, spectrum: &Arc<Spectrum>, scale: i32) -> SpectralFilter {
    let dilation = f64::from(scale).exp2();
    let coefficients = spectrum
        .eigenvalues()
        .iter()
        .map(|&lam| profile.eval(dilation * lam))
        .collect();
    SpectralFilter::from_coefficients_unchecked(Arc::clone(spectrum), coefficients)
}

/// Per-mode frame defect C² − Σ_j ψ̂_j(n)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameDefect {
    pub mode: usize,
    pub eigenvalue: f64,
    pub defect: f64,
}

/// Diffusion wavelets ψ_j for j in a finite dyadic window, sampled on a
/// spectrum.
#[derive(Debug, Clone)]
pub struct WaveletBank {
    profile: LowPassProfile,
    j_min: i32,
    j_max: i32,
    spectrum: Arc<Spectrum>,
    /// `coefficients[j - j_min][n] = ψ̂_j(n)`
    coefficients: Vec<Vec<f64>>,
}

/// Build ψ̂_j(n) for every scale in `[j_min, j_max]` and every retained mode.
pub fn build_wavelet_bank(
    profile: LowPassProfile,
    spectrum: Arc<Spectrum>,
    j_min: i32,
    j_max: i32,
) -> Result<WaveletBank> {
    WaveletBank::new(profile, spectrum, j_min, j_max)
}

impl WaveletBank {
    pub fn new(profile: LowPassProfile, spectrum: Arc<Spectrum>, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidArgument(format!("empty scale window [{j_min}, {j_max}]")));
        }
        let coefficients = (j_min..=j_max)
            .into_par_iter()
            .map(|j| {
                spectrum
                    .eigenvalues()
                    .iter()
                    .map(|&lam| profile.wavelet_coefficient(j, lam))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            profile,
            j_min,
            j_max,
            spectrum,
            coefficients,
        })
    }

    pub fn profile(&self) -> &LowPassProfile {
        &self.profile
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn scales(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn n_scales(&self) -> usize {
        self.coefficients.len()
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    fn index(&self, j: i32) -> Result<usize> {
        if self.contains(j) {
            Ok((j - self.j_min) as usize)
        } else {
            Err(Error::ScaleOutOfWindow {
                scale: j,
                min: self.j_min,
                max: self.j_max,
            })
        }
    }

    /// ψ̂_j(n) for all retained modes.
    pub fn coefficients(&self, j: i32) -> Result<&[f64]> {
        Ok(&self.coefficients[self.index(j)?])
    }

    pub fn filter(&self, j: i32) -> Result<SpectralFilter> {
        Ok(SpectralFilter::from_coefficients_unchecked(
            Arc::clone(&self.spectrum),
            self.coefficients(j)?.to_vec(),
        ))
    }

    /// φ_J built from the bank's profile.
    pub fn lowpass(&self, scale: i32) -> SpectralFilter {
        lowpass_filter(&self.profile, &self.spectrum, scale)
    }

    /// Σ_j ψ̂_j(n)² over the window, per mode.
    pub fn frame_sums(&self) -> Vec<f64> {
        (0..self.spectrum.n_modes())
            .map(|n| self.coefficients.iter().map(|row| row[n] * row[n]).sum())
            .collect()
    }

    /// C² − Σ_j ψ̂_j(n)² per mode. Nonnegative, equal to C² at λ = 0, and
    /// shrinking as the window widens.
    pub fn frame_defect(&self) -> Vec<FrameDefect> {
        let c2 = self.profile.zero_value().powi(2);
        self.frame_sums()
            .into_iter()
            .enumerate()
            .map(|(mode, sum)| FrameDefect {
                mode,
                eigenvalue: self.spectrum.eigenvalue(mode),
                defect: c2 - sum,
            })
            .collect()
    }
}

/// Free-function form of [`WaveletBank::frame_defect`].
pub fn frame_defect(bank: &WaveletBank) -> Vec<FrameDefect> {
    bank.frame_defect()
}
