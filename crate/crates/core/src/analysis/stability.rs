//! Isometry invariance and diffeomorphism stability of scattering moments.

use rayon::prelude::*;
use serde::Serialize;

use super::maps::{apply_action, check_bandlimited, MapKind, PointMap};
use crate::error::{Error, Result};
use crate::filters::WaveletBank;
use crate::scattering::{moments, scattering_norm, MomentTable};
use crate::transform::{lq_norm, Signal};

/// Tolerance for the coefficient inspection behind the bandlimit check.
pub const BANDLIMIT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub map: PointMap,
    pub order: usize,
    pub q: f64,
    pub entries: usize,
    pub max_absolute: f64,
    /// With the round-off allowance of [`table_deviation`].
    pub max_relative: f64,
    /// Plain |a − b| / max(|a|, |b|) over every nonzero entry.
    pub max_relative_all: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Absolute allowance, as a multiple of the largest entry, for entries
/// whose relative gap double precision cannot resolve.
pub const ROUNDOFF_ALLOWANCE: f64 = f64::EPSILON;

/// Largest absolute gap and largest relative gap between two tables over the
/// same grid, for a relative tolerance τ.
///
/// An entry's relative gap is |a − b| / max(|a|, |b|, ε·M/τ), where M is the
/// largest entry of either table and ε is [`ROUNDOFF_ALLOWANCE`]. So the
/// relative gap is at most τ exactly when |a − b| ≤ τ·max(|a|, |b|) or
/// |a − b| ≤ ε·M: entries far below the table scale are held to one ulp of
/// that scale instead of to their own size. Entries that are both zero
/// count as 0.
pub fn table_deviation(a: &MomentTable, b: &MomentTable, tolerance: f64) -> (f64, f64) {
    let (absolute, relative, _) = deviations(a, b, tolerance);
    (absolute, relative)
}

/// (max absolute gap, max relative gap with the round-off allowance, max
/// plain relative gap over nonzero entries).
fn deviations(a: &MomentTable, b: &MomentTable, tolerance: f64) -> (f64, f64, f64) {
    let floor = ROUNDOFF_ALLOWANCE * a.max_entry().abs().max(b.max_entry().abs()) / tolerance;
    let mut absolute = 0.0f64;
    let mut relative = 0.0f64;
    let mut plain = 0.0f64;
    for (path, &x) in a.entries() {
        let y = b.get(path).unwrap_or(0.0);
        let gap = (x - y).abs();
        absolute = absolute.max(gap);
        let scale = x.abs().max(y.abs());
        if scale > 0.0 {
            plain = plain.max(gap / scale);
            relative = relative.max(gap / scale.max(floor));
        }
    }
    (absolute, relative, plain)
}

/// Compare S̄_q^m f with S̄_q^m V_ξ f for an isometry ξ.
pub fn isometry_invariance_report(
    f: &Signal,
    bank: &WaveletBank,
    m: usize,
    q: f64,
    map: &PointMap,
) -> Result<InvarianceReport> {
    if map.kind() != MapKind::Isometry {
        return Err(Error::Precondition("invariance needs an isometry".into()));
    }
    const TOLERANCE: f64 = 1e-8;
    let moved = apply_action(f, map)?;
    let before = moments(f, bank, m, q)?;
    let after = moments(&moved, bank, m, q)?;
    let (max_absolute, max_relative, max_relative_all) = deviations(&before, &after, TOLERANCE);
    Ok(InvarianceReport {
        map: *map,
        order: m,
        q,
        entries: before.len(),
        max_absolute,
        max_relative,
        max_relative_all,
        tolerance: TOLERANCE,
        passed: max_relative < TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityPoint {
    pub t: f64,
    pub displacement: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityCurve {
    pub order: usize,
    pub q: f64,
    pub lam: f64,
    pub dimension: usize,
    pub signal_norm: f64,
    pub points: Vec<StabilityPoint>,
    /// Least-squares slope of log deviation against log displacement.
    pub slope: f64,
    /// Smallest Ĉ with deviation ≤ Ĉ·λⁿ·‖ξ‖_∞·‖f‖_q at every point.
    pub constant: f64,
}

impl StabilityCurve {
    /// deviation(t) / deviation(t/2) for consecutive grid points related by
    /// a factor of two.
    pub fn halving_ratios(&self) -> Vec<f64> {
        let mut ratios = Vec::new();
        for a in &self.points {
            for b in &self.points {
                if b.deviation > 0.0 && ((a.t / b.t) - 2.0).abs() < 1e-9 {
                    ratios.push(a.deviation / b.deviation);
                }
            }
        }
        ratios
    }
}

/// Ordinary least-squares slope of y on x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// ‖S̄_q^m f − S̄_q^m V_{ξ_t} f‖ along the warp family ξ_t(θ) = θ + (t/k)·sin(kθ).
#[allow(clippy::too_many_arguments)]
pub fn stability_curve(
    f: &Signal,
    bank: &WaveletBank,
    m: usize,
    q: f64,
    lam: f64,
    ts: &[f64],
    harmonic: u32,
) -> Result<StabilityCurve> {
    check_bandlimited(f, lam, BANDLIMIT_TOLERANCE)?;
    let reference = moments(f, bank, m, q)?;
    let points = ts
        .par_iter()
        .map(|&t| {
            let warp = PointMap::sine_warp_harmonic(t, harmonic)?;
            let moved = apply_action(f, &warp)?;
            let deviation = scattering_norm(&reference, Some(&moments(&moved, bank, m, q)?))?;
            Ok(StabilityPoint {
                t,
                displacement: warp.sup_displacement(),
                deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dimension = f.spectrum().dimension();
    let signal_norm = lq_norm(f, q)?;
    let scale = lam.powi(dimension as i32) * signal_norm;
    let (logs_x, logs_y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.deviation > 0.0 && p.displacement > 0.0)
        .map(|p| (p.displacement.ln(), p.deviation.ln()))
        .unzip();
    let slope = if logs_x.len() >= 2 {
        fit_slope(&logs_x, &logs_y)
    } else {
        f64::NAN
    };
    let constant = points
        .iter()
        .filter(|p| p.displacement > 0.0)
        .map(|p| p.deviation / (scale * p.displacement))
        .fold(0.0, f64::max);
    Ok(StabilityCurve {
        order: m,
        q,
        lam,
        dimension,
        signal_norm,
        points,
        slope,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;
    use std::sync::Arc;

    use super::*;
    use crate::filters::{LowPassProfile, ProfileKind};
    use crate::spectra::{build_circle_spectrum, build_torus_spectrum, Spectrum};
    use crate::transform::synthesize;

    fn bank(spectrum: &Arc<Spectrum>, j_min: i32, j_max: i32) -> WaveletBank {
        let profile = LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap();
        WaveletBank::new(profile, Arc::clone(spectrum), j_min, j_max).unwrap()
    }

    #[test]
    fn grid_rotations_leave_moments_invariant() {
        let s = Arc::new(build_circle_spectrum(33, 256).unwrap());
        let b = bank(&s, -4, 4);
        let f = Signal::from_fn(Arc::clone(&s), |p| p[0].cos()).unwrap();
        let step = TAU / 256.0;
        for map in [PointMap::rotation(17.0 * step), PointMap::reflection(3.0 * step)] {
            let report = isometry_invariance_report(&f, &b, 2, 2.0, &map).unwrap();
            assert!(report.passed, "{report:?}");
        }
        let same = isometry_invariance_report(&f, &b, 1, 1.5, &PointMap::identity()).unwrap();
        assert_eq!(same.max_absolute, 0.0);

        let e0 = Signal::mode(Arc::clone(&s), 0).unwrap();
        let zero = isometry_invariance_report(&e0, &b, 1, 2.0, &PointMap::rotation(step)).unwrap();
        assert!(zero.max_absolute < 1e-13);

        let warp = PointMap::sine_warp(0.1).unwrap();
        assert!(matches!(
            isometry_invariance_report(&f, &b, 1, 2.0, &warp),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unresolvable_entries_are_numerical_zeros() {
        // Coarse-scale third-order paths fall up to thirty orders of
        // magnitude below the largest entry; their plain relative gap is
        // round-off, but their absolute gap stays within one ulp of the table.
        let s = Arc::new(build_circle_spectrum(33, 256).unwrap());
        let b = bank(&s, -5, 5);
        let mut coefficients = vec![0.0; 33];
        coefficients[1..9].copy_from_slice(&[1.0, -0.4, 0.5, 0.3, -0.7, 0.2, 0.6, -0.1]);
        let f = synthesize(&coefficients, &s).unwrap();
        let report = isometry_invariance_report(&f, &b, 3, 2.0, &PointMap::rotation(TAU / 256.0)).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.max_relative_all >= report.max_relative);
        assert!(report.max_absolute < 1e-14);
    }

    #[test]
    fn torus_isometries() {
        let s = Arc::new(build_torus_spectrum(13, 16).unwrap());
        let b = bank(&s, -3, 3);
        let f = Signal::from_fn(Arc::clone(&s), |p| p[0].cos() * (2.0 * p[1]).sin() + p[1].cos()).unwrap();
        let step = TAU / 16.0;
        for map in [
            PointMap::torus_translation(3.0 * step, -5.0 * step),
            PointMap::torus_quarter_turn(),
        ] {
            let report = isometry_invariance_report(&f, &b, 2, 1.5, &map).unwrap();
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn symmetric_signal_gives_quadratic_deviation() {
        // cos θ is carried to itself by θ ↦ θ + π composed with t ↦ −t, so
        // the deviation is even in t and grows like t².
        let s = Arc::new(build_circle_spectrum(33, 256).unwrap());
        let b = bank(&s, -8, 8);
        let f = Signal::from_fn(Arc::clone(&s), |p| p[0].cos()).unwrap();
        let curve = stability_curve(&f, &b, 1, 2.0, 2.0, &log_grid(1e-3, 1e-1, 5), 1).unwrap();
        assert!((curve.slope - 2.0).abs() < 0.1, "{}", curve.slope);
    }

    #[test]
    fn generic_signal_gives_linear_deviation() {
        let s = Arc::new(build_circle_spectrum(33, 256).unwrap());
        let b = bank(&s, -8, 8);
        let mut coefficients = vec![0.0; 33];
        coefficients[1..5].copy_from_slice(&[1.0, -0.4, 0.5, 0.3]);
        let f = synthesize(&coefficients, &s).unwrap();
        let ts = [1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2];
        let curve = stability_curve(&f, &b, 1, 2.0, 5.0, &ts, 1).unwrap();
        assert!((0.9..=1.1).contains(&curve.slope), "{}", curve.slope);
        for ratio in curve.halving_ratios() {
            assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
        }
        assert!(curve.constant.is_finite() && curve.constant > 0.0);

        let zero = stability_curve(&f, &b, 1, 2.0, 5.0, &[0.0], 1).unwrap();
        assert!(zero.points[0].deviation < 1e-13);

        assert!(matches!(
            stability_curve(&f, &b, 1, 2.0, 2.0, &ts, 1),
            Err(Error::NotBandlimited { .. })
        ));
    }

    #[test]
    fn slope_fit_and_grid() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((fit_slope(&x, &y) - 2.0).abs() < 1e-14);
        let grid = log_grid(1e-3, 1e-1, 5);
        assert!((grid[0] - 1e-3).abs() < 1e-15 && (grid[4] - 1e-1).abs() < 1e-14);
        assert!((grid[2] - 1e-2).abs() < 1e-15);
    }
}
