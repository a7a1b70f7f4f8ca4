//! Point maps acting on the analytic manifolds, the pullback action
//! V_ξ f(x) = f(ξ⁻¹x), and λ-bandlimited projection.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{arc_distance, Metric, QuadratureNodes};
use crate::transform::{synthesize, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Isometry,
    Diffeomorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Identity,
    /// θ ↦ θ + angle on the circle.
    Rotation {
        angle: f64,
    },
    /// θ ↦ axis − θ on the circle.
    Reflection {
        axis: f64,
    },
    /// θ ↦ θ + (t/k)·sin(kθ) on the circle; a diffeomorphism for |t| < 1.
    SineWarp {
        t: f64,
        harmonic: u32,
    },
    /// (a, b) ↦ (a + da, b + db) on the flat torus.
    TorusTranslation {
        da: f64,
        db: f64,
    },
    /// (a, b) ↦ (−b, a) on the square flat torus.
    TorusQuarterTurn,
}

/// A bijection of a manifold with its kind and inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointMap {
    kind: MapKind,
    action: Action,
}

fn wrap(angle: f64) -> f64 {
    angle.rem_euclid(TAU)
}

impl PointMap {
    pub fn identity() -> Self {
        Self {
            kind: MapKind::Isometry,
            action: Action::Identity,
        }
    }

    pub fn rotation(angle: f64) -> Self {
        Self {
            kind: MapKind::Isometry,
            action: Action::Rotation { angle },
        }
    }

    pub fn reflection(axis: f64) -> Self {
        Self {
            kind: MapKind::Isometry,
            action: Action::Reflection { axis },
        }
    }

    /// ξ_t(θ) = θ + t·sin θ.
    pub fn sine_warp(t: f64) -> Result<Self> {
        Self::sine_warp_harmonic(t, 1)
    }

    /// ξ_t(θ) = θ + (t/k)·sin(kθ), with derivative 1 + t·cos(kθ) > 0.
    pub fn sine_warp_harmonic(t: f64, harmonic: u32) -> Result<Self> {
        if t.is_nan() || t.abs() >= 1.0 || harmonic == 0 {
            return Err(Error::InvalidArgument(format!(
                "sine warp needs |t| < 1 and k ≥ 1, got t = {t}, k = {harmonic}"
            )));
        }
        Ok(Self {
            kind: MapKind::Diffeomorphism,
            action: Action::SineWarp { t, harmonic },
        })
    }

    pub fn torus_translation(da: f64, db: f64) -> Self {
        Self {
            kind: MapKind::Isometry,
            action: Action::TorusTranslation { da, db },
        }
    }

    pub fn torus_quarter_turn() -> Self {
        Self {
            kind: MapKind::Isometry,
            action: Action::TorusQuarterTurn,
        }
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn action(&self) -> Action {
        self.action
    }

    fn supports(&self, metric: &Metric) -> bool {
        match self.action {
            Action::Identity => true,
            Action::Rotation { .. } | Action::Reflection { .. } | Action::SineWarp { .. } => {
                matches!(metric, Metric::Circle)
            }
            Action::TorusTranslation { .. } | Action::TorusQuarterTurn => {
                matches!(metric, Metric::FlatTorus)
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self.action {
            Action::Identity => x.to_vec(),
            Action::Rotation { angle } => vec![wrap(x[0] + angle)],
            Action::Reflection { axis } => vec![wrap(axis - x[0])],
            Action::SineWarp { t, harmonic } => {
                let k = harmonic as f64;
                vec![wrap(x[0] + t / k * (k * x[0]).sin())]
            }
            Action::TorusTranslation { da, db } => vec![wrap(x[0] + da), wrap(x[1] + db)],
            Action::TorusQuarterTurn => vec![wrap(-x[1]), wrap(x[0])],
        }
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        match self.action {
            Action::Identity => y.to_vec(),
            Action::Rotation { angle } => vec![wrap(y[0] - angle)],
            Action::Reflection { axis } => vec![wrap(axis - y[0])],
            Action::SineWarp { t, harmonic } => vec![wrap(invert_sine_warp(y[0], t, harmonic))],
            Action::TorusTranslation { da, db } => vec![wrap(y[0] - da), wrap(y[1] - db)],
            Action::TorusQuarterTurn => vec![wrap(y[1]), wrap(-y[0])],
        }
    }

    /// ‖ξ‖_∞ = sup_x r(x, ξ(x)).
    pub fn sup_displacement(&self) -> f64 {
        match self.action {
            Action::Identity => 0.0,
            Action::Rotation { angle } => arc_distance(angle, 0.0),
            Action::Reflection { .. } => PI,
            Action::SineWarp { t, harmonic } => (t / harmonic as f64).abs().min(PI),
            Action::TorusTranslation { da, db } => arc_distance(da, 0.0).hypot(arc_distance(db, 0.0)),
            // Attained at (π/2, π/2) ↦ (3π/2, π/2).
            Action::TorusQuarterTurn => PI,
        }
    }

    /// max over nodes of r(ξ⁻¹(ξ(x)), x).
    pub fn inverse_defect(&self, nodes: &QuadratureNodes) -> Result<f64> {
        let metric = nodes.metric();
        nodes.coords().iter().try_fold(0.0f64, |worst, x| {
            let back = self.inverse(&self.forward(x));
            Ok(worst.max(metric.between(&back, x)?))
        })
    }

    /// max over node pairs of |r(ξx, ξy) − r(x, y)|, sampling every
    /// `stride`-th pair.
    pub fn isometry_defect(&self, nodes: &QuadratureNodes, stride: usize) -> Result<f64> {
        let metric = nodes.metric();
        let images: Vec<Vec<f64>> = nodes.coords().iter().map(|x| self.forward(x)).collect();
        let mut worst = 0.0f64;
        let n = nodes.len();
        for i in (0..n).step_by(stride.max(1)) {
            for j in (0..n).step_by(stride.max(1)) {
                let before = metric.between(nodes.coord(i), nodes.coord(j))?;
                let after = metric.between(&images[i], &images[j])?;
                worst = worst.max((after - before).abs());
            }
        }
        Ok(worst)
    }
}

/// Solve y + (t/k)·sin(ky) = x by Newton's method. The map is strictly
/// increasing for |t| < 1, so the root is unique.
fn invert_sine_warp(x: f64, t: f64, harmonic: u32) -> f64 {
    let k = harmonic as f64;
    let mut y = x;
    for _ in 0..100 {
        let residual = y + t / k * (k * y).sin() - x;
        let step = residual / (1.0 + t * (k * y).cos());
        y -= step;
        if step.abs() <= 1e-16 * (1.0 + y.abs()) {
            break;
        }
    }
    y
}

/// V_ξ f(x_i) = f(ξ⁻¹(x_i)).
///
/// Preimages that land on a node reuse the sampled value. Other preimages
/// are evaluated by bandlimited synthesis in the closed-form eigenbasis,
/// which is exact for signals in the span of the retained modes.
pub fn apply_action(f: &Signal, map: &PointMap) -> Result<Signal> {
    let spectrum = f.spectrum();
    let nodes = spectrum.nodes();
    if !nodes.has_geometry() {
        return Err(Error::MissingGeometry);
    }
    let mut values = Vec::with_capacity(nodes.len());
    for (i, x) in nodes.coords().iter().enumerate() {
        if !map.supports(nodes.metric()) {
            return Err(Error::MapUndefined {
                node: i,
                reason: format!(
                    "{:?} does not act on the {} backend",
                    map.action(),
                    spectrum.backend_name()
                ),
            });
        }
        let preimage = map.inverse(x);
        let value = match nodes.locate(&preimage) {
            Some(k) => f.values()[k],
            None => {
                let modes = spectrum.eval_modes(&preimage).map_err(|e| Error::MapUndefined {
                    node: i,
                    reason: e.to_string(),
                })?;
                modes.iter().zip(f.coefficients()).map(|(e, c)| e * c).sum()
            }
        };
        values.push(value);
    }
    Signal::new(Arc::clone(spectrum), values)
}

/// P_λ f: keep the modes with λ_n < lam.
pub fn bandlimit_project(f: &Signal, lam: f64) -> Result<Signal> {
    let eigenvalues = f.spectrum().eigenvalues();
    let coefficients: Vec<f64> = f
        .coefficients()
        .iter()
        .zip(eigenvalues)
        .map(|(&c, &l)| if l < lam { c } else { 0.0 })
        .collect();
    synthesize(&coefficients, f.spectrum())
}

/// Fail unless every coefficient at λ_n ≥ lam is below `tolerance` relative
/// to the largest coefficient.
pub fn check_bandlimited(f: &Signal, lam: f64, tolerance: f64) -> Result<()> {
    let coefficients = f.coefficients();
    let scale = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for (&c, &l) in coefficients.iter().zip(f.spectrum().eigenvalues()) {
        if l >= lam && c.abs() > tolerance * scale {
            return Err(Error::NotBandlimited {
                lam,
                eigenvalue: l,
                magnitude: c.abs(),
            });
        }
    }
    Ok(())
}

pub fn is_bandlimited(f: &Signal, lam: f64, tolerance: f64) -> bool {
    check_bandlimited(f, lam, tolerance).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_circle_spectrum, build_pointcloud_spectrum, build_torus_spectrum, sample_circle};

    fn circle() -> Arc<crate::spectra::Spectrum> {
        Arc::new(build_circle_spectrum(17, 128).unwrap())
    }

    #[test]
    fn identity_and_quarter_rotation() {
        let s = circle();
        let f = Signal::from_fn(Arc::clone(&s), |p| p[0].cos()).unwrap();
        assert_eq!(apply_action(&f, &PointMap::identity()).unwrap().values(), f.values());
        let turned = apply_action(&f, &PointMap::rotation(PI / 2.0)).unwrap();
        for (v, x) in turned.values().iter().zip(s.nodes().coords()) {
            assert!((v - x[0].sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn rotations_compose() {
        let s = circle();
        let f = Signal::from_fn(Arc::clone(&s), |p| p[0].sin() + 0.3 * (4.0 * p[0]).cos()).unwrap();
        for (a, b) in [(0.3, 1.1), (TAU / 128.0 * 5.0, TAU / 128.0 * 7.0)] {
            let two_steps = apply_action(
                &apply_action(&f, &PointMap::rotation(b)).unwrap(),
                &PointMap::rotation(a),
            )
            .unwrap();
            let one_step = apply_action(&f, &PointMap::rotation(a + b)).unwrap();
            for (x, y) in two_steps.values().iter().zip(one_step.values()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn map_invariants() {
        let s = circle();
        let t = Arc::new(build_torus_spectrum(9, 16).unwrap());
        for map in [PointMap::rotation(0.7), PointMap::reflection(1.3)] {
            assert!(map.inverse_defect(s.nodes()).unwrap() < 1e-10);
            assert!(map.isometry_defect(s.nodes(), 3).unwrap() < 1e-10);
        }
        for map in [PointMap::torus_translation(0.4, -2.0), PointMap::torus_quarter_turn()] {
            assert!(map.inverse_defect(t.nodes()).unwrap() < 1e-10);
            assert!(map.isometry_defect(t.nodes(), 5).unwrap() < 1e-10);
        }
        let warp = PointMap::sine_warp(0.5).unwrap();
        assert_eq!(warp.kind(), MapKind::Diffeomorphism);
        assert!(warp.inverse_defect(s.nodes()).unwrap() < 1e-10);
        assert!(warp.isometry_defect(s.nodes(), 3).unwrap() > 0.1);
        assert!((warp.sup_displacement() - 0.5).abs() < 1e-15);
        assert!(PointMap::sine_warp(1.0).is_err());
    }

    #[test]
    fn sine_warp_displacement_is_attained() {
        let warp = PointMap::sine_warp(0.2).unwrap();
        let sampled = (0..10_000)
            .map(|i| {
                let x = TAU * i as f64 / 10_000.0;
                arc_distance(warp.forward(&[x])[0], x)
            })
            .fold(0.0, f64::max);
        assert!((sampled - 0.2).abs() < 1e-8);
    }

    #[test]
    fn off_node_pullback_is_exact_for_bandlimited_signals() {
        let s = circle();
        let warp = PointMap::sine_warp(0.3).unwrap();
        let f = Signal::from_fn(Arc::clone(&s), |p| (2.0 * p[0]).cos() - p[0].sin()).unwrap();
        let moved = apply_action(&f, &warp).unwrap();
        for (v, x) in moved.values().iter().zip(s.nodes().coords()) {
            let y = warp.inverse(x)[0];
            assert!((v - ((2.0 * y).cos() - y.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn maps_reject_other_manifolds() {
        let t = Arc::new(build_torus_spectrum(9, 16).unwrap());
        let f = Signal::zeros(t);
        assert!(matches!(
            apply_action(&f, &PointMap::rotation(0.1)),
            Err(Error::MapUndefined { .. })
        ));
        let cloud = Arc::new(build_pointcloud_spectrum(&sample_circle(64, 1.0, 2), 4, 0.4).unwrap());
        let g = Signal::zeros(cloud);
        assert!(apply_action(&g, &PointMap::rotation(0.1)).is_err());
    }

    #[test]
    fn projection() {
        let s = circle();
        let f = Signal::from_fn(Arc::clone(&s), |p| 1.0 + p[0].cos() + (3.0 * p[0]).sin()).unwrap();
        let all = bandlimit_project(&f, 1e9).unwrap();
        for (a, b) in all.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let constant = bandlimit_project(&f, 0.5).unwrap();
        assert!(constant.values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let once = bandlimit_project(&f, 4.0).unwrap();
        let twice = bandlimit_project(&once, 4.0).unwrap();
        assert_eq!(once.values(), twice.values());
        assert!(is_bandlimited(&once, 4.0, 1e-10));
        assert!(!is_bandlimited(&f, 4.0, 1e-10));
        // Strict inequality: λ = 1 is removed at lam = 1.
        assert!(matches!(
            check_bandlimited(&f, 1.0, 1e-10),
            Err(Error::NotBandlimited { .. })
        ));
    }
}
