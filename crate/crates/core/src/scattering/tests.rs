use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::filters::{LowPassProfile, ProfileKind};
use crate::spectra::{build_circle_spectrum, Spectrum};
use crate::transform::{g_function, l2_norm, synthesize};

fn circle(n_modes: usize, n_nodes: usize) -> Arc<Spectrum> {
    Arc::new(build_circle_spectrum(n_modes, n_nodes).unwrap())
}

fn bank(spectrum: &Arc<Spectrum>, j_min: i32, j_max: i32) -> WaveletBank {
    let profile = LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap();
    WaveletBank::new(profile, Arc::clone(spectrum), j_min, j_max).unwrap()
}

fn cosine(spectrum: &Arc<Spectrum>) -> Signal {
    Signal::from_fn(Arc::clone(spectrum), |p| p[0].cos()).unwrap()
}

fn random_signal(spectrum: &Arc<Spectrum>, rng: &mut ChaCha8Rng) -> Signal {
    let coefficients: Vec<f64> = (0..spectrum.n_modes())
        .map(|n| if n == 0 { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect();
    synthesize(&coefficients, spectrum).unwrap()
}

// ψ̂₀(1) = (e^{−1} − e^{−2})^{1/2} for G(x) = e^{−x}.
const PSI_0_AT_1: f64 = 0.482_228_325_521;

#[test]
fn empty_path_is_identity() {
    let s = circle(9, 64);
    let b = bank(&s, -4, 4);
    let f = cosine(&s);
    assert_eq!(
        propagate(&f, &ScatteringPath::empty(), &b).unwrap().values(),
        f.values()
    );
}

#[test]
fn constants_are_annihilated() {
    let s = circle(9, 64);
    let b = bank(&s, -4, 4);
    let e0 = Signal::mode(Arc::clone(&s), 0).unwrap();
    let u = propagate(&e0, &ScatteringPath::new(vec![0, 1]), &b).unwrap();
    assert!(u.values().iter().all(|v| v.abs() < 1e-14));
    let table = moments(&e0, &b, 2, 2.0).unwrap();
    assert!(table.entries().values().all(|v| v.abs() < 1e-12));
}

#[test]
fn first_layer_of_cosine_matches_pointwise_oracle() {
    let s = circle(9, 256);
    let b = bank(&s, -20, 20);
    let psi = ((-0.5f64).exp().powi(2) - (-1.0f64).exp().powi(2)).sqrt();
    assert!((psi - PSI_0_AT_1).abs() < 1e-12);
    let u = propagate(&cosine(&s), &ScatteringPath::new(vec![0]), &b).unwrap();
    for (i, v) in u.values().iter().enumerate() {
        let theta = 2.0 * PI * i as f64 / 256.0;
        assert!((v - psi * theta.cos().abs()).abs() < 1e-8);
    }
}

#[test]
fn out_of_window_scales_are_rejected() {
    let s = circle(9, 64);
    let b = bank(&s, -4, 4);
    assert!(matches!(
        propagate(&cosine(&s), &ScatteringPath::new(vec![5]), &b),
        Err(Error::ScaleOutOfWindow { scale: 5, .. })
    ));
}

#[test]
fn first_order_moments_of_cosine() {
    let s = circle(9, 256);
    let b = bank(&s, -20, 20);
    let f = cosine(&s);
    let path = ScatteringPath::new(vec![0]);
    let q2 = moments(&f, &b, 1, 2.0).unwrap();
    assert!((q2.get(&path).unwrap() - PSI_0_AT_1 * PI.sqrt()).abs() < 1e-6);
    let q1 = moments(&f, &b, 1, 1.0).unwrap();
    assert!((q1.get(&path).unwrap() - PSI_0_AT_1 * 4.0).abs() < 1e-4);
    assert_eq!(q2.len(), 41);
}

#[test]
fn cascade_matches_naive_recomputation() {
    let s = circle(17, 128);
    let b = bank(&s, -1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_signal(&s, &mut rng);
    let table = moments(&f, &b, 3, 1.5).unwrap();
    assert_eq!(table.len(), 27);
    for (path, value) in table.entries() {
        let direct = crate::transform::lq_norm(&propagate(&f, path, &b).unwrap(), 1.5).unwrap();
        assert!((value - direct).abs() < 1e-12, "{path}: {value} vs {direct}");
    }
    let all = moments_up_to(&f, &b, 3, 1.5).unwrap();
    assert_eq!(all.len(), 3);
    assert_eq!(all[2].entries(), table.entries());
    assert_eq!(all[0].len(), 3);
    assert_eq!(table.diagnostics().discarded_energy.len(), 2);
}

#[test]
fn one_layer_energy_equals_g_function_energy() {
    let s = circle(17, 128);
    let b = bank(&s, -20, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_signal(&s, &mut rng);
    let table = moments(&f, &b, 1, 2.0).unwrap();
    let energy: f64 = table.entries().values().map(|v| v * v).sum();
    assert!((energy - l2_norm(&g_function(&f, &b).unwrap()).powi(2)).abs() < 1e-10);
}

#[test]
fn grid_cap_and_argument_checks() {
    let s = circle(9, 64);
    let b = bank(&s, -8, 8);
    let f = cosine(&s);
    assert!(matches!(
        moments_with_cap(&f, &b, 3, 2.0, 1000),
        Err(Error::GridCap { paths: 4913, cap: 1000 })
    ));
    assert!(moments(&f, &b, 0, 2.0).is_err());
    assert!(moments(&f, &b, 1, 2.5).is_err());
    assert!(moments(&f, &b, 1, 0.5).is_err());
}

#[test]
fn norms_of_tables() {
    let s = circle(9, 256);
    let b = bank(&s, 0, 0);
    let f = cosine(&s);
    let table = moments(&f, &b, 1, 2.0).unwrap();
    assert_eq!(scattering_norm(&table, Some(&table)).unwrap(), 0.0);
    let value = table.get(&ScatteringPath::new(vec![0])).unwrap();
    assert_eq!(scattering_norm(&table, None).unwrap(), value);
    assert!((scattering_norm_qpower(&table, None).unwrap() - value * value).abs() < 1e-15);

    let other = moments(&f, &b, 1, 1.5).unwrap();
    assert!(matches!(
        scattering_norm(&table, Some(&other)),
        Err(Error::IncompatibleTables(_))
    ));
}

#[test]
fn nonexpansive_on_random_pairs() {
    let s = circle(17, 128);
    let b = bank(&s, -6, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = random_signal(&s, &mut rng);
        let g = random_signal(&s, &mut rng);
        let gap = l2_norm(&f.sub(&g).unwrap());
        for m in 1..=2 {
            let a = moments(&f, &b, m, 2.0).unwrap();
            let c = moments(&g, &b, m, 2.0).unwrap();
            assert!(scattering_norm(&a, Some(&c)).unwrap() <= gap * (1.0 + 1e-12));
        }
    }
}

#[test]
fn csv_round_trip_and_sparsity() {
    let s = circle(9, 128);
    let b = bank(&s, -2, 2);
    let table = moments(&cosine(&s), &b, 2, 1.5)
        .unwrap()
        .with_seed(42)
        .with_metadata("manifold", "circle");
    let text = table.to_csv();
    assert!(text.starts_with("# q = 1.5\n# m = 2\n# j_min = -2\n# j_max = 2\n# profile = exponential\n"));
    assert!(text.contains("j1,j2,value\n"));
    let back = read_moment_csv(&text).unwrap();
    assert_eq!(back.entries(), table.entries());
    assert_eq!(back.seed(), Some(42));
    assert_eq!(back.to_csv(), text);

    let sparse = table.clone().with_sparsity(0.5);
    assert!(sparse.is_sparse() && sparse.len() < table.len());
    let dropped = table
        .entries()
        .keys()
        .find(|p| sparse.entries().get(*p).is_none())
        .unwrap();
    assert_eq!(sparse.get(dropped), Some(0.0));
    assert!(read_moment_csv(&sparse.to_csv()).unwrap().is_sparse());
}

#[test]
fn windowed_coefficients_approach_the_spectral_limit() {
    let s = circle(9, 256);
    let b = bank(&s, -20, 20);
    let f = cosine(&s);
    let path = ScatteringPath::new(vec![0]);
    let report = windowed_limit_report(&f, &path, &b, 25).unwrap();
    assert!(report.spread < 1e-6);
    assert!(report.spectral_gap < 1e-6);
    assert!(report.half_power_gap > 0.1);

    let e0 = Signal::mode(Arc::clone(&s), 0).unwrap();
    let low = windowed_scattering(&e0, &ScatteringPath::empty(), &b, 25).unwrap();
    for (a, b) in low.values().iter().zip(e0.values()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(windowed_scattering(&f, &ScatteringPath::new(vec![3]), &b, 2).is_err());
}
