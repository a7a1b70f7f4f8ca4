//! End-to-end runs through spectrum, bank, cascade and table I/O.

use std::f64::consts::PI;
use std::sync::Arc;

use geoscatter::scattering::{moments, read_moment_csv};
use geoscatter::spectra::{build_circle_spectrum, load_spectrum, save_spectrum};
use geoscatter::{LowPassProfile, ProfileKind, ScatteringPath, Signal, WaveletBank};

fn bank_on(spectrum: Arc<geoscatter::Spectrum>) -> WaveletBank {
    WaveletBank::new(
        LowPassProfile::new(ProfileKind::Exponential, 1.0).unwrap(),
        spectrum,
        -8,
        8,
    )
    .unwrap()
}

#[test]
fn first_order_moments_of_cosine_match_closed_form() {
    let spectrum = Arc::new(build_circle_spectrum(33, 256).unwrap());
    let f = Signal::from_fn(Arc::clone(&spectrum), |p| p[0].cos()).unwrap();
    let table = moments(&f, &bank_on(spectrum), 1, 2.0).unwrap();
    assert_eq!(table.len(), 17);
    for j in -8..=8 {
        // cos lives in the λ = 1 eigenspace, so ψ_j * cos = ψ̂_j(1)·cos and
        // its L² norm is ψ̂_j(1)·√π with ψ̂_j(1)² = e^{-2^j} − e^{-2^{j+1}}.
        let a = 2f64.powi(j);
        let expected = ((-a).exp() - (-2.0 * a).exp()).sqrt() * PI.sqrt();
        let got = table.get(&ScatteringPath::new(vec![j])).unwrap();
        assert!(
            (got - expected).abs() < 1e-12 * expected.max(1e-300),
            "j = {j}: {got} vs {expected}"
        );
    }
}

#[test]
fn csv_round_trip_preserves_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = Arc::new(build_circle_spectrum(17, 128).unwrap());
    let f = Signal::from_fn(Arc::clone(&spectrum), |p| (2.0 * p[0]).sin() + 0.3 * p[0].cos()).unwrap();
    let table = moments(&f, &bank_on(spectrum), 2, 1.5).unwrap().with_seed(42);
    let path = dir.path().join("table.csv");
    table.write_csv(&path).unwrap();
    let back = read_moment_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.q(), 1.5);
    assert_eq!(back.order(), 2);
    assert_eq!(back.window(), (-8, 8));
    assert_eq!(back.seed(), Some(42));
    assert_eq!(back.len(), table.len());
    for (p, v) in table.entries() {
        assert_eq!(back.get(p).unwrap().to_bits(), v.to_bits(), "path {p:?}");
    }
}

#[test]
fn saved_spectrum_reproduces_moments_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = build_circle_spectrum(17, 128).unwrap();
    let path = dir.path().join("circle.gspc");
    save_spectrum(&fresh, &path).unwrap();
    let loaded = load_spectrum(&path).unwrap();
    assert_eq!(loaded.volume().to_bits(), fresh.volume().to_bits());

    let values: Vec<f64> = (0..128).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
    let run = |s: geoscatter::Spectrum| {
        let s = Arc::new(s);
        let f = Signal::new(Arc::clone(&s), values.clone()).unwrap();
        moments(&f, &bank_on(s), 2, 2.0).unwrap()
    };
    let (a, b) = (run(fresh), run(loaded));
    for (p, v) in a.entries() {
        assert_eq!(b.get(p).unwrap().to_bits(), v.to_bits(), "path {p:?}");
    }
}
