//! Named test signals and signal files.

use std::sync::Arc;

use geoscatter::analysis::random_bandlimited;
use geoscatter::transform::read_signal_text;
use geoscatter::{Signal, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SignalSpec;
use crate::error::{CliError, CliResult};

/// First angular coordinate of a node: the angle itself on the circle and
/// torus, the polar angle on a planar point cloud.
fn angle(spectrum: &Spectrum, p: &[f64]) -> f64 {
    if spectrum.is_analytic() {
        p[0]
    } else {
        p[1].atan2(p[0])
    }
}

pub fn build_signal(spec: &SignalSpec, spectrum: &Arc<Spectrum>, seed: Option<u64>) -> CliResult<Signal> {
    let s = Arc::clone(spectrum);
    Ok(match spec {
        SignalSpec::Cos => Signal::from_fn(s, |p| angle(spectrum, p).cos())?,
        SignalSpec::Sin => Signal::from_fn(s, |p| angle(spectrum, p).sin())?,
        SignalSpec::Mode { index } => Signal::mode(s, *index)?,
        SignalSpec::Random { band } => {
            let seed = seed.ok_or_else(|| CliError::usage("a random signal needs a seed"))?;
            random_bandlimited(spectrum, *band, &mut ChaCha8Rng::seed_from_u64(seed))
        }
        SignalSpec::File { path } => {
            if !path.exists() {
                return Err(CliError::file(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "signal file not found"),
                ));
            }
            read_signal_text(s, path)?
        }
    })
}

#[cfg(test)]
mod tests {
    use geoscatter::spectra::{build_circle_spectrum, build_pointcloud_spectrum, sample_circle};
    use geoscatter::transform::write_signal_text;

    use super::*;

    #[test]
    fn named_signals() {
        let s = Arc::new(build_circle_spectrum(9, 64).unwrap());
        let cos = build_signal(&SignalSpec::Cos, &s, None).unwrap();
        assert!((cos.values()[16]).abs() < 1e-15);
        assert_eq!(cos.values()[0], 1.0);
        let e0 = build_signal(&SignalSpec::Mode { index: 0 }, &s, None).unwrap();
        assert!(e0.values().iter().all(|v| (v - e0.values()[0]).abs() < 1e-15));
        assert!(build_signal(&SignalSpec::Random { band: 5.0 }, &s, None).is_err());
        let a = build_signal(&SignalSpec::Random { band: 5.0 }, &s, Some(2)).unwrap();
        let b = build_signal(&SignalSpec::Random { band: 5.0 }, &s, Some(2)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn polar_angle_on_clouds() {
        let points = sample_circle(64, 1.0, 3);
        let s = Arc::new(build_pointcloud_spectrum(&points, 3, 0.4).unwrap());
        let cos = build_signal(&SignalSpec::Cos, &s, None).unwrap();
        for (v, p) in cos.values().iter().zip(&points) {
            assert!((v - p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn signal_files() {
        let s = Arc::new(build_circle_spectrum(9, 64).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        let f = build_signal(&SignalSpec::Sin, &s, None).unwrap();
        write_signal_text(&f, &path).unwrap();
        let back = build_signal(&SignalSpec::File { path: path.clone() }, &s, None).unwrap();
        assert_eq!(back.values(), f.values());
        let missing = build_signal(
            &SignalSpec::File {
                path: dir.path().join("missing.txt"),
            },
            &s,
            None,
        )
        .unwrap_err();
        assert!(missing.to_string().contains("missing.txt"));
    }
}
