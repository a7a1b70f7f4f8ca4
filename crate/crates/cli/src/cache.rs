//! Spectrum construction with an on-disk cache keyed by the manifold spec.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use geoscatter::spectra::{
    build_circle_spectrum, build_pointcloud_spectrum, build_torus_spectrum, circle_geometry, decode_spectrum,
    encode_spectrum, parse_point_cloud, pointcloud_geometry, sample_circle, torus_geometry,
};
use geoscatter::Spectrum;
use log::info;
use sha2::{Digest, Sha256};

use crate::config::{ManifoldSpec, RunConfig};
use crate::error::{CliError, CliResult};

/// A spectrum plus where it came from.
pub struct LoadedSpectrum {
    pub spectrum: Arc<Spectrum>,
    pub cache_file: PathBuf,
    pub from_cache: bool,
}

/// Point coordinates of a point-cloud spec, read from file or sampled.
pub fn load_points(spec: &ManifoldSpec, seed: Option<u64>) -> CliResult<Option<Vec<Vec<f64>>>> {
    match spec {
        ManifoldSpec::PointCloud { path: Some(path), .. } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
            Ok(Some(parse_point_cloud(&text)?))
        }
        ManifoldSpec::PointCloud {
            sample: Some(n),
            radius,
            ..
        } => {
            let seed = seed.ok_or_else(|| CliError::usage("sampling a point cloud needs a seed"))?;
            Ok(Some(sample_circle(*n, *radius, seed)))
        }
        _ => Ok(None),
    }
}

/// Hex digest over the canonical spec, the seed of sampled clouds, and the
/// coordinates of file clouds.
pub fn manifold_key(spec: &ManifoldSpec, seed: Option<u64>, points: Option<&[Vec<f64>]>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(spec).expect("specs serialize"));
    if let ManifoldSpec::PointCloud { sample: Some(_), .. } = spec {
        hasher.update(seed.unwrap_or_default().to_le_bytes());
    }
    for p in points.into_iter().flatten() {
        for c in p {
            hasher.update(c.to_le_bytes());
        }
    }
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn build(spec: &ManifoldSpec, points: Option<&[Vec<f64>]>) -> CliResult<Spectrum> {
    Ok(match spec {
        ManifoldSpec::Circle { n_modes, n_nodes } => build_circle_spectrum(*n_modes, *n_nodes)?,
        ManifoldSpec::Torus {
            n_modes,
            n_nodes_per_axis,
        } => build_torus_spectrum(*n_modes, *n_nodes_per_axis)?,
        ManifoldSpec::PointCloud { n_modes, bandwidth, .. } => {
            build_pointcloud_spectrum(points.expect("points loaded"), *n_modes, *bandwidth)?
        }
    })
}

fn attach_geometry(decoded: Spectrum, spec: &ManifoldSpec, points: Option<&[Vec<f64>]>) -> CliResult<Spectrum> {
    let (nodes, basis) = match spec {
        ManifoldSpec::Circle { n_modes, n_nodes } => circle_geometry(*n_modes, *n_nodes),
        ManifoldSpec::Torus {
            n_modes,
            n_nodes_per_axis,
        } => torus_geometry(*n_modes, *n_nodes_per_axis),
        ManifoldSpec::PointCloud { bandwidth, .. } => pointcloud_geometry(points.expect("points loaded"), *bandwidth)?,
    };
    Ok(decoded.with_geometry(nodes, basis)?)
}

fn read_cached(path: &Path, spec: &ManifoldSpec, points: Option<&[Vec<f64>]>) -> CliResult<Spectrum> {
    let bytes = std::fs::read(path).map_err(|e| CliError::file(path, e))?;
    attach_geometry(decode_spectrum(&bytes)?, spec, points)
}

/// Load the configured spectrum from the cache, or build and store it.
pub fn spectrum_for(config: &RunConfig) -> CliResult<LoadedSpectrum> {
    let spec = &config.manifold;
    let points = load_points(spec, config.seed)?;
    let key = manifold_key(spec, config.seed, points.as_deref());
    let cache_file = config.cache.join(format!("spectrum-{key}.gspc"));

    if cache_file.exists() {
        match read_cached(&cache_file, spec, points.as_deref()) {
            Ok(spectrum) => {
                info!("loaded spectrum from cache {}", cache_file.display());
                return Ok(LoadedSpectrum {
                    spectrum: Arc::new(spectrum),
                    cache_file,
                    from_cache: true,
                });
            }
            Err(e) => info!("ignoring unreadable cache {}: {e}", cache_file.display()),
        }
    }

    info!(
        "building spectrum for {}",
        serde_json::to_string(spec).expect("specs serialize")
    );
    let spectrum = build(spec, points.as_deref())?;
    std::fs::create_dir_all(&config.cache).map_err(|e| CliError::file(&config.cache, e))?;
    // Write then rename so a concurrent reader never sees a partial file.
    let partial = cache_file.with_extension("partial");
    std::fs::write(&partial, encode_spectrum(&spectrum)).map_err(|e| CliError::file(&partial, e))?;
    std::fs::rename(&partial, &cache_file).map_err(|e| CliError::file(&cache_file, e))?;
    info!("cached spectrum at {}", cache_file.display());
    Ok(LoadedSpectrum {
        spectrum: Arc::new(spectrum),
        cache_file,
        from_cache: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_in(dir: &Path, manifold: ManifoldSpec) -> RunConfig {
        RunConfig {
            manifold,
            cache: dir.to_path_buf(),
            seed: Some(4),
            ..RunConfig::default()
        }
    }

    #[test]
    fn warm_cache_matches_fresh_build() {
        let dir = tempfile::tempdir().unwrap();
        for manifold in [
            ManifoldSpec::Circle {
                n_modes: 9,
                n_nodes: 64,
            },
            ManifoldSpec::Torus {
                n_modes: 5,
                n_nodes_per_axis: 8,
            },
            ManifoldSpec::PointCloud {
                path: None,
                sample: Some(64),
                radius: 1.0,
                n_modes: 3,
                bandwidth: 0.4,
            },
        ] {
            let config = config_in(dir.path(), manifold);
            let cold = spectrum_for(&config).unwrap();
            assert!(!cold.from_cache);
            let warm = spectrum_for(&config).unwrap();
            assert!(warm.from_cache);
            assert_eq!(cold.cache_file, warm.cache_file);
            assert_eq!(cold.spectrum.eigenvalues(), warm.spectrum.eigenvalues());
            assert_eq!(cold.spectrum.eigenfunctions(), warm.spectrum.eigenfunctions());
            assert_eq!(cold.spectrum.nodes().coords(), warm.spectrum.nodes().coords());
            assert_eq!(cold.spectrum.weights(), warm.spectrum.weights());
            assert_eq!(cold.spectrum.volume().to_bits(), warm.spectrum.volume().to_bits());
            assert_eq!(cold.spectrum.backend_name(), warm.spectrum.backend_name());
        }
    }

    #[test]
    fn keys_separate_specs_and_seeds() {
        let a = ManifoldSpec::Circle {
            n_modes: 9,
            n_nodes: 64,
        };
        let b = ManifoldSpec::Circle {
            n_modes: 9,
            n_nodes: 128,
        };
        assert_ne!(manifold_key(&a, None, None), manifold_key(&b, None, None));
        assert_eq!(manifold_key(&a, Some(1), None), manifold_key(&a, Some(2), None));
        let cloud = ManifoldSpec::PointCloud {
            path: None,
            sample: Some(64),
            radius: 1.0,
            n_modes: 3,
            bandwidth: 0.4,
        };
        assert_ne!(manifold_key(&cloud, Some(1), None), manifold_key(&cloud, Some(2), None));
    }

    #[test]
    fn missing_point_file_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nowhere.txt");
        let config = config_in(
            dir.path(),
            ManifoldSpec::PointCloud {
                path: Some(missing.clone()),
                sample: None,
                radius: 1.0,
                n_modes: 3,
                bandwidth: 0.4,
            },
        );
        let err = spectrum_for(&config).err().unwrap();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains(&missing.display().to_string()), "{err}");
    }
}
