//! Point-cloud spectra from a diffusion-maps graph Laplacian.
//!
//! With the Gaussian kernel k(x, y) = exp(−|x − y|²/σ²) and α = 1 density
//! normalization, (I − P)/σ² converges to −Δ/4 on uniformly sampled
//! manifolds, so graph eigenvalues are rescaled by 4/σ².

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Basis, GraphDistances, Metric, QuadratureNodes, Spectrum};
use crate::error::{Error, Result};

/// Edges of the neighbourhood graph connect points closer than this many
/// bandwidths.
const NEIGHBOR_RADIUS: f64 = 3.0;

/// Graph eigenvalue 1 − μ₀ must vanish to this tolerance after rescaling.
const ZERO_MODE_TOLERANCE: f64 = 1e-8;

/// Quantities estimated along the way that are useful to report.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudDiagnostics {
    pub bandwidth: f64,
    /// Unrounded intrinsic-dimension estimate from kernel-sum doubling.
    pub dimension_estimate: f64,
    pub volume_estimate: f64,
    pub mean_degree: f64,
}

/// Uniform random samples on a circle of the given radius, seeded.
pub fn sample_circle(n_points: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_points)
        .map(|_| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            vec![radius * theta.cos(), radius * theta.sin()]
        })
        .collect()
}

fn squared_distances(points: &[Vec<f64>]) -> DMatrix<f64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |i, j| {
        points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum()
    })
}

fn count_components(adjacency: &[Vec<(usize, f64)>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut components = 0;
    for start in 0..adjacency.len() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

fn validate_points(points: &[Vec<f64>], n_modes: usize, bandwidth: f64) -> Result<()> {
    if n_modes == 0 {
        return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
    }
    if points.len() < n_modes + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} points cannot support {n_modes} modes (need at least {})",
            points.len(),
            n_modes + 1
        )));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::InvalidArgument("points have no coordinates".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("point {i} has a non-finite coordinate")));
        }
    }
    Ok(())
}

fn neighbor_graph(d2: &DMatrix<f64>, bandwidth: f64) -> Vec<Vec<(usize, f64)>> {
    let n = d2.nrows();
    let radius2 = (NEIGHBOR_RADIUS * bandwidth).powi(2);
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && d2[(i, j)] < radius2)
                .map(|j| (j, d2[(i, j)].sqrt()))
                .collect()
        })
        .collect()
}

/// Nodes and graph metric of [`build_pointcloud_spectrum`], for re-attaching
/// geometry to a cached point-cloud spectrum. Weights are placeholders;
/// [`Spectrum::with_geometry`] keeps the cached ones.
pub fn pointcloud_geometry(points: &[Vec<f64>], bandwidth: f64) -> Result<(QuadratureNodes, Basis)> {
    validate_points(points, 1, bandwidth)?;
    let n = points.len();
    let adjacency = neighbor_graph(&squared_distances(points), bandwidth);
    let nodes = QuadratureNodes::new(
        points.to_vec(),
        vec![1.0; n],
        n as f64,
        Metric::Graph(GraphDistances::new(adjacency)),
    )?;
    Ok((nodes, Basis::Sampled))
}

/// Build the spectrum of a point cloud. See [`build_pointcloud_spectrum_with_diagnostics`].
pub fn build_pointcloud_spectrum(points: &[Vec<f64>], n_modes: usize, bandwidth: f64) -> Result<Spectrum> {
    build_pointcloud_spectrum_with_diagnostics(points, n_modes, bandwidth).map(|(s, _)| s)
}

/// Density-normalized Gaussian graph Laplacian spectrum.
///
/// Eigenvectors of the symmetric operator D^{-1/2} K̃ D^{-1/2} are used as
/// eigenfunctions, scaled for uniform weights `volume/N`, so the discrete
/// Gram matrix is the identity to round-off. The volume comes from the mean
/// kernel degree, N (πσ²)^{d/2} / mean_i Σ_j k(x_i, x_j), with the intrinsic
/// dimension d estimated from how the degree shrinks when σ is divided by √2.
pub fn build_pointcloud_spectrum_with_diagnostics(
    points: &[Vec<f64>],
    n_modes: usize,
    bandwidth: f64,
) -> Result<(Spectrum, PointCloudDiagnostics)> {
    validate_points(points, n_modes, bandwidth)?;
    let n = points.len();
    let sigma2 = bandwidth * bandwidth;
    let d2 = squared_distances(points);

    let adjacency = neighbor_graph(&d2, bandwidth);
    let components = count_components(&adjacency);
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }

    let kernel = d2.map(|v| (-v / sigma2).exp());
    let degree: Vec<f64> = kernel.row_iter().map(|r| r.sum()).collect();
    let half_degree_mean = d2.map(|v| (-2.0 * v / sigma2).exp()).sum() / n as f64;
    let mean_degree = degree.iter().sum::<f64>() / n as f64;

    let dimension_estimate = 2.0 * (mean_degree / half_degree_mean).log2();
    let dimension = dimension_estimate.round().max(1.0) as usize;
    let volume = n as f64 * (std::f64::consts::PI * sigma2).powf(dimension as f64 / 2.0) / mean_degree;

    // α = 1 normalization removes the sampling density.
    let normalized = DMatrix::from_fn(n, n, |i, j| kernel[(i, j)] / (degree[i] * degree[j]));
    let row_mass: Vec<f64> = normalized.row_iter().map(|r| r.sum()).collect();
    let inv_sqrt: Vec<f64> = row_mass.iter().map(|d| 1.0 / d.sqrt()).collect();
    let symmetric = DMatrix::from_fn(n, n, |i, j| normalized[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);

    let eigen = SymmetricEigen::try_new(symmetric, 1e-14, 0)
        .ok_or_else(|| Error::EigenSolver(format!("symmetric eigensolve of {n}x{n} operator did not converge")))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    order.truncate(n_modes);

    let scale = 4.0 / sigma2;
    let mut eigenvalues: Vec<f64> = order
        .iter()
        .map(|&k| ((1.0 - eigen.eigenvalues[k]) * scale).max(0.0))
        .collect();
    if eigenvalues[0] > ZERO_MODE_TOLERANCE {
        return Err(Error::EigenSolver(format!(
            "lowest eigenvalue {} is not zero",
            eigenvalues[0]
        )));
    }
    eigenvalues[0] = 0.0;

    let weight = volume / n as f64;
    let norm = 1.0 / weight.sqrt();
    let mut eigenfunctions = DMatrix::zeros(n, n_modes);
    for (col, &k) in order.iter().enumerate() {
        let v = eigen.eigenvectors.column(k);
        // Fix the sign: the entry of largest magnitude is positive.
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -norm } else { norm };
        for i in 0..n {
            eigenfunctions[(i, col)] = sign * v[i];
        }
    }

    let nodes = QuadratureNodes::new(
        points.to_vec(),
        vec![weight; n],
        weight * n as f64,
        Metric::Graph(GraphDistances::new(adjacency)),
    )?;
    let spectrum = Spectrum::new(eigenvalues, eigenfunctions, nodes, dimension, Basis::Sampled)?;
    Ok((
        spectrum,
        PointCloudDiagnostics {
            bandwidth,
            dimension_estimate,
            volume_estimate: volume,
            mean_degree,
        },
    ))
}
