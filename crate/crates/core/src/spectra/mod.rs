//! Truncated Laplace–Beltrami eigendecompositions.
//!
//! A [`Spectrum`] holds eigenvalues in nondecreasing order, eigenfunctions
//! sampled at quadrature nodes, and the quadrature weights that stand in for
//! the Riemannian volume measure. Two analytic backends (the unit circle and
//! the flat torus) are exact up to round-off; the point-cloud backend
//! approximates the operator with a density-normalized Gaussian graph
//! Laplacian.

mod analytic;
mod io;
mod pointcloud;

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use analytic::{build_circle_spectrum, build_torus_spectrum, circle_geometry, torus_geometry};
pub use io::{
    decode_spectrum, encode_spectrum, load_spectrum, parse_point_cloud, read_point_cloud, save_spectrum,
    SPECTRUM_FORMAT_VERSION, SPECTRUM_MAGIC,
};
pub use pointcloud::{
    build_pointcloud_spectrum, build_pointcloud_spectrum_with_diagnostics, pointcloud_geometry, sample_circle,
    PointCloudDiagnostics,
};

/// Relative tolerance on `sum(weights) == volume`.
pub const VOLUME_TOLERANCE: f64 = 1e-9;

/// Geodesic distance between quadrature nodes.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Arc length on the unit circle; node coordinates are angles.
    Circle,
    /// Flat torus S¹×S¹ with unit radii; coordinates are angle pairs and the
    /// distance combines the per-axis arc lengths in quadrature.
    FlatTorus,
    /// Shortest paths on the kernel neighbourhood graph of a point cloud.
    Graph(GraphDistances),
    /// No geometry attached (e.g. a spectrum freshly loaded from a cache file).
    Unknown,
}

/// All-pairs shortest-path distances on a neighbourhood graph, computed on
/// first use.
#[derive(Debug, Clone)]
pub struct GraphDistances {
    adjacency: Vec<Vec<(usize, f64)>>,
    matrix: OnceLock<Vec<f64>>,
}

impl GraphDistances {
    pub(crate) fn new(adjacency: Vec<Vec<(usize, f64)>>) -> Self {
        Self {
            adjacency,
            matrix: OnceLock::new(),
        }
    }

    pub fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adjacency
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        let n = self.adjacency.len();
        let matrix = self.matrix.get_or_init(|| {
            use rayon::prelude::*;
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|source| dijkstra(&self.adjacency, source))
                .collect();
            rows.concat()
        });
        matrix[i * n + j]
    }
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            // min-heap on distance, ties broken by node index
            other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
        }
    }

    let mut dist = vec![f64::INFINITY; adjacency.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let candidate = d + w;
            if candidate < dist[v] {
                dist[v] = candidate;
                heap.push(Entry(candidate, v));
            }
        }
    }
    dist
}

/// Wrap an angle difference onto the unit circle's arc distance.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

impl Metric {
    /// Distance between two points given in intrinsic coordinates. Only the
    /// analytic metrics can evaluate off-node points.
    pub fn between(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::Circle => Ok(arc_distance(a[0], b[0])),
            Metric::FlatTorus => {
                let d1 = arc_distance(a[0], b[0]);
                let d2 = arc_distance(a[1], b[1]);
                Ok(d1.hypot(d2))
            }
            Metric::Graph(_) => Err(Error::OffNodeEvaluation("point-cloud")),
            Metric::Unknown => Err(Error::MissingGeometry),
        }
    }
}

/// Quadrature nodes: sample locations, positive weights and the metric.
///
/// For the analytic backends `coords` are intrinsic angles (one per axis);
/// for point clouds they are the ambient coordinates supplied by the caller.
#[derive(Debug, Clone)]
pub struct QuadratureNodes {
    coords: Vec<Vec<f64>>,
    weights: Vec<f64>,
    volume: f64,
    metric: Metric,
    grid: Option<usize>,
}

impl QuadratureNodes {
    pub fn new(coords: Vec<Vec<f64>>, weights: Vec<f64>, volume: f64, metric: Metric) -> Result<Self> {
        if !coords.is_empty() && coords.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for {} weights",
                coords.len(),
                weights.len()
            )));
        }
        let nodes = Self {
            coords,
            weights,
            volume,
            metric,
            grid: None,
        };
        nodes.validate()?;
        Ok(nodes)
    }

    /// Uniform trapezoid nodes θ_i = 2πi/n on the unit circle.
    pub fn circle_grid(n_nodes: usize) -> Self {
        let step = std::f64::consts::TAU / n_nodes as f64;
        Self {
            coords: (0..n_nodes).map(|i| vec![i as f64 * step]).collect(),
            weights: vec![step; n_nodes],
            volume: std::f64::consts::TAU,
            metric: Metric::Circle,
            grid: Some(n_nodes),
        }
    }

    /// Tensor trapezoid grid on the flat torus; node `a * n + b` sits at
    /// (2πa/n, 2πb/n).
    pub fn torus_grid(n_per_axis: usize) -> Self {
        let step = std::f64::consts::TAU / n_per_axis as f64;
        let mut coords = Vec::with_capacity(n_per_axis * n_per_axis);
        for a in 0..n_per_axis {
            for b in 0..n_per_axis {
                coords.push(vec![a as f64 * step, b as f64 * step]);
            }
        }
        Self {
            coords,
            weights: vec![step * step; n_per_axis * n_per_axis],
            volume: std::f64::consts::TAU * std::f64::consts::TAU,
            metric: Metric::FlatTorus,
            grid: Some(n_per_axis),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidArgument("no quadrature nodes".into()));
        }
        if let Some(i) = self.weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weight {} at node {i} is not strictly positive",
                self.weights[i]
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - self.volume).abs() > VOLUME_TOLERANCE * self.volume.abs() {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {total}, declared volume is {}",
                self.volume
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Nodes per axis for the uniform analytic grids.
    pub fn grid_size(&self) -> Option<usize> {
        self.grid
    }

    pub fn has_geometry(&self) -> bool {
        !self.coords.is_empty() && !matches!(self.metric, Metric::Unknown)
    }

    /// Geodesic distance r(x_i, x_j).
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        match &self.metric {
            Metric::Graph(graph) => Ok(graph.distance(i, j)),
            Metric::Unknown => Err(Error::MissingGeometry),
            metric => metric.between(&self.coords[i], &self.coords[j]),
        }
    }

    /// Index of the node at `point` when the nodes form a uniform analytic
    /// grid and `point` coincides with one of them.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        let n = self.grid?;
        let step = std::f64::consts::TAU / n as f64;
        let snap = |angle: f64| -> Option<usize> {
            let scaled = angle.rem_euclid(std::f64::consts::TAU) / step;
            let nearest = scaled.round();
            ((scaled - nearest).abs() < 1e-9).then(|| nearest as usize % n)
        };
        match self.metric {
            Metric::Circle => snap(point[0]),
            Metric::FlatTorus => Some(snap(point[0])? * n + snap(point[1])?),
            _ => None,
        }
    }
}

/// One factor of an analytic trigonometric eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Trig {
    Constant,
    Cos(u32),
    Sin(u32),
}

impl Trig {
    pub fn frequency(self) -> u32 {
        match self {
            Trig::Constant => 0,
            Trig::Cos(k) | Trig::Sin(k) => k,
        }
    }

    /// L²-normalized value on the unit circle at angle `theta`.
    pub fn eval(self, theta: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Trig::Constant => 1.0 / (2.0 * PI).sqrt(),
            Trig::Cos(k) => (k as f64 * theta).cos() / PI.sqrt(),
            Trig::Sin(k) => (k as f64 * theta).sin() / PI.sqrt(),
        }
    }
}

/// Closed-form description of the eigenbasis, when one exists.
#[derive(Debug, Clone)]
pub enum Basis {
    Circle(Vec<Trig>),
    Torus(Vec<(Trig, Trig)>),
    /// Eigenfunctions known only at the nodes.
    Sampled,
}

/// A truncated eigendecomposition of the Laplace–Beltrami operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// `n_nodes × n_modes`, column n holds e_n at the nodes.
    eigenfunctions: DMatrix<f64>,
    /// `n_modes × n_nodes`, Eᵀ·diag(weights); applying it is the quadrature
    /// transform.
    analysis: DMatrix<f64>,
    nodes: QuadratureNodes,
    dimension: usize,
    basis: Basis,
}

impl Spectrum {
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenfunctions: DMatrix<f64>,
        nodes: QuadratureNodes,
        dimension: usize,
        basis: Basis,
    ) -> Result<Self> {
        if eigenfunctions.nrows() != nodes.len() || eigenfunctions.ncols() != eigenvalues.len() {
            return Err(Error::InvalidArgument(format!(
                "eigenfunction matrix is {}x{}, expected {}x{}",
                eigenfunctions.nrows(),
                eigenfunctions.ncols(),
                nodes.len(),
                eigenvalues.len()
            )));
        }
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("spectrum has no modes".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("eigenvalues must be nondecreasing".into()));
        }
        if eigenvalues[0] != 0.0 || eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be finite, nonnegative, and start at exactly 0".into(),
            ));
        }
        nodes.validate()?;
        let mut analysis = eigenfunctions.transpose();
        for (i, &w) in nodes.weights().iter().enumerate() {
            analysis.column_mut(i).scale_mut(w);
        }
        Ok(Self {
            eigenvalues,
            eigenfunctions,
            analysis,
            nodes,
            dimension,
            basis,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn eigenfunctions(&self) -> &DMatrix<f64> {
        &self.eigenfunctions
    }

    pub(crate) fn analysis_matrix(&self) -> &DMatrix<f64> {
        &self.analysis
    }

    pub fn nodes(&self) -> &QuadratureNodes {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        self.nodes.weights()
    }

    pub fn volume(&self) -> f64 {
        self.nodes.volume()
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn backend_name(&self) -> &'static str {
        match (&self.basis, self.nodes.metric()) {
            (Basis::Circle(_), _) => "circle",
            (Basis::Torus(_), _) => "torus",
            (Basis::Sampled, Metric::Graph(_)) => "point-cloud",
            (Basis::Sampled, _) => "sampled",
        }
    }

    /// True for backends whose eigenfunctions are exact closed forms.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.basis, Basis::Sampled)
    }

    /// All retained eigenfunctions evaluated at an arbitrary point given in
    /// intrinsic coordinates.
    pub fn eval_modes(&self, point: &[f64]) -> Result<Vec<f64>> {
        match &self.basis {
            Basis::Circle(modes) => Ok(modes.iter().map(|t| t.eval(point[0])).collect()),
            Basis::Torus(modes) => Ok(modes.iter().map(|(a, b)| a.eval(point[0]) * b.eval(point[1])).collect()),
            Basis::Sampled => Err(Error::OffNodeEvaluation(self.backend_name())),
        }
    }

    /// Discrete Gram matrix Σ_i w_i e_n(x_i) e_m(x_i).
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        &self.analysis * &self.eigenfunctions
    }

    /// Largest entry of |Gram − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.gram_matrix();
        let mut worst = 0.0f64;
        for n in 0..gram.nrows() {
            for m in 0..gram.ncols() {
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((gram[(n, m)] - target).abs());
            }
        }
        worst
    }

    /// Index ranges of eigenspaces (maximal runs of exactly equal eigenvalues).
    pub fn eigenspaces(&self) -> Vec<std::ops::Range<usize>> {
        let mut spaces = Vec::new();
        let mut start = 0;
        for n in 1..=self.eigenvalues.len() {
            if n == self.eigenvalues.len() || self.eigenvalues[n] != self.eigenvalues[start] {
                spaces.push(start..n);
                start = n;
            }
        }
        spaces
    }

    /// Replace node coordinates and metric, keeping the stored weights. Used
    /// to re-attach geometry to a spectrum loaded from a cache file.
    pub fn with_geometry(mut self, nodes: QuadratureNodes, basis: Basis) -> Result<Self> {
        if nodes.len() != self.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "geometry has {} nodes, spectrum has {}",
                nodes.len(),
                self.n_nodes()
            )));
        }
        let weights = self.nodes.weights.clone();
        let volume = self.nodes.volume;
        self.nodes = QuadratureNodes {
            weights,
            volume,
            ..nodes
        };
        self.basis = basis;
        Ok(self)
    }
}
