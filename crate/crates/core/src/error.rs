use thiserror::Error;

/// Errors raised by spectral construction, transforms, and experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{n_nodes} nodes cannot resolve frequency {max_frequency} without aliasing (need at least {required})")]
    Aliasing {
        n_nodes: usize,
        max_frequency: usize,
        required: usize,
    },

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("neighborhood graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("operands live on different spectra")]
    SpectrumMismatch,

    #[error("spectrum file format error: {0}")]
    Format(String),

    #[error("unsupported spectrum file version {0}")]
    UnsupportedVersion(u32),

    #[error("spectrum file checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum { stored: u64, computed: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("profile is not monotone: radicand {radicand:e} at scale {scale}, eigenvalue {eigenvalue}")]
    NonMonotoneProfile { scale: i32, eigenvalue: f64, radicand: f64 },

    #[error("scale {scale} outside window [{min}, {max}]")]
    ScaleOutOfWindow { scale: i32, min: i32, max: i32 },

    #[error("path grid of {paths} paths exceeds cap {cap}")]
    GridCap { paths: usize, cap: usize },

    #[error("kernel matrix over {nodes} nodes exceeds cap {cap}")]
    KernelCap { nodes: usize, cap: usize },

    #[error("signal is identically zero")]
    ZeroSignal,

    #[error("point map undefined at node {node}: {reason}")]
    MapUndefined { node: usize, reason: String },

    #[error("off-node evaluation is not available for the {0} backend")]
    OffNodeEvaluation(&'static str),

    #[error("geometry is not attached to this spectrum")]
    MissingGeometry,

    #[error("signal is not {lam}-bandlimited: coefficient {magnitude:e} at eigenvalue {eigenvalue}")]
    NotBandlimited { lam: f64, eigenvalue: f64, magnitude: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("incompatible moment tables: {0}")]
    IncompatibleTables(String),

    #[error("chart inequality violated: {0}")]
    ChartViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
