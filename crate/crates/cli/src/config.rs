//! Run configuration: a TOML file plus flag overrides.
//!
//! Every table rejects unknown keys. Omitted tables and keys take the
//! defaults below, which reproduce the desk-scale acceptance settings.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use geoscatter::ProfileKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub scattering: ScatteringSpec,
    #[serde(default)]
    pub signal: SignalSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    /// Required by anything randomized.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_cache")]
    pub cache: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_cache() -> PathBuf {
    PathBuf::from("cache")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifold: ManifoldSpec::default(),
            profile: ProfileSpec::default(),
            window: WindowSpec::default(),
            scattering: ScatteringSpec::default(),
            signal: SignalSpec::default(),
            verify: VerifySpec::default(),
            seed: None,
            out: default_out(),
            cache: default_cache(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Circle {
        n_modes: usize,
        n_nodes: usize,
    },
    Torus {
        n_modes: usize,
        n_nodes_per_axis: usize,
    },
    /// Points from a whitespace-separated file, or `sample` uniform points
    /// on a circle of radius `radius` drawn with the run seed.
    PointCloud {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        sample: Option<usize>,
        #[serde(default = "unit")]
        radius: f64,
        n_modes: usize,
        bandwidth: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl Default for ManifoldSpec {
    fn default() -> Self {
        ManifoldSpec::Circle {
            n_modes: 33,
            n_nodes: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            kind: ProfileKind::Exponential,
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSpec {
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { j_min: -8, j_max: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringSpec {
    pub m: usize,
    pub q: Vec<f64>,
}

impl Default for ScatteringSpec {
    fn default() -> Self {
        Self { m: 1, q: vec![2.0] }
    }
}

/// Input signal for `moments`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// cos θ, with θ the first angle (or the polar angle of a planar cloud).
    #[default]
    Cos,
    Sin,
    /// The eigenfunction e_index.
    Mode {
        index: usize,
    },
    /// Gaussian coefficients on the modes with 0 < λ < band; needs a seed.
    Random {
        band: f64,
    },
    /// Text signal file, one `index value` pair per line.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Frame,
    Telescoping,
    Nonexpansive,
    QBound,
    Invariance,
    Stability,
    Charts,
    Cz,
    WeakType,
    VectorLq,
    KernelDecay,
    PointCloud,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Frame => "frame",
            Suite::Telescoping => "telescoping",
            Suite::Nonexpansive => "nonexpansive",
            Suite::QBound => "q_bound",
            Suite::Invariance => "invariance",
            Suite::Stability => "stability",
            Suite::Charts => "charts",
            Suite::Cz => "cz",
            Suite::WeakType => "weak_type",
            Suite::VectorLq => "vector_lq",
            Suite::KernelDecay => "kernel_decay",
            Suite::PointCloud => "point_cloud",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(self, Suite::Telescoping | Suite::KernelDecay)
    }

    /// Suites that only make sense on the analytic circle.
    pub fn needs_circle(self) -> bool {
        matches!(
            self,
            Suite::Invariance | Suite::Stability | Suite::Cz | Suite::KernelDecay
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub suites: Vec<Suite>,
    pub frame: FrameSuite,
    pub telescoping: TelescopingSuite,
    pub nonexpansive: NonexpansiveSuite,
    pub q_bound: QBoundSuite,
    pub invariance: InvarianceSuite,
    pub stability: StabilitySuite,
    pub charts: ChartsSuite,
    pub cz: CzSuite,
    pub weak_type: WeakTypeSuite,
    pub vector_lq: VectorLqSuite,
    pub kernel_decay: KernelDecaySuite,
    pub point_cloud: PointCloudSuite,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            // Kernel decay and the point-cloud comparison are opt-in.
            suites: vec![
                Suite::Frame,
                Suite::Telescoping,
                Suite::Nonexpansive,
                Suite::QBound,
                Suite::Invariance,
                Suite::Stability,
                Suite::Charts,
                Suite::Cz,
                Suite::WeakType,
                Suite::VectorLq,
            ],
            frame: FrameSuite::default(),
            telescoping: TelescopingSuite::default(),
            nonexpansive: NonexpansiveSuite::default(),
            q_bound: QBoundSuite::default(),
            invariance: InvarianceSuite::default(),
            stability: StabilitySuite::default(),
            charts: ChartsSuite::default(),
            cz: CzSuite::default(),
            weak_type: WeakTypeSuite::default(),
            vector_lq: VectorLqSuite::default(),
            kernel_decay: KernelDecaySuite::default(),
            point_cloud: PointCloudSuite::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSuite {
    pub window: [i32; 2],
    pub signals: usize,
    pub band: f64,
    /// Bound on |Σ_j‖f∗ψ_j‖² − C²‖f‖²| / (C²‖f‖²).
    pub bound: f64,
}

impl Default for FrameSuite {
    fn default() -> Self {
        Self {
            window: [-20, 20],
            signals: 50,
            band: 10.0,
            bound: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelescopingSuite {
    pub windows: Vec<i32>,
    pub tolerance: f64,
}

impl Default for TelescopingSuite {
    fn default() -> Self {
        Self {
            windows: vec![5, 10, 20],
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonexpansiveSuite {
    pub window: [i32; 2],
    pub pairs: usize,
    pub orders: Vec<usize>,
    pub band: f64,
    pub slack: f64,
}

impl Default for NonexpansiveSuite {
    fn default() -> Self {
        Self {
            window: [-8, 8],
            pairs: 100,
            orders: vec![1, 2, 3],
            band: 10.0,
            slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QBoundSuite {
    pub window: [i32; 2],
    pub family: usize,
    pub orders: Vec<usize>,
    pub q: Vec<f64>,
    pub band: f64,
    /// Bound on the relative change of the family maximum when the family
    /// doubles.
    pub max_change: f64,
}

impl Default for QBoundSuite {
    fn default() -> Self {
        Self {
            window: [-8, 8],
            family: 64,
            orders: vec![1, 2],
            q: vec![1.25, 1.5],
            band: 17.0,
            max_change: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceSuite {
    pub window: [i32; 2],
    pub max_order: usize,
    pub q: Vec<f64>,
    pub band: f64,
    /// Rotations by these multiples of the grid step.
    pub rotation_steps: Vec<i64>,
    pub torus_modes: usize,
    pub torus_nodes_per_axis: usize,
    pub tolerance: f64,
}

impl Default for InvarianceSuite {
    fn default() -> Self {
        Self {
            window: [-5, 5],
            max_order: 3,
            q: vec![1.25, 1.5, 2.0],
            band: 17.0,
            rotation_steps: vec![1, 37, 128],
            torus_modes: 13,
            torus_nodes_per_axis: 16,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySuite {
    pub window: [i32; 2],
    pub lam: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub orders: Vec<usize>,
    pub q: Vec<f64>,
    pub slope: [f64; 2],
}

impl Default for StabilitySuite {
    fn default() -> Self {
        Self {
            window: [-8, 8],
            lam: 5.0,
            t_min: 1e-3,
            t_max: 1e-1,
            t_count: 5,
            orders: vec![1, 2],
            q: vec![1.5, 2.0],
            slope: [0.9, 1.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartsSuite {
    pub omegas: Vec<f64>,
    /// Ball radius δ; by default 90% of the largest value for which 3δ is a
    /// Lebesgue number of the cover.
    pub delta: Option<f64>,
    pub pairs: usize,
    pub tolerance: f64,
}

impl Default for ChartsSuite {
    fn default() -> Self {
        Self {
            omegas: vec![PI / 24.0, PI / 16.0, PI / 13.0],
            delta: None,
            pairs: 10_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzSuite {
    pub instances: usize,
    pub max_constant: f64,
    pub reconstruction: f64,
}

impl Default for CzSuite {
    fn default() -> Self {
        Self {
            instances: 200,
            max_constant: 16.0,
            reconstruction: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakTypeSuite {
    pub window: [i32; 2],
    pub family: usize,
    pub spikes: usize,
}

impl Default for WeakTypeSuite {
    fn default() -> Self {
        Self {
            window: [-8, 8],
            family: 64,
            spikes: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorLqSuite {
    pub window: [i32; 2],
    pub family: usize,
    pub band: f64,
    pub q: Vec<f64>,
}

impl Default for VectorLqSuite {
    fn default() -> Self {
        Self {
            window: [-20, 20],
            family: 32,
            band: 17.0,
            q: vec![1.25, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelDecaySuite {
    pub scales: [i32; 2],
    pub max_variation: f64,
}

impl Default for KernelDecaySuite {
    fn default() -> Self {
        Self {
            scales: [-4, 4],
            max_variation: 0.20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointCloudSuite {
    pub points: usize,
    pub bandwidth: f64,
    pub n_modes: usize,
    pub window: [i32; 2],
    pub eigenvalue_tolerance: f64,
    pub moment_tolerance: f64,
}

impl Default for PointCloudSuite {
    fn default() -> Self {
        Self {
            points: 512,
            bandwidth: 0.25,
            n_modes: 5,
            window: [-8, 8],
            eigenvalue_tolerance: 0.10,
            moment_tolerance: 0.05,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Load `path` (or the defaults), apply overrides and validate.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(seed) = overrides.seed {
            config.seed = Some(seed);
        }
        if let Some(out) = &overrides.out {
            config.out = out.clone();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        match &self.manifold {
            ManifoldSpec::Circle { n_modes, n_nodes } => {
                positive("manifold.n_modes", *n_modes)?;
                positive("manifold.n_nodes", *n_nodes)?;
            }
            ManifoldSpec::Torus {
                n_modes,
                n_nodes_per_axis,
            } => {
                positive("manifold.n_modes", *n_modes)?;
                positive("manifold.n_nodes_per_axis", *n_nodes_per_axis)?;
            }
            ManifoldSpec::PointCloud {
                path,
                sample,
                radius,
                n_modes,
                bandwidth,
            } => {
                positive("manifold.n_modes", *n_modes)?;
                finite_positive("manifold.bandwidth", *bandwidth)?;
                finite_positive("manifold.radius", *radius)?;
                match (path, sample) {
                    (Some(_), None) => {}
                    (None, Some(n)) => {
                        positive("manifold.sample", *n)?;
                        self.require_seed("sampling a point cloud")?;
                    }
                    _ => return Err(CliError::usage("point_cloud needs exactly one of `path` and `sample`")),
                }
            }
        }
        finite_positive("profile.C", self.profile.c)?;
        window("window", [self.window.j_min, self.window.j_max])?;
        positive("scattering.m", self.scattering.m)?;
        if self.scattering.q.is_empty() {
            return Err(CliError::usage("scattering.q must list at least one exponent"));
        }
        for &q in &self.scattering.q {
            exponent("scattering.q", q)?;
        }
        if let SignalSpec::Random { band } = self.signal {
            finite_positive("signal.band", band)?;
        }

        let v = &self.verify;
        window("verify.frame.window", v.frame.window)?;
        finite_positive("verify.frame.bound", v.frame.bound)?;
        positive("verify.frame.signals", v.frame.signals)?;
        for &j in &v.telescoping.windows {
            if j < 0 {
                return Err(CliError::usage("verify.telescoping.windows must be nonnegative"));
            }
        }
        window("verify.nonexpansive.window", v.nonexpansive.window)?;
        positive("verify.nonexpansive.pairs", v.nonexpansive.pairs)?;
        window("verify.q_bound.window", v.q_bound.window)?;
        positive("verify.q_bound.family", v.q_bound.family)?;
        for &q in &v.q_bound.q {
            exponent("verify.q_bound.q", q)?;
        }
        window("verify.invariance.window", v.invariance.window)?;
        for &q in &v.invariance.q {
            exponent("verify.invariance.q", q)?;
        }
        window("verify.stability.window", v.stability.window)?;
        for &q in &v.stability.q {
            exponent("verify.stability.q", q)?;
        }
        let s = &v.stability;
        if !(s.t_min > 0.0 && s.t_min < s.t_max && s.t_max < 1.0 && s.t_count >= 2) {
            return Err(CliError::usage(
                "verify.stability needs 0 < t_min < t_max < 1 and t_count ≥ 2",
            ));
        }
        window("verify.weak_type.window", v.weak_type.window)?;
        window("verify.vector_lq.window", v.vector_lq.window)?;
        for &q in &v.vector_lq.q {
            exponent("verify.vector_lq.q", q)?;
        }
        window("verify.kernel_decay.scales", v.kernel_decay.scales)?;
        window("verify.point_cloud.window", v.point_cloud.window)?;
        Ok(())
    }

    pub fn require_seed(&self, purpose: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::usage(format!("{purpose} is randomized and needs a seed (--seed or `seed =`)")))
    }

    /// Single-line JSON echo of the effective configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }
}

fn positive(key: &str, value: usize) -> CliResult<()> {
    if value == 0 {
        return Err(CliError::usage(format!("{key} must be at least 1")));
    }
    Ok(())
}

fn finite_positive(key: &str, value: f64) -> CliResult<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::usage(format!("{key} must be positive, got {value}")));
    }
    Ok(())
}

fn window(key: &str, [lo, hi]: [i32; 2]) -> CliResult<()> {
    if lo > hi {
        return Err(CliError::usage(format!("{key} is empty: [{lo}, {hi}]")));
    }
    Ok(())
}

fn exponent(key: &str, q: f64) -> CliResult<()> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(CliError::usage(format!("{key}: q must be in (1,2], got {q}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_tables_keep_remaining_defaults() {
        let config = RunConfig::parse("[scattering]\nq = [1.5]\n[window]\nj_max = 4\n[profile]\nC = 2.0").unwrap();
        assert_eq!(config.scattering.m, 1);
        assert_eq!(config.scattering.q, vec![1.5]);
        assert_eq!((config.window.j_min, config.window.j_max), (-8, 4));
        assert_eq!(config.profile.kind, ProfileKind::Exponential);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "sede = 3",
            "[manifold]\nkind = \"circle\"\nn_modes = 9\nn_nodes = 64\nextra = 1",
            "[window]\nj_min = -2\nj_max = 2\nj_mid = 0",
            "[verify.frame]\nbonud = 1e-3",
            "[manifold]\nkind = \"sphere\"",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Usage(_))), "{text}");
        }
    }

    #[test]
    fn file_values_and_overrides() {
        let text = r#"
seed = 3
out = "results"

[manifold]
kind = "torus"
n_modes = 13
n_nodes_per_axis = 16

[profile]
kind = "gaussian"
C = 2.0

[scattering]
m = 2
q = [1.5, 2.0]

[verify.frame]
bound = 1e-12
window = [-4, 4]
"#;
        let config = RunConfig::parse(text).unwrap();
        assert_eq!(config.seed, Some(3));
        assert_eq!(config.profile.kind, ProfileKind::Gaussian);
        assert_eq!(config.verify.frame.window, [-4, 4]);
        assert_eq!(config.verify.frame.signals, 50);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        let overrides = Overrides {
            seed: Some(9),
            out: Some(PathBuf::from("elsewhere")),
        };
        let resolved = RunConfig::resolve(Some(&path), &overrides).unwrap();
        assert_eq!(resolved.seed, Some(9));
        assert_eq!(resolved.out, PathBuf::from("elsewhere"));
    }

    #[test]
    fn range_checks() {
        let bad_q = "[scattering]\nm = 1\nq = [0.5]";
        let err = RunConfig::parse(bad_q).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("q must be in (1,2]"), "{err}");
        let bad_window = "[window]\nj_min = 3\nj_max = 2";
        assert!(RunConfig::parse(bad_window).unwrap().validate().is_err());
        let sampled = "[manifold]\nkind = \"point_cloud\"\nsample = 64\nn_modes = 3\nbandwidth = 0.4";
        let config = RunConfig::parse(sampled).unwrap();
        assert!(config.validate().unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn echo_round_trips() {
        let config = RunConfig {
            seed: Some(5),
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&config.echo()).unwrap();
        assert_eq!(back, config);
    }
}
