//! The `spectrum`, `moments` and `verify` subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use geoscatter::analysis::Report;
use geoscatter::scattering::moments;
use geoscatter::{LowPassProfile, WaveletBank};
use log::info;
use serde::Serialize;

use crate::cache::spectrum_for;
use crate::config::{RunConfig, SignalSpec, Suite};
use crate::error::{CliError, CliResult};
use crate::signals::build_signal;
use crate::suites::{self, SuiteContext};

fn write_output(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::file(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub backend: &'static str,
    pub dimension: usize,
    pub n_nodes: usize,
    pub n_modes: usize,
    pub volume: f64,
    pub eigenvalues: Vec<f64>,
    pub orthonormality_defect: f64,
    pub cache_file: PathBuf,
    pub from_cache: bool,
}

impl std::fmt::Display for SpectrumSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let list: Vec<String> = self.eigenvalues.iter().map(|l| format!("{l}")).collect();
        writeln!(f, "backend: {} (dimension {})", self.backend, self.dimension)?;
        writeln!(
            f,
            "nodes: {}, modes: {}, volume: {}",
            self.n_nodes, self.n_modes, self.volume
        )?;
        writeln!(f, "λ = {}", list.join(","))?;
        writeln!(f, "orthonormality defect: {:e}", self.orthonormality_defect)?;
        write!(
            f,
            "cache: {} ({})",
            self.cache_file.display(),
            if self.from_cache { "loaded" } else { "built" }
        )
    }
}

pub fn cmd_spectrum(config: &RunConfig) -> CliResult<SpectrumSummary> {
    let loaded = spectrum_for(config)?;
    let s = &loaded.spectrum;
    Ok(SpectrumSummary {
        backend: s.backend_name(),
        dimension: s.dimension(),
        n_nodes: s.n_nodes(),
        n_modes: s.n_modes(),
        volume: s.volume(),
        eigenvalues: s.eigenvalues().to_vec(),
        orthonormality_defect: s.orthonormality_defect(),
        cache_file: loaded.cache_file,
        from_cache: loaded.from_cache,
    })
}

fn profile(config: &RunConfig) -> CliResult<LowPassProfile> {
    Ok(LowPassProfile::new(config.profile.kind, config.profile.c)?)
}

/// One CSV per exponent in `scattering.q`, written to the output directory.
pub fn cmd_moments(config: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let spectrum = spectrum_for(config)?.spectrum;
    let f = build_signal(&config.signal, &spectrum, config.seed)?;
    let bank = WaveletBank::new(profile(config)?, spectrum, config.window.j_min, config.window.j_max)?;
    let m = config.scattering.m;
    let mut written = Vec::new();
    for &q in &config.scattering.q {
        let mut table = moments(&f, &bank, m, q)?
            .with_metadata(
                "signal",
                serde_json::to_string(&config.signal).expect("specs serialize"),
            )
            .with_metadata("config", config.echo());
        if let (SignalSpec::Random { .. }, Some(seed)) = (&config.signal, config.seed) {
            table = table.with_seed(seed);
        }
        let path = write_output(&config.out, &format!("moments_m{m}_q{q}.csv"), &table.to_csv())?;
        info!("wrote {} ({} paths)", path.display(), table.len());
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub passed: bool,
    pub suites: Vec<Report>,
}

impl VerifyReport {
    /// `suite: check` for every failed check.
    pub fn failures(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|r| r.failures().map(move |c| format!("{}: {}", r.experiment, c.name)))
            .collect()
    }
}

/// Runs the selected suites in order and writes `verify.json`. Returns the
/// report and its path; the caller turns failures into exit code 1.
pub fn cmd_verify(config: &RunConfig) -> CliResult<(VerifyReport, PathBuf)> {
    let mut seen = BTreeSet::new();
    let selected: Vec<Suite> = config
        .verify
        .suites
        .iter()
        .copied()
        .filter(|s| seen.insert(*s))
        .collect();
    if selected.iter().any(|s| s.is_randomized()) {
        config.require_seed("verify")?;
    }
    let spectrum = spectrum_for(config)?.spectrum;
    if selected.iter().any(|s| s.needs_circle()) && spectrum.backend_name() != "circle" {
        return Err(CliError::usage("the selected suites need `manifold.kind = \"circle\"`"));
    }
    if selected.contains(&Suite::Cz) && !spectrum.n_nodes().is_power_of_two() {
        return Err(CliError::usage(
            "the cz suite needs a power-of-two number of circle nodes",
        ));
    }
    let ctx = SuiteContext {
        spectrum,
        profile: profile(config)?,
        seed: config.seed,
    };
    let v = &config.verify;
    let mut reports = Vec::with_capacity(selected.len());
    for suite in selected {
        info!("running suite {}", suite.name());
        let report = match suite {
            Suite::Frame => suites::frame(&ctx, &v.frame)?,
            Suite::Telescoping => suites::telescoping(&ctx, &v.telescoping)?,
            Suite::Nonexpansive => suites::nonexpansive(&ctx, &v.nonexpansive)?,
            Suite::QBound => suites::q_bound(&ctx, &v.q_bound)?,
            Suite::Invariance => suites::invariance(&ctx, &v.invariance)?,
            Suite::Stability => suites::stability(&ctx, &v.stability)?,
            Suite::Charts => suites::charts(&ctx, &v.charts)?,
            Suite::Cz => suites::cz(&ctx, &v.cz)?,
            Suite::WeakType => suites::weak_type(&ctx, &v.weak_type)?,
            Suite::VectorLq => suites::vector_lq(&ctx, &v.vector_lq)?,
            Suite::KernelDecay => suites::kernel_decay(&ctx, &v.kernel_decay)?,
            Suite::PointCloud => suites::point_cloud(&ctx, &v.point_cloud)?,
        };
        info!(
            "suite {} {}",
            suite.name(),
            if report.passed { "passed" } else { "FAILED" }
        );
        reports.push(report);
    }
    let report = VerifyReport {
        config: config.clone(),
        passed: reports.iter().all(|r| r.passed),
        suites: reports,
    };
    let json = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    let path = write_output(&config.out, "verify.json", &json)?;
    Ok((report, path))
}
