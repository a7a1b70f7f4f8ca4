//! Verification suites. Each returns a report whose checks carry the
//! configured tolerances; a suite fails when any of its checks fails.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use geoscatter::analysis::{
    chart_constants_circle, cover_lebesgue_number, cz_decompose, empirical_cq, isometry_invariance_report, log_grid,
    moment_boundedness, nonexpansive_ratio, random_bandlimited, signal_family, stability_curve, weak_11_ratio, Check,
    PointMap, Report, SignalFamily,
};
use geoscatter::scattering::moments;
use geoscatter::spectra::{build_circle_spectrum, build_pointcloud_spectrum, build_torus_spectrum, sample_circle};
use geoscatter::transform::{convolve, kernel_decay_constant, l2_norm, lq_norm};
use geoscatter::{LowPassProfile, Signal, Spectrum, WaveletBank};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{
    ChartsSuite, CzSuite, FrameSuite, InvarianceSuite, KernelDecaySuite, NonexpansiveSuite, PointCloudSuite,
    QBoundSuite, StabilitySuite, Suite, TelescopingSuite, VectorLqSuite, WeakTypeSuite,
};
use crate::error::{CliError, CliResult};

/// Shared inputs of every suite.
pub struct SuiteContext {
    pub spectrum: Arc<Spectrum>,
    pub profile: LowPassProfile,
    pub seed: Option<u64>,
}

impl SuiteContext {
    fn bank(&self, [lo, hi]: [i32; 2]) -> CliResult<WaveletBank> {
        Ok(WaveletBank::new(self.profile, Arc::clone(&self.spectrum), lo, hi)?)
    }

    /// Independent stream per suite, so adding a suite never shifts the
    /// samples drawn by another.
    fn seed(&self, suite: Suite) -> CliResult<u64> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::usage(format!("suite {} is randomized and needs a seed", suite.name())))?;
        Ok(seed ^ (suite as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    fn c2(&self) -> f64 {
        self.profile.zero_value().powi(2)
    }
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// |Σ_j‖f∗ψ_j‖² − C²‖f‖²| / (C²‖f‖²) on mean-zero bandlimited signals.
pub fn frame(ctx: &SuiteContext, p: &FrameSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Frame)?;
    let bank = ctx.bank(p.window)?;
    let family = signal_family(
        &ctx.spectrum,
        SignalFamily::Bandlimited { band: p.band },
        p.signals,
        seed,
    );
    let mut report = Report::new(Suite::Frame.name()).seed(seed).param("settings", p);
    let mut worst = 0.0f64;
    for (i, f) in family.iter().enumerate() {
        let mut energy = 0.0;
        for j in bank.scales() {
            energy += l2_norm(&convolve(f, &bank.filter(j)?)?).powi(2);
        }
        let target = ctx.c2() * l2_norm(f).powi(2);
        let defect = (energy - target).abs() / target;
        worst = worst.max(defect);
        report.row(json!({ "signal": i, "energy": energy, "target": target, "relative_defect": defect }));
    }
    report.fit("max_relative_defect", worst);
    report.check(Check::below("max_relative_defect", worst, p.bound));
    Ok(report)
}

/// Partial frame sums against G(2^{−J−1}λ)² − G(2^J λ)².
pub fn telescoping(ctx: &SuiteContext, p: &TelescopingSuite) -> CliResult<Report> {
    let mut report = Report::new(Suite::Telescoping.name()).param("settings", p);
    for &big_j in &p.windows {
        let bank = ctx.bank([-big_j, big_j])?;
        let g = |x: f64| ctx.profile.eval(x);
        let error = max(bank
            .frame_sums()
            .iter()
            .zip(ctx.spectrum.eigenvalues())
            .map(|(sum, &lam)| {
                let closed = g(2f64.powi(-big_j - 1) * lam).powi(2) - g(2f64.powi(big_j) * lam).powi(2);
                (sum - closed).abs()
            }));
        report.row(json!({ "J": big_j, "max_error": error }));
        report.check(Check::below(format!("J={big_j}"), error, p.tolerance));
    }
    Ok(report)
}

/// ‖S̄₂^m f − S̄₂^m g‖² ≤ (1 + slack)·C^{2m}‖f − g‖₂² over seeded pairs.
pub fn nonexpansive(ctx: &SuiteContext, p: &NonexpansiveSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Nonexpansive)?;
    let bank = ctx.bank(p.window)?;
    let family = signal_family(
        &ctx.spectrum,
        SignalFamily::Bandlimited { band: p.band },
        2 * p.pairs,
        seed,
    );
    let mut report = Report::new(Suite::Nonexpansive.name()).seed(seed).param("settings", p);
    for &m in &p.orders {
        let ratios = nonexpansive_ratio(&family, &bank, m, 2.0)?;
        let bound = (1.0 + p.slack) * ctx.c2().powi(m as i32);
        report.row(json!({ "m": m, "max_ratio": ratios.full_max, "bound": bound }));
        report.check(Check::at_most(format!("m={m}"), ratios.full_max, bound));
    }
    Ok(report)
}

/// ‖S̄_q^m f‖^q / ‖f‖_q^q stays finite and its family maximum settles.
pub fn q_bound(ctx: &SuiteContext, p: &QBoundSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::QBound)?;
    let bank = ctx.bank(p.window)?;
    let family = signal_family(
        &ctx.spectrum,
        SignalFamily::Bandlimited { band: p.band },
        2 * p.family,
        seed,
    );
    let mut report = Report::new(Suite::QBound.name()).seed(seed).param("settings", p);
    for &q in &p.q {
        for &m in &p.orders {
            let sup = moment_boundedness(&family, &bank, m, q)?;
            let label = format!("q={q},m={m}");
            report.row(json!({
                "q": q, "m": m, "half_max": sup.half_max, "full_max": sup.full_max,
                "relative_change": sup.relative_change,
            }));
            report.check(Check::flag(format!("{label} finite"), sup.all_finite()));
            report.check(Check::below(
                format!("{label} doubling change"),
                sup.relative_change,
                p.max_change,
            ));
        }
    }
    Ok(report)
}

/// Grid rotations and a reflection of the circle, a translation and the
/// quarter turn of the torus.
pub fn invariance(ctx: &SuiteContext, p: &InvarianceSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Invariance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new(Suite::Invariance.name()).seed(seed).param("settings", p);

    let n = ctx.spectrum.n_nodes() as f64;
    let step = TAU / n;
    let mut circle_maps: Vec<PointMap> = p
        .rotation_steps
        .iter()
        .map(|&k| PointMap::rotation(k as f64 * step))
        .collect();
    circle_maps.push(PointMap::reflection(5.0 * step));

    let torus = Arc::new(build_torus_spectrum(p.torus_modes, p.torus_nodes_per_axis)?);
    let torus_step = TAU / p.torus_nodes_per_axis as f64;
    let torus_maps = [
        PointMap::torus_translation(3.0 * torus_step, -5.0 * torus_step),
        PointMap::torus_quarter_turn(),
    ];

    let cases = [
        ("circle", Arc::clone(&ctx.spectrum), circle_maps),
        ("torus", torus, torus_maps.to_vec()),
    ];
    for (name, spectrum, maps) in cases {
        let f = random_bandlimited(&spectrum, p.band, &mut rng);
        let bank = WaveletBank::new(ctx.profile, Arc::clone(&spectrum), p.window[0], p.window[1])?;
        let mut worst = 0.0f64;
        for map in &maps {
            for m in 1..=p.max_order {
                for &q in &p.q {
                    let r = isometry_invariance_report(&f, &bank, m, q, map)?;
                    worst = worst.max(r.max_relative);
                    report.row(json!({
                        "manifold": name, "map": map, "m": m, "q": q,
                        "max_absolute": r.max_absolute, "max_relative": r.max_relative,
                        "max_relative_all": r.max_relative_all,
                    }));
                }
            }
        }
        report.check(Check::below(
            format!("{name} max relative deviation"),
            worst,
            p.tolerance,
        ));
    }
    Ok(report)
}

/// Log-log slope of the moment deviation along ξ_t(θ) = θ + t sin θ.
pub fn stability(ctx: &SuiteContext, p: &StabilitySuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Stability)?;
    let bank = ctx.bank(p.window)?;
    let f = random_bandlimited(&ctx.spectrum, p.lam, &mut ChaCha8Rng::seed_from_u64(seed));
    let ts = log_grid(p.t_min, p.t_max, p.t_count);
    let mut report = Report::new(Suite::Stability.name()).seed(seed).param("settings", p);
    for &q in &p.q {
        for &m in &p.orders {
            let curve = stability_curve(&f, &bank, m, q, p.lam, &ts, 1)?;
            report.fit(&format!("slope q={q},m={m}"), curve.slope);
            report.fit(&format!("constant q={q},m={m}"), curve.constant);
            report.row(&curve);
            report.check(Check::within(
                format!("q={q},m={m} slope"),
                curve.slope,
                p.slope[0],
                p.slope[1],
            ));
        }
    }
    Ok(report)
}

/// c1·c2 against 1/√(1 − sin²(π/3 − ω)) and sampled bi-Lipschitz bounds.
pub fn charts(ctx: &SuiteContext, p: &ChartsSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Charts)?;
    let mut report = Report::new(Suite::Charts.name()).seed(seed).param("settings", p);
    for (i, &omega) in p.omegas.iter().enumerate() {
        let delta = p.delta.unwrap_or(0.9 * cover_lebesgue_number(omega) / 3.0);
        let r = chart_constants_circle(omega, delta, p.pairs, seed.wrapping_add(i as u64))?;
        let label = format!("ω=π/{:.4}", PI / omega);
        report.row(&r);
        report.check(Check::below(
            format!("{label} closed form"),
            (r.product - r.closed_form).abs(),
            p.tolerance,
        ));
        report.check(Check::below(format!("{label} product"), r.product, 2.0));
        report.check(Check::at_most(
            format!("{label} lower Lipschitz"),
            r.lower_ratio,
            1.0 + 1e-12,
        ));
        report.check(Check::at_most(
            format!("{label} upper Lipschitz"),
            r.upper_ratio,
            1.0 + 1e-12,
        ));
        report.check(Check::flag(format!("{label} 3δ-balls inside charts"), r.lebesgue_ok));
    }
    Ok(report)
}

/// Random spiky signals and thresholds above the mean of |f|.
pub fn cz(ctx: &SuiteContext, p: &CzSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::Cz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ctx.spectrum.n_nodes();
    let mut report = Report::new(Suite::Cz.name()).seed(seed).param("settings", p);
    let (mut all_passed, mut reconstruction, mut constant) = (true, 0.0f64, 0.0f64);
    for i in 0..p.instances {
        let spike_rate = rng.random_range(0.005..0.1);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                let base = rng.random_range(-0.2..0.2);
                if rng.random_bool(spike_rate) {
                    base + rng.random_range(-20.0..20.0)
                } else {
                    base
                }
            })
            .collect();
        let f = Signal::new(Arc::clone(&ctx.spectrum), values)?;
        let floor = lq_norm(&f, 1.0)? / ctx.spectrum.volume();
        let alpha = floor * rng.random_range(1.01..40.0);
        let decomposition = cz_decompose(&f, alpha)?;
        let check = decomposition.check(&f)?;
        all_passed &= check.passed;
        reconstruction = reconstruction.max(check.reconstruction_error);
        constant = constant.max(check.certified_constant);
        report.row(json!({ "instance": i, "check": check }));
    }
    report.fit("certified_constant", constant);
    report.check(Check::flag("all decomposition inequalities", all_passed));
    report.check(Check::at_most("certified constant", constant, p.max_constant));
    report.check(Check::below(
        "max reconstruction error",
        reconstruction,
        p.reconstruction,
    ));
    Ok(report)
}

/// Weak-(1,1) quotient of the vector operator on spiky signals.
pub fn weak_type(ctx: &SuiteContext, p: &WeakTypeSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::WeakType)?;
    let bank = ctx.bank(p.window)?;
    let family = signal_family(
        &ctx.spectrum,
        SignalFamily::Spiky { spikes: p.spikes },
        2 * p.family,
        seed,
    );
    let mut report = Report::new(Suite::WeakType.name()).seed(seed).param("settings", p);
    let mut ordered = true;
    let mut ratios = Vec::with_capacity(family.len());
    for f in &family {
        let r = weak_11_ratio(f, &bank)?;
        ordered &= r.ratio <= r.exact_ratio * (1.0 + 1e-12) && r.exact_ratio <= r.strong_ratio * (1.0 + 1e-12);
        ratios.push(r.ratio);
        report.row(&r);
    }
    let sup = geoscatter::analysis::EmpiricalSup::from_values(ratios);
    report.fit("A_half_family", sup.half_max);
    report.fit("A", sup.full_max);
    report.check(Check::flag("finite", sup.all_finite()));
    report.check(Check::flag("grid ≤ exact ≤ strong", ordered));
    Ok(report)
}

/// ‖T⃗f‖_q / ‖f‖_q over a family; at q = 2 the frame identity caps it by C.
pub fn vector_lq(ctx: &SuiteContext, p: &VectorLqSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::VectorLq)?;
    let bank = ctx.bank(p.window)?;
    let family = signal_family(
        &ctx.spectrum,
        SignalFamily::Bandlimited { band: p.band },
        2 * p.family,
        seed,
    );
    let mut report = Report::new(Suite::VectorLq.name()).seed(seed).param("settings", p);
    for &q in &p.q {
        let sup = empirical_cq(&family, &bank, q)?;
        report.fit(&format!("C_q q={q}"), sup.full_max);
        report.row(json!({
            "q": q, "half_max": sup.half_max, "full_max": sup.full_max, "relative_change": sup.relative_change,
        }));
        report.check(Check::flag(format!("q={q} finite"), sup.all_finite()));
        if q == 2.0 {
            let c = ctx.profile.zero_value();
            report.check(Check::at_most("q=2 ratio ≤ C", sup.full_max, c * (1.0 + 1e-9)));
        }
    }
    Ok(report)
}

/// sup |K_t(x,y)|·tⁿ·(1 + r/t)^{n+1} across a scale range.
pub fn kernel_decay(ctx: &SuiteContext, p: &KernelDecaySuite) -> CliResult<Report> {
    let bank = ctx.bank(p.scales)?;
    let mut report = Report::new(Suite::KernelDecay.name()).param("settings", p);
    let mut constants = Vec::new();
    for j in bank.scales() {
        let decay = kernel_decay_constant(&bank, j)?;
        constants.push(decay.constant);
        report.row(decay);
    }
    let hi = constants.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = hi / lo - 1.0;
    report.fit("variation", variation);
    report.check(Check::below("decay constant variation", variation, p.max_variation));
    Ok(report)
}

/// Sampled unit circle against the analytic backend.
pub fn point_cloud(ctx: &SuiteContext, p: &PointCloudSuite) -> CliResult<Report> {
    let seed = ctx.seed(Suite::PointCloud)?;
    let points = sample_circle(p.points, 1.0, seed);
    let cloud = Arc::new(build_pointcloud_spectrum(&points, p.n_modes, p.bandwidth)?);
    let analytic = Arc::new(build_circle_spectrum(p.n_modes, 256.max(4 * p.n_modes))?);
    let mut report = Report::new(Suite::PointCloud.name()).seed(seed).param("settings", p);

    let mut eigen_error = 0.0f64;
    for (a, b) in cloud.eigenvalues().iter().zip(analytic.eigenvalues()) {
        let error = if *b == 0.0 { a.abs() } else { (a - b).abs() / b };
        eigen_error = eigen_error.max(error);
        report.row(json!({ "analytic": b, "point_cloud": a, "error": error }));
    }
    report.check(Check::below(
        "eigenvalue relative error",
        eigen_error,
        p.eigenvalue_tolerance,
    ));

    let table = |spectrum: &Arc<Spectrum>, f: Signal| -> CliResult<_> {
        let bank = WaveletBank::new(ctx.profile, Arc::clone(spectrum), p.window[0], p.window[1])?;
        Ok(moments(&f, &bank, 1, 2.0)?)
    };
    let on_cloud = table(&cloud, Signal::from_fn(Arc::clone(&cloud), |x| x[1].atan2(x[0]).cos())?)?;
    let on_grid = table(&analytic, Signal::from_fn(Arc::clone(&analytic), |x| x[0].cos())?)?;
    let (mut gap, mut size, mut entrywise) = (0.0, 0.0, 0.0f64);
    for (path, &b) in on_grid.entries() {
        let a = on_cloud.get(path).unwrap_or(0.0);
        gap += (a - b).powi(2);
        size += b * b;
        entrywise = entrywise.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }
    let relative = (gap / size).sqrt();
    report.fit("moment_relative_l2", relative);
    report.fit("moment_max_entrywise", entrywise);
    report.check(Check::below("moment table relative ℓ²", relative, p.moment_tolerance));
    Ok(report)
}
