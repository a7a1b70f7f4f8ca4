//! Drives the built binary: outputs, exit codes and config strictness.

use std::path::Path;
use std::process::{Command, Output};

fn geoscatter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoscatter"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let text = format!(
        "out = \"{}\"\ncache = \"{}\"\n{body}",
        dir.join("out").display(),
        dir.join("cache").display()
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn spectrum_lists_circle_eigenvalues_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[manifold]\nkind = \"circle\"\nn_modes = 9\nn_nodes = 64\n");
    let cold = geoscatter(&["spectrum", "--config", &config]);
    assert_eq!(cold.status.code(), Some(0));
    let text = String::from_utf8(cold.stdout).unwrap();
    assert!(text.contains("λ = 0,1,1,4,4,9,9,16,16"), "{text}");
    assert!(text.contains("(built)"));
    let warm = geoscatter(&["spectrum", "--config", &config]);
    assert!(String::from_utf8(warm.stdout).unwrap().contains("(loaded)"));
}

#[test]
fn moments_writes_one_row_per_scale() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[scattering]\nm = 1\nq = [2.0]\n");
    let out = geoscatter(&["moments", "--config", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/moments_m1_q2.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 17);
    assert!(csv.lines().any(|l| l.starts_with("# config = ")));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();

    let bad_q = write_config(dir.path(), "[scattering]\nq = [0.5]\n");
    let out = geoscatter(&["moments", "--config", &bad_q]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q must be in (1,2]"));

    let unknown = write_config(dir.path(), "colour = \"blue\"\n");
    assert_eq!(geoscatter(&["spectrum", "--config", &unknown]).status.code(), Some(2));

    let unseeded = write_config(dir.path(), "[verify]\nsuites = [\"frame\"]\n");
    assert_eq!(geoscatter(&["verify", "--config", &unseeded]).status.code(), Some(2));

    assert_eq!(geoscatter(&["transmogrify"]).status.code(), Some(2));

    let missing = write_config(
        dir.path(),
        "[manifold]\nkind = \"point_cloud\"\npath = \"/nonexistent/points.txt\"\nn_modes = 3\nbandwidth = 0.3\n",
    );
    let out = geoscatter(&["spectrum", "--config", &missing]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/points.txt"));

    let strict = write_config(
        dir.path(),
        "seed = 1\n[verify]\nsuites = [\"frame\"]\n[verify.frame]\nsignals = 5\nbound = 1e-30\n",
    );
    let out = geoscatter(&["verify", "--config", &strict]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("out/verify.json").exists());
}

#[test]
fn verify_report_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "seed = 3\n[verify]\nsuites = [\"frame\", \"nonexpansive\", \"cz\"]\n[verify.nonexpansive]\npairs = 10\n",
    );
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let out = geoscatter(&["verify", "--config", &config, "--threads", threads]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(std::fs::read(dir.path().join("out/verify.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[signal]\nkind = \"random\"\nband = 10.0\n");
    assert_eq!(geoscatter(&["moments", "--config", &config]).status.code(), Some(2));
    let out = geoscatter(&["moments", "--config", &config, "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/moments_m1_q2.csv")).unwrap();
    assert!(csv.contains('9'));
}
