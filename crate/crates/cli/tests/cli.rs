use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qnmres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnmres")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).expect("column present");
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = qnmres(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_override_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qnmres(&["rates", "--out", out, "--set", "cavity.kappa=abc"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("cavity.kappa"), "{}", stderr(&o));

    let o = qnmres(&["rates", "--out", out, "--set", "sim.no_such_key=1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no_such_key"), "{}", stderr(&o));
}

#[test]
fn mismatched_gauge_warns_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnmres(&["rates", "--out", dir.path().to_str().unwrap(), "--gauge", "dipole", "--exponent", "-0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("not a matched pair"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("not a matched pair")));
}

#[test]
fn rates_slope_at_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("tan_product_072.toml");
    let o = qnmres(&["--config", cfg.to_str().unwrap(), "rates", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = dir.path().join("rates.csv");
    let w = column(&csv, "omega0");
    let slope = column(&csv, "slope_gamma_over_L");
    let mid = w.iter().position(|x| (x - 1.0).abs() < 1e-12).expect("grid hits omega_c");
    assert!((slope[mid] - 0.28).abs() < 1e-3, "slope {}", slope[mid]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!((summary["slope_at_resonance"].as_f64().unwrap() - 0.28).abs() < 1e-3);
}

#[test]
fn csv_carries_header_and_manifest_lists_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnmres(&["dressed", "--out", dir.path().to_str().unwrap(), "--set", "coupling.g_d=0.02"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("dressed.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# ") && first.contains("manifest.json"));
    assert!(text.lines().any(|l| l.starts_with("# resolved:") && l.contains("\"g_d\":0.02")));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "dressed");
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"dressed.csv") && outputs.contains(&"summary.json"));
    assert!(manifest["diagnostics"]["unitarity_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("weak_coupling.toml");
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let o = qnmres(&["--config", cfg.to_str().unwrap(), "--threads", threads, "eig", "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(body(&a.path().join("eig.csv")), body(&b.path().join("eig.csv")));
}

#[test]
fn weak_coupling_eig_tracks_second_order_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("weak_coupling.toml");
    let o = qnmres(&["--config", cfg.to_str().unwrap(), "eig", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dev = column(&dir.path().join("eig.csv"), "relative_deviation");
    assert!(dev.iter().all(|d| d.is_finite() && d.abs() < 0.02), "{dev:?}");
}

#[test]
fn sd_curves_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnmres(&["sd-curves", "--out", dir.path().to_str().unwrap(), "--phis", "0,-0.03", "--set", "sweep.points=41"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("sd_curves.csv")).unwrap();
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() == 42);
}

#[test]
fn accept_passes_on_reference_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("reference.toml");
    let o = qnmres(&["--config", cfg.to_str().unwrap(), "accept", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 8);
    assert!(dir.path().join("acceptance.json").exists());
}
