use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bec-lz"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn bec-lz")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn manifest_entries(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.contains(": "))
        .map(|l| l.split_once("  ").unwrap().1.to_string())
        .collect()
}

#[test]
fn linear_sweep_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("paper_linear.cfg");
    let stdout = ok(&run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    assert!(stdout.contains("p = 0.97"), "{stdout}");
    let entries = manifest_entries(&dir.path().join("manifest-sweep.txt"));
    for want in ["summary.json", "observables.dat", "post_sweep.dat", "final_state.dat"] {
        assert!(entries.iter().any(|e| e == want), "manifest lacks {want}: {entries:?}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let p = summary["p"].as_f64().unwrap();
    assert!((p - 0.97).abs() <= 0.01, "p = {p}");
    let beat = summary["beat"]["period"].as_f64().unwrap();
    assert!((beat - 2.0 * std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
    let observables = fs::read_to_string(dir.path().join("observables.dat")).unwrap();
    assert!(observables.contains("# config: velocity = 0.1"));
    assert!(!dir.path().join(".bec-lz.lock").exists());
}

#[test]
fn density_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3a.dat");
    ok(&run(&["density", "--p", "0.97", "--t", "1.5707963", "--out", out.to_str().unwrap()]));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1024);
    let dx = rows[1][0] - rows[0][0];
    let total: f64 = rows.iter().map(|r| r[1]).sum::<f64>() * dx;
    assert!((total - 1.0).abs() < 1e-8);
    let pi = std::f64::consts::PI;
    for r in rows.iter().step_by(37) {
        let x = r[0];
        let g = (-x * x).exp() / pi.sqrt();
        let want = 0.03 * g + 0.97 * 2.0 * x * x * g;
        assert!((r[1] - want).abs() < 1e-6, "x = {x}: {} vs {want}", r[1]);
    }
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# density --p 0.97 --t 1.5707963"));
    assert_eq!(manifest_entries(&dir.path().join("manifest-density.txt")), vec!["fig3a.dat"]);
}

#[test]
fn spectrum_scan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("paper_trap.cfg");
    ok(&run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "2",
        "--scan",
        "-5:0:200",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let rows = data_rows(&dir.path().join("levels.dat"));
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r.len() == 3));
    let last = rows.last().unwrap();
    assert!((last[1] - 0.5).abs() < 1e-4 && (last[2] - 1.5).abs() < 1e-4);
    let (imin, _) = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r[2] - r[1]))
        .fold((0, f64::INFINITY), |b, (i, g)| if g < b.1 { (i, g) } else { b });
    assert!((rows[imin][0] + 3.5).abs() <= 0.2);
}

#[test]
fn crossing_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("paper_fig2.cfg");
    let stdout = ok(&run(&["crossing", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    assert!(stdout.contains("(narrow)"), "{stdout}");
    let c: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("crossing.json")).unwrap()).unwrap();
    assert!((c["x0_star"].as_f64().unwrap() + 3.5).abs() <= 0.2);
    assert!(c["gap_over_spacing"].as_f64().unwrap() < 0.25);
}

#[test]
fn stats_summary() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&run(&["stats", "--p", "0.97", "--n", "1000", "--out", dir.path().to_str().unwrap()]));
    assert!(stdout.contains("mean energy = 1470") && stdout.contains("variance = 29.10"), "{stdout}");
    let rows = data_rows(&dir.path().join("binomial.dat"));
    assert_eq!(rows.len(), 1001);
    let mass: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((mass - 1.0).abs() < 1e-10);
}

#[test]
fn figures_without_interacting_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("paper_fig1.cfg");
    ok(&run(&["figures", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]));
    let entries = manifest_entries(&dir.path().join("manifest-figures.txt"));
    assert_eq!(entries.len(), 10, "{entries:?}");
    assert!(entries.iter().any(|e| e == "fig1a_potential.dat"));
    assert!(entries.iter().any(|e| e == "fig3_propagated_half.dat"));
    assert_eq!(data_rows(&dir.path().join("fig2_levels.dat")).len(), 201);
}

#[test]
fn small_optimization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("opt.cfg");
    fs::write(
        &cfg,
        "[potential]\nu0 = 6.4\nsigma = 0.5\n[optimize]\nfree = velocity\nvelocity_bounds = 0.3:1\nbudget = 4\nseed = 7\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&run(&["optimize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    let rows = data_rows(&out.join("optimize_log.dat"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 5 && (0.3..=1.0).contains(&r[3])));
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("optimize_summary.json")).unwrap()).unwrap();
    let best = rows.iter().map(|r| r[4]).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(s["best_fast_p"].as_f64().unwrap(), best);
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[potential]\nu0 = 6.4\nwidth = 0.5\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.contains("'width'") && stderr.contains("[potential]") && stderr.contains("sigma"), "{stderr}");
}

#[test]
fn missing_config_prints_usage() {
    let out = run(&["sweep"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage") && stderr.contains("--config"), "{stderr}");
}

#[test]
fn interacting_config_rejected_by_linear_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("paper_gpe.cfg");
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires g = 0"));
}

#[test]
fn locked_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".bec-lz.lock"), "1\n").unwrap();
    let out = run(&["stats", "--p", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
}

#[test]
fn no_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plain.cfg");
    fs::write(&cfg, "[potential]\nu0 = 6.4\n").unwrap();
    let out = run(&["crossing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
}
