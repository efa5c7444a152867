use std::fs;

use bec_lz::experiments::{
    reproduce_figures, run_gpe_sweep, run_linear_sweep, FigureOptions, SweepConfig, SweepSummary, TargetMode,
};
use bec_lz::optimize::{optimize, Bounds, OptimizationProblem, SweepParameter};
use bec_lz::WaveFunction;

fn lean(mut cfg: SweepConfig) -> SweepConfig {
    cfg.analysis.post_sweep_time = 0.0;
    cfg.analysis.lz_check = false;
    cfg.propagation.store_snapshots = false;
    cfg
}

fn mirrored(psi: &WaveFunction) -> WaveFunction {
    let grid = *psi.grid();
    let amps = psi.amplitudes();
    WaveFunction::new(grid, (0..grid.len()).map(|j| amps[grid.mirror_index(j)]).collect()).unwrap()
}

#[test]
fn flat_trap_sweep_does_nothing() {
    let mut cfg = lean(SweepConfig::paper_linear());
    cfg.u0 = 0.0;
    let r = run_linear_sweep(&cfg).unwrap();
    assert!(r.transfer.p < 1e-3, "p = {}", r.transfer.p);
    assert!(r.initial_state.fidelity(r.final_state()).unwrap() > 0.999);
}

#[test]
fn slower_sweep_is_more_adiabatic() {
    let fast = run_linear_sweep(&lean(SweepConfig::paper_linear())).unwrap();
    let mut cfg = lean(SweepConfig::paper_linear());
    cfg.propagation.schedule.velocity = 0.01;
    let slow = run_linear_sweep(&cfg).unwrap();
    assert!((fast.transfer.p - 0.97).abs() <= 0.01);
    assert!(slow.transfer.p < fast.transfer.p, "{} vs {}", slow.transfer.p, fast.transfer.p);
}

#[test]
fn gpe_pipeline_without_interaction_matches_linear() {
    let mut cfg = lean(SweepConfig::paper_gpe());
    cfg.propagation.g = 0.0;
    let linear = run_linear_sweep(&cfg).unwrap();
    for target in [TargetMode::OddGpe, TargetMode::Harmonic] {
        cfg.analysis.target = target;
        let gpe = run_gpe_sweep(&cfg).unwrap();
        assert!(
            (gpe.transfer.p - linear.transfer.p).abs() < 1e-6,
            "{target:?}: {} vs {}",
            gpe.transfer.p,
            linear.transfer.p
        );
    }
}

#[test]
fn gpe_snapshot_half_period_later_is_mirrored() {
    let r = run_gpe_sweep(&lean(SweepConfig::paper_gpe())).unwrap();
    let end = r.final_state();
    let later = &r.half_period_later;
    let mirror = mirrored(end).fidelity(later).unwrap();
    let direct = end.fidelity(later).unwrap();
    assert!(mirror > 0.9 && mirror > direct, "mirror {mirror}, direct {direct}");
    assert!((r.trap_periods() - 15.915).abs() < 1e-2);
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::paper_linear();
    cfg.echo = "[potential]\nu0 = 6.4\n".into();
    cfg.analysis.post_sweep_time = 2.0 * std::f64::consts::PI;
    let r = run_linear_sweep(&cfg).unwrap();
    let files = r.write_artifacts(dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for want in ["summary.json", "observables.dat", "post_sweep.dat", "final_state.dat", "final_plus_half.dat"] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
    let summary: SweepSummary = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.p, r.transfer.p);
    assert!(summary.config.contains("u0 = 6.4"));
    let observables = fs::read_to_string(dir.path().join("observables.dat")).unwrap();
    assert!(observables.lines().any(|l| l == "# config: u0 = 6.4"));
    let rows = observables.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, r.trajectory.observables.len());
}

#[test]
fn optimizer_reaches_headline_transfer() {
    let problem = OptimizationProblem::new(
        SweepConfig::paper_linear(),
        vec![(SweepParameter::Velocity, Bounds::new(0.01, 1.0))],
        30,
        1,
    );
    let out = optimize(&problem).unwrap();
    assert!(out.log.len() <= 30);
    assert!(out.confirmed_p >= 0.97, "confirmed {} at v = {}", out.confirmed_p, out.velocity);
    assert!(out.log.iter().all(|e| (0.01..=1.0).contains(&e.velocity)));
    let mut text = Vec::new();
    out.write_log(&mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("# eval_index  u0  sigma  velocity  p"));
    assert_eq!(text.lines().count(), out.log.len() + 1);
}

#[test]
fn pinned_flat_trap_cannot_transfer() {
    let problem = OptimizationProblem::new(
        SweepConfig::paper_linear(),
        vec![(SweepParameter::U0, Bounds::new(0.0, 0.0))],
        5,
        3,
    );
    let out = optimize(&problem).unwrap();
    assert!(out.confirmed_p < 1e-3 && out.best_fast_p < 1e-3);
    assert_eq!(out.u0, 0.0);
}

#[test]
fn optimizer_log_is_reproducible() {
    let problem = OptimizationProblem::new(
        SweepConfig::paper_linear(),
        vec![
            (SweepParameter::Velocity, Bounds::new(0.3, 1.0)),
            (SweepParameter::U0, Bounds::new(4.0, 8.0)),
        ],
        6,
        42,
    );
    let a = optimize(&problem).unwrap();
    let b = optimize(&problem).unwrap();
    let rows = |o: &bec_lz::optimize::OptimizationOutcome| {
        o.log.iter().map(|e| (e.index, e.u0, e.sigma, e.velocity, e.p)).collect::<Vec<_>>()
    };
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn figure_data_is_deterministic() {
    let opts = FigureOptions {
        propagated_overlay: false,
        gpe_snapshots: false,
        scan_points: 21,
        ..Default::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = reproduce_figures(a.path(), &opts).unwrap();
    let fb = reproduce_figures(b.path(), &opts).unwrap();
    assert_eq!(fa.len(), 8);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{x:?} differs");
    }
    let levels = fs::read_to_string(a.path().join("fig2_levels.dat")).unwrap();
    assert_eq!(levels.lines().filter(|l| !l.starts_with('#')).count(), 21);
}

#[test]
fn figure_overlays() {
    let opts = FigureOptions {
        scan_points: 21,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let files = reproduce_figures(dir.path(), &opts).unwrap();
    assert_eq!(files.len(), 12);
    let column = |name: &str| -> Vec<f64> {
        fs::read_to_string(dir.path().join(name))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
            .collect()
    };
    let dx = opts.grid.dx();
    for (analytic, propagated, tol) in [
        ("fig3_density_quarter.dat", "fig3_propagated_quarter.dat", 0.05),
        ("fig3_density_half.dat", "fig3_propagated_half.dat", 0.08),
    ] {
        let (a, p) = (column(analytic), column(propagated));
        let l2 = (a.iter().zip(&p).map(|(a, p)| (a - p).powi(2)).sum::<f64>() * dx).sqrt();
        assert!(l2 < tol, "{analytic}: L2 = {l2}");
    }
}
