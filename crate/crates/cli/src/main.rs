//! `bec-lz`: config-driven runs of the swept-well model.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bec_lz::analysis::{binomial_distribution, ensemble_stats, reduced_density, write_density};
use bec_lz::config::RunConfig;
use bec_lz::experiments::{
    config_header, reproduce_figures, run_gpe_sweep, run_linear_sweep, FigureOptions, SweepResult,
};
use bec_lz::optimize::{optimize, OptimizationProblem};
use bec_lz::spectrum::{find_avoided_crossing, level_dynamics};
use bec_lz::Grid;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use manifest::{DirLock, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] bec_lz::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("output directory {0} is locked by another run (remove .bec-lz.lock if stale)")]
    Locked(PathBuf),
    #[error("manifest check failed: {0}")]
    Manifest(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "bec-lz", version, about = "Swept Gaussian well in a harmonic trap: spectra, sweeps and analysis")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// INI run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy levels as a function of the well position.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        /// Number of levels; overrides `[spectrum] levels`.
        #[arg(long)]
        levels: Option<usize>,
        /// Well positions as start:end:points; overrides the `[spectrum]` scan keys.
        #[arg(long, allow_hyphen_values = true)]
        scan: Option<String>,
    },
    /// Locate the avoided crossing between two levels.
    Crossing(RunArgs),
    /// Non-interacting sweep.
    Sweep(RunArgs),
    /// Mean-field sweep with the configured nonlinearity.
    GpeSweep(RunArgs),
    /// Two-level reduced density for given p and time after the sweep.
    Density {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: f64,
        /// Output data file.
        #[arg(long)]
        out: PathBuf,
        /// Optional config supplying the grid.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Energy statistics of N independently excited particles.
    Stats {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Output directory for the distribution and JSON summary.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize the transfer over the `[optimize]` parameters.
    Optimize(RunArgs),
    /// Data files behind the four figures.
    Figures {
        #[command(flatten)]
        run: RunArgs,
        /// Interacting sweep config for the end-of-sweep snapshots.
        #[arg(long)]
        gpe_config: Option<PathBuf>,
    },
}

/// Four significant digits.
fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.3e}");
    }
    format!("{:.*}", (3 - magnitude).max(0) as usize, x)
}

fn output_dir(args: &RunArgs, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    args.out
        .clone()
        .or_else(|| cfg.sweep.output_dir.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set [output] dir in the config".into()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn parse_scan(text: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Usage(format!("--scan expects start:end:points, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}

struct Session {
    manifest: RunManifest,
    _lock: DirLock,
}

impl Session {
    fn open(subcommand: &str, config: Option<&Path>, dir: &Path) -> Result<Self, CliError> {
        let lock = DirLock::acquire(dir)?;
        Ok(Self {
            manifest: RunManifest::new(subcommand, config, dir),
            _lock: lock,
        })
    }

    fn dir(&self) -> &Path {
        &self.manifest.output_dir
    }

    fn add(&mut self, path: &Path) -> Result<(), CliError> {
        self.manifest.add(path)
    }

    fn finish(self) -> Result<(), CliError> {
        let path = self.manifest.write()?;
        println!("manifest: {}", path.display());
        Ok(())
    }
}

fn report_sweep(result: &SweepResult) {
    let s = result.summary();
    println!(
        "p = {}  (ground {}, leakage {})",
        sig4(s.p),
        sig4(s.populations[0]),
        sig4(s.leakage)
    );
    if s.g != 0.0 {
        println!("harmonic first-excited population = {}", sig4(s.harmonic_p));
    }
    println!(
        "sweep duration = {} ({} trap periods), final norm = {}",
        sig4(s.sweep_duration),
        sig4(s.trap_periods),
        sig4(s.final_norm)
    );
    if let Some(lz) = &s.lz {
        println!(
            "crossing at x0 = {}, gap = {}, LZ estimate = {}",
            sig4(lz.x0_star),
            sig4(lz.gap),
            sig4(lz.p_lz)
        );
    }
    if let Some(b) = &s.beat {
        println!("beat period = {}{}", sig4(b.period), if b.weak { " (weak signal)" } else { "" });
    }
}

fn sweep(name: &str, args: &RunArgs, interacting: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let dir = output_dir(args, &cfg)?;
    let mut session = Session::open(name, Some(&args.config), &dir)?;
    let result = if interacting {
        run_gpe_sweep(&cfg.sweep)?
    } else {
        run_linear_sweep(&cfg.sweep)?
    };
    for file in result.write_artifacts(session.dir())? {
        session.add(&file)?;
    }
    report_sweep(&result);
    session.finish()
}

#[derive(Serialize)]
struct CrossingSummary {
    level_lo: usize,
    level_hi: usize,
    x0_range: (f64, f64),
    x0_star: f64,
    gap: f64,
    mean_spacing: f64,
    gap_over_spacing: f64,
    narrow: bool,
    config: String,
}

#[derive(Serialize)]
struct StatsSummary {
    p: f64,
    n_particles: usize,
    mean_energy: f64,
    variance_energy: f64,
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    free: Vec<String>,
    budget: usize,
    seed: u64,
    evaluations: usize,
    u0: f64,
    sigma: f64,
    velocity: f64,
    best_fast_p: f64,
    confirmed_p: f64,
    config: &'a str,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { run, levels, scan } => {
            let cfg = RunConfig::load(&run.config)?;
            let dir = output_dir(&run, &cfg)?;
            let levels = levels.unwrap_or(cfg.spectrum.levels);
            let (start, end, points) = match scan {
                Some(text) => parse_scan(&text)?,
                None => (cfg.spectrum.scan_range.0, cfg.spectrum.scan_range.1, cfg.spectrum.scan_points),
            };
            let mut session = Session::open("spectrum", Some(&run.config), &dir)?;
            let scan = level_dynamics(&cfg.sweep.grid, cfg.sweep.u0, cfg.sweep.sigma, (start, end), levels, points)?;
            let path = session.dir().join("levels.dat");
            scan.write_columnar(BufWriter::new(File::create(&path)?), &config_header(&cfg.sweep.echo))?;
            session.add(&path)?;
            println!("{levels} levels at {points} well positions in [{start}, {end}] -> {}", path.display());
            session.finish()
        }
        Command::Crossing(run) => {
            let cfg = RunConfig::load(&run.config)?;
            let dir = output_dir(&run, &cfg)?;
            let (lo, hi) = (cfg.spectrum.level_lo, cfg.spectrum.level_hi);
            let range = cfg.sweep.analysis.crossing_range;
            let mut session = Session::open("crossing", Some(&run.config), &dir)?;
            let c = find_avoided_crossing(&cfg.sweep.grid, cfg.sweep.u0, cfg.sweep.sigma, lo, hi, range)?;
            let narrow = c.is_narrow(cfg.sweep.analysis.narrowness);
            let summary = CrossingSummary {
                level_lo: lo,
                level_hi: hi,
                x0_range: range,
                x0_star: c.x0_star,
                gap: c.gap,
                mean_spacing: c.mean_spacing,
                gap_over_spacing: c.gap / c.mean_spacing,
                narrow,
                config: cfg.sweep.echo.clone(),
            };
            let path = session.dir().join("crossing.json");
            write_json(&path, &summary)?;
            session.add(&path)?;
            println!(
                "levels {lo}/{hi}: x0* = {}, gap = {}, gap/spacing = {}{}",
                sig4(c.x0_star),
                sig4(c.gap),
                sig4(summary.gap_over_spacing),
                if narrow { " (narrow)" } else { "" }
            );
            session.finish()
        }
        Command::Sweep(run) => sweep("sweep", &run, false),
        Command::GpeSweep(run) => sweep("gpe-sweep", &run, true),
        Command::Density { p, t, out, config } => {
            let (grid, mut header) = match &config {
                Some(path) => {
                    let cfg = RunConfig::load(path)?;
                    (cfg.sweep.grid, config_header(&cfg.sweep.echo))
                }
                None => (Grid::default(), config_header("")),
            };
            header.push(format!("density --p {p} --t {t}"));
            let density = reduced_density(p, t, &grid)?;
            let dir = match out.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut session = Session::open("density", config.as_deref(), &dir)?;
            let mut f = BufWriter::new(File::create(&out)?);
            for line in &header {
                writeln!(f, "# {line}")?;
            }
            write_density(&mut f, &grid, &density, p, t)?;
            f.flush()?;
            drop(f);
            session.add(&out)?;
            let peak = density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            println!("reduced density p = {p}, t = {t}: peak {} -> {}", sig4(peak), out.display());
            session.finish()
        }
        Command::Stats { p, n, out } => {
            let stats = ensemble_stats(p, n)?;
            println!(
                "N = {n}, p = {p}: mean energy = {}, variance = {}",
                sig4(stats.mean_energy),
                sig4(stats.variance_energy)
            );
            let Some(dir) = out else { return Ok(()) };
            let mut session = Session::open("stats", None, &dir)?;
            let summary = StatsSummary {
                p,
                n_particles: n,
                mean_energy: stats.mean_energy,
                variance_energy: stats.variance_energy,
            };
            let path = session.dir().join("stats.json");
            write_json(&path, &summary)?;
            session.add(&path)?;
            let path = session.dir().join("binomial.dat");
            let mut f = BufWriter::new(File::create(&path)?);
            writeln!(f, "# bec-lz {}", env!("CARGO_PKG_VERSION"))?;
            writeln!(f, "# stats --p {p} --n {n}")?;
            writeln!(f, "# k  probability  energy")?;
            for (k, prob) in binomial_distribution(p, n)?.iter().enumerate() {
                writeln!(f, "{k} {prob:e} {:e}", 0.5 * n as f64 + k as f64)?;
            }
            f.flush()?;
            drop(f);
            session.add(&path)?;
            session.finish()
        }
        Command::Optimize(run) => {
            let cfg = RunConfig::load(&run.config)?;
            let dir = output_dir(&run, &cfg)?;
            let mut session = Session::open("optimize", Some(&run.config), &dir)?;
            let opts = &cfg.optimize;
            let mut problem = OptimizationProblem::new(cfg.sweep.clone(), opts.free.clone(), opts.budget, opts.seed);
            problem.fast_n = opts.fast_n;
            problem.fast_dt = opts.fast_dt;
            let outcome = optimize(&problem)?;
            let path = session.dir().join("optimize_log.dat");
            let mut f = BufWriter::new(File::create(&path)?);
            for line in config_header(&cfg.sweep.echo) {
                writeln!(f, "# {line}")?;
            }
            outcome.write_log(&mut f)?;
            f.flush()?;
            drop(f);
            session.add(&path)?;
            let summary = OptimizeSummary {
                free: opts.free.iter().map(|(p, b)| format!("{p} in [{}, {}]", b.lo, b.hi)).collect(),
                budget: opts.budget,
                seed: opts.seed,
                evaluations: outcome.log.len(),
                u0: outcome.u0,
                sigma: outcome.sigma,
                velocity: outcome.velocity,
                best_fast_p: outcome.best_fast_p,
                confirmed_p: outcome.confirmed_p,
                config: &cfg.sweep.echo,
            };
            let path = session.dir().join("optimize_summary.json");
            write_json(&path, &summary)?;
            session.add(&path)?;
            println!(
                "best after {} evaluations: u0 = {}, sigma = {}, velocity = {}; p = {} (confirmed {})",
                outcome.log.len(),
                sig4(outcome.u0),
                sig4(outcome.sigma),
                sig4(outcome.velocity),
                sig4(outcome.best_fast_p),
                sig4(outcome.confirmed_p)
            );
            session.finish()
        }
        Command::Figures { run, gpe_config } => {
            let cfg = RunConfig::load(&run.config)?;
            let dir = output_dir(&run, &cfg)?;
            let mut linear = cfg.sweep.clone();
            linear.analysis.post_sweep_time = 0.0;
            linear.analysis.lz_check = false;
            let mut opts = FigureOptions {
                grid: cfg.sweep.grid,
                linear,
                scan_points: cfg.spectrum.scan_points,
                levels: cfg.spectrum.levels,
                gpe_snapshots: gpe_config.is_some(),
                ..Default::default()
            };
            if let Some(path) = &gpe_config {
                let mut gpe = RunConfig::load(path)?.sweep;
                gpe.analysis.post_sweep_time = 0.0;
                opts.gpe = gpe;
            }
            let mut session = Session::open("figures", Some(&run.config), &dir)?;
            let files = reproduce_figures(session.dir(), &opts)?;
            for file in &files {
                session.add(file)?;
            }
            println!("{} figure data files -> {}", files.len(), session.dir().display());
            session.finish()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bec-lz: error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.978591), "0.9786");
        assert_eq!(sig4(1470.0), "1470");
        assert_eq!(sig4(29.1), "29.10");
        assert_eq!(sig4(-3.647695), "-3.648");
        assert_eq!(sig4(2.87e-6), "2.870e-6");
    }

    #[test]
    fn scan_syntax() {
        assert_eq!(parse_scan("-5:0:200").unwrap(), (-5.0, 0.0, 200));
        assert!(parse_scan("-5:0").is_err());
        assert!(parse_scan("a:0:3").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["bec-lz", "spectrum", "--config", "x.cfg", "--scan", "-5:0:200"]).unwrap();
        assert!(matches!(cli.command, Command::Spectrum { scan: Some(ref s), .. } if s == "-5:0:200"));
        assert!(Cli::try_parse_from(["bec-lz", "sweep"]).is_err());
    }
}
