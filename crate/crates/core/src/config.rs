//! INI-style run configuration.
//!
//! ```ini
//! [potential]
//! u0 = 6.4
//! sigma = 0.5
//!
//! [schedule]
//! x0_start = -5
//! x0_end = 0
//! velocity = 0.1
//!
//! [propagation]
//! g = 0
//! dt = 0.001
//! ```
//!
//! Every value is in trap oscillator units. Unknown sections or keys are
//! rejected with the list of valid keys for that section.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::experiments::{AnalysisOptions, SweepConfig};
use crate::grid::Grid;
use crate::optimize::{Bounds, SweepParameter};

const SECTIONS: &[(&str, &[&str])] = &[
    ("potential", &["u0", "sigma"]),
    ("schedule", &["x0_start", "x0_end", "velocity"]),
    ("grid", &["x_min", "x_max", "n"]),
    ("propagation", &["dt", "method", "g", "record_every", "store_snapshots", "track_levels"]),
    (
        "analysis",
        &[
            "basis_size",
            "target",
            "post_sweep_time",
            "post_sweep_record_every",
            "lz_check",
            "crossing_start",
            "crossing_end",
            "lz_half_window",
            "lz_scan_points",
            "narrowness",
        ],
    ),
    ("spectrum", &["levels", "scan_start", "scan_end", "scan_points", "level_lo", "level_hi"]),
    (
        "optimize",
        &["free", "u0_bounds", "sigma_bounds", "velocity_bounds", "budget", "seed", "fast_n", "fast_dt"],
    ),
    ("output", &["dir"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    pub levels: usize,
    pub scan_range: (f64, f64),
    pub scan_points: usize,
    pub level_lo: usize,
    pub level_hi: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            levels: 6,
            scan_range: (-5.0, 0.0),
            scan_points: 200,
            level_lo: 0,
            level_hi: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub free: Vec<(SweepParameter, Bounds)>,
    pub budget: usize,
    pub seed: u64,
    pub fast_n: usize,
    pub fast_dt: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            free: vec![(SweepParameter::Velocity, Bounds::new(0.01, 1.0))],
            budget: 30,
            seed: 1,
            fast_n: 512,
            fast_dt: 0.002,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sweep: SweepConfig,
    pub spectrum: SpectrumOptions,
    pub optimize: OptimizeOptions,
}

fn cfg_err(section: &str, message: impl Into<String>) -> Error {
    Error::Config {
        section: section.to_string(),
        message: message.into(),
    }
}

fn parse<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| cfg_err(section, format!("bad value '{value}' for '{key}': {e}")))
}

fn parse_bounds(section: &str, key: &str, value: &str) -> Result<Bounds> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| cfg_err(section, format!("'{key}' must be written lo:hi, got '{value}'")))?;
    Ok(Bounds::new(parse(section, key, lo)?, parse(section, key, hi)?))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg_err("", format!("malformed config: {e}")))?;
        let mut sweep = SweepConfig::paper_linear();
        sweep.analysis = AnalysisOptions::default();
        let mut spectrum = SpectrumOptions::default();
        let mut optimize = OptimizeOptions::default();
        let mut free: Option<Vec<SweepParameter>> = None;
        let mut bounds: Vec<(SweepParameter, Bounds)> = Vec::new();
        let (mut x_min, mut x_max, mut n) = (sweep.grid.x_min(), sweep.grid.x_max(), sweep.grid.len());

        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(cfg_err("", format!("key '{key}' appears outside any section")));
                }
                continue;
            };
            let valid = SECTIONS
                .iter()
                .find(|(name, _)| *name == section)
                .map(|(_, keys)| *keys)
                .ok_or_else(|| {
                    let names: Vec<&str> = SECTIONS.iter().map(|(n, _)| *n).collect();
                    cfg_err(section, format!("unknown section; valid sections: {}", names.join(", ")))
                })?;
            for (key, value) in props.iter() {
                if !valid.contains(&key) {
                    return Err(cfg_err(section, format!("unknown key '{key}'; valid keys: {}", valid.join(", "))));
                }
                let s = section;
                let a = &mut sweep.analysis;
                let prop = &mut sweep.propagation;
                match (section, key) {
                    ("potential", "u0") => sweep.u0 = parse(s, key, value)?,
                    ("potential", "sigma") => sweep.sigma = parse(s, key, value)?,
                    ("schedule", "x0_start") => prop.schedule.x0_start = parse(s, key, value)?,
                    ("schedule", "x0_end") => prop.schedule.x0_end = parse(s, key, value)?,
                    ("schedule", "velocity") => prop.schedule.velocity = parse(s, key, value)?,
                    ("grid", "x_min") => x_min = parse(s, key, value)?,
                    ("grid", "x_max") => x_max = parse(s, key, value)?,
                    ("grid", "n") => n = parse(s, key, value)?,
                    ("propagation", "dt") => prop.dt = parse(s, key, value)?,
                    ("propagation", "method") => prop.method = parse(s, key, value)?,
                    ("propagation", "g") => prop.g = parse(s, key, value)?,
                    ("propagation", "record_every") => prop.record_every = parse(s, key, value)?,
                    ("propagation", "store_snapshots") => prop.store_snapshots = parse(s, key, value)?,
                    ("propagation", "track_levels") => prop.track_levels = parse(s, key, value)?,
                    ("analysis", "basis_size") => a.basis_size = parse(s, key, value)?,
                    ("analysis", "target") => a.target = parse(s, key, value)?,
                    ("analysis", "post_sweep_time") => a.post_sweep_time = parse(s, key, value)?,
                    ("analysis", "post_sweep_record_every") => a.post_sweep_record_every = parse(s, key, value)?,
                    ("analysis", "lz_check") => a.lz_check = parse(s, key, value)?,
                    ("analysis", "crossing_start") => a.crossing_range.0 = parse(s, key, value)?,
                    ("analysis", "crossing_end") => a.crossing_range.1 = parse(s, key, value)?,
                    ("analysis", "lz_half_window") => a.lz_half_window = parse(s, key, value)?,
                    ("analysis", "lz_scan_points") => a.lz_scan_points = parse(s, key, value)?,
                    ("analysis", "narrowness") => a.narrowness = parse(s, key, value)?,
                    ("spectrum", "levels") => spectrum.levels = parse(s, key, value)?,
                    ("spectrum", "scan_start") => spectrum.scan_range.0 = parse(s, key, value)?,
                    ("spectrum", "scan_end") => spectrum.scan_range.1 = parse(s, key, value)?,
                    ("spectrum", "scan_points") => spectrum.scan_points = parse(s, key, value)?,
                    ("spectrum", "level_lo") => spectrum.level_lo = parse(s, key, value)?,
                    ("spectrum", "level_hi") => spectrum.level_hi = parse(s, key, value)?,
                    ("optimize", "free") => {
                        free = Some(
                            value
                                .split(',')
                                .map(|v| parse::<SweepParameter>(s, key, v))
                                .collect::<Result<_>>()?,
                        )
                    }
                    ("optimize", "u0_bounds") => bounds.push((SweepParameter::U0, parse_bounds(s, key, value)?)),
                    ("optimize", "sigma_bounds") => bounds.push((SweepParameter::Sigma, parse_bounds(s, key, value)?)),
                    ("optimize", "velocity_bounds") => {
                        bounds.push((SweepParameter::Velocity, parse_bounds(s, key, value)?))
                    }
                    ("optimize", "budget") => optimize.budget = parse(s, key, value)?,
                    ("optimize", "seed") => optimize.seed = parse(s, key, value)?,
                    ("optimize", "fast_n") => optimize.fast_n = parse(s, key, value)?,
                    ("optimize", "fast_dt") => optimize.fast_dt = parse(s, key, value)?,
                    ("output", "dir") => sweep.output_dir = Some(PathBuf::from(value.trim())),
                    _ => unreachable!("key list and match arms are kept in sync"),
                }
            }
        }

        sweep.grid = Grid::new(x_min, x_max, n).map_err(|e| cfg_err("grid", e.to_string()))?;
        if let Some(free) = free {
            optimize.free = free
                .into_iter()
                .map(|param| {
                    bounds
                        .iter()
                        .find(|(p, _)| *p == param)
                        .map(|(_, b)| (param, *b))
                        .ok_or_else(|| cfg_err("optimize", format!("free parameter '{param}' has no bounds")))
                })
                .collect::<Result<_>>()?;
        } else if !bounds.is_empty() {
            optimize.free = bounds;
        }
        sweep.echo = text.to_string();
        sweep.validate().map_err(|e| cfg_err("schedule", e.to_string()))?;
        Ok(Self {
            sweep,
            spectrum,
            optimize,
        })
    }
}
