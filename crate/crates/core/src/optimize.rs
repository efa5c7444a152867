//! Derivative-free maximization of the transfer probability over sweep
//! parameters: Latin-hypercube sampling, then bounded Nelder–Mead with
//! restarts.

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::experiments::{run_gpe_sweep, run_linear_sweep, SweepConfig};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    U0,
    Sigma,
    Velocity,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::U0 => "u0",
            SweepParameter::Sigma => "sigma",
            SweepParameter::Velocity => "velocity",
        })
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "u0" => Ok(SweepParameter::U0),
            "sigma" => Ok(SweepParameter::Sigma),
            "velocity" => Ok(SweepParameter::Velocity),
            other => Err(invalid(format!("unknown sweep parameter '{other}' (expected u0, sigma or velocity)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// One objective evaluation; `p` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub index: usize,
    pub point: Vec<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
    pub log: Vec<Evaluation>,
}

const RESTART_IMPROVEMENT: f64 = 1e-4;
const INITIAL_STEP: f64 = 0.1;

struct Budgeted<'a, F> {
    f: &'a F,
    bounds: &'a [Bounds],
    budget: usize,
    log: Vec<Evaluation>,
}

impl<F: Fn(&[f64]) -> Result<f64> + Sync> Budgeted<'_, F> {
    fn exhausted(&self) -> bool {
        self.log.len() >= self.budget
    }

    fn record(&mut self, point: Vec<f64>, outcome: Result<f64>) -> f64 {
        let p = match outcome {
            Ok(v) if v.is_finite() => Some(v),
            Ok(v) => {
                log::warn!("objective returned {v} at {point:?}");
                None
            }
            Err(e) => {
                log::warn!("objective failed at {point:?}: {e}");
                None
            }
        };
        self.log.push(Evaluation {
            index: self.log.len(),
            point,
            p,
        });
        p.map_or(f64::INFINITY, |v| -v)
    }

    /// Negated objective at `point` (clamped into the box); `None` once the budget is spent.
    fn cost(&mut self, point: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let point: Vec<f64> = point.iter().zip(self.bounds).map(|(v, b)| b.clamp(*v)).collect();
        let outcome = (self.f)(&point);
        Some(self.record(point, outcome))
    }
}

/// Maximizes `f` over the box `bounds` within `budget` evaluations.
///
/// The first phase draws a Latin-hypercube sample (evaluated in parallel),
/// the second runs Nelder–Mead from the best sample, restarting with a
/// smaller simplex whenever the best value improves by less than `1e-4`
/// over `2·dim` iterations. Deterministic for a given `seed`.
pub fn maximize<F>(bounds: &[Bounds], budget: usize, seed: u64, f: F) -> Result<Maximum>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    for b in bounds {
        if !(b.lo.is_finite() && b.hi.is_finite()) || b.lo > b.hi {
            return Err(invalid(format!("bounds must be finite with lo <= hi, got [{}, {}]", b.lo, b.hi)));
        }
    }
    let free: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].width() > 0.0).collect();
    if budget < free.len() + 1 {
        return Err(invalid(format!(
            "budget {budget} is below the {} evaluations a {}-parameter simplex needs",
            free.len() + 1,
            free.len()
        )));
    }
    let mut run = Budgeted {
        f: &f,
        bounds,
        budget,
        log: Vec::new(),
    };

    let samples = if free.is_empty() { 1 } else { (budget / 2).max(free.len() + 1).min(budget) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = (0..samples).map(|_| bounds.iter().map(|b| b.lo).collect()).collect();
    for &d in &free {
        let mut strata: Vec<usize> = (0..samples).collect();
        strata.shuffle(&mut rng);
        for (point, s) in points.iter_mut().zip(strata) {
            let u = (s as f64 + rng.gen::<f64>()) / samples as f64;
            point[d] = bounds[d].lo + u * bounds[d].width();
        }
    }
    let outcomes: Vec<Result<f64>> = points.par_iter().map(|p| f(p)).collect();
    for (point, outcome) in points.into_iter().zip(outcomes) {
        run.record(point, outcome);
    }

    if !free.is_empty() {
        nelder_mead(&mut run, &free);
    }

    let log = run.log;
    let best = log
        .iter()
        .filter_map(|e| e.p.map(|p| (e, p)))
        .fold(None::<(&Evaluation, f64)>, |best, (e, p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((e, p)),
        });
    match best {
        Some((e, p)) => Ok(Maximum {
            point: e.point.clone(),
            value: p,
            log,
        }),
        None => Err(Error::OptimizationFailed {
            evaluations: log.len(),
            reason: "every objective evaluation failed".into(),
            log,
        }),
    }
}

fn nelder_mead<F: Fn(&[f64]) -> Result<f64> + Sync>(run: &mut Budgeted<'_, F>, free: &[usize]) {
    let dim = free.len();
    let full = |base: &[f64], sub: &[f64]| -> Vec<f64> {
        let mut p = base.to_vec();
        for (k, &d) in free.iter().enumerate() {
            p[d] = sub[k];
        }
        p
    };
    let best_logged = |run: &Budgeted<'_, F>| -> (Vec<f64>, f64) {
        run.log
            .iter()
            .filter_map(|e| e.p.map(|p| (e.point.clone(), -p)))
            .fold((run.log[0].point.clone(), f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    };

    let mut scale = INITIAL_STEP;
    while !run.exhausted() {
        let (anchor, anchor_cost) = best_logged(run);
        let start: Vec<f64> = free.iter().map(|&d| anchor[d]).collect();
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), anchor_cost)];
        for k in 0..dim {
            let b = run.bounds[free[k]];
            let mut v = start.clone();
            let step = scale * b.width();
            v[k] = if v[k] + step <= b.hi { v[k] + step } else { v[k] - step };
            match run.cost(&full(&anchor, &v)) {
                Some(c) => simplex.push((v, c)),
                None => return,
            }
        }

        let mut history = vec![anchor_cost];
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            history.push(simplex[0].1);
            if history.len() > 2 * dim {
                let old = history[history.len() - 1 - 2 * dim];
                if old - simplex[0].1 < RESTART_IMPROVEMENT {
                    break;
                }
            }
            let worst = simplex[dim].clone();
            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|s| s.0[k]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .enumerate()
                    .map(|(k, (c, w))| run.bounds[free[k]].clamp(c + t * (c - w)))
                    .collect()
            };
            let reflected = along(1.0);
            let Some(fr) = run.cost(&full(&anchor, &reflected)) else { return };
            if fr < simplex[0].1 {
                let expanded = along(2.0);
                let Some(fe) = run.cost(&full(&anchor, &expanded)) else { return };
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                let t = if fr < worst.1 { 0.5 } else { -0.5 };
                let contracted = along(t);
                let Some(fc) = run.cost(&full(&anchor, &contracted)) else { return };
                if fc < worst.1.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for s in simplex.iter_mut().skip(1) {
                        let shrunk: Vec<f64> = s.0.iter().zip(&best).map(|(v, b)| b + 0.5 * (v - b)).collect();
                        let Some(c) = run.cost(&full(&anchor, &shrunk)) else { return };
                        *s = (shrunk, c);
                    }
                }
            }
        }
        scale *= 0.5;
    }
}

/// Maximization of the sweep transfer probability over a subset of
/// `(u0, σ, velocity)`, with the remaining values taken from `base`.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub base: SweepConfig,
    pub free: Vec<(SweepParameter, Bounds)>,
    pub budget: usize,
    pub seed: u64,
    /// Grid size and time step for objective evaluations.
    pub fast_n: usize,
    pub fast_dt: f64,
}

impl OptimizationProblem {
    pub fn new(base: SweepConfig, free: Vec<(SweepParameter, Bounds)>, budget: usize, seed: u64) -> Self {
        Self {
            base,
            free,
            budget,
            seed,
            fast_n: 512,
            fast_dt: 0.002,
        }
    }

    fn validate(&self) -> Result<()> {
        for (i, (param, b)) in self.free.iter().enumerate() {
            if self.free[..i].iter().any(|(p, _)| p == param) {
                return Err(invalid(format!("parameter '{param}' listed twice")));
            }
            if !(b.lo.is_finite() && b.hi.is_finite()) || b.lo > b.hi {
                return Err(invalid(format!("bounds for '{param}' must be finite with lo <= hi")));
            }
            let dx = self.base.grid.dx().max(self.fast_grid()?.dx());
            if *param == SweepParameter::Sigma && b.lo <= 2.0 * dx {
                return Err(invalid(format!("sigma lower bound {} does not resolve the well (need > {})", b.lo, 2.0 * dx)));
            }
            if *param == SweepParameter::Velocity && b.lo <= 0.0 {
                return Err(invalid("velocity lower bound must be positive"));
            }
        }
        Ok(())
    }

    fn fast_grid(&self) -> Result<Grid> {
        Grid::new(self.base.grid.x_min(), self.base.grid.x_max(), self.fast_n)
    }

    /// Config with `values` substituted for the free parameters.
    pub fn config_at(&self, values: &[f64], fast: bool) -> Result<SweepConfig> {
        let mut cfg = self.base.clone();
        for ((param, _), v) in self.free.iter().zip(values) {
            match param {
                SweepParameter::U0 => cfg.u0 = *v,
                SweepParameter::Sigma => cfg.sigma = *v,
                SweepParameter::Velocity => cfg.propagation.schedule.velocity = *v,
            }
        }
        cfg.analysis.post_sweep_time = 0.0;
        cfg.analysis.lz_check = false;
        cfg.propagation.store_snapshots = false;
        cfg.propagation.track_levels = 0;
        cfg.propagation.record_every = usize::MAX;
        if fast {
            cfg.grid = self.fast_grid()?;
            cfg.propagation.dt = self.fast_dt;
        }
        Ok(cfg)
    }

    fn transfer(&self, values: &[f64], fast: bool) -> Result<f64> {
        let cfg = self.config_at(values, fast)?;
        let result = if cfg.propagation.g == 0.0 {
            run_linear_sweep(&cfg)?
        } else {
            run_gpe_sweep(&cfg)?
        };
        Ok(result.transfer.p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEvaluation {
    pub index: usize,
    pub u0: f64,
    pub sigma: f64,
    pub velocity: f64,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub u0: f64,
    pub sigma: f64,
    pub velocity: f64,
    /// Best transfer found with the fast evaluation profile.
    pub best_fast_p: f64,
    /// Transfer at the best parameters re-run at full resolution.
    pub confirmed_p: f64,
    pub log: Vec<SweepEvaluation>,
}

impl OptimizationOutcome {
    /// Writes `eval_index u0 sigma velocity p` rows; failed runs show `nan`.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# eval_index  u0  sigma  velocity  p")?;
        for e in &self.log {
            writeln!(
                out,
                "{} {:e} {:e} {:e} {:e}",
                e.index,
                e.u0,
                e.sigma,
                e.velocity,
                e.p.unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }
}

pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationOutcome> {
    problem.base.validate()?;
    problem.validate()?;
    let bounds: Vec<Bounds> = problem.free.iter().map(|(_, b)| *b).collect();
    let to_row = |e: &Evaluation| -> Result<SweepEvaluation> {
        let cfg = problem.config_at(&e.point, true)?;
        Ok(SweepEvaluation {
            index: e.index,
            u0: cfg.u0,
            sigma: cfg.sigma,
            velocity: cfg.schedule().velocity,
            p: e.p,
        })
    };
    let best = maximize(&bounds, problem.budget, problem.seed, |v| problem.transfer(v, true))?;
    let confirmed_p = problem.transfer(&best.point, false)?;
    let cfg = problem.config_at(&best.point, false)?;
    Ok(OptimizationOutcome {
        u0: cfg.u0,
        sigma: cfg.sigma,
        velocity: cfg.schedule().velocity,
        best_fast_p: best.value,
        confirmed_p,
        log: best.log.iter().map(to_row).collect::<Result<_>>()?,
    })
}
