//! Real- and imaginary-time evolution of the (possibly nonlinear)
//! Schrödinger equation `i∂ψ/∂t = −½∂²ψ/∂x² + V(x, t)ψ + g|ψ|²ψ`.
//!
//! Two independent integrators are provided: Strang-split Fourier
//! propagation on the periodic mesh, and an implicit centred-time
//! (Crank–Nicolson) finite-difference scheme with hard walls.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::banded::BandLu;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::potential::{PotentialParams, SweepSchedule};
use crate::spectrum::{self, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    SplitStep,
    CrankNicolson,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split-step" | "split-step-spectral" => Ok(Method::SplitStep),
            "crank-nicolson" | "implicit-finite-difference" => Ok(Method::CrankNicolson),
            other => Err(invalid(format!(
                "unknown method '{other}' (expected split-step or crank-nicolson)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub method: Method,
    /// Nonlinear coupling for a unit-norm wavefunction; zero gives the linear equation.
    pub g: f64,
    pub schedule: SweepSchedule,
    /// Step stride between recorded observables (and snapshots).
    pub record_every: usize,
    pub store_snapshots: bool,
    /// Number of instantaneous eigenstates to project onto at each record; zero disables.
    pub track_levels: usize,
}

impl PropagationConfig {
    pub const DEFAULT_DT: f64 = 0.001;

    pub fn new(schedule: SweepSchedule, g: f64) -> Self {
        Self {
            dt: Self::DEFAULT_DT,
            method: Method::SplitStep,
            g,
            schedule,
            record_every: 1000,
            store_snapshots: true,
            track_levels: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if !self.g.is_finite() {
            return Err(invalid("non-finite nonlinearity"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub x0: f64,
    pub norm: f64,
    pub energy: f64,
    pub mean_x: f64,
    pub populations: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<WaveFunction>,
    pub observables: Vec<Observables>,
    pub final_state: WaveFunction,
}

impl Trajectory {
    pub fn mean_x_series(&self) -> (Vec<f64>, Vec<f64>) {
        self.observables.iter().map(|o| (o.t, o.mean_x)).unzip()
    }

    /// Writes `t x0 norm energy <x> P0 P1 …` rows.
    pub fn write_observables<W: Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let levels = self.observables.first().map_or(0, |o| o.populations.len());
        let pops: Vec<String> = (0..levels).map(|i| format!("P{i}")).collect();
        writeln!(out, "# t  x0  norm  energy  <x>  {}", pops.join("  "))?;
        for o in &self.observables {
            write!(out, "{:e} {:e} {:e} {:e} {:e}", o.t, o.x0, o.norm, o.energy, o.mean_x)?;
            for p in &o.populations {
                write!(out, " {p:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Reusable Strang-splitting integrator for one grid and time step.
pub struct SplitStep {
    grid: Grid,
    xs: Vec<f64>,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    potential: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(grid: Grid, dt: f64) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.len();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scale = 1.0 / n as f64;
        let kinetic = grid
            .wavenumbers()
            .into_iter()
            .map(|k| Complex64::from_polar(scale, -0.5 * k * k * dt))
            .collect();
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            xs: grid.points(),
            grid,
            dt,
            forward,
            inverse,
            kinetic,
            potential: vec![0.0; n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Advances `psi` by one step in the potential `params`.
    pub fn step(&mut self, psi: &mut [Complex64], params: &PotentialParams, g: f64) {
        params.sample_into(&self.xs, &mut self.potential);
        self.half_potential(psi, g);
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.kinetic).for_each(|(a, k)| *a *= k);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        self.half_potential(psi, g);
    }

    fn half_potential(&self, psi: &mut [Complex64], g: f64) {
        let h = -0.5 * self.dt;
        if g == 0.0 {
            for (a, v) in psi.iter_mut().zip(&self.potential) {
                *a *= Complex64::from_polar(1.0, h * v);
            }
        } else {
            for (a, v) in psi.iter_mut().zip(&self.potential) {
                *a *= Complex64::from_polar(1.0, h * (v + g * a.norm_sqr()));
            }
        }
    }
}

/// Implicit centred-time finite-difference integrator with hard walls.
/// The nonlinear term uses a predictor for the mid-step density.
pub struct CrankNicolson {
    grid: Grid,
    xs: Vec<f64>,
    dt: f64,
    stencil: Stencil,
    potential: Vec<f64>,
}

impl CrankNicolson {
    pub fn new(grid: Grid, dt: f64) -> Self {
        Self::with_stencil(grid, dt, Stencil::default())
    }

    pub fn with_stencil(grid: Grid, dt: f64, stencil: Stencil) -> Self {
        Self {
            xs: grid.points(),
            potential: vec![0.0; grid.len()],
            grid,
            dt,
            stencil,
        }
    }

    pub fn step(&mut self, psi: &mut [Complex64], params: &PotentialParams, g: f64) -> Result<()> {
        params.sample_into(&self.xs, &mut self.potential);
        let density: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
        let first = self.solve(psi, &density, g)?;
        if g == 0.0 {
            psi.copy_from_slice(&first);
            return Ok(());
        }
        let mid: Vec<f64> = density
            .iter()
            .zip(&first)
            .map(|(r, a)| 0.5 * (r + a.norm_sqr()))
            .collect();
        let second = self.solve(psi, &mid, g)?;
        psi.copy_from_slice(&second);
        Ok(())
    }

    fn solve(&self, psi: &[Complex64], density: &[f64], g: f64) -> Result<Vec<Complex64>> {
        let n = self.grid.len();
        let w = self.stencil.weights();
        let b = self.stencil.half_bandwidth();
        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let half = Complex64::new(0.0, 0.5 * self.dt);
        let diag: Vec<f64> = (0..n)
            .map(|j| -0.5 * w[0] * inv_dx2 + self.potential[j] + g * density[j])
            .collect();
        let h = |i: usize, j: usize| -> f64 {
            if i == j {
                diag[i]
            } else {
                -0.5 * w[i.abs_diff(j)] * inv_dx2
            }
        };
        let mut rhs: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut acc = Complex64::default();
                for j in i.saturating_sub(b)..n.min(i + b + 1) {
                    acc += h(i, j) * psi[j];
                }
                psi[i] - half * acc
            })
            .collect();
        let lu = BandLu::factor_with(n, b, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) + half * h(i, j)
        })?;
        lu.solve_in_place(&mut rhs);
        Ok(rhs)
    }
}

enum Stepper {
    Split(SplitStep),
    Implicit(CrankNicolson),
}

impl Stepper {
    fn new(method: Method, grid: Grid, dt: f64) -> Self {
        match method {
            Method::SplitStep => Stepper::Split(SplitStep::new(grid, dt)),
            Method::CrankNicolson => Stepper::Implicit(CrankNicolson::new(grid, dt)),
        }
    }

    fn step(&mut self, psi: &mut [Complex64], params: &PotentialParams, g: f64) -> Result<()> {
        match self {
            Stepper::Split(s) => {
                s.step(psi, params, g);
                Ok(())
            }
            Stepper::Implicit(s) => s.step(psi, params, g),
        }
    }
}

/// One split-step of length `dt`.
pub fn step(psi: &WaveFunction, params: &PotentialParams, dt: f64, g: f64) -> Result<WaveFunction> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let mut stepper = SplitStep::new(*psi.grid(), dt);
    let mut out = psi.clone();
    stepper.step(out.amplitudes_mut(), params, g);
    if !out.is_finite() {
        return Err(Error::NumericalBlowup { step: 0, time: dt });
    }
    Ok(out)
}

/// Discrete energy functional `∫ |ψ'|²/2 + V|ψ|² + (g/2)|ψ|⁴ dx`, with the
/// kinetic part evaluated spectrally. For `g = 0` this is `⟨ψ|H|ψ⟩`.
pub fn energy_functional(psi: &WaveFunction, params: &PotentialParams, g: f64) -> f64 {
    let grid = psi.grid();
    let n = grid.len();
    let dx = grid.dx();
    let mut buf = psi.amplitudes().to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let kinetic: f64 = buf
        .iter()
        .zip(grid.wavenumbers())
        .map(|(a, k)| 0.5 * k * k * a.norm_sqr())
        .sum::<f64>()
        * dx
        / n as f64;
    let v = params.sample(&grid.points());
    let rest: f64 = psi
        .amplitudes()
        .iter()
        .zip(&v)
        .map(|(a, v)| {
            let rho = a.norm_sqr();
            v * rho + 0.5 * g * rho * rho
        })
        .sum::<f64>()
        * dx;
    kinetic + rest
}

struct Run<'a> {
    method: Method,
    dt: f64,
    steps: usize,
    g: f64,
    record_every: usize,
    store_snapshots: bool,
    track_levels: usize,
    params_at: &'a dyn Fn(f64) -> PotentialParams,
}

fn run(psi0: &WaveFunction, job: Run<'_>) -> Result<Trajectory> {
    let grid = *psi0.grid();
    let mut stepper = Stepper::new(job.method, grid, job.dt);
    let mut psi = psi0.clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        observables: Vec::new(),
        final_state: psi0.clone(),
    };
    let record = |traj: &mut Trajectory, psi: &WaveFunction, t: f64| -> Result<()> {
        let params = (job.params_at)(t);
        let populations = if job.track_levels > 0 {
            let h = spectrum::build_hamiltonian(&grid, &params);
            spectrum::lowest_eigenpairs(&h, job.track_levels)?
                .iter()
                .map(|e| e.state.fidelity(psi))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        traj.times.push(t);
        traj.observables.push(Observables {
            t,
            x0: params.x0,
            norm: psi.norm_sqr(),
            energy: energy_functional(psi, &params, job.g),
            mean_x: psi.expectation_x(),
            populations,
        });
        if job.store_snapshots {
            traj.snapshots.push(psi.clone());
        }
        Ok(())
    };
    record(&mut traj, &psi, 0.0)?;
    for i in 0..job.steps {
        let t_mid = (i as f64 + 0.5) * job.dt;
        let params = (job.params_at)(t_mid);
        stepper.step(psi.amplitudes_mut(), &params, job.g)?;
        let t = (i + 1) as f64 * job.dt;
        let sum: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        if !sum.is_finite() {
            return Err(Error::NumericalBlowup { step: i + 1, time: t });
        }
        if (i + 1) % job.record_every == 0 || i + 1 == job.steps {
            record(&mut traj, &psi, t)?;
        }
    }
    traj.final_state = psi.normalize()?;
    Ok(traj)
}

fn steps_for(duration: f64, dt: f64) -> (usize, f64) {
    let steps = ((duration / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, duration / steps as f64)
}

/// Evolves `psi0` through the sweep schedule, updating the well position at
/// the midpoint of every step.
pub fn evolve(psi0: &WaveFunction, config: &PropagationConfig, u0: f64, sigma: f64) -> Result<Trajectory> {
    config.validate()?;
    let schedule = config.schedule;
    let base = PotentialParams::new(u0, sigma, schedule.x0_start)?;
    let duration = schedule.duration();
    if duration / config.dt < 100.0 {
        return Err(invalid(format!(
            "sweep of duration {duration} is not resolved by dt = {} (need at least 100 steps)",
            config.dt
        )));
    }
    let (steps, dt) = steps_for(duration, config.dt);
    let params_at = move |t: f64| base.with_x0(schedule.position(t));
    run(
        psi0,
        Run {
            method: config.method,
            dt,
            steps,
            g: config.g,
            record_every: config.record_every,
            store_snapshots: config.store_snapshots,
            track_levels: config.track_levels,
            params_at: &params_at,
        },
    )
}

/// Evolution in a fixed potential for `duration`, with time measured from zero.
pub fn evolve_static(
    psi0: &WaveFunction,
    params: &PotentialParams,
    config: &PropagationConfig,
    duration: f64,
) -> Result<Trajectory> {
    config.validate()?;
    params.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(invalid(format!("duration must be positive, got {duration}")));
    }
    let (steps, dt) = steps_for(duration, config.dt);
    let fixed = *params;
    let params_at = move |_t: f64| fixed;
    run(
        psi0,
        Run {
            method: config.method,
            dt,
            steps,
            g: config.g,
            record_every: config.record_every,
            store_snapshots: config.store_snapshots,
            track_levels: config.track_levels,
            params_at: &params_at,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Any,
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryTimeOptions {
    pub dtau: f64,
    /// Stop once the energy changes by less than this in one step of `dtau`.
    pub tol: f64,
    /// The step is quartered (and `tol` with it) after each converged stage
    /// until it drops below this value, removing the splitting bias of the
    /// relaxed state.
    pub min_dtau: f64,
    pub max_steps: usize,
    pub parity: Parity,
}

impl Default for ImaginaryTimeOptions {
    fn default() -> Self {
        Self {
            dtau: 0.005,
            tol: 1e-10,
            min_dtau: 1e-4,
            max_steps: 400_000,
            parity: Parity::Any,
        }
    }
}

/// Ground state of the (possibly nonlinear) problem by normalized
/// imaginary-time split-step relaxation.
pub fn imaginary_time_ground_state(grid: &Grid, params: &PotentialParams, g: f64, tol: f64) -> Result<WaveFunction> {
    imaginary_time_relax(
        grid,
        params,
        g,
        &ImaginaryTimeOptions {
            tol,
            ..Default::default()
        },
    )
}

/// Lowest state within the requested parity sector.
pub fn imaginary_time_relax(
    grid: &Grid,
    params: &PotentialParams,
    g: f64,
    opts: &ImaginaryTimeOptions,
) -> Result<WaveFunction> {
    params.validate()?;
    if [opts.tol, opts.dtau, opts.min_dtau].iter().any(|v| v.is_nan() || *v <= 0.0) {
        return Err(invalid("imaginary-time steps and tolerance must be positive"));
    }
    if opts.parity != Parity::Any && !grid.is_symmetric() {
        return Err(invalid("parity projection needs a grid symmetric about the origin"));
    }
    let n = grid.len();
    let dx = grid.dx();
    let ks = grid.wavenumbers();
    let v = params.sample(&grid.points());
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum = vec![Complex64::default(); n];
    let mut energy_of = |psi: &WaveFunction| -> f64 {
        spectrum.copy_from_slice(psi.amplitudes());
        forward.process(&mut spectrum);
        let kinetic: f64 = spectrum.iter().zip(&ks).map(|(a, k)| 0.5 * k * k * a.norm_sqr()).sum::<f64>() / n as f64;
        let rest: f64 = psi
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, v)| {
                let rho = a.norm_sqr();
                v * rho + 0.5 * g * rho * rho
            })
            .sum();
        (kinetic + rest) * dx
    };

    let mut psi = WaveFunction::from_fn(*grid, |x| {
        let gauss = (-0.5 * x * x).exp();
        Complex64::new(if opts.parity == Parity::Odd { x * gauss } else { gauss }, 0.0)
    })
    .normalize()?;
    let mut energy = energy_of(&psi);
    let (mut dtau, mut tol) = (opts.dtau, opts.tol);
    let mut total = 0;
    loop {
        let kinetic: Vec<f64> = ks.iter().map(|k| (-0.5 * k * k * dtau).exp() / n as f64).collect();
        let mut factor = vec![0.0; n];
        let mut converged = false;
        for step in 1..=opts.max_steps.saturating_sub(total) {
            for ((f, a), v) in factor.iter_mut().zip(psi.amplitudes()).zip(&v) {
                *f = (-0.5 * dtau * (v + g * a.norm_sqr())).exp();
            }
            psi.amplitudes_mut().iter_mut().zip(&factor).for_each(|(a, f)| *a *= f);
            forward.process(psi.amplitudes_mut());
            psi.amplitudes_mut().iter_mut().zip(&kinetic).for_each(|(a, k)| *a *= k);
            inverse.process(psi.amplitudes_mut());
            psi.amplitudes_mut().iter_mut().zip(&factor).for_each(|(a, f)| *a *= f);
            project_parity(&mut psi, opts.parity);
            psi = psi.normalize()?;
            let next = energy_of(&psi);
            if !next.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "imaginary-time energy diverged at step {}",
                    total + step
                )));
            }
            let change = (next - energy).abs();
            energy = next;
            if step >= 10 && change < tol {
                total += step;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NumericalFailure(format!(
                "imaginary-time relaxation did not converge to {:e} within {} steps (last energy {energy})",
                opts.tol, opts.max_steps
            )));
        }
        if dtau <= opts.min_dtau {
            return Ok(psi);
        }
        dtau /= 4.0;
        tol /= 4.0;
    }
}

fn project_parity(psi: &mut WaveFunction, parity: Parity) {
    let sign = match parity {
        Parity::Any => return,
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let grid = *psi.grid();
    let src = psi.amplitudes().to_vec();
    for (j, a) in psi.amplitudes_mut().iter_mut().enumerate() {
        *a = 0.5 * (src[j] + sign * src[grid.mirror_index(j)]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground() -> WaveFunction {
        WaveFunction::harmonic_state(Grid::default(), 0, 0.0).unwrap()
    }

    #[test]
    fn method_names() {
        assert_eq!("split-step".parse::<Method>().unwrap(), Method::SplitStep);
        assert_eq!("implicit-finite-difference".parse::<Method>().unwrap(), Method::CrankNicolson);
        assert!("rk4".parse::<Method>().is_err());
    }

    #[test]
    fn stationary_ground_state() {
        let psi0 = ground();
        let mut s = SplitStep::new(*psi0.grid(), 0.01);
        let mut psi = psi0.clone();
        for _ in 0..500 {
            s.step(psi.amplitudes_mut(), &PotentialParams::harmonic(), 0.0);
        }
        assert!((psi0.overlap(&psi).unwrap().norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coherent_state_oscillates() {
        let psi0 = WaveFunction::harmonic_state(Grid::default(), 0, 1.0).unwrap();
        let dt = 0.001;
        let mut s = SplitStep::new(*psi0.grid(), dt);
        let mut psi = psi0;
        for i in 1..=6284 {
            s.step(psi.amplitudes_mut(), &PotentialParams::harmonic(), 0.0);
            if i % 200 == 0 {
                let t = i as f64 * dt;
                assert!((psi.expectation_x() - t.cos()).abs() < 1e-4, "t = {t}");
            }
        }
    }

    #[test]
    fn single_step_function() {
        let psi = ground();
        let out = step(&psi, &PotentialParams::harmonic(), 0.01, 0.0).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-13);
        assert!(step(&psi, &PotentialParams::harmonic(), -0.01, 0.0).is_err());
    }

    #[test]
    fn energies_of_harmonic_states() {
        let p = PotentialParams::harmonic();
        assert!((energy_functional(&ground(), &p, 0.0) - 0.5).abs() < 1e-4);
        let psi1 = WaveFunction::harmonic_state(Grid::default(), 1, 0.0).unwrap();
        assert!((energy_functional(&psi1, &p, 0.0) - 1.5).abs() < 1e-4);
    }

    #[test]
    fn imaginary_time_harmonic() {
        let g = Grid::default();
        let psi = imaginary_time_ground_state(&g, &PotentialParams::harmonic(), 0.0, 1e-10).unwrap();
        assert!((energy_functional(&psi, &PotentialParams::harmonic(), 0.0) - 0.5).abs() < 1e-5);
        assert!(psi.fidelity(&ground()).unwrap() > 0.99999);
    }

    #[test]
    fn odd_sector_gives_first_excited() {
        let g = Grid::default();
        let opts = ImaginaryTimeOptions {
            parity: Parity::Odd,
            ..Default::default()
        };
        let psi = imaginary_time_relax(&g, &PotentialParams::harmonic(), 0.0, &opts).unwrap();
        let psi1 = WaveFunction::harmonic_state(g, 1, 0.0).unwrap();
        assert!(psi.fidelity(&psi1).unwrap() > 0.99999);
    }

    #[test]
    fn parity_needs_symmetric_grid() {
        let g = Grid::new(-10.0, 14.0, 256).unwrap();
        let opts = ImaginaryTimeOptions {
            parity: Parity::Even,
            ..Default::default()
        };
        assert!(imaginary_time_relax(&g, &PotentialParams::harmonic(), 0.0, &opts).is_err());
    }

    #[test]
    fn evolve_needs_resolved_schedule() {
        let schedule = SweepSchedule::new(-5.0, 0.0, 0.1).unwrap();
        let mut cfg = PropagationConfig::new(schedule, 0.0);
        cfg.dt = 1.0;
        assert!(evolve(&ground(), &cfg, 6.4, 0.5).is_err());
    }

    #[test]
    fn crank_nicolson_preserves_norm() {
        let grid = Grid::new(-10.0, 10.0, 256).unwrap();
        let psi0 = WaveFunction::harmonic_state(grid, 0, 1.0).unwrap();
        let mut cn = CrankNicolson::new(grid, 0.005);
        let mut psi = psi0;
        for _ in 0..400 {
            cn.step(psi.amplitudes_mut(), &PotentialParams::harmonic(), -1.0).unwrap();
        }
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-11);
        // Two time units of coherent motion: ⟨x⟩ = cos 2.
        assert!((psi.expectation_x() - 2f64.cos()).abs() < 1e-3);
    }

    #[test]
    fn observables_columnar() {
        let schedule = SweepSchedule::new(-1.0, 0.0, 1.0).unwrap();
        let mut cfg = PropagationConfig::new(schedule, 0.0);
        cfg.dt = 0.005;
        cfg.record_every = 50;
        cfg.track_levels = 2;
        let traj = evolve(&ground(), &cfg, 1.0, 0.5).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert_eq!(traj.snapshots.len(), 5);
        let mut buf = Vec::new();
        traj.write_observables(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# t  x0  norm  energy  <x>  P0  P1"));
        let last: Vec<f64> = text.lines().last().unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
        assert_eq!(last.len(), 7);
        assert_eq!(last[1], 0.0);
    }
}
