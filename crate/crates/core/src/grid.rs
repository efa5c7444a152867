//! Uniform periodic mesh and wavefunctions sampled on it.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform mesh `x_j = x_min + j·dx`, `j = 0..n`, with `dx = (x_max − x_min)/n`.
///
/// The right endpoint is excluded so the mesh is one period of a periodic
/// domain, which is what the spectral propagator assumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x_min: -12.0,
            x_max: 12.0,
            n: 1024,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(invalid(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(invalid(format!("grid size must be a power of two >= 16, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        (0..n)
            .map(|j| if j < n / 2 { j } else { j - n } as f64 * dk)
            .collect()
    }

    /// Index of the point at `−x_j` on the periodic mesh, when the domain is
    /// symmetric about the origin.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * (self.x_max - self.x_min)
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::IncompatibleGrids(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(invalid(format!(
                "amplitude vector has {} entries, grid has {}",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().into_iter().map(f).collect();
        Self { grid, amplitudes }
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Harmonic-oscillator eigenfunction `level`, centred at `shift`, sampled
    /// analytically and renormalized on the mesh. Sign convention is the
    /// usual Hermite one (`ψ1 ∝ x·exp(−x²/2)`).
    pub fn harmonic_state(grid: Grid, level: usize, shift: f64) -> Result<Self> {
        let values: Vec<f64> = grid
            .points()
            .into_iter()
            .map(|x| hermite_function(level, x - shift))
            .collect();
        Self::from_real(grid, &values)?.normalize()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
        self
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateState(format!("cannot normalize a state of norm {norm}")));
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(self)
    }

    /// `⟨self|other⟩ = Σ conj(a_j)·b_j·dx`.
    pub fn overlap(&self, other: &WaveFunction) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.grid.dx())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    pub fn expectation_x(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.x(j) * a.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// Writes `x re(psi) im(psi) |psi|^2` rows after `#`-prefixed header lines.
    pub fn write_columnar<W: Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# x  re(psi)  im(psi)  |psi|^2")?;
        for (j, a) in self.amplitudes.iter().enumerate() {
            writeln!(out, "{:e} {:e} {:e} {:e}", self.grid.x(j), a.re, a.im, a.norm_sqr())?;
        }
        Ok(())
    }
}

pub fn normalize(psi: WaveFunction) -> Result<WaveFunction> {
    psi.normalize()
}

pub fn overlap(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    a.overlap(b)
}

pub fn expectation_x(psi: &WaveFunction) -> f64 {
    psi.expectation_x()
}

/// Normalized Hermite function `h_n(x) = H_n(x)·exp(−x²/2) / sqrt(2ⁿ n! √π)`,
/// via the stable three-term recurrence.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}
