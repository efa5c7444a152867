//! Instantaneous eigenproblem of a particle in the swept-well trap, level
//! dynamics along the well position, and avoided-crossing location.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::SymmetricBanded;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::potential::PotentialParams;

/// Central-difference stencil for the kinetic term, with hard walls at the
/// domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Three-point, second order (tridiagonal).
    Second,
    /// Five-point, fourth order.
    Fourth,
    /// Seven-point, sixth order.
    #[default]
    Sixth,
}

impl Stencil {
    /// Second-derivative weights `c_0, c_1, …` for offsets `0, ±1, …`.
    pub fn weights(self) -> &'static [f64] {
        match self {
            Stencil::Second => &[-2.0, 1.0],
            Stencil::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            Stencil::Sixth => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        }
    }

    pub fn half_bandwidth(self) -> usize {
        self.weights().len() - 1
    }
}

impl std::str::FromStr for Stencil {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "second" => Ok(Stencil::Second),
            "4" | "fourth" => Ok(Stencil::Fourth),
            "6" | "sixth" => Ok(Stencil::Sixth),
            other => Err(invalid(format!("unknown stencil '{other}' (expected second, fourth or sixth)"))),
        }
    }
}

/// Discrete single-particle Hamiltonian on a grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    matrix: SymmetricBanded,
}

impl Hamiltonian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &SymmetricBanded {
        &self.matrix
    }
}

pub fn build_hamiltonian(grid: &Grid, params: &PotentialParams) -> Hamiltonian {
    build_hamiltonian_with(grid, params, Stencil::default())
}

/// `−½ d²/dx²` by central differences plus the diagonal potential.
pub fn build_hamiltonian_with(grid: &Grid, params: &PotentialParams, stencil: Stencil) -> Hamiltonian {
    let n = grid.len();
    let w = stencil.weights();
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let diag = params
        .sample(&grid.points())
        .into_iter()
        .map(|v| v - 0.5 * w[0] * inv_dx2)
        .collect();
    let off = w[1..].iter().enumerate().map(|(d, c)| vec![-0.5 * c * inv_dx2; n - d - 1]).collect();
    let matrix = SymmetricBanded::new(diag, off).expect("band lengths follow from the grid size");
    Hamiltonian { grid: *grid, matrix }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub energy: f64,
    pub state: WaveFunction,
}

/// The `k` lowest eigenpairs in ascending energy order.
///
/// States are real, normalized on the grid, and signed so that the leftmost
/// point of largest magnitude is positive.
pub fn lowest_eigenpairs(h: &Hamiltonian, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 {
        return Err(invalid("at least one eigenpair must be requested"));
    }
    if k > h.grid.len() / 4 {
        return Err(invalid(format!("{k} levels requested on a {}-point grid", h.grid.len())));
    }
    let inv_sqrt_dx = 1.0 / h.grid.dx().sqrt();
    h.matrix
        .lowest_eigenpairs(k)?
        .into_iter()
        .map(|(energy, mut v)| {
            fix_sign(&mut v);
            v.iter_mut().for_each(|x| *x *= inv_sqrt_dx);
            Ok(EigenPair {
                energy,
                state: WaveFunction::from_real(h.grid, &v)?,
            })
        })
        .collect()
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-6)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Lowest `k` energies at a single well position.
pub fn lowest_energies(grid: &Grid, params: &PotentialParams, k: usize) -> Vec<f64> {
    build_hamiltonian(grid, params).matrix.lowest_eigenvalues(k)
}

/// Energies of the lowest levels tabulated along the well position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScan {
    pub u0: f64,
    pub sigma: f64,
    pub x0_values: Vec<f64>,
    /// `energies[i][level]` at `x0_values[i]`.
    pub energies: Vec<Vec<f64>>,
}

impl LevelScan {
    pub fn levels(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    /// `E_hi − E_lo` at every scan point.
    pub fn gaps(&self, lo: usize, hi: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[hi] - e[lo]).collect()
    }

    pub fn write_columnar<W: Write>(&self, mut out: W, header: &[String]) -> Result<()> {
        writeln!(out, "# level dynamics: u0 = {} sigma = {}", self.u0, self.sigma)?;
        for line in header {
            writeln!(out, "# {line}")?;
        }
        let cols: Vec<String> = (0..self.levels()).map(|i| format!("E{i}")).collect();
        writeln!(out, "# x0  {}", cols.join("  "))?;
        for (x0, row) in self.x0_values.iter().zip(&self.energies) {
            write!(out, "{x0:e}")?;
            for e in row {
                write!(out, " {e:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Tabulates the lowest `k` levels at `n_scan` evenly spaced well positions.
pub fn level_dynamics(
    grid: &Grid,
    u0: f64,
    sigma: f64,
    x0_range: (f64, f64),
    k: usize,
    n_scan: usize,
) -> Result<LevelScan> {
    if n_scan < 2 {
        return Err(invalid(format!("a level scan needs at least 2 points, got {n_scan}")));
    }
    if k == 0 {
        return Err(invalid("a level scan needs at least one level"));
    }
    PotentialParams::new(u0, sigma, x0_range.0)?;
    PotentialParams::new(u0, sigma, x0_range.1)?;
    let (a, b) = x0_range;
    let x0_values: Vec<f64> = (0..n_scan)
        .map(|i| a + (b - a) * i as f64 / (n_scan - 1) as f64)
        .collect();
    let energies = x0_values
        .par_iter()
        .map(|&x0| lowest_energies(grid, &PotentialParams { u0, sigma, x0 }, k))
        .collect();
    Ok(LevelScan {
        u0,
        sigma,
        x0_values,
        energies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidedCrossing {
    pub x0_star: f64,
    pub gap: f64,
    pub mean_spacing: f64,
}

impl AvoidedCrossing {
    pub const DEFAULT_NARROWNESS: f64 = 0.25;

    pub fn is_narrow(&self, threshold: f64) -> bool {
        self.gap < threshold * self.mean_spacing
    }
}

const CROSSING_SCAN_POINTS: usize = 61;
const GOLDEN_TOL: f64 = 1e-5;

/// Locates the minimum of `E_hi − E_lo` inside `x0_range` by a coarse scan
/// followed by golden-section refinement.
pub fn find_avoided_crossing(
    grid: &Grid,
    u0: f64,
    sigma: f64,
    level_lo: usize,
    level_hi: usize,
    x0_range: (f64, f64),
) -> Result<AvoidedCrossing> {
    if level_hi <= level_lo {
        return Err(invalid(format!("levels must satisfy lo < hi, got ({level_lo}, {level_hi})")));
    }
    let k = level_hi + 2;
    let scan = level_dynamics(grid, u0, sigma, x0_range, k, CROSSING_SCAN_POINTS)?;
    let gaps = scan.gaps(level_lo, level_hi);
    let (imin, gmin) = gaps
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, g)| if g < best.1 { (i, g) } else { best });
    let edge = gaps[0].min(gaps[gaps.len() - 1]);
    if imin == 0 || imin == gaps.len() - 1 || gmin >= edge - 1e-8 * edge.abs().max(1.0) {
        return Err(Error::NoCrossingFound(format!(
            "gap between levels {level_lo} and {level_hi} has no interior minimum in [{}, {}]",
            x0_range.0, x0_range.1
        )));
    }

    let gap_at = |x0: f64| {
        let e = lowest_energies(grid, &PotentialParams { u0, sigma, x0 }, level_hi + 1);
        e[level_hi] - e[level_lo]
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (scan.x0_values[imin - 1], scan.x0_values[imin + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (gap_at(c), gap_at(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap_at(d);
        }
    }
    let x0_star = 0.5 * (a + b);
    let e = lowest_energies(grid, &PotentialParams { u0, sigma, x0: x0_star }, level_hi + 2);
    Ok(AvoidedCrossing {
        x0_star,
        gap: e[level_hi] - e[level_lo],
        mean_spacing: (e[level_hi + 1] - e[level_lo]) / (level_hi + 1 - level_lo) as f64,
    })
}
