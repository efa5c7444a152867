//! Transfer probability, the Landau–Zener estimate, the beating two-level
//! density and binomial statistics of an `N`-particle product state.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::spectrum::{AvoidedCrossing, EigenPair, LevelScan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    /// Population of basis state 1.
    pub p: f64,
    pub populations: Vec<f64>,
    /// `1 − Σ populations`.
    pub leakage: f64,
}

/// Projects a final state onto an orthonormal basis; `p` is the population
/// of the second basis state.
pub fn transfer_probability(psi_final: &WaveFunction, basis: &[EigenPair]) -> Result<TransferResult> {
    if basis.len() < 2 {
        return Err(Error::InvalidBasis(format!("need at least 2 basis states, got {}", basis.len())));
    }
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let o = a.state.overlap(&b.state)?;
            let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            if (o.re - expect).abs() > 1e-6 || o.im.abs() > 1e-6 {
                return Err(Error::InvalidBasis(format!("basis overlap {o} where {expect} was expected")));
            }
        }
    }
    let populations = basis
        .iter()
        .map(|b| b.state.fidelity(psi_final))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TransferResult {
        p: populations[1],
        leakage: 1.0 - populations.iter().sum::<f64>(),
        populations,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Probability that exactly `k` of `n` independent particles are excited,
/// for `k = 0..=n`, evaluated in log space.
pub fn binomial_distribution(p: f64, n: usize) -> Result<Vec<f64>> {
    check_probability(p)?;
    if n == 0 {
        return Err(invalid("particle number must be at least 1"));
    }
    let mut out = vec![0.0; n + 1];
    if p == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if p == 1.0 {
        out[n] = 1.0;
        return Ok(out);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        *slot = (ln_choose + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
    Ok(out)
}

/// Energy statistics (in `ħω`) of `n` independent particles each excited
/// with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_particles: usize,
    pub mean_energy: f64,
    pub variance_energy: f64,
}

pub fn ensemble_stats(p: f64, n: usize) -> Result<EnsembleStats> {
    check_probability(p)?;
    if n == 0 {
        return Err(invalid("particle number must be at least 1"));
    }
    let nf = n as f64;
    Ok(EnsembleStats {
        n_particles: n,
        mean_energy: (p + 0.5) * nf,
        variance_energy: nf * p * (1.0 - p),
    })
}

/// Single-particle density of the two-level superposition left after the
/// sweep, `(1−p)ψ0² + pψ1² + 2√(p(1−p)) cos t ψ0ψ1`, with the harmonic
/// eigenfunctions sampled on the grid.
pub fn reduced_density(p: f64, t: f64, grid: &Grid) -> Result<Vec<f64>> {
    check_probability(p)?;
    if !t.is_finite() {
        return Err(invalid("non-finite time"));
    }
    let psi0 = WaveFunction::harmonic_state(*grid, 0, 0.0)?;
    let psi1 = WaveFunction::harmonic_state(*grid, 1, 0.0)?;
    let cross = 2.0 * (p * (1.0 - p)).sqrt() * t.cos();
    Ok(psi0
        .amplitudes()
        .iter()
        .zip(psi1.amplitudes())
        .map(|(a, b)| (1.0 - p) * a.re * a.re + p * b.re * b.re + cross * a.re * b.re)
        .collect())
}

/// Writes `x density` rows with `p` and `t` in the header.
pub fn write_density<W: Write>(mut out: W, grid: &Grid, density: &[f64], p: f64, t: f64) -> Result<()> {
    writeln!(out, "# reduced density: p = {p} t = {t}")?;
    writeln!(out, "# x  density")?;
    for (j, d) in density.iter().enumerate() {
        writeln!(out, "{:e} {:e}", grid.x(j), d)?;
    }
    Ok(())
}

/// Landau–Zener probability of staying on the diabatic branch,
/// `exp(−2π (gap/2)² / (velocity · slope_diff))`.
pub fn lz_estimate(gap: f64, slope_diff: f64, velocity: f64) -> Result<f64> {
    if !(gap >= 0.0 && slope_diff > 0.0 && velocity > 0.0) {
        return Err(invalid(format!(
            "LZ estimate needs gap >= 0, slope > 0, velocity > 0 (got {gap}, {slope_diff}, {velocity})"
        )));
    }
    let coupling = 0.5 * gap;
    Ok((-2.0 * PI * coupling * coupling / (velocity * slope_diff)).exp())
}

/// Diabatic slope `|d(E_hi − E_lo)/dx0|` around a crossing.
///
/// On each side the scanned gap is mapped through the two-level hyperbola,
/// `√(ΔE² − gap²) = s·|x0 − x0*|`, and `s` fitted through the origin over
/// points within `half_window`; the two sides are averaged.
pub fn diabatic_slope(
    scan: &LevelScan,
    crossing: &AvoidedCrossing,
    level_lo: usize,
    level_hi: usize,
    half_window: f64,
) -> Result<f64> {
    if level_hi >= scan.levels() || level_lo >= level_hi {
        return Err(invalid(format!("levels ({level_lo}, {level_hi}) not available in scan")));
    }
    let mut sides = [(0.0, 0.0, 0usize); 2];
    for (x0, row) in scan.x0_values.iter().zip(&scan.energies) {
        let d = x0 - crossing.x0_star;
        if d == 0.0 || d.abs() > half_window {
            continue;
        }
        let delta = row[level_hi] - row[level_lo];
        let y = (delta * delta - crossing.gap * crossing.gap).max(0.0).sqrt();
        let side = &mut sides[usize::from(d > 0.0)];
        side.0 += y * d.abs();
        side.1 += d * d;
        side.2 += 1;
    }
    if sides.iter().any(|s| s.2 < 2) {
        return Err(invalid(format!(
            "need at least two scan points on each side of x0* = {} within {half_window}",
            crossing.x0_star
        )));
    }
    Ok(sides.iter().map(|s| s.0 / s.1).sum::<f64>() / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatPeriod {
    pub period: f64,
    pub amplitude: f64,
    pub crossings: usize,
    /// Set when the oscillation is resolvable but small.
    pub weak: bool,
}

const BEAT_MIN_AMPLITUDE: f64 = 1e-3;
const BEAT_WEAK_AMPLITUDE: f64 = 0.05;

/// Oscillation period of `⟨x⟩(t)` from its interpolated zero crossings.
pub fn beat_period(times: &[f64], mean_x: &[f64]) -> Result<BeatPeriod> {
    if times.len() != mean_x.len() || times.len() < 3 {
        return Err(invalid("beat analysis needs matching series of at least 3 samples"));
    }
    let amplitude = mean_x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if amplitude <= BEAT_MIN_AMPLITUDE {
        return Err(Error::WeakSignal { amplitude });
    }
    let mut zeros = Vec::new();
    for i in 1..times.len() {
        let (a, b) = (mean_x[i - 1], mean_x[i]);
        if a == 0.0 && i == 1 {
            zeros.push(times[0]);
        }
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            zeros.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    if zeros.len() < 2 {
        return Err(invalid(format!(
            "only {} zero crossing(s) recorded; need at least two",
            zeros.len()
        )));
    }
    let weak = amplitude < BEAT_WEAK_AMPLITUDE;
    if weak {
        log::warn!("weak beat signal: <x> amplitude {amplitude:.3e}");
    }
    let span = zeros[zeros.len() - 1] - zeros[0];
    Ok(BeatPeriod {
        period: 2.0 * span / (zeros.len() - 1) as f64,
        amplitude,
        crossings: zeros.len(),
        weak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialParams;
    use crate::spectrum::{build_hamiltonian, lowest_eigenpairs};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn basis() -> Vec<EigenPair> {
        lowest_eigenpairs(&build_hamiltonian(&Grid::default(), &PotentialParams::harmonic()), 3).unwrap()
    }

    #[test]
    fn transfer_of_pure_and_mixed_states() {
        let b = basis();
        let r = transfer_probability(&b[1].state, &b).unwrap();
        assert!((r.p - 1.0).abs() < 1e-12);
        assert!(r.leakage.abs() < 1e-10);
        let amps: Vec<Complex64> = b[0]
            .state
            .amplitudes()
            .iter()
            .zip(b[1].state.amplitudes())
            .map(|(a, c)| (a + c) * FRAC_1_SQRT_2)
            .collect();
        let sup = WaveFunction::new(Grid::default(), amps).unwrap();
        let r = transfer_probability(&sup, &b).unwrap();
        assert!((r.p - 0.5).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_basis() {
        let mut b = basis();
        b[1] = b[0].clone();
        assert!(matches!(transfer_probability(&b[0].state, &b), Err(Error::InvalidBasis(_))));
        assert!(transfer_probability(&b[0].state, &b[..1]).is_err());
    }

    #[test]
    fn binomial_small_cases() {
        assert_eq!(binomial_distribution(0.0, 7).unwrap()[0], 1.0);
        assert_eq!(binomial_distribution(1.0, 7).unwrap()[7], 1.0);
        let d = binomial_distribution(0.5, 2).unwrap();
        for (a, b) in d.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(binomial_distribution(1.5, 3).is_err());
        assert!(binomial_distribution(0.5, 0).is_err());
    }

    #[test]
    fn binomial_large_n_moments() {
        let d = binomial_distribution(0.97, 1000).unwrap();
        let total: f64 = d.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = d.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
        let var: f64 = d.iter().enumerate().map(|(k, w)| (k as f64 - mean).powi(2) * w).sum();
        assert!((mean - 970.0).abs() < 1e-9);
        assert!((var - 29.1).abs() < 1e-8);
    }

    #[test]
    fn ensemble_values() {
        let s = ensemble_stats(1.0, 100).unwrap();
        assert_eq!((s.mean_energy, s.variance_energy), (150.0, 0.0));
        let s = ensemble_stats(0.97, 1000).unwrap();
        assert!((s.mean_energy - 1470.0).abs() < 1e-9);
        assert!((s.variance_energy - 29.1).abs() < 1e-9);
        let s = ensemble_stats(0.0, 40).unwrap();
        assert_eq!((s.mean_energy, s.variance_energy), (20.0, 0.0));
    }

    #[test]
    fn density_special_times() {
        let g = Grid::default();
        let psi0 = WaveFunction::harmonic_state(g, 0, 0.0).unwrap();
        let psi1 = WaveFunction::harmonic_state(g, 1, 0.0).unwrap();
        let pure = reduced_density(1.0, 0.7, &g).unwrap();
        for (d, a) in pure.iter().zip(psi1.amplitudes()) {
            assert!((d - a.re * a.re).abs() < 1e-15);
        }
        let quarter = reduced_density(0.97, PI / 2.0, &g).unwrap();
        for ((d, a), b) in quarter.iter().zip(psi0.amplitudes()).zip(psi1.amplitudes()) {
            assert!((d - (0.03 * a.re * a.re + 0.97 * b.re * b.re)).abs() < 1e-12);
        }
        let start = reduced_density(0.97, 0.0, &g).unwrap();
        let half = reduced_density(0.97, PI, &g).unwrap();
        for j in 1..g.len() {
            assert!((half[j] - start[g.mirror_index(j)]).abs() < 1e-12);
        }
        assert!(reduced_density(-0.1, 0.0, &g).is_err());
    }

    #[test]
    fn lz_limits() {
        assert_eq!(lz_estimate(0.0, 3.0, 0.1).unwrap(), 1.0);
        assert!(lz_estimate(0.05, 3.0, 1e-9).unwrap() < 1e-100);
        assert!(lz_estimate(0.05, 0.0, 0.1).is_err());
    }

    #[test]
    fn beat_of_exact_superposition() {
        let times: Vec<f64> = (0..=1300).map(|i| i as f64 * 0.01).collect();
        let xs: Vec<f64> = times.iter().map(|t| FRAC_1_SQRT_2 * t.cos()).collect();
        let b = beat_period(&times, &xs).unwrap();
        assert!((b.period - 2.0 * PI).abs() < 2.0 * PI * 1e-3);
        assert!(!b.weak);
        let flat = vec![0.0; times.len()];
        assert!(matches!(beat_period(&times, &flat), Err(Error::WeakSignal { .. })));
        let small: Vec<f64> = times.iter().map(|t| 0.01 * t.cos()).collect();
        assert!(beat_period(&times, &small).unwrap().weak);
    }

    #[test]
    fn slope_from_synthetic_hyperbola() {
        let gap = 0.04;
        let s = 2.5;
        let x0_values: Vec<f64> = (0..=40).map(|i| -4.0 + i as f64 * 0.025).collect();
        let energies = x0_values
            .iter()
            .map(|x| {
                let d = (gap * gap + (s * (x + 3.5)).powi(2)).sqrt();
                vec![0.0, d, 5.0]
            })
            .collect();
        let scan = LevelScan {
            u0: 1.0,
            sigma: 0.5,
            x0_values,
            energies,
        };
        let c = AvoidedCrossing {
            x0_star: -3.5,
            gap,
            mean_spacing: 2.5,
        };
        assert!((diabatic_slope(&scan, &c, 0, 1, 0.3).unwrap() - s).abs() < 1e-9);
        assert!(diabatic_slope(&scan, &c, 0, 1, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn density_integrates_to_one(p in 0.0..=1.0f64, t in -20.0..20.0f64) {
            let g = Grid::new(-12.0, 12.0, 256).unwrap();
            let d = reduced_density(p, t, &g).unwrap();
            let total: f64 = d.iter().sum::<f64>() * g.dx();
            prop_assert!((total - 1.0).abs() < 1e-8);
            prop_assert!(d.iter().all(|v| *v >= -1e-10));
            let later = reduced_density(p, t + 2.0 * PI, &g).unwrap();
            for (a, b) in d.iter().zip(&later) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn stats_match_distribution_moments(p in 0.0..=1.0f64, n in 1usize..400) {
            let d = binomial_distribution(p, n).unwrap();
            let mean_k: f64 = d.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
            let var_k: f64 = d.iter().enumerate().map(|(k, w)| (k as f64 - mean_k).powi(2) * w).sum();
            let s = ensemble_stats(p, n).unwrap();
            let mean_e = mean_k + 0.5 * n as f64;
            prop_assert!((s.mean_energy - mean_e).abs() <= 1e-10 * s.mean_energy.max(1.0));
            prop_assert!((s.variance_energy - var_k).abs() <= 1e-10 * s.variance_energy.max(1.0));
            prop_assert!(s.mean_energy >= 0.5 * n as f64 && s.mean_energy <= 1.5 * n as f64);
        }

        #[test]
        fn lz_monotone(g1 in 0.0..0.5f64, g2 in 0.0..0.5f64, v1 in 0.01..1.0f64, v2 in 0.01..1.0f64) {
            let (glo, ghi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            prop_assert!(lz_estimate(glo, 3.0, 0.1).unwrap() >= lz_estimate(ghi, 3.0, 0.1).unwrap());
            let (vlo, vhi) = if v1 < v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(lz_estimate(0.05, 3.0, vlo).unwrap() <= lz_estimate(0.05, 3.0, vhi).unwrap());
        }
    }
}
