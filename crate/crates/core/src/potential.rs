//! Trap potential with a swept Gaussian well, and the well-position schedule.
//!
//! All quantities are in trap oscillator units: time in `ωt`, length in
//! `sqrt(ħ/mω)`, energy in `ħω`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Harmonic trap plus a Gaussian well whose depth scales with `arctan(x0)`:
///
/// `V(x) = x²/2 + u0·arctan(x0)·exp(−(x − x0)² / (2σ²))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub u0: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl PotentialParams {
    pub fn new(u0: f64, sigma: f64, x0: f64) -> Result<Self> {
        let p = Self { u0, sigma, x0 };
        p.validate()?;
        Ok(p)
    }

    /// Bare harmonic trap.
    pub fn harmonic() -> Self {
        Self {
            u0: 0.0,
            sigma: 1.0,
            x0: 0.0,
        }
    }

    pub fn with_x0(self, x0: f64) -> Self {
        Self { x0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u0.is_finite() && self.sigma.is_finite() && self.x0.is_finite()) {
            return Err(invalid(format!("non-finite potential parameters {self:?}")));
        }
        if self.sigma <= 0.0 {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Signed well amplitude `u0·arctan(x0)`; negative (a well) for `u0 > 0, x0 < 0`.
    pub fn well_depth(&self) -> f64 {
        self.u0 * self.x0.atan()
    }

    /// Potential value without validation; callers on hot paths validate once up front.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let d = x - self.x0;
        0.5 * x * x + self.well_depth() * (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !x.is_finite() {
            return Err(invalid(format!("non-finite position {x}")));
        }
        Ok(self.value(x))
    }

    /// Samples the potential on a set of points.
    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xs.len()];
        self.sample_into(xs, &mut out);
        out
    }

    pub fn sample_into(&self, xs: &[f64], out: &mut [f64]) {
        let depth = self.well_depth();
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        for (v, &x) in out.iter_mut().zip(xs) {
            let d = x - self.x0;
            let gauss = if depth == 0.0 { 0.0 } else { depth * (-d * d * inv).exp() };
            *v = 0.5 * x * x + gauss;
        }
    }
}

/// Free-function form of [`PotentialParams::evaluate`].
pub fn evaluate(params: &PotentialParams, x: f64) -> Result<f64> {
    params.evaluate(x)
}

/// Linear schedule of the well centre, `x0(t)`, moving at constant speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub x0_start: f64,
    pub x0_end: f64,
    /// Speed magnitude; the direction follows from the endpoints.
    pub velocity: f64,
}

impl SweepSchedule {
    pub fn new(x0_start: f64, x0_end: f64, velocity: f64) -> Result<Self> {
        let s = Self {
            x0_start,
            x0_end,
            velocity,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0_start.is_finite() && self.x0_end.is_finite()) {
            return Err(invalid("non-finite schedule endpoints"));
        }
        if !(self.velocity.is_finite() && self.velocity > 0.0) {
            return Err(invalid(format!(
                "sweep velocity must be positive, got {}",
                self.velocity
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        (self.x0_end - self.x0_start).abs() / self.velocity
    }

    #[inline]
    pub(crate) fn position(&self, t: f64) -> f64 {
        if t >= self.duration() {
            return self.x0_end;
        }
        let dir = (self.x0_end - self.x0_start).signum();
        self.x0_start + dir * self.velocity * t
    }

    /// Well position at time `t`; clamps to `x0_end` once the sweep is over.
    pub fn x0_at(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid(format!("schedule time must be >= 0, got {t}")));
        }
        Ok(self.position(t))
    }
}

/// Free-function form of [`SweepSchedule::x0_at`].
pub fn x0_at(schedule: &SweepSchedule, t: f64) -> Result<f64> {
    schedule.x0_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishes_at_centre() {
        let p = PotentialParams::new(6.4, 0.5, 0.0).unwrap();
        for x in [-7.0, -1.3, 0.0, 2.2, 11.0] {
            assert_eq!(p.evaluate(x).unwrap(), 0.5 * x * x);
        }
    }

    #[test]
    fn deep_well_at_the_edge() {
        // Oracle: 12.5 + 6.4 * atan(-5), atan(-5) = -1.3734007669450159
        let p = PotentialParams::new(6.4, 0.5, -5.0).unwrap();
        let expected = 12.5 + 6.4 * -1.373_400_766_945_016;
        assert!((p.evaluate(-5.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 3.7102).abs() < 1e-4);
        assert!(p.evaluate(0.0).unwrap().abs() < 1e-20);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PotentialParams::new(1.0, 0.0, 0.0).is_err());
        assert!(PotentialParams::new(f64::NAN, 0.5, 0.0).is_err());
        let p = PotentialParams::new(1.0, 0.5, -1.0).unwrap();
        assert!(p.evaluate(f64::INFINITY).is_err());
    }

    #[test]
    fn schedule_points() {
        let s = SweepSchedule::new(-5.0, 0.0, 0.1).unwrap();
        assert_eq!(s.duration(), 50.0);
        assert_eq!(s.x0_at(0.0).unwrap(), -5.0);
        assert_eq!(s.x0_at(50.0).unwrap(), 0.0);
        assert!((s.x0_at(25.0).unwrap() + 2.5).abs() < 1e-14);
        assert_eq!(s.x0_at(80.0).unwrap(), 0.0);
        assert!(s.x0_at(-1.0).is_err());
        assert!(SweepSchedule::new(-5.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn reversed_schedule_moves_left() {
        let s = SweepSchedule::new(2.0, -2.0, 0.5).unwrap();
        assert_eq!(s.duration(), 8.0);
        assert!((s.x0_at(2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn harmonic_when_unperturbed(x in -20.0..20.0f64, x0 in -6.0..6.0f64, sigma in 0.05..3.0f64) {
            let a = PotentialParams::new(0.0, sigma, x0).unwrap();
            prop_assert_eq!(a.evaluate(x).unwrap(), 0.5 * x * x);
        }

        #[test]
        fn centre_perturbation_bound(x0 in -6.0..-0.1f64, sigma in 0.1..2.0f64, u0 in 0.0..20.0f64) {
            let p = PotentialParams::new(u0, sigma, x0).unwrap();
            let bound = u0 * std::f64::consts::FRAC_PI_2 * (-x0 * x0 / (2.0 * sigma * sigma)).exp();
            prop_assert!(p.evaluate(0.0).unwrap().abs() <= bound);
        }

        #[test]
        fn depth_shrinks_towards_centre(a in -6.0..-0.01f64, b in -6.0..-0.01f64) {
            let (near, far) = if a > b { (a, b) } else { (b, a) };
            let pn = PotentialParams::new(6.4, 0.5, near).unwrap();
            let pf = PotentialParams::new(6.4, 0.5, far).unwrap();
            prop_assert!(pn.well_depth().abs() <= pf.well_depth().abs());
        }

        #[test]
        fn schedule_monotone(t1 in 0.0..60.0f64, t2 in 0.0..60.0f64) {
            let s = SweepSchedule::new(-5.0, 0.0, 0.1).unwrap();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(s.x0_at(lo).unwrap() <= s.x0_at(hi).unwrap());
        }
    }
}
