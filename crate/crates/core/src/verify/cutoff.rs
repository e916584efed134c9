//! Cutoff functions on `[0, R]` and sampled radial test functions.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::interp_cubic;

/// A radial function with its derivative, as consumed by the integral checks.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

/// Shape of the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaProfile {
    /// `η = 1` on `[0, 3R/4]`, then `1 − q(t)` with `q(t) = t²(3 − 2t)`,
    /// `t = (r − 3R/4)/(R/4)`. C¹, with `max |η′| = 6/R`.
    Smoothstep,
    /// Piecewise-linear through `(r_i, η_i)`; must start at 0 and end at `R`
    /// with `η = 0`.
    Tabulated { r: Vec<f64>, eta: Vec<f64> },
}

/// A validated cutoff on the ball of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    radius: f64,
    profile: EtaProfile,
}

pub fn cutoff_eta(radius: f64, profile: EtaProfile) -> Result<Cutoff> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(LabError::param(
            "R",
            format!("must be positive, got {radius}"),
        ));
    }
    if let EtaProfile::Tabulated { r, eta } = &profile {
        if r.len() != eta.len() || r.len() < 2 {
            return Err(LabError::Input(
                "cutoff table needs ≥ 2 matching (r, η) pairs".into(),
            ));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::Input(
                "cutoff radii must start at 0 and increase".into(),
            ));
        }
        if eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(LabError::Input("cutoff values must lie in [0, 1]".into()));
        }
        let last = r[r.len() - 1];
        if (last - radius).abs() > 1e-12 * radius || eta[eta.len() - 1] != 0.0 {
            return Err(LabError::Input(format!(
                "cutoff must be continuous and vanish at R = {radius} (table ends at r = {last} with η = {})",
                eta[eta.len() - 1]
            )));
        }
    }
    Ok(Cutoff { radius, profile })
}

impl Cutoff {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest `|η′|`.
    pub fn lipschitz(&self) -> f64 {
        match &self.profile {
            EtaProfile::Smoothstep => 6.0 / self.radius,
            EtaProfile::Tabulated { r, eta } => r
                .windows(2)
                .zip(eta.windows(2))
                .map(|(r, e)| ((e[1] - e[0]) / (r[1] - r[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    fn segment(r: &[f64], x: f64) -> usize {
        match r.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(r.len() - 2),
            Err(i) => i.saturating_sub(1).min(r.len() - 2),
        }
    }
}

impl RadialProfile for Cutoff {
    fn value(&self, x: f64) -> f64 {
        if x >= self.radius {
            return 0.0;
        }
        match &self.profile {
            EtaProfile::Smoothstep => {
                let t = (x - 0.75 * self.radius) / (0.25 * self.radius);
                if t <= 0.0 {
                    1.0
                } else {
                    1.0 - t * t * (3.0 - 2.0 * t)
                }
            }
            EtaProfile::Tabulated { r, eta } => {
                let i = Self::segment(r, x);
                let t = (x - r[i]) / (r[i + 1] - r[i]);
                eta[i] + t * (eta[i + 1] - eta[i])
            }
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        if x >= self.radius {
            return 0.0;
        }
        match &self.profile {
            EtaProfile::Smoothstep => {
                let t = (x - 0.75 * self.radius) / (0.25 * self.radius);
                if t <= 0.0 {
                    0.0
                } else {
                    -6.0 * t * (1.0 - t) * 4.0 / self.radius
                }
            }
            EtaProfile::Tabulated { r, eta } => {
                let i = Self::segment(r, x);
                (eta[i + 1] - eta[i]) / (r[i + 1] - r[i])
            }
        }
    }
}

/// Values and derivatives sampled on a uniform grid from `r = 0`, evaluated
/// by four-point interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub spacing: f64,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl SampledProfile {
    pub fn new(spacing: f64, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        if values.len() != derivatives.len() || values.len() < 4 {
            return Err(LabError::Input(
                "sampled profile needs ≥ 4 value/derivative pairs".into(),
            ));
        }
        if !(spacing > 0.0) {
            return Err(LabError::Input(
                "sampled profile spacing must be positive".into(),
            ));
        }
        Ok(SampledProfile {
            spacing,
            values,
            derivatives,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SampledProfile {
            spacing: self.spacing,
            values: self.values.iter().map(|v| v * factor).collect(),
            derivatives: self.derivatives.iter().map(|v| v * factor).collect(),
        }
    }
}

impl RadialProfile for SampledProfile {
    fn value(&self, r: f64) -> f64 {
        interp_cubic(0.0, self.spacing, &self.values, r)
    }

    fn derivative(&self, r: f64) -> f64 {
        interp_cubic(0.0, self.spacing, &self.derivatives, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smoothstep_values() {
        let r = 2.0;
        let eta = cutoff_eta(r, EtaProfile::Smoothstep).unwrap();
        assert_eq!(eta.value(0.7 * r), 1.0);
        assert_eq!(eta.value(r), 0.0);
        assert_abs_diff_eq!(eta.value(7.0 * r / 8.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eta.lipschitz(), 6.0 / r, epsilon = 1e-15);
        // the steepest point is the band midpoint
        assert_abs_diff_eq!(
            eta.derivative(7.0 * r / 8.0).abs(),
            6.0 / r,
            epsilon = 1e-14
        );
        let max_sampled = (0..=10_000)
            .map(|i| eta.derivative(r * i as f64 / 10_000.0).abs())
            .fold(0.0, f64::max);
        assert!(max_sampled <= 6.0 / r + 1e-12);
    }

    #[test]
    fn smoothstep_derivative_matches_differences() {
        let eta = cutoff_eta(1.0, EtaProfile::Smoothstep).unwrap();
        for x in [0.76, 0.8, 0.9, 0.99] {
            let h = 1e-6;
            let fd = (eta.value(x + h) - eta.value(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(eta.derivative(x), fd, epsilon = 1e-7);
        }
        // C¹ at both ends of the band
        assert_abs_diff_eq!(eta.derivative(0.75 + 1e-9), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(eta.derivative(1.0 - 1e-9), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn truncated_indicator_rejected() {
        let r = 2.0;
        let profile = EtaProfile::Tabulated {
            r: vec![0.0, 0.75 * r],
            eta: vec![1.0, 1.0],
        };
        assert!(matches!(cutoff_eta(r, profile), Err(LabError::Input(_))));
    }

    #[test]
    fn tabulated_ramp() {
        let eta = cutoff_eta(
            1.0,
            EtaProfile::Tabulated {
                r: vec![0.0, 0.5, 1.0],
                eta: vec![1.0, 1.0, 0.0],
            },
        )
        .unwrap();
        assert_abs_diff_eq!(eta.value(0.75), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eta.derivative(0.75), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eta.lipschitz(), 2.0, epsilon = 1e-15);
    }
}
