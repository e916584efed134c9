//! Logarithmic change of variables `v = (p−1) log u`.
//!
//! With `f = |∇v|^p` and `h = (p−1)^{p−1} e^{(σ/(p−1) − 1)v}` the equation
//! becomes `Δ_p v = −f − a h`, the form on which the Bochner-type
//! inequalities are stated.

use serde::{Deserialize, Serialize};

use super::{residual_window, RadialSolution, Termination};
use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::derivative;
use crate::thresholds::EquationParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSample {
    pub r: f64,
    pub v: f64,
    pub dv: f64,
    pub f: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSolution {
    pub params: EquationParams,
    pub space: ModelSpace,
    pub termination: Termination,
    pub samples: Vec<LogSample>,
    /// Relative residual of `Δ_p v + f + a h` (same contract as
    /// [`pde_residual`](super::pde_residual)); `None` if the record is too
    /// short or has no retained samples.
    pub residual: Option<f64>,
}

impl LogSolution {
    /// Recovers `u = exp(v/(p−1))` at every sample.
    pub fn u_values(&self) -> Vec<f64> {
        let p = self.params.p;
        self.samples
            .iter()
            .map(|s| (s.v / (p - 1.0)).exp())
            .collect()
    }

    pub fn spacing(&self) -> Result<f64> {
        super::uniform_spacing(self.samples.iter().map(|s| s.r))
    }
}

/// Pointwise transform of a positive solution, plus a finite-difference check
/// of the transformed equation.
pub fn to_log_solution(solution: &RadialSolution) -> Result<LogSolution> {
    let EquationParams { n, p, a, sigma } = solution.params;
    if let Some(s) = solution.samples.iter().find(|s| !(s.u > 0.0)) {
        return Err(LabError::Input(format!(
            "u must be positive, got {} at r = {}",
            s.u, s.r
        )));
    }
    let hc = (p - 1.0).powf(p - 1.0);
    let expo = sigma / (p - 1.0) - 1.0;
    let samples: Vec<LogSample> = solution
        .samples
        .iter()
        .map(|s| {
            let v = (p - 1.0) * s.u.ln();
            let dv = (p - 1.0) * s.du / s.u;
            LogSample {
                r: s.r,
                v,
                dv,
                f: dv.abs().powf(p),
                h: hc * (expo * v).exp(),
            }
        })
        .collect();

    let residual = if samples.len() >= 5 {
        transformed_residual(solution, &samples, n, p, a).ok()
    } else {
        None
    };

    Ok(LogSolution {
        params: solution.params,
        space: solution.space,
        termination: solution.termination,
        samples,
        residual,
    })
}

fn transformed_residual(
    solution: &RadialSolution,
    samples: &[LogSample],
    n: u32,
    p: f64,
    a: f64,
) -> Result<f64> {
    let h = solution.spacing()?;
    // |v′|^{p−2} v′ = (p−1)^{p−1} w / u^{p−1}
    let hc = (p - 1.0).powf(p - 1.0);
    let flux: Vec<f64> = solution
        .samples
        .iter()
        .map(|s| hc * s.w / s.u.powf(p - 1.0))
        .collect();
    let dflux = derivative(&flux, h)?;
    let radii: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let (lo, hi) = residual_window(&radii, &solution.termination);
    let n1 = n as f64 - 1.0;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in lo..=hi {
        let s = &samples[i];
        if s.r <= 0.0 {
            continue;
        }
        let lg = solution.space.log_derivative_unchecked(s.r);
        let lap = dflux[i] + n1 * lg * flux[i];
        worst = worst.max((lap + s.f + a * s.h).abs());
        scale = scale.max(s.f.abs() + (a * s.h).abs());
    }
    if scale == 0.0 {
        return Err(LabError::Input("no retained samples".into()));
    }
    Ok(worst / scale)
}
