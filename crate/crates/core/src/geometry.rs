//! Rotationally symmetric model spaces `dr² + s_K(r)² dθ²`.
//!
//! `K = 0` is Euclidean space, `K > 0` hyperbolic space of curvature `−K`,
//! whose Ricci tensor is exactly `−(n−1)K`. Radial functions reduce every
//! operator to an ODE in `r` with the weight `s_K(r)^{n−1}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::adaptive_simpson;
use crate::thresholds::{check_dimension, check_exponent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub n: u32,
    /// Curvature parameter `K ≥ 0`.
    #[serde(rename = "K")]
    pub k: f64,
}

impl ModelSpace {
    pub fn new(n: u32, k: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(k.is_finite() && k >= 0.0) {
            return Err(LabError::param(
                "K",
                format!("curvature parameter must be ≥ 0, got {k}"),
            ));
        }
        Ok(ModelSpace { n, k })
    }

    pub fn euclidean(n: u32) -> Result<Self> {
        Self::new(n, 0.0)
    }

    fn check_radius(r: f64) -> Result<()> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::Domain(format!(
                "radius must be positive, got {r}"
            )));
        }
        Ok(())
    }

    /// `s_K(r)`.
    pub fn warp(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        Ok(self.warp_unchecked(r))
    }

    /// `s′_K / s_K`.
    pub fn warp_log_derivative(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        Ok(self.log_derivative_unchecked(r))
    }

    pub(crate) fn warp_unchecked(&self, r: f64) -> f64 {
        if self.k == 0.0 {
            r
        } else {
            let sk = self.k.sqrt();
            (sk * r).sinh() / sk
        }
    }

    pub(crate) fn log_derivative_unchecked(&self, r: f64) -> f64 {
        if self.k == 0.0 {
            1.0 / r
        } else {
            let x = self.k.sqrt() * r;
            // coth loses accuracy for tiny x; fall back to its Laurent series.
            if x < 1e-4 {
                (1.0 / x + x / 3.0 - x * x * x / 45.0) * self.k.sqrt()
            } else {
                self.k.sqrt() / x.tanh()
            }
        }
    }

    /// Radial volume weight `s_K(r)^{n−1}` (without the sphere area).
    pub fn weight(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            self.warp_unchecked(r).powi(self.n as i32 - 1)
        }
    }

    /// Area of the unit sphere `S^{n−1}`.
    pub fn sphere_area(&self) -> f64 {
        // ω_0 = 2, ω_1 = 2π, ω_k = 2π ω_{k−2} / (k − 1)
        let k = self.n - 1;
        let (mut area, mut j) = if k.is_multiple_of(2) {
            (2.0, 0)
        } else {
            (2.0 * PI, 1)
        };
        while j < k {
            j += 2;
            area *= 2.0 * PI / (j - 1) as f64;
        }
        area
    }

    /// Volume of the geodesic ball of radius `R`.
    pub fn ball_volume(&self, radius: f64) -> Result<f64> {
        Self::check_radius(radius)?;
        let integral = adaptive_simpson(|t| self.weight(t), 0.0, radius, 1e-13);
        Ok(self.sphere_area() * integral)
    }
}

/// Value of a radial operator, flagged when it was obtained as a limit at a
/// critical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorValue {
    pub value: f64,
    pub degenerate: bool,
}

/// `Δ_p u = |u′|^{p−2}[(p−1)u″ + (n−1)(s′/s)u′]` for radial `u`.
///
/// At `u′ = 0` the value is the limit 0 when `p > 2` (flagged degenerate);
/// for `p < 2` the classical expression is singular and an error is returned.
/// Use the flux formulation of the solver near critical points.
pub fn radial_p_laplacian(
    p: f64,
    space: &ModelSpace,
    _u: f64,
    du: f64,
    ddu: f64,
    r: f64,
) -> Result<OperatorValue> {
    check_exponent(p)?;
    let lg = space.warp_log_derivative(r)?;
    let inner = (p - 1.0) * ddu + (space.n as f64 - 1.0) * lg * du;
    if du == 0.0 {
        if p == 2.0 {
            return Ok(OperatorValue {
                value: inner,
                degenerate: false,
            });
        }
        if p > 2.0 {
            return Ok(OperatorValue {
                value: 0.0,
                degenerate: true,
            });
        }
        return Err(LabError::Domain(format!(
            "p-Laplacian is singular at a critical point for p = {p} < 2"
        )));
    }
    Ok(OperatorValue {
        value: du.abs().powf(p - 2.0) * inner,
        degenerate: false,
    })
}

/// Scalar `(p−1)|v′|^{p−2}` by which `|∇v|^{p−2}A` acts on gradients parallel to `∇v`.
pub fn radial_l_coefficient(p: f64, dv: f64) -> Result<f64> {
    check_exponent(p)?;
    if dv == 0.0 || !dv.is_finite() {
        return Err(LabError::Domain("𝓛 coefficient needs ∇v ≠ 0".into()));
    }
    Ok((p - 1.0) * dv.abs().powf(p - 2.0))
}

/// `𝓛g = s^{1−n}(s^{n−1}(p−1)|v′|^{p−2} g′)′` for radial `g`, expanded with the
/// product rule from `v′, v″, g′, g″`.
pub fn apply_l_operator(
    p: f64,
    space: &ModelSpace,
    r: f64,
    dv: f64,
    ddv: f64,
    dg: f64,
    ddg: f64,
) -> Result<f64> {
    let c = radial_l_coefficient(p, dv)?;
    let lg = space.warp_log_derivative(r)?;
    let dc = (p - 1.0) * (p - 2.0) * dv.abs().powf(p - 4.0) * dv * ddv;
    Ok(c * ddg + dc * dg + (space.n as f64 - 1.0) * lg * c * dg)
}
