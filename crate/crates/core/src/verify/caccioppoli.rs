//! The integrated inequality tested against `ψ = f^b η²`:
//!
//! ```text
//! ∫ [f^{1−2/p} f′ + (p−2) f^{1−4/p} (f′v′) v′] ψ′ + β ∫ f² ψ
//!     ≤ (n−1)Kp ∫ f^{2−2/p} ψ − [2(p−1)/(n−1) − p] ∫ f^{1−2/p} ψ f′v′
//! ```
//!
//! with every integral taken against `s^{n−1} dr` on `[0, R]`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cutoff::{cutoff_eta, EtaProfile, RadialProfile};
use super::CheckRecord;
use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::{derivative, interp_cubic, simpson};
use crate::solver::LogSolution;
use crate::thresholds::{beta, caccioppoli_b_min, EquationParams};

pub const TOL_QUAD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliConfig {
    pub b: f64,
    pub eta_profile: EtaProfile,
    pub quadrature_points: usize,
}

impl CaccioppoliConfig {
    pub fn new(b: f64) -> Self {
        CaccioppoliConfig {
            b,
            eta_profile: EtaProfile::Smoothstep,
            quadrature_points: 4001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    pub params: EquationParams,
    pub space: ModelSpace,
    #[serde(rename = "R")]
    pub radius: f64,
    pub b: f64,
    pub b_min: f64,
    pub beta: f64,
    /// Gradient pairing against `ψ′`.
    pub lhs_gradient: f64,
    /// `β ∫ f² ψ`.
    pub lhs_beta: f64,
    pub rhs_curvature: f64,
    pub rhs_cross: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub scale: f64,
    pub quadrature_points: usize,
    pub pass: bool,
}

impl CaccioppoliReport {
    pub fn lhs(&self) -> f64 {
        self.lhs_gradient + self.lhs_beta
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_curvature + self.rhs_cross
    }

    pub fn record(&self) -> CheckRecord {
        let mut rec = CheckRecord::new("caccioppoli", self.params, self.space, Some(self.radius))
            .metric("b", json!(self.b))
            .metric("b_min", json!(self.b_min))
            .metric("beta", json!(self.beta))
            .metric("lhs", json!(self.lhs()))
            .metric("rhs", json!(self.rhs()))
            .metric("lhs_gradient", json!(self.lhs_gradient))
            .metric("lhs_beta", json!(self.lhs_beta))
            .metric("rhs_curvature", json!(self.rhs_curvature))
            .metric("rhs_cross", json!(self.rhs_cross))
            .metric("slack", json!(self.slack))
            .metric("scale", json!(self.scale))
            .metric("sphere_area_dropped", json!(true))
            .tolerance("tol_quad", TOL_QUAD);
        rec.pass = self.pass;
        rec.samples_retained = self.quadrature_points;
        rec
    }
}

pub fn check_caccioppoli(
    log: &LogSolution,
    config: &CaccioppoliConfig,
    radius: f64,
) -> Result<CaccioppoliReport> {
    let params = log.params;
    let EquationParams { n, p, sigma, .. } = params;
    let bt = beta(n, p, sigma, params.sign())?;
    let b_min = caccioppoli_b_min(n, p, bt);
    let b = config.b;
    if !(b > b_min) {
        return Err(LabError::param(
            "b",
            format!("must exceed {b_min}, got {b}"),
        ));
    }
    if config.quadrature_points < 5 {
        return Err(LabError::param("quadrature_points", "need at least 5"));
    }
    let eta = cutoff_eta(radius, config.eta_profile.clone())?;
    if log.samples.len() < 5 {
        return Err(LabError::Input("solution has fewer than 5 samples".into()));
    }
    let r_end = log.samples[log.samples.len() - 1].r;
    if r_end < radius * (1.0 - 1e-12) {
        return Err(LabError::Input(format!(
            "solution ends at r = {r_end}, shorter than R = {radius}"
        )));
    }
    let touching: Vec<f64> = log
        .samples
        .iter()
        .filter(|s| s.r > 0.0 && s.r <= 0.75 * radius && !(s.f > 0.0))
        .map(|s| s.r)
        .collect();
    if !touching.is_empty() {
        return Err(LabError::Regime(format!(
            "f vanishes inside (0, 3R/4] at {} samples, first at r = {:?}",
            touching.len(),
            &touching[..touching.len().min(5)]
        )));
    }

    let h = log.spacing()?;
    let fs: Vec<f64> = log.samples.iter().map(|s| s.f).collect();
    let dfs = derivative(&fs, h)?;
    let dvs: Vec<f64> = log.samples.iter().map(|s| s.dv).collect();

    let m = config.quadrature_points;
    let dr = radius / (m - 1) as f64;
    let nf = n as f64;
    let k = log.space.k;
    let cross = 2.0 * (p - 1.0) / (nf - 1.0) - p;
    let mut grad = vec![0.0; m];
    let mut quad = vec![0.0; m];
    let mut curv = vec![0.0; m];
    let mut crs = vec![0.0; m];
    for j in 1..m {
        let r = j as f64 * dr;
        let f = interp_cubic(0.0, h, &fs, r);
        if !(f > 0.0) {
            continue;
        }
        let df = interp_cubic(0.0, h, &dfs, r);
        let dv = interp_cubic(0.0, h, &dvs, r);
        let e = eta.value(r);
        let de = eta.derivative(r);
        let wt = log.space.weight(r);
        let psi = f.powf(b) * e * e;
        let dpsi = b * f.powf(b - 1.0) * df * e * e + 2.0 * f.powf(b) * e * de;
        let a_df = f.powf(1.0 - 2.0 / p) * df + (p - 2.0) * f.powf(1.0 - 4.0 / p) * df * dv * dv;
        grad[j] = a_df * dpsi * wt;
        quad[j] = bt * f * f * psi * wt;
        curv[j] = (nf - 1.0) * k * p * f.powf(2.0 - 2.0 / p) * psi * wt;
        crs[j] = -cross * f.powf(1.0 - 2.0 / p) * psi * df * dv * wt;
    }
    let lhs_gradient = simpson(&grad, dr);
    let lhs_beta = simpson(&quad, dr);
    let rhs_curvature = simpson(&curv, dr);
    let rhs_cross = simpson(&crs, dr);
    let slack = rhs_curvature + rhs_cross - lhs_gradient - lhs_beta;
    let scale = [lhs_gradient, lhs_beta, rhs_curvature, rhs_cross]
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(CaccioppoliReport {
        params,
        space: log.space,
        radius,
        b,
        b_min,
        beta: bt,
        lhs_gradient,
        lhs_beta,
        rhs_curvature,
        rhs_cross,
        slack,
        scale,
        quadrature_points: m,
        pass: slack.is_finite() && slack >= -TOL_QUAD * scale,
    })
}
