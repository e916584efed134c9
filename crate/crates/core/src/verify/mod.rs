//! Checks of the pointwise and integral inequalities on solved instances.
//!
//! Every integral is a radial quadrature with the sphere area `ω_{n−1}`
//! dropped from both sides. Each check produces a typed report and a
//! [`CheckRecord`] for JSON output.

mod bochner;
mod caccioppoli;
mod cutoff;
mod sobolev;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::interp_cubic;
use crate::solver::RadialSolution;
use crate::thresholds::{classify_regime, EquationParams};

pub use bochner::{
    check_bochner_lemma, check_bochner_thm2, lemma_terms, res4_terms, scale_f, BochnerConfig,
    BochnerInequality, BochnerReport,
};
pub use caccioppoli::{check_caccioppoli, CaccioppoliConfig, CaccioppoliReport};
pub use cutoff::{cutoff_eta, Cutoff, EtaProfile, RadialProfile, SampledProfile};
pub use sobolev::{measure_sobolev_ratio, SobolevRatioReport, SOBOLEV_POINTS};

/// JSON form shared by all checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: EquationParams,
    pub space: ModelSpace,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub pass: bool,
    pub metrics: BTreeMap<String, Value>,
    pub samples_retained: usize,
    pub tolerances: BTreeMap<String, f64>,
}

impl CheckRecord {
    fn new(check: &str, params: EquationParams, space: ModelSpace, radius: Option<f64>) -> Self {
        CheckRecord {
            check: check.to_string(),
            params,
            space,
            radius,
            pass: false,
            metrics: BTreeMap::new(),
            samples_retained: 0,
            tolerances: BTreeMap::new(),
        }
    }

    fn metric(mut self, key: &str, value: Value) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }
}

/// Which gradient estimate a check is read against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// σ strictly inside the sign-dependent window bounded by σ₁ (a > 0) or
    /// σ₂ (a < 0), `1 < p < 2n − 1`; constant `C(p, n, σ)`.
    Window,
    /// `a((n+2)(p−1)/n − σ) ≥ 0`, any `p > 1`; constant `C(p, n)`.
    Threshold,
}

impl Estimate {
    pub fn name(&self) -> &'static str {
        match self {
            Estimate::Window => "window",
            Estimate::Threshold => "threshold",
        }
    }
}

/// `((1 + √K R)/R)^{p/2}`.
pub fn bound_shape(p: f64, k: f64, radius: f64) -> f64 {
    ((1.0 + k.sqrt() * radius) / radius).powf(p / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub params: EquationParams,
    pub space: ModelSpace,
    #[serde(rename = "R")]
    pub radius: f64,
    pub estimate: Estimate,
    /// Whether the parameters satisfy the selected estimate's hypotheses.
    pub applicable: bool,
    /// `sup |u′|/u` over `[0, R/2]`.
    pub sup_ratio: f64,
    pub sup_at: f64,
    pub bound_shape: f64,
    pub empirical_c: f64,
    pub samples_retained: usize,
    pub pass: bool,
}

impl GradientCheckReport {
    pub fn record(&self) -> CheckRecord {
        let mut rec = CheckRecord::new("gradient", self.params, self.space, Some(self.radius))
            .metric("estimate", json!(self.estimate.name()))
            .metric("applicable", json!(self.applicable))
            .metric("sup_ratio", json!(self.sup_ratio))
            .metric("sup_at", json!(self.sup_at))
            .metric("bound_shape", json!(self.bound_shape))
            .metric("empirical_C", json!(self.empirical_c));
        rec.pass = self.pass;
        rec.samples_retained = self.samples_retained;
        rec
    }
}

/// Positive samples up to `R/2`, plus the interpolated endpoint when `R/2`
/// falls between grid points. Returns `(r, u, |u′|/u)` triples.
fn half_ball(solution: &RadialSolution, radius: f64) -> Result<Vec<(f64, f64, f64)>> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(LabError::param(
            "R",
            format!("must be positive, got {radius}"),
        ));
    }
    let r_end = solution.r_end();
    if r_end < radius * (1.0 - 1e-12) {
        return Err(LabError::Input(format!(
            "solution ends at r = {r_end}, shorter than R = {radius}"
        )));
    }
    if let Some(s) = solution
        .samples
        .iter()
        .find(|s| s.r <= radius && !(s.u > 0.0))
    {
        return Err(LabError::Input(format!(
            "u = {} is not positive at r = {}",
            s.u, s.r
        )));
    }
    let half = 0.5 * radius;
    let mut out: Vec<(f64, f64, f64)> = solution
        .samples
        .iter()
        .filter(|s| s.r <= half)
        .map(|s| (s.r, s.u, s.du.abs() / s.u))
        .collect();
    let last = out.last().map(|t| t.0).unwrap_or(-1.0);
    if last < half * (1.0 - 1e-12) {
        let h = solution.spacing()?;
        let us: Vec<f64> = solution.samples.iter().map(|s| s.u).collect();
        let dus: Vec<f64> = solution.samples.iter().map(|s| s.du).collect();
        let u = interp_cubic(0.0, h, &us, half);
        let du = interp_cubic(0.0, h, &dus, half);
        out.push((half, u, du.abs() / u));
    }
    Ok(out)
}

pub fn check_gradient_estimate(
    solution: &RadialSolution,
    radius: f64,
    estimate: Estimate,
) -> Result<GradientCheckReport> {
    let pts = half_ball(solution, radius)?;
    let (sup_at, sup_ratio) =
        pts.iter().fold(
            (0.0, 0.0),
            |(ra, best), &(r, _, q)| if q > best { (r, q) } else { (ra, best) },
        );
    let regime = classify_regime(&solution.params);
    let applicable = match estimate {
        Estimate::Window => regime.thm1_applicable,
        Estimate::Threshold => regime.thm2_applicable,
    }
    .unwrap_or(false);
    let shape = bound_shape(solution.params.p, solution.space.k, radius);
    let empirical_c = sup_ratio / shape;
    Ok(GradientCheckReport {
        params: solution.params,
        space: solution.space,
        radius,
        estimate,
        applicable,
        sup_ratio,
        sup_at,
        bound_shape: shape,
        empirical_c,
        samples_retained: pts.len(),
        pass: empirical_c.is_finite() && sup_ratio >= 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub params: EquationParams,
    pub space: ModelSpace,
    #[serde(rename = "R")]
    pub radius: f64,
    pub max_u: f64,
    pub min_u: f64,
    /// `max u / min u` on `[0, R/2]`.
    pub ratio: f64,
    pub sup_ratio: f64,
    /// `exp(R · sup |u′|/u)`.
    pub integrated_bound: f64,
    pub samples_retained: usize,
    pub pass: bool,
}

impl HarnackReport {
    pub fn record(&self) -> CheckRecord {
        let mut rec = CheckRecord::new("harnack", self.params, self.space, Some(self.radius))
            .metric("max_u", json!(self.max_u))
            .metric("min_u", json!(self.min_u))
            .metric("ratio", json!(self.ratio))
            .metric("sup_ratio", json!(self.sup_ratio))
            .metric("integrated_bound", json!(self.integrated_bound))
            .tolerance("rel", HARNACK_TOL);
        rec.pass = self.pass;
        rec.samples_retained = self.samples_retained;
        rec
    }
}

const HARNACK_TOL: f64 = 1e-12;

/// Compares `max u / min u` on `[0, R/2]` with the bound obtained by
/// integrating the gradient ratio along a radius.
pub fn check_harnack(solution: &RadialSolution, radius: f64) -> Result<HarnackReport> {
    let pts = half_ball(solution, radius)?;
    let max_u = pts.iter().map(|t| t.1).fold(f64::MIN, f64::max);
    let min_u = pts.iter().map(|t| t.1).fold(f64::MAX, f64::min);
    let sup_ratio = pts.iter().map(|t| t.2).fold(0.0, f64::max);
    let ratio = max_u / min_u;
    let integrated_bound = (radius * sup_ratio).exp();
    Ok(HarnackReport {
        params: solution.params,
        space: solution.space,
        radius,
        max_u,
        min_u,
        ratio,
        sup_ratio,
        integrated_bound,
        samples_retained: pts.len(),
        pass: ratio <= integrated_bound * (1.0 + HARNACK_TOL),
    })
}
