//! Pointwise Bochner-type lower bounds for `𝓛(f)`, `f = |v′|^p`.
//!
//! Radially `𝓛(f) = s^{1−n} [s^{n−1} (p−1)|v′|^{p−2} f′]′`, evaluated by two
//! nested fourth-order differences.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::CheckRecord;
use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::derivative;
use crate::solver::LogSolution;
use crate::thresholds::{discriminant, thm2_condition, EquationParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BochnerConfig {
    pub tol_rel: f64,
    /// Fraction of retained samples that must satisfy the inequality.
    pub pass_fraction: f64,
    /// Samples with `r` below this fraction of the span are dropped.
    pub inner_band: f64,
    /// Samples with `r` above this fraction of the span are dropped.
    pub outer_band: f64,
    /// Samples with `|v′|` below this are dropped.
    pub min_gradient: f64,
}

impl Default for BochnerConfig {
    fn default() -> Self {
        BochnerConfig {
            tol_rel: 1e-3,
            pass_fraction: 0.95,
            inner_band: 0.05,
            outer_band: 0.9,
            min_gradient: 1e-6,
        }
    }
}

impl BochnerConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol_rel >= 0.0) {
            return Err(LabError::param("tol_rel", "must be nonnegative"));
        }
        if !(self.pass_fraction > 0.0 && self.pass_fraction <= 1.0) {
            return Err(LabError::param("pass_fraction", "must lie in (0, 1]"));
        }
        if !(0.0 <= self.inner_band && self.inner_band < self.outer_band && self.outer_band <= 1.0)
        {
            return Err(LabError::param(
                "inner_band",
                "bands must satisfy 0 ≤ inner < outer ≤ 1",
            ));
        }
        if !(self.min_gradient >= 0.0) {
            return Err(LabError::param("min_gradient", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BochnerInequality {
    /// Full lower bound with the `K`, `h` and cross terms, `1 < p < 2n − 1`.
    Lemma,
    /// `(p/n) f² − (n−1)Kp f^{2−2/p} − p f^{1−2/p} f′v′`, under the sign
    /// condition `a((n+2)(p−1)/n − σ) ≥ 0`.
    Threshold,
}

impl BochnerInequality {
    pub fn name(&self) -> &'static str {
        match self {
            BochnerInequality::Lemma => "bochner",
            BochnerInequality::Threshold => "bochner2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerReport {
    pub params: EquationParams,
    pub space: ModelSpace,
    pub inequality: BochnerInequality,
    pub config: BochnerConfig,
    pub radii: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `lhs − rhs`.
    pub margin: Vec<f64>,
    /// Largest absolute term at each sample.
    pub scale: Vec<f64>,
    /// Share of retained samples with `margin ≥ −tol_rel · scale`.
    pub fraction: f64,
    pub pass: bool,
}

impl BochnerReport {
    pub fn samples_retained(&self) -> usize {
        self.radii.len()
    }

    /// Smallest `margin / scale`.
    pub fn worst_relative_margin(&self) -> f64 {
        self.margin
            .iter()
            .zip(&self.scale)
            .map(|(m, s)| m / s)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn record(&self) -> CheckRecord {
        let mut rec = CheckRecord::new(self.inequality.name(), self.params, self.space, None)
            .metric("fraction", json!(self.fraction))
            .metric("worst_relative_margin", json!(self.worst_relative_margin()))
            .metric("r_min", json!(self.radii.first()))
            .metric("r_max", json!(self.radii.last()))
            .tolerance("tol_rel", self.config.tol_rel)
            .tolerance("pass_fraction", self.config.pass_fraction)
            .tolerance("inner_band", self.config.inner_band)
            .tolerance("outer_band", self.config.outer_band)
            .tolerance("min_gradient", self.config.min_gradient);
        rec.pass = self.pass;
        rec.samples_retained = self.samples_retained();
        rec
    }
}

/// The five right-hand terms of the full lower bound, in order:
/// curvature, `a²h²`, `f²`, cross term `f^{(p−2)/p} f′v′`, `a h f`.
pub fn lemma_terms(
    params: &EquationParams,
    k: f64,
    f: f64,
    df: f64,
    dv: f64,
    h: f64,
) -> Result<[f64; 5]> {
    let EquationParams { n, p, a, sigma } = *params;
    let n1 = n as f64 - 1.0;
    let d = discriminant(n, p)?;
    Ok([
        -p * n1 * k * f.powf((2.0 * p - 2.0) / p),
        d * p * a * a * h * h / n1,
        p / n1 * f * f,
        (2.0 * (p - 1.0) / n1 - p) * f.powf((p - 2.0) / p) * df * dv,
        a * p * h * (2.0 / n1 - (sigma / (p - 1.0) - 1.0)) * f,
    ])
}

/// The three right-hand terms of the threshold bound: `f²`, curvature, cross term.
pub fn res4_terms(n: u32, p: f64, k: f64, f: f64, df: f64, dv: f64) -> [f64; 3] {
    let nf = n as f64;
    [
        p / nf * f * f,
        -(nf - 1.0) * k * p * f.powf(2.0 - 2.0 / p),
        -p * f.powf(1.0 - 2.0 / p) * df * dv,
    ]
}

/// Copy of `log` with `f` multiplied by `factor` and every other field kept.
/// Used as a negative control.
pub fn scale_f(log: &LogSolution, factor: f64) -> LogSolution {
    let mut out = log.clone();
    for s in &mut out.samples {
        s.f *= factor;
    }
    out.residual = None;
    out
}

/// `𝓛(f)` at every sample, `NaN` where undefined.
pub(crate) fn l_of_f(log: &LogSolution, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = log.params.p;
    let f: Vec<f64> = log.samples.iter().map(|s| s.f).collect();
    let df = derivative(&f, h)?;
    let flux: Vec<f64> = log
        .samples
        .iter()
        .zip(&df)
        .map(|(s, d)| {
            if s.r == 0.0 {
                0.0
            } else {
                log.space.weight(s.r) * (p - 1.0) * s.dv.abs().powf(p - 2.0) * d
            }
        })
        .collect();
    let dflux = derivative(&flux, h)?;
    let lhs = log
        .samples
        .iter()
        .zip(&dflux)
        .map(|(s, d)| {
            if s.r == 0.0 {
                f64::NAN
            } else {
                d / log.space.weight(s.r)
            }
        })
        .collect();
    Ok((lhs, df))
}

fn run(
    log: &LogSolution,
    config: &BochnerConfig,
    which: BochnerInequality,
) -> Result<BochnerReport> {
    config.validate()?;
    let params = log.params;
    let EquationParams { n, p, a, sigma } = params;
    match which {
        BochnerInequality::Lemma => {
            if p >= 2.0 * n as f64 - 1.0 {
                return Err(LabError::Regime(format!(
                    "the full lower bound needs p < 2n − 1, got p = {p}, n = {n}"
                )));
            }
        }
        BochnerInequality::Threshold => {
            if !thm2_condition(n, p, sigma, params.sign())? {
                return Err(LabError::Regime(format!(
                    "sign condition a((n+2)(p−1)/n − σ) ≥ 0 fails for a = {a}, σ = {sigma}"
                )));
            }
        }
    }
    if log.samples.len() < 9 {
        return Err(LabError::Input(format!(
            "need at least 9 samples, got {}",
            log.samples.len()
        )));
    }
    let h = log.spacing()?;
    let (lhs_all, df) = l_of_f(log, h)?;
    let span = log.samples[log.samples.len() - 1].r;
    let k = log.space.k;

    let mut report = BochnerReport {
        params,
        space: log.space,
        inequality: which,
        config: *config,
        radii: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        margin: Vec::new(),
        scale: Vec::new(),
        fraction: 0.0,
        pass: false,
    };
    let mut ok = 0usize;
    for (i, s) in log.samples.iter().enumerate() {
        if s.r < config.inner_band * span
            || s.r > config.outer_band * span
            || s.dv.abs() < config.min_gradient
            || !(s.f > 0.0)
        {
            continue;
        }
        let lhs = lhs_all[i];
        let terms: Vec<f64> = match which {
            BochnerInequality::Lemma => lemma_terms(&params, k, s.f, df[i], s.dv, s.h)?.to_vec(),
            BochnerInequality::Threshold => res4_terms(n, p, k, s.f, df[i], s.dv).to_vec(),
        };
        let rhs: f64 = terms.iter().sum();
        let scale = terms.iter().fold(lhs.abs(), |m, t| m.max(t.abs()));
        if !(lhs.is_finite() && rhs.is_finite()) {
            continue;
        }
        let margin = lhs - rhs;
        if margin >= -config.tol_rel * scale {
            ok += 1;
        }
        report.radii.push(s.r);
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.margin.push(margin);
        report.scale.push(scale);
    }
    if report.radii.is_empty() {
        return Err(LabError::Regime(
            "no samples retained after exclusions".into(),
        ));
    }
    report.fraction = ok as f64 / report.radii.len() as f64;
    report.pass = report.fraction >= config.pass_fraction;
    Ok(report)
}

/// Checks the full lower bound for `𝓛(f)` at every retained sample.
pub fn check_bochner_lemma(log: &LogSolution, config: &BochnerConfig) -> Result<BochnerReport> {
    run(log, config, BochnerInequality::Lemma)
}

/// Checks the threshold lower bound; refuses parameters outside its sign condition.
pub fn check_bochner_thm2(log: &LogSolution, config: &BochnerConfig) -> Result<BochnerReport> {
    run(log, config, BochnerInequality::Threshold)
}
