//! Closed-form constants and regime conditions for Δ_p u + a u^σ = 0.
//!
//! Everything here is a smooth algebraic function of `(n, p, σ)` evaluated in
//! `f64`. Comparisons against thresholds use [`THRESHOLD_TOL`] (relative to
//! the magnitude of the threshold) so that exact boundary values such as
//! `σ = 5/3` are classified the way the closed-form inequality intends.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Comparison tolerance for threshold tests.
pub const THRESHOLD_TOL: f64 = 1e-12;

fn tol_at(x: f64) -> f64 {
    THRESHOLD_TOL * x.abs().max(1.0)
}

/// Sign of the coefficient `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(a: f64) -> Sign {
        if a > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// The quadruple `(n, p, a, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationParams {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    pub sigma: f64,
}

impl EquationParams {
    pub fn new(n: u32, p: f64, a: f64, sigma: f64) -> Result<Self> {
        check_dimension(n)?;
        check_exponent(p)?;
        if !a.is_finite() || a == 0.0 {
            return Err(LabError::param("a", "must be a finite nonzero real"));
        }
        if !sigma.is_finite() || sigma == 0.0 {
            return Err(LabError::param("sigma", "must be a finite nonzero real"));
        }
        Ok(EquationParams { n, p, a, sigma })
    }

    pub fn sign(&self) -> Sign {
        Sign::of(self.a)
    }
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(LabError::param(
            "n",
            format!("dimension must be ≥ 3, got {n}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(LabError::param(
            "p",
            format!("exponent must be > 1, got {p}"),
        ));
    }
    Ok(())
}

/// `1 < p < 2n − 1`, the range where α and the discriminant are defined.
fn check_thm1_range(n: u32, p: f64) -> Result<()> {
    check_dimension(n)?;
    check_exponent(p)?;
    let upper = 2.0 * n as f64 - 1.0;
    if p >= upper {
        return Err(LabError::Regime(format!(
            "p = {p} is not below 2n − 1 = {upper}"
        )));
    }
    Ok(())
}

/// The piecewise constant α(n, p): `n(p−1)²/(n−1)` up to `p = 3 − 2/n`,
/// `2(p−1)` beyond.
pub fn alpha(n: u32, p: f64) -> Result<f64> {
    check_thm1_range(n, p)?;
    let nf = n as f64;
    if p <= 3.0 - 2.0 / nf {
        Ok(nf * (p - 1.0).powi(2) / (nf - 1.0))
    } else {
        Ok(2.0 * (p - 1.0))
    }
}

/// `1 − (p−1)² / ((n−1) α)`, in `(0, 1]` on `1 < p < 2n − 1`.
pub fn discriminant(n: u32, p: f64) -> Result<f64> {
    let al = alpha(n, p)?;
    let nf = n as f64;
    Ok(1.0 - (p - 1.0).powi(2) / ((nf - 1.0) * al))
}

/// `(n+1)(p−1)/(n−1)`, the midpoint of `[σ₂, σ₁]` and the branch point of β.
pub fn sigma_mid(n: u32, p: f64) -> f64 {
    let nf = n as f64;
    (nf + 1.0) * (p - 1.0) / (nf - 1.0)
}

fn sigma_pm(n: u32, p: f64, sign: f64) -> Result<f64> {
    let d = discriminant(n, p)?;
    let nf = n as f64;
    Ok((p - 1.0) * ((nf + 1.0) / (nf - 1.0) + sign * 2.0 / (nf - 1.0) * d.sqrt()))
}

/// Upper end of the `a > 0` window.
pub fn sigma1(n: u32, p: f64) -> Result<f64> {
    sigma_pm(n, p, 1.0)
}

/// Lower end of the `a < 0` window.
pub fn sigma2(n: u32, p: f64) -> Result<f64> {
    sigma_pm(n, p, -1.0)
}

/// `(n+2)(p−1)/n`.
pub fn thm2_threshold(n: u32, p: f64) -> f64 {
    let nf = n as f64;
    (nf + 2.0) * (p - 1.0) / nf
}

/// Whether σ lies in the open window of the first gradient estimate for the
/// given sign of `a`. Endpoints σ₁ / σ₂ are excluded.
pub fn in_thm1_window(n: u32, p: f64, sigma: f64, sign: Sign) -> Result<bool> {
    Ok(match sign {
        Sign::Positive => {
            let s1 = sigma1(n, p)?;
            sigma < s1 - tol_at(s1)
        }
        Sign::Negative => {
            let s2 = sigma2(n, p)?;
            sigma > s2 + tol_at(s2)
        }
    })
}

/// β(n, p, σ) for the sign of `a`.
///
/// Equals `p/(n−1)` on the side of `(n+1)(p−1)/(n−1)` where the `a`-terms are
/// nonpositive, and decreases quadratically to zero at σ₁ (resp. σ₂).
pub fn beta(n: u32, p: f64, sigma: f64, sign: Sign) -> Result<f64> {
    if !in_thm1_window(n, p, sigma, sign)? {
        return Err(LabError::Regime(format!(
            "σ = {sigma} outside the {} window for (n, p) = ({n}, {p})",
            match sign {
                Sign::Positive => "a > 0",
                Sign::Negative => "a < 0",
            }
        )));
    }
    let nf = n as f64;
    let full = p / (nf - 1.0);
    let mid = sigma_mid(n, p);
    let unconditional = match sign {
        Sign::Positive => sigma <= mid,
        Sign::Negative => sigma > mid,
    };
    if unconditional {
        return Ok(full);
    }
    let d = discriminant(n, p)?;
    let dev = (sigma / (p - 1.0) - 1.0) - 2.0 / (nf - 1.0);
    Ok(full - p * dev * dev / (4.0 / (nf - 1.0) * d))
}

/// Sign/threshold condition of the second gradient estimate (no upper bound on p).
/// The boundary `σ = (n+2)(p−1)/n` is included.
pub fn thm2_condition(n: u32, p: f64, sigma: f64, sign: Sign) -> Result<bool> {
    check_dimension(n)?;
    check_exponent(p)?;
    let t = thm2_threshold(n, p);
    Ok(match sign {
        Sign::Positive => sigma <= t + tol_at(t),
        Sign::Negative => sigma >= t - tol_at(t),
    })
}

/// `(n+2)(p−1)/n` against σ₁ on `1 < p < 2n − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdComparison {
    pub thm2_threshold: f64,
    pub sigma1: f64,
    pub strict: bool,
}

impl ThresholdComparison {
    pub fn gap(&self) -> f64 {
        self.sigma1 - self.thm2_threshold
    }
}

pub fn compare_thresholds(n: u32, p: f64) -> Result<ThresholdComparison> {
    let s1 = sigma1(n, p)?;
    let t = thm2_threshold(n, p);
    Ok(ThresholdComparison {
        thm2_threshold: t,
        sigma1: s1,
        strict: t < s1,
    })
}

/// Constants and applicability flags for one parameter set.
///
/// `alpha`, `sigma1`, `sigma2` are `None` when `p ≥ 2n − 1`. The four flags
/// are `None` when the report was built from `(n, p)` alone. The nonexistence
/// flags refer to complete manifolds with nonnegative Ricci curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n: u32,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub thm2_threshold: f64,
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub thm1_applicable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub thm2_applicable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nonexistence_thm1: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nonexistence_thm2: Option<bool>,
}

/// Report for `(n, p)` only: constants, no σ-dependent flags.
pub fn threshold_report(n: u32, p: f64) -> Result<RegimeReport> {
    check_dimension(n)?;
    check_exponent(p)?;
    let in_range = p < 2.0 * n as f64 - 1.0;
    let opt = |r: Result<f64>| if in_range { r.ok() } else { None };
    Ok(RegimeReport {
        n,
        p,
        a: None,
        sigma: None,
        alpha: opt(alpha(n, p)),
        sigma1: opt(sigma1(n, p)),
        sigma2: opt(sigma2(n, p)),
        thm2_threshold: thm2_threshold(n, p),
        beta: None,
        thm1_applicable: None,
        thm2_applicable: None,
        nonexistence_thm1: None,
        nonexistence_thm2: None,
    })
}

/// Full classification of a parameter set.
pub fn classify_regime(params: &EquationParams) -> RegimeReport {
    let EquationParams { n, p, a, sigma } = *params;
    let sign = params.sign();
    // EquationParams is validated on construction, so only the p-range can fail.
    let mut report = threshold_report(n, p).expect("validated parameters");
    let thm1 = in_thm1_window(n, p, sigma, sign).unwrap_or(false);
    let thm2 = thm2_condition(n, p, sigma, sign).unwrap_or(false);
    report.a = Some(a);
    report.sigma = Some(sigma);
    report.beta = if thm1 {
        beta(n, p, sigma, sign).ok()
    } else {
        None
    };
    report.thm1_applicable = Some(thm1);
    report.thm2_applicable = Some(thm2);
    report.nonexistence_thm1 = Some(thm1);
    report.nonexistence_thm2 = Some(thm2);
    report
}

impl RegimeReport {
    /// True when either nonexistence result covers the parameters.
    pub fn predicts_nonexistence(&self) -> bool {
        self.nonexistence_thm1.unwrap_or(false) || self.nonexistence_thm2.unwrap_or(false)
    }
}

/// Lower bound on the Caccioppoli exponent:
/// `max{1, 2[p − 2(p−1)/(n−1)]² / (β min{1, p−1})}`.
pub fn caccioppoli_b_min(n: u32, p: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let c = p - 2.0 * (p - 1.0) / (nf - 1.0);
    let m = (p - 1.0).min(1.0);
    (2.0 * c * c / (beta * m)).max(1.0)
}

/// Exponent ladder of the Moser iteration with its series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoserSequence {
    /// `b_1, …, b_L`.
    pub exponents: Vec<f64>,
    /// Partial sum of `1/b_l`.
    pub sum_inv: f64,
    /// Partial sum of `l/b_l`.
    pub sum_l_inv: f64,
    /// `n/(2 b_1)`.
    pub limit_inv: f64,
    /// `n²/(4 b_1)`.
    pub limit_l_inv: f64,
    /// Exact tail `Σ_{l>L} 1/b_l`.
    pub tail_inv: f64,
    /// Exact tail `Σ_{l>L} l/b_l`.
    pub tail_l_inv: f64,
}

/// `b_1 = (b_0 + 2 − 2/p) n/(n−2)`, `b_{l+1} = b_l n/(n−2)`.
pub fn moser_exponents(n: u32, p: f64, b0: f64, len: usize) -> Result<MoserSequence> {
    check_dimension(n)?;
    check_exponent(p)?;
    if !(b0.is_finite() && b0 > 0.0) {
        return Err(LabError::param("b0", "must be positive"));
    }
    if len == 0 {
        return Err(LabError::param("L", "need at least one exponent"));
    }
    let nf = n as f64;
    let ratio = nf / (nf - 2.0);
    let b1 = (b0 + 2.0 - 2.0 / p) * ratio;

    let mut exponents = Vec::with_capacity(len);
    let mut b = b1;
    for _ in 0..len {
        exponents.push(b);
        b *= ratio;
    }
    let sum_inv = exponents.iter().map(|b| 1.0 / b).sum();
    let sum_l_inv = exponents
        .iter()
        .enumerate()
        .map(|(i, b)| (i + 1) as f64 / b)
        .sum();

    // Σ_{l>L} r^{l-1} = r^L/(1-r) and Σ_{l>L} l r^{l-1} = ((L+1) r^L − L r^{L+1})/(1-r)².
    let r = 1.0 / ratio;
    let lf = len as f64;
    let rl = r.powi(len as i32);
    let tail_inv = rl / (1.0 - r) / b1;
    let tail_l_inv = ((lf + 1.0) * rl - lf * rl * r) / (1.0 - r).powi(2) / b1;

    Ok(MoserSequence {
        exponents,
        sum_inv,
        sum_l_inv,
        limit_inv: nf / (2.0 * b1),
        limit_l_inv: nf * nf / (4.0 * b1),
        tail_inv,
        tail_l_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn alpha_branches() {
        assert_abs_diff_eq!(alpha(3, 2.0).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha(3, 7.0 / 3.0).unwrap(), 8.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(alpha(3, 4.0).unwrap(), 6.0, epsilon = 1e-15);
        // continuity at the junction
        let n = 3;
        let pj = 3.0 - 2.0 / n as f64;
        let first = n as f64 * (pj - 1.0).powi(2) / (n as f64 - 1.0);
        assert_abs_diff_eq!(first, 2.0 * (pj - 1.0), epsilon = 1e-14);
    }

    #[test]
    fn alpha_rejects_out_of_range() {
        assert!(matches!(alpha(3, 5.0), Err(LabError::Regime(_))));
        assert!(matches!(alpha(3, 1.0), Err(LabError::Parameter { .. })));
        assert!(matches!(alpha(2, 2.0), Err(LabError::Parameter { .. })));
    }

    #[test]
    fn discriminant_values() {
        assert_abs_diff_eq!(discriminant(3, 2.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        for n in 3..12 {
            let p = 1.0 + 0.5 * (2.0 - 2.0 / n as f64);
            assert_abs_diff_eq!(
                discriminant(n, p).unwrap(),
                1.0 - 1.0 / n as f64,
                epsilon = 1e-14
            );
        }
        let near = discriminant(3, 5.0 - 1e-9).unwrap();
        assert!(near > 0.0 && near < 1e-8);
        assert!(discriminant(3, 5.0).is_err());
    }

    #[test]
    fn sigma_windows() {
        let s1 = sigma1(3, 2.0).unwrap();
        let s2 = sigma2(3, 2.0).unwrap();
        assert_abs_diff_eq!(s1, 2.816497, epsilon = 1e-6);
        assert_abs_diff_eq!(s1, 2.0 + (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s2, 2.0 - (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s1 + s2, 4.0, epsilon = 1e-12);
        assert!(s2 < 2.0 && 2.0 < s1);

        let s1_4 = sigma1(4, 2.0).unwrap();
        assert_abs_diff_eq!(
            s1_4,
            5.0 / 3.0 + 2.0 / 3.0 * (0.75f64).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s1_4, 1.0 + 2.0 / 3.0 + 2.0 / 12f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn beta_cases() {
        let b = |s, sign| beta(3, 2.0, s, sign).unwrap();
        assert_abs_diff_eq!(b(2.0, Sign::Positive), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b(2.5, Sign::Positive), 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(b(1.5, Sign::Negative), 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(b(1.0, Sign::Positive), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b(2.5, Sign::Negative), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn beta_vanishes_at_window_ends() {
        let s1 = sigma1(3, 2.0).unwrap();
        let s2 = sigma2(3, 2.0).unwrap();
        let near1 = beta(3, 2.0, s1 - 1e-6, Sign::Positive).unwrap();
        let near2 = beta(3, 2.0, s2 + 1e-6, Sign::Negative).unwrap();
        assert!(near1 > 0.0 && near1 < 1e-5);
        assert!(near2 > 0.0 && near2 < 1e-5);
        assert!(matches!(
            beta(3, 2.0, s1, Sign::Positive),
            Err(LabError::Regime(_))
        ));
        assert!(matches!(
            beta(3, 2.0, s2, Sign::Negative),
            Err(LabError::Regime(_))
        ));
        assert!(beta(3, 2.0, 3.0, Sign::Positive).is_err());
    }

    #[test]
    fn thm2_condition_boundary() {
        assert!(thm2_condition(3, 2.0, 1.5, Sign::Positive).unwrap());
        assert!(thm2_condition(3, 2.0, 5.0 / 3.0, Sign::Positive).unwrap());
        assert!(!thm2_condition(3, 2.0, 2.0, Sign::Positive).unwrap());
        assert!(thm2_condition(3, 2.0, 2.0, Sign::Negative).unwrap());
        assert!(thm2_condition(3, 2.0, 5.0 / 3.0, Sign::Negative).unwrap());
        assert!(!thm2_condition(3, 2.0, 1.5, Sign::Negative).unwrap());
    }

    #[test]
    fn comparison_examples() {
        let c = compare_thresholds(3, 2.0).unwrap();
        assert!(c.strict);
        assert_abs_diff_eq!(c.thm2_threshold, 5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.sigma1, 2.8165, epsilon = 1e-4);
        assert!(compare_thresholds(10, 2.0).unwrap().strict);
        assert!(compare_thresholds(3, 4.99).unwrap().strict);
        assert!(matches!(
            compare_thresholds(3, 5.0),
            Err(LabError::Regime(_))
        ));
    }

    #[test]
    fn threshold_gap_near_endpoint() {
        // σ₁ − (n+2)(p−1)/n = (p−1)[2/(n(n−1)) + 2√D/(n−1)], which tends to 4/n
        // as p → 2n−1 (D → 0), not to zero.
        for n in [3u32, 4, 7] {
            let nf = n as f64;
            let p = 2.0 * nf - 1.0 - 1e-10;
            let gap = compare_thresholds(n, p).unwrap().gap();
            assert_abs_diff_eq!(gap, 4.0 / nf, epsilon = 1e-4);
        }
    }

    #[test]
    fn classify_examples() {
        let r = classify_regime(&EquationParams::new(3, 2.0, 1.0, 2.0).unwrap());
        assert_eq!(r.nonexistence_thm1, Some(true));
        assert_eq!(r.nonexistence_thm2, Some(false));
        assert_eq!(r.beta, Some(1.0));

        let r = classify_regime(&EquationParams::new(3, 6.0, 1.0, 1.0).unwrap());
        assert_eq!(r.thm1_applicable, Some(false));
        assert_eq!(r.nonexistence_thm2, Some(true));
        assert!(r.alpha.is_none() && r.beta.is_none());

        // Sobolev-critical exponent: classical entire solutions exist.
        let r = classify_regime(&EquationParams::new(3, 2.0, 1.0, 5.0).unwrap());
        assert_eq!(r.nonexistence_thm1, Some(false));
        assert_eq!(r.nonexistence_thm2, Some(false));
        assert!(!r.predicts_nonexistence());
    }

    #[test]
    fn params_validation() {
        assert!(EquationParams::new(2, 2.0, 1.0, 1.0).is_err());
        assert!(EquationParams::new(3, 1.0, 1.0, 1.0).is_err());
        assert!(EquationParams::new(3, 2.0, 0.0, 1.0).is_err());
        assert!(EquationParams::new(3, 2.0, 1.0, 0.0).is_err());
        assert!(EquationParams::new(3, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_json_is_flat() {
        let r = classify_regime(&EquationParams::new(3, 2.0, 1.0, 2.0).unwrap());
        let v = serde_json::to_value(&r).unwrap();
        let obj = v.as_object().unwrap();
        for key in [
            "alpha",
            "sigma1",
            "sigma2",
            "thm2_threshold",
            "beta",
            "thm1_applicable",
            "thm2_applicable",
            "nonexistence_thm1",
            "nonexistence_thm2",
        ] {
            assert!(obj.contains_key(key), "missing {key}");
            assert!(!obj[key].is_object() && !obj[key].is_array());
        }
        let back: RegimeReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn moser_examples() {
        let m = moser_exponents(4, 2.0, 3.0, 30).unwrap();
        assert_abs_diff_eq!(m.exponents[0], 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.sum_inv, 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(m.sum_l_inv, 0.5, epsilon = 1e-8);
        let m = moser_exponents(3, 2.0, 1.0, 1).unwrap();
        assert_eq!(m.exponents, vec![6.0]);
        assert!(moser_exponents(3, 2.0, 0.0, 3).is_err());
        assert!(moser_exponents(3, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn caccioppoli_lower_bound() {
        // n=3, p=2, β=1: 2·[2 − 1]²/(1·1) = 2
        assert_abs_diff_eq!(caccioppoli_b_min(3, 2.0, 1.0), 2.0, epsilon = 1e-15);
        // large β pins the bound at 1
        assert_eq!(caccioppoli_b_min(3, 2.0, 100.0), 1.0);
    }
}
