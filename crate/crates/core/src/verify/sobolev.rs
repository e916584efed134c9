use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cutoff::RadialProfile;
use super::CheckRecord;
use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::simpson;
use crate::thresholds::EquationParams;

/// Default quadrature size for [`measure_sobolev_ratio`].
pub const SOBOLEV_POINTS: usize = 4001;

/// `(∫|g|^{2q})^{1/q} V^{2/n} / (R² ∫|g′|² + ∫g²)` on the ball of radius `R`,
/// `q = n/(n−2)`. Integrals and `V` omit the sphere area; the ratio does not
/// depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevRatioReport {
    pub space: ModelSpace,
    #[serde(rename = "R")]
    pub radius: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs_core: f64,
    pub volume: f64,
    pub empirical_constant: f64,
}

impl SobolevRatioReport {
    /// No pass/fail: only the constant's existence is claimed, so `pass`
    /// records finiteness.
    pub fn record(&self, params: EquationParams) -> CheckRecord {
        let mut rec = CheckRecord::new("sobolev", params, self.space, Some(self.radius))
            .metric("q", json!(self.q))
            .metric("lhs", json!(self.lhs))
            .metric("rhs_core", json!(self.rhs_core))
            .metric("volume", json!(self.volume))
            .metric("empirical_constant", json!(self.empirical_constant))
            .metric("sphere_area_dropped", json!(true));
        rec.pass = self.empirical_constant.is_finite() && self.empirical_constant > 0.0;
        rec
    }
}

pub fn measure_sobolev_ratio(
    g: &dyn RadialProfile,
    space: &ModelSpace,
    radius: f64,
    points: usize,
) -> Result<SobolevRatioReport> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(LabError::param(
            "R",
            format!("must be positive, got {radius}"),
        ));
    }
    if points < 5 {
        return Err(LabError::param("points", "need at least 5"));
    }
    let nf = space.n as f64;
    let q = nf / (nf - 2.0);
    let h = radius / (points - 1) as f64;
    let rs: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();
    let vals: Vec<f64> = rs.iter().map(|&r| g.value(r)).collect();
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return Err(LabError::Input("test function is identically zero".into()));
    }
    if g.value(radius).abs() > 1e-9 * peak {
        return Err(LabError::Input(format!(
            "test function must vanish at R, got g(R) = {}",
            g.value(radius)
        )));
    }
    let w: Vec<f64> = rs.iter().map(|&r| space.weight(r)).collect();
    let pow: Vec<f64> = vals
        .iter()
        .zip(&w)
        .map(|(v, w)| v.abs().powf(2.0 * q) * w)
        .collect();
    let grad: Vec<f64> = rs
        .iter()
        .zip(&w)
        .map(|(&r, w)| g.derivative(r).powi(2) * w)
        .collect();
    let sq: Vec<f64> = vals.iter().zip(&w).map(|(v, w)| v * v * w).collect();
    let lhs = simpson(&pow, h).powf(1.0 / q);
    let rhs_core = radius * radius * simpson(&grad, h) + simpson(&sq, h);
    let volume = simpson(&w, h);
    Ok(SobolevRatioReport {
        space: *space,
        radius,
        q,
        lhs,
        rhs_core,
        volume,
        empirical_constant: lhs * volume.powf(2.0 / nf) / rhs_core,
    })
}
