//! Empirical existence map over `(p, σ)` grids, overlaid with the predicted
//! nonexistence region.
//!
//! A cell is classified by shooting from one or more central values. Runs are
//! truncated at `r_max`, so "persists" is evidence of existence, never proof.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::solver::{solve_radial, ShootingConfig, Termination};
use crate::thresholds::{classify_regime, sigma1, thm2_threshold, EquationParams, Sign};

pub const CAVEAT: &str =
    "Nonexistence is a statement about complete manifolds; a run truncated at \
finite r_max can only corroborate it, and persistence up to r_max is evidence, not proof.";

/// Values along one grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Range { start: f64, stop: f64, step: f64 },
    Values(Vec<f64>),
}

impl Axis {
    pub fn single(x: f64) -> Self {
        Axis::Values(vec![x])
    }

    fn validate(&self, field: &'static str) -> Result<()> {
        match *self {
            Axis::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite()) {
                    return Err(LabError::param(field, "range ends must be finite"));
                }
                if !(step > 0.0 && step.is_finite()) {
                    return Err(LabError::param(
                        field,
                        format!("step must be positive, got {step}"),
                    ));
                }
                if stop < start {
                    return Err(LabError::param(
                        field,
                        format!("inverted range {start} > {stop}"),
                    ));
                }
                Ok(())
            }
            Axis::Values(ref v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(LabError::param(field, "values must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Grid points; a range includes `stop` when it lands within `1e−9·step`.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
            Axis::Values(ref v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: u32,
    /// `a = ±1`.
    pub sign: Sign,
    #[serde(rename = "K")]
    pub k: f64,
    pub p: Axis,
    pub sigma: Axis,
    /// Per-cell solver settings; `u0` is overridden by the scan list.
    pub config: ShootingConfig,
    /// Central values to shoot from; `None` picks `{1}` for `K = 0` and
    /// `{0.25, 1, 4}` otherwise.
    pub u0_list: Option<Vec<f64>>,
    /// A run reaching `r_max` counts as persisting only if `max |u − u0|`
    /// is at least this fraction of `u0`.
    pub min_relative_change: f64,
}

impl SweepGrid {
    pub fn new(n: u32, sign: Sign, k: f64, p: Axis, sigma: Axis, r_max: f64) -> Self {
        SweepGrid {
            n,
            sign,
            k,
            p,
            sigma,
            config: ShootingConfig::new(1.0, r_max),
            u0_list: None,
            min_relative_change: 0.5,
        }
    }

    pub fn a(&self) -> f64 {
        match self.sign {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn u0_values(&self) -> Vec<f64> {
        match &self.u0_list {
            Some(v) => v.clone(),
            None if self.k == 0.0 => vec![1.0],
            None => vec![0.25, 1.0, 4.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let space = ModelSpace::new(self.n, self.k)?;
        self.p.validate("p")?;
        self.sigma.validate("sigma")?;
        self.config.validate()?;
        for p in self.p.values() {
            EquationParams::new(space.n, p, self.a(), 1.0)?;
        }
        if self.sigma.values().contains(&0.0) {
            return Err(LabError::param("sigma", "grid contains σ = 0"));
        }
        let u0 = self.u0_values();
        if u0.is_empty() || u0.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return Err(LabError::param(
                "u0_list",
                "needs at least one positive value",
            ));
        }
        if !(self.min_relative_change > 0.0) {
            return Err(LabError::param("min_relative_change", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    ZeroHit {
        r_star: f64,
    },
    BlowUp {
        r_star: f64,
    },
    Persists {
        r_max: f64,
    },
    /// Reached `r_max` without moving far enough from `u0` to tell.
    Indeterminate {
        r_max: f64,
    },
    NumericalFailure {
        reason: String,
    },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::ZeroHit { .. } => "zero_hit",
            Classification::BlowUp { .. } => "blow_up",
            Classification::Persists { .. } => "persists",
            Classification::Indeterminate { .. } => "indeterminate",
            Classification::NumericalFailure { .. } => "numerical_failure",
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Classification::ZeroHit { r_star } | Classification::BlowUp { r_star } => Some(r_star),
            Classification::Persists { r_max } | Classification::Indeterminate { r_max } => {
                Some(r_max)
            }
            Classification::NumericalFailure { .. } => None,
        }
    }

    pub fn is_event(&self) -> bool {
        matches!(
            self,
            Classification::ZeroHit { .. } | Classification::BlowUp { .. }
        )
    }
}

/// Shoots from every `u0` and combines the outcomes: an event if all runs end
/// at one (smallest `r*` wins), persists if any run reaches `r_max` having
/// moved at least `min_relative_change · u0`.
pub fn classify_existence(
    params: &EquationParams,
    space: &ModelSpace,
    config: &ShootingConfig,
    u0_list: &[f64],
    min_relative_change: f64,
) -> Classification {
    let mut first_event: Option<Termination> = None;
    let mut all_events = true;
    let mut failure: Option<String> = None;
    for &u0 in u0_list {
        let cfg = ShootingConfig { u0, ..*config };
        let sol = match solve_radial(params, space, &cfg) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e.to_string());
                all_events = false;
                continue;
            }
        };
        match sol.termination {
            Termination::HitZero(r) | Termination::BlowUp(r) => {
                if first_event.is_none_or(|t| r < t.radius()) {
                    first_event = Some(sol.termination);
                }
            }
            Termination::ReachedRmax(r_max) => {
                all_events = false;
                let change = sol
                    .samples
                    .iter()
                    .map(|s| (s.u - u0).abs())
                    .fold(0.0, f64::max);
                if change >= min_relative_change * u0 {
                    return Classification::Persists { r_max };
                }
            }
            Termination::StepFailure(r) => {
                all_events = false;
                failure.get_or_insert(format!("step size underflow at r = {r}"));
            }
        }
    }
    if let Some(reason) = failure {
        return Classification::NumericalFailure { reason };
    }
    match (all_events, first_event) {
        (true, Some(Termination::HitZero(r))) => Classification::ZeroHit { r_star: r },
        (true, Some(Termination::BlowUp(r))) => Classification::BlowUp { r_star: r },
        _ => Classification::Indeterminate {
            r_max: config.r_max,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCell {
    pub p: f64,
    pub sigma: f64,
    pub classification: Classification,
    pub theory_thm1: bool,
    pub theory_thm2: bool,
}

impl ExistenceCell {
    pub fn theory_predicts_nonexistence(&self) -> bool {
        self.theory_thm1 || self.theory_thm2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub n: u32,
    pub sign: Sign,
    #[serde(rename = "K")]
    pub k: f64,
    pub r_max: f64,
    /// Row-major in `p`, then `σ`.
    pub cells: Vec<ExistenceCell>,
}

/// Classifies every cell, in parallel, returning cells in grid order.
pub fn sweep(grid: &SweepGrid) -> Result<SweepTable> {
    grid.validate()?;
    let space = ModelSpace::new(grid.n, grid.k)?;
    let a = grid.a();
    let u0 = grid.u0_values();
    let coords: Vec<(f64, f64)> = grid
        .p
        .values()
        .into_iter()
        .flat_map(|p| grid.sigma.values().into_iter().map(move |s| (p, s)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(p, sigma)| {
            let params = EquationParams::new(grid.n, p, a, sigma)?;
            let regime = classify_regime(&params);
            Ok(ExistenceCell {
                p,
                sigma,
                classification: classify_existence(
                    &params,
                    &space,
                    &grid.config,
                    &u0,
                    grid.min_relative_change,
                ),
                theory_thm1: regime.nonexistence_thm1.unwrap_or(false),
                theory_thm2: regime.nonexistence_thm2.unwrap_or(false),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        n: grid.n,
        sign: grid.sign,
        k: grid.k,
        r_max: grid.config.r_max,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub p: f64,
    /// Midpoint of the first σ interval where the classification switches
    /// between an event and persistence.
    pub empirical_sigma: Option<f64>,
    /// σ₁ for `a > 0`, or σ₂ for `a < 0`; `None` when `p ≥ 2n − 1`.
    pub theory_window_edge: Option<f64>,
    pub theory_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub r_max: f64,
    pub cells: usize,
    /// Cells where nonexistence is predicted but a solution persisted.
    pub contradictions: Vec<ExistenceCell>,
    pub numerical_failures: Vec<ExistenceCell>,
    pub indeterminate: Vec<ExistenceCell>,
    pub warning_count: usize,
    pub boundary: Vec<BoundaryPoint>,
    pub caveat: String,
}

/// Contradictions are counted only for `K = 0`, where the predictions apply.
pub fn compare_with_theory(table: &SweepTable) -> RegionComparison {
    let euclidean = table.k == 0.0;
    let pick = |f: &dyn Fn(&ExistenceCell) -> bool| -> Vec<ExistenceCell> {
        table.cells.iter().filter(|c| f(c)).cloned().collect()
    };
    let contradictions = pick(&|c| {
        euclidean
            && c.theory_predicts_nonexistence()
            && matches!(c.classification, Classification::Persists { .. })
    });
    let numerical_failures =
        pick(&|c| matches!(c.classification, Classification::NumericalFailure { .. }));
    let indeterminate = pick(&|c| matches!(c.classification, Classification::Indeterminate { .. }));

    let mut ps: Vec<f64> = table.cells.iter().map(|c| c.p).collect();
    ps.dedup();
    let boundary = ps
        .into_iter()
        .map(|p| {
            let mut column: Vec<&ExistenceCell> = table.cells.iter().filter(|c| c.p == p).collect();
            column.sort_by(|x, y| x.sigma.total_cmp(&y.sigma));
            let decided = |c: &ExistenceCell| {
                c.classification.is_event()
                    || matches!(c.classification, Classification::Persists { .. })
            };
            let empirical_sigma = column.windows(2).find_map(|w| {
                (decided(w[0])
                    && decided(w[1])
                    && w[0].classification.is_event() != w[1].classification.is_event())
                .then(|| 0.5 * (w[0].sigma + w[1].sigma))
            });
            let edge = match table.sign {
                Sign::Positive => sigma1(table.n, p),
                Sign::Negative => crate::thresholds::sigma2(table.n, p),
            };
            BoundaryPoint {
                p,
                empirical_sigma,
                theory_window_edge: edge.ok(),
                theory_threshold: thm2_threshold(table.n, p),
            }
        })
        .collect();
    RegionComparison {
        r_max: table.r_max,
        cells: table.cells.len(),
        warning_count: numerical_failures.len() + indeterminate.len(),
        contradictions,
        numerical_failures,
        indeterminate,
        boundary,
        caveat: CAVEAT.to_string(),
    }
}

/// `p,sigma,classification,r_star,theory_thm1,theory_thm2`; `r_star` is the
/// event radius, or `r_max` for runs that reached it, or empty on failure.
pub fn write_sweep_csv<W: Write>(table: &SweepTable, mut out: W) -> Result<()> {
    writeln!(out, "p,sigma,classification,r_star,theory_thm1,theory_thm2")?;
    for c in &table.cells {
        let r = c
            .classification
            .radius()
            .map(|r| format!("{r:.16e}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.p,
            c.sigma,
            c.classification.name(),
            r,
            c.theory_thm1,
            c.theory_thm2
        )?;
    }
    Ok(())
}
