//! Shooting solver for the radial equation `Δ_p u + a u^σ = 0`.
//!
//! The state is `(u, w)` with the flux `w = |u′|^{p−2}u′`, so that
//!
//! ```text
//! u′ = sgn(w) |w|^{1/(p−1)}
//! w′ = −a u^σ − (n−1)(s′/s) w
//! ```
//!
//! which stays regular at critical points of `u` for every `p > 1` and starts
//! cleanly at the origin from the leading series term `w ≈ −a u₀^σ r / n`.
//!
//! Integration runs twice. The first pass walks a uniform grid over
//! `[0, r_max]` and locates a termination event (zero hit, blow-up) by
//! bisection. The second pass integrates again on a uniform grid over
//! `[0, r_end]` with steps clipped to land on every grid point, so the output
//! samples are genuine integrator states rather than interpolated values.

mod csv;
mod log;
pub(crate) mod rk;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::numerics::derivative;
use crate::thresholds::EquationParams;

pub use csv::{read_solution_csv, write_solution_csv};
pub use log::{to_log_solution, LogSample, LogSolution};
use rk::{dopri_step, step_factor, State};

/// Step control and termination thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Center value `u(0)`; `u′(0) = 0`.
    pub u0: f64,
    pub r_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `u` at or below this value counts as hitting zero.
    pub zero_threshold: f64,
    /// `u` at or above this value counts as blow-up.
    pub blowup_threshold: f64,
    pub min_step: f64,
    pub output_points: usize,
}

impl ShootingConfig {
    pub fn new(u0: f64, r_max: f64) -> Self {
        ShootingConfig {
            u0,
            r_max,
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            zero_threshold: 1e-8,
            blowup_threshold: 1e8,
            min_step: 1e-12,
            output_points: 2001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &'static str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(LabError::param(field, format!("must be positive, got {v}")))
            }
        };
        positive(self.u0, "u0")?;
        positive(self.r_max, "r_max")?;
        positive(self.abs_tol, "abs_tol")?;
        positive(self.rel_tol, "rel_tol")?;
        positive(self.zero_threshold, "zero_threshold")?;
        positive(self.blowup_threshold, "blowup_threshold")?;
        positive(self.min_step, "min_step")?;
        if self.zero_threshold >= self.u0 {
            return Err(LabError::param("zero_threshold", "must be below u0"));
        }
        if self.blowup_threshold <= self.u0 {
            return Err(LabError::param("blowup_threshold", "must exceed u0"));
        }
        if self.output_points < 5 {
            return Err(LabError::param(
                "output_points",
                "need at least 5 output points",
            ));
        }
        Ok(())
    }
}

/// How the integration ended; each variant carries the radius where it did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "r", rename_all = "snake_case")]
pub enum Termination {
    ReachedRmax(f64),
    HitZero(f64),
    BlowUp(f64),
    StepFailure(f64),
}

impl Termination {
    pub fn radius(&self) -> f64 {
        match *self {
            Termination::ReachedRmax(r)
            | Termination::HitZero(r)
            | Termination::BlowUp(r)
            | Termination::StepFailure(r) => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Termination::ReachedRmax(_) => "reached_rmax",
            Termination::HitZero(_) => "hit_zero",
            Termination::BlowUp(_) => "blow_up",
            Termination::StepFailure(_) => "step_failure",
        }
    }

    pub fn from_name(name: &str, r: f64) -> Option<Self> {
        Some(match name {
            "reached_rmax" => Termination::ReachedRmax(r),
            "hit_zero" => Termination::HitZero(r),
            "blow_up" => Termination::BlowUp(r),
            "step_failure" => Termination::StepFailure(r),
            _ => return None,
        })
    }

    /// True for terminations that stop at a singular point of the profile.
    pub fn is_event(&self) -> bool {
        !matches!(self, Termination::ReachedRmax(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    /// Flux `|u′|^{p−2}u′`.
    pub w: f64,
}

/// Sampled radial profile on a uniform grid starting at `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub params: EquationParams,
    pub space: ModelSpace,
    pub config: ShootingConfig,
    pub samples: Vec<RadialSample>,
    pub termination: Termination,
}

impl RadialSolution {
    /// Wraps externally produced samples (synthetic records, parsed files).
    ///
    /// Checks that radii start at 0 and increase strictly and that `u > 0`.
    pub fn from_samples(
        params: EquationParams,
        space: ModelSpace,
        config: ShootingConfig,
        samples: Vec<RadialSample>,
        termination: Termination,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::Input("solution has no samples".into()));
        }
        if samples[0].r != 0.0 {
            return Err(LabError::Input("first sample must sit at r = 0".into()));
        }
        for pair in samples.windows(2) {
            if !(pair[1].r > pair[0].r) {
                return Err(LabError::Input(format!(
                    "radii must increase strictly (at r = {})",
                    pair[1].r
                )));
            }
        }
        if let Some(s) = samples.iter().find(|s| !(s.u > 0.0 && s.u.is_finite())) {
            return Err(LabError::Input(format!(
                "u must be positive, got {} at r = {}",
                s.u, s.r
            )));
        }
        Ok(RadialSolution {
            params,
            space,
            config,
            samples,
            termination,
        })
    }

    pub fn r_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.r)
    }

    /// Uniform spacing, or an error when the grid is not uniform.
    pub fn spacing(&self) -> Result<f64> {
        uniform_spacing(self.samples.iter().map(|s| s.r))
    }

    pub fn radii(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }
}

pub(crate) fn uniform_spacing<I: Iterator<Item = f64>>(radii: I) -> Result<f64> {
    let r: Vec<f64> = radii.collect();
    if r.len() < 2 {
        return Err(LabError::Input("need at least two samples".into()));
    }
    let h = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
    for (i, ri) in r.iter().enumerate() {
        if (ri - (r[0] + i as f64 * h)).abs() > 1e-8 * h.max(r[r.len() - 1].abs()) {
            return Err(LabError::Input("samples are not on a uniform grid".into()));
        }
    }
    Ok(h)
}

struct Radial<'a> {
    params: &'a EquationParams,
    space: &'a ModelSpace,
    cfg: &'a ShootingConfig,
}

impl Radial<'_> {
    fn source(&self, u: f64) -> f64 {
        let sigma = self.params.sigma;
        if sigma > 0.0 {
            u.max(0.0).powf(sigma)
        } else if u > 0.0 {
            u.powf(sigma)
        } else {
            f64::NAN
        }
    }

    fn du(&self, w: f64) -> f64 {
        w.signum() * w.abs().powf(1.0 / (self.params.p - 1.0))
    }

    fn rhs(&self, r: f64, y: &State) -> State {
        let (u, w) = (y[0], y[1]);
        let n1 = self.space.n as f64 - 1.0;
        [
            self.du(w),
            -self.params.a * self.source(u) - n1 * self.space.log_derivative_unchecked(r) * w,
        ]
    }

    /// Leading terms of the regular solution at small `r`.
    fn series_start(&self, r: f64) -> State {
        let EquationParams { n, p, a, sigma } = *self.params;
        let u0 = self.cfg.u0;
        let c = a * u0.powf(sigma) / n as f64;
        let w = -c * r;
        let u =
            u0 - c.signum() * c.abs().powf(1.0 / (p - 1.0)) * (p - 1.0) / p * r.powf(p / (p - 1.0));
        [u, w]
    }

    fn sample(&self, r: f64, y: &State) -> RadialSample {
        RadialSample {
            r,
            u: y[0],
            du: self.du(y[1]),
            w: y[1],
        }
    }

    fn event(&self, y: &State) -> Option<EventKind> {
        if y[0] <= self.cfg.zero_threshold {
            Some(EventKind::Zero)
        } else if y[0] >= self.cfg.blowup_threshold {
            Some(EventKind::BlowUp)
        } else {
            None
        }
    }

    /// Bisection for the radius where `kind` first triggers inside a step of
    /// size `h` from `(r, y)`, re-stepping from the accepted state each time.
    fn locate(&self, kind: EventKind, r: f64, y: &State, h: f64) -> f64 {
        let rhs = |rr: f64, yy: &State| self.rhs(rr, yy);
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let triggered = match dopri_step(&rhs, r, y, mid, self.cfg.abs_tol, self.cfg.rel_tol) {
                Some(s) => self.event(&s.y) == Some(kind) || !s.y[0].is_finite(),
                None => true,
            };
            if triggered {
                hi = mid;
            } else {
                lo = mid;
            }
            if mid == lo && mid == hi {
                break;
            }
        }
        r + hi
    }

    /// Termination when the step size collapses at `(r, y)`.
    ///
    /// A steep power-law blow-up `u ~ (r* − r)^{−γ}`, `γ = p/(σ − p + 1)`, can
    /// exhaust `min_step` before `u` reaches the blow-up threshold. When `u` is
    /// increasing and past the square root of that threshold this counts as
    /// blow-up at the extrapolated `r* = r + γ u/u′`.
    fn collapse(&self, r: f64, y: &State) -> Termination {
        let EquationParams { p, sigma, .. } = *self.params;
        let du = self.du(y[1]);
        if sigma > p - 1.0 && du > 0.0 && y[0] >= self.cfg.blowup_threshold.sqrt() {
            let gamma = p / (sigma - p + 1.0);
            Termination::BlowUp(r + gamma * y[0] / du)
        } else {
            Termination::StepFailure(r)
        }
    }

    fn fail(&self, detect: bool, r: f64, y: &State) -> Termination {
        if detect {
            self.collapse(r, y)
        } else {
            Termination::StepFailure(r)
        }
    }

    /// Integrates on the uniform grid over `[0, r_end]`.
    ///
    /// With `detect` set, stops at the first event and reports it; otherwise
    /// integrates through to `r_end`, truncating the output if `u` leaves
    /// `(0, ∞)` or the step size collapses.
    fn run(&self, r_end: f64, detect: bool) -> (Vec<RadialSample>, Termination) {
        let npts = self.cfg.output_points;
        let dr = r_end / (npts - 1) as f64;
        let rhs = |rr: f64, yy: &State| self.rhs(rr, yy);
        let (atol, rtol) = (self.cfg.abs_tol, self.cfg.rel_tol);

        let mut samples = Vec::with_capacity(npts);
        samples.push(RadialSample {
            r: 0.0,
            u: self.cfg.u0,
            du: 0.0,
            w: 0.0,
        });

        let r_start = (1e-6 * self.cfg.r_max).min(0.5 * dr);
        let mut r = r_start;
        let mut y = self.series_start(r_start);
        let mut h = (0.1 * dr).max(r_start);

        for i in 1..npts {
            let target = if i == npts - 1 { r_end } else { i as f64 * dr };
            while r < target {
                let last = target - r <= h;
                let step = if last { target - r } else { h };
                if step < self.cfg.min_step && !last {
                    return (samples, self.fail(detect, r, &y));
                }
                match dopri_step(&rhs, r, &y, step, atol, rtol) {
                    Some(res) if res.err <= 1.0 => {
                        if detect {
                            if let Some(kind) = self.event(&res.y) {
                                let r_star = self.locate(kind, r, &y, step);
                                let term = match kind {
                                    EventKind::Zero => Termination::HitZero(r_star),
                                    EventKind::BlowUp => Termination::BlowUp(r_star),
                                };
                                return (samples, term);
                            }
                        } else if !(res.y[0] > 0.0) {
                            return (samples, Termination::StepFailure(r));
                        }
                        r = if last { target } else { r + step };
                        y = res.y;
                        if !last {
                            h = step * step_factor(res.err);
                        } else {
                            h = h.max(step * step_factor(res.err)).min(10.0 * dr);
                        }
                    }
                    Some(res) => {
                        h = step * step_factor(res.err);
                        if h < self.cfg.min_step {
                            return (samples, self.fail(detect, r, &y));
                        }
                    }
                    None => {
                        h = 0.25 * step;
                        if h < self.cfg.min_step {
                            return (samples, self.fail(detect, r, &y));
                        }
                    }
                }
            }
            samples.push(self.sample(target, &y));
        }
        (samples, Termination::ReachedRmax(r_end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Zero,
    BlowUp,
}

/// Solves the radial initial value problem `u(0) = u0, u′(0) = 0`.
pub fn solve_radial(
    params: &EquationParams,
    space: &ModelSpace,
    config: &ShootingConfig,
) -> Result<RadialSolution> {
    config.validate()?;
    if params.n != space.n {
        return Err(LabError::param(
            "n",
            format!(
                "equation dimension {} differs from space dimension {}",
                params.n, space.n
            ),
        ));
    }
    let radial = Radial {
        params,
        space,
        cfg: config,
    };
    let (first, termination) = radial.run(config.r_max, true);
    let samples = match termination {
        Termination::ReachedRmax(_) => first,
        Termination::StepFailure(r) if r <= 0.0 || first.len() < 2 => {
            return Err(LabError::Numerical(format!(
                "step size collapsed at r = {r} before the first output point"
            )));
        }
        other => {
            let (mut second, _) = radial.run(other.radius(), false);
            second.retain(|s| s.u > 0.0 && s.u.is_finite());
            second
        }
    };
    Ok(RadialSolution {
        params: *params,
        space: *space,
        config: *config,
        samples,
        termination,
    })
}

/// Radius of the zero hit, if that is how the solution terminated.
pub fn first_zero(solution: &RadialSolution) -> Option<f64> {
    match solution.termination {
        Termination::HitZero(r) => Some(r),
        _ => None,
    }
}

/// Fraction of the span excluded at each end by residual checks.
pub(crate) const RESIDUAL_BAND: f64 = 0.02;

/// Indices retained by residual checks: drop `r < 2%` of the span, and the
/// last 2% as well when the solution ends at an event (the profile is not
/// smooth there on a uniform grid).
pub(crate) fn residual_window(radii: &[f64], termination: &Termination) -> (usize, usize) {
    let span = radii[radii.len() - 1];
    let lo = radii
        .iter()
        .position(|&r| r >= RESIDUAL_BAND * span)
        .unwrap_or(0);
    let hi = if termination.is_event() {
        radii
            .iter()
            .rposition(|&r| r <= (1.0 - RESIDUAL_BAND) * span)
            .unwrap_or(radii.len() - 1)
    } else {
        radii.len() - 1
    };
    (lo, hi)
}

/// Max of `|Δ_p u + a u^σ|` over the retained samples, divided by the max of
/// `|a| u^σ` there.
///
/// `Δ_p u` is evaluated in flux form, `w′ + (n−1)(s′/s) w`, with fourth-order
/// central differences for `w′`.
pub fn pde_residual(solution: &RadialSolution) -> Result<f64> {
    let samples = &solution.samples;
    if samples.len() < 5 {
        return Err(LabError::Input(format!(
            "residual needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    let h = solution.spacing()?;
    let w: Vec<f64> = samples.iter().map(|s| s.w).collect();
    let dw = derivative(&w, h)?;
    let radii = solution.radii();
    let (lo, hi) = residual_window(&radii, &solution.termination);
    let EquationParams { n, a, sigma, .. } = solution.params;
    let n1 = n as f64 - 1.0;

    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in lo..=hi {
        let s = &samples[i];
        if s.r <= 0.0 {
            continue;
        }
        let lg = solution.space.log_derivative_unchecked(s.r);
        let source = a * s.u.powf(sigma);
        let res = dw[i] + n1 * lg * s.w + source;
        worst = worst.max(res.abs());
        scale = scale.max(source.abs());
    }
    if scale == 0.0 {
        return Err(LabError::Input(
            "no retained samples for the residual".into(),
        ));
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sinc_solution(r_max: f64) -> RadialSolution {
        let params = EquationParams::new(3, 2.0, 1.0, 1.0).unwrap();
        let space = ModelSpace::euclidean(3).unwrap();
        solve_radial(&params, &space, &ShootingConfig::new(1.0, r_max)).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut c = ShootingConfig::new(1.0, 5.0);
        assert!(c.validate().is_ok());
        c.zero_threshold = 2.0;
        assert!(matches!(
            c.validate(),
            Err(LabError::Parameter {
                field: "zero_threshold",
                ..
            })
        ));
        let mut c = ShootingConfig::new(1.0, 5.0);
        c.abs_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = ShootingConfig::new(1.0, 5.0);
        c.output_points = 3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let params = EquationParams::new(3, 2.0, 1.0, 1.0).unwrap();
        let space = ModelSpace::euclidean(4).unwrap();
        assert!(solve_radial(&params, &space, &ShootingConfig::new(1.0, 2.0)).is_err());
    }

    #[test]
    fn sinc_reproduced() {
        let sol = sinc_solution(10.0);
        let r_star = first_zero(&sol).expect("hits zero");
        assert_abs_diff_eq!(r_star, PI, epsilon = 1e-4);
        assert_eq!(sol.samples.len(), 2001);
        for s in sol.samples.iter().filter(|s| s.r <= 3.0 && s.r > 0.0) {
            assert_abs_diff_eq!(s.u, s.r.sin() / s.r, epsilon = 1e-6);
        }
        assert!(pde_residual(&sol).unwrap() < 1e-6);
    }

    #[test]
    fn reaches_rmax_when_positive() {
        let sol = sinc_solution(3.0);
        assert_eq!(sol.termination, Termination::ReachedRmax(3.0));
        assert_eq!(first_zero(&sol), None);
        assert_eq!(sol.r_end(), 3.0);
    }

    #[test]
    fn flux_consistency_and_monotonicity() {
        for (p, sigma) in [(1.5, 0.7), (2.0, 2.0), (3.0, 1.5)] {
            let params = EquationParams::new(3, p, 1.0, sigma).unwrap();
            let space = ModelSpace::new(3, 0.5).unwrap();
            let sol = solve_radial(&params, &space, &ShootingConfig::new(1.0, 6.0)).unwrap();
            for pair in sol.samples.windows(2) {
                assert!(pair[1].u < pair[0].u);
            }
            for s in &sol.samples {
                assert!(s.du <= 0.0 && s.w <= 0.0);
                let recon = s.w.abs().powf(1.0 / (p - 1.0));
                assert!((s.du.abs() - recon).abs() <= 1e-10 * recon.max(1.0));
            }
        }
    }

    #[test]
    fn residual_of_constant_record_is_one() {
        let params = EquationParams::new(3, 2.0, 1.0, 2.0).unwrap();
        let space = ModelSpace::euclidean(3).unwrap();
        let samples = (0..11)
            .map(|i| RadialSample {
                r: 0.1 * i as f64,
                u: 1.0,
                du: 0.0,
                w: 0.0,
            })
            .collect();
        let sol = RadialSolution::from_samples(
            params,
            space,
            ShootingConfig::new(1.0, 1.0),
            samples,
            Termination::ReachedRmax(1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(pde_residual(&sol).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_needs_samples() {
        let params = EquationParams::new(3, 2.0, 1.0, 2.0).unwrap();
        let space = ModelSpace::euclidean(3).unwrap();
        let samples = (0..4)
            .map(|i| RadialSample {
                r: 0.1 * i as f64,
                u: 1.0,
                du: 0.0,
                w: 0.0,
            })
            .collect();
        let sol = RadialSolution::from_samples(
            params,
            space,
            ShootingConfig::new(1.0, 1.0),
            samples,
            Termination::ReachedRmax(0.3),
        )
        .unwrap();
        assert!(matches!(pde_residual(&sol), Err(LabError::Input(_))));
    }

    #[test]
    fn from_samples_guards() {
        let params = EquationParams::new(3, 2.0, 1.0, 2.0).unwrap();
        let space = ModelSpace::euclidean(3).unwrap();
        let cfg = ShootingConfig::new(1.0, 1.0);
        let mk = |rs: &[f64], us: &[f64]| {
            rs.iter()
                .zip(us)
                .map(|(&r, &u)| RadialSample {
                    r,
                    u,
                    du: 0.0,
                    w: 0.0,
                })
                .collect::<Vec<_>>()
        };
        let t = Termination::ReachedRmax(1.0);
        assert!(
            RadialSolution::from_samples(params, space, cfg, mk(&[0.1, 0.2], &[1.0, 1.0]), t)
                .is_err()
        );
        assert!(
            RadialSolution::from_samples(params, space, cfg, mk(&[0.0, 0.0], &[1.0, 1.0]), t)
                .is_err()
        );
        assert!(
            RadialSolution::from_samples(params, space, cfg, mk(&[0.0, 0.1], &[1.0, -1.0]), t)
                .is_err()
        );
    }
}
