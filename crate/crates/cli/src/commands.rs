use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use plaplab::geometry::ModelSpace;
use plaplab::numerics::{derivative, interp_cubic};
use plaplab::solver::{
    read_solution_csv, solve_radial, to_log_solution, write_solution_csv, LogSolution,
    RadialSolution, ShootingConfig,
};
use plaplab::sweep::{compare_with_theory, sweep as run_sweep, write_sweep_csv, Axis, SweepGrid};
use plaplab::thresholds::{
    beta, caccioppoli_b_min, classify_regime, threshold_report, EquationParams, Sign,
};
use plaplab::verify::{
    check_bochner_lemma, check_bochner_thm2, check_caccioppoli, check_gradient_estimate,
    check_harnack, cutoff_eta, measure_sobolev_ratio, BochnerConfig, CaccioppoliConfig,
    CheckRecord, Estimate, EtaProfile, RadialProfile, SampledProfile, SOBOLEV_POINTS,
};

use crate::config::{require, FlatConfig};
use crate::error::CliError;
use crate::{
    CheckArgs, CheckKind, EquationArgs, EstimateArg, Format, ShootingArgs, SolveArgs, SweepArgs,
    ThresholdArgs,
};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => {
            // a closed pipe (`| head`) is not an error for a report
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn equation(cfg: &mut FlatConfig, eq: &EquationArgs) -> Result<EquationParams, CliError> {
    let n = require(cfg.u32("n", eq.n)?, "n")?;
    let p = require(cfg.f64("p", eq.p)?, "p")?;
    let a = require(cfg.f64("a", eq.a)?, "a")?;
    let sigma = require(cfg.f64("sigma", eq.sigma)?, "sigma")?;
    Ok(EquationParams::new(n, p, a, sigma)?)
}

fn shooting(cfg: &mut FlatConfig, s: &ShootingArgs) -> Result<ShootingConfig, CliError> {
    let u0 = cfg.f64("u0", s.u0)?.unwrap_or(1.0);
    let r_max = require(cfg.f64("r_max", s.r_max)?, "r_max")?;
    let mut c = ShootingConfig::new(u0, r_max);
    for (key, flag, slot) in [
        ("abs_tol", s.abs_tol, &mut c.abs_tol),
        ("rel_tol", s.rel_tol, &mut c.rel_tol),
        ("zero_threshold", s.zero_threshold, &mut c.zero_threshold),
        (
            "blowup_threshold",
            s.blowup_threshold,
            &mut c.blowup_threshold,
        ),
        ("min_step", s.min_step, &mut c.min_step),
    ] {
        if let Some(v) = cfg.f64(key, flag)? {
            *slot = v;
        }
    }
    if let Some(v) = cfg.usize("output_points", s.output_points)? {
        c.output_points = v;
    }
    c.validate()?;
    Ok(c)
}

pub fn thresholds(args: ThresholdArgs) -> Result<bool, CliError> {
    let mut cfg = FlatConfig::load(args.config.as_deref())?;
    let n = require(cfg.u32("n", args.eq.n)?, "n")?;
    let p = require(cfg.f64("p", args.eq.p)?, "p")?;
    let a = cfg.f64("a", args.eq.a)?;
    let sigma = cfg.f64("sigma", args.eq.sigma)?;
    cfg.finish()?;
    let report = match (a, sigma) {
        (Some(a), Some(sigma)) => classify_regime(&EquationParams::new(n, p, a, sigma)?),
        (None, None) => threshold_report(n, p)?,
        _ => {
            return Err(CliError::Invalid(
                "give both --a and --sigma, or neither".into(),
            ))
        }
    };
    emit(&report, args.out.as_deref())?;
    Ok(true)
}

pub fn solve(args: SolveArgs) -> Result<bool, CliError> {
    let mut cfg = FlatConfig::load(args.config.as_deref())?;
    let params = equation(&mut cfg, &args.eq)?;
    let k = cfg.f64("K", args.shooting.k)?.unwrap_or(0.0);
    let config = shooting(&mut cfg, &args.shooting)?;
    cfg.finish()?;
    let space = ModelSpace::new(params.n, k)?;
    let solution = solve_radial(&params, &space, &config)?;
    let mut w = create(&args.out)?;
    match args.format {
        Format::Csv => write_solution_csv(&solution, &mut w)?,
        Format::Json => serde_json::to_writer_pretty(&mut w, &solution)?,
    }
    w.flush()?;
    emit(
        &json!({
            "termination": solution.termination.name(),
            "r_star": solution.termination.radius(),
            "samples": solution.samples.len(),
            "out": args.out,
        }),
        None,
    )?;
    Ok(true)
}

fn load_solution(path: &Path) -> Result<RadialSolution, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Failed(format!("cannot read {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "json") {
        let sol: RadialSolution = serde_json::from_reader(reader)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        return Ok(RadialSolution::from_samples(
            sol.params,
            sol.space,
            sol.config,
            sol.samples,
            sol.termination,
        )?);
    }
    Ok(read_solution_csv(reader)?)
}

fn truncated(log: &LogSolution, radius: Option<f64>) -> LogSolution {
    let mut out = log.clone();
    if let Some(r) = radius {
        out.samples.retain(|s| s.r <= r * (1.0 + 1e-12));
    }
    out
}

/// `g = f^{b/2 + 1 − 1/p} η` sampled on `[0, R]`.
fn moser_test_function(
    log: &LogSolution,
    b: f64,
    radius: f64,
    points: usize,
) -> Result<SampledProfile, CliError> {
    let p = log.params.p;
    let e = b / 2.0 + 1.0 - 1.0 / p;
    let h = log.spacing()?;
    let fs: Vec<f64> = log.samples.iter().map(|s| s.f).collect();
    let dfs = derivative(&fs, h)?;
    let eta = cutoff_eta(radius, EtaProfile::Smoothstep)?;
    let dr = radius / (points - 1) as f64;
    let (mut vals, mut ders) = (Vec::with_capacity(points), Vec::with_capacity(points));
    for j in 0..points {
        let r = j as f64 * dr;
        let f = interp_cubic(0.0, h, &fs, r).max(0.0);
        let df = interp_cubic(0.0, h, &dfs, r);
        let fe = f.powf(e);
        vals.push(fe * eta.value(r));
        let chain = if f > 0.0 {
            e * f.powf(e - 1.0) * df * eta.value(r)
        } else {
            0.0
        };
        ders.push(chain + fe * eta.derivative(r));
    }
    Ok(SampledProfile::new(dr, vals, ders)?)
}

pub fn check(args: CheckArgs) -> Result<bool, CliError> {
    let mut cfg = FlatConfig::load(args.config.as_deref())?;
    let radius = cfg.f64("R", args.radius)?;
    let b = cfg.f64("b", args.b)?;
    let tol_rel = cfg.f64("tol_rel", args.tol_rel)?;
    let pass_fraction = cfg.f64("pass_fraction", args.pass_fraction)?;
    let points = cfg.usize("quadrature_points", args.quadrature_points)?;
    let estimate = match args.estimate {
        Some(e) => Some(e),
        None => match cfg.string("estimate", None)?.as_deref() {
            None => None,
            Some("window") => Some(EstimateArg::Window),
            Some("threshold") => Some(EstimateArg::Threshold),
            Some(other) => {
                return Err(CliError::Invalid(format!(
                    "config key `estimate`: unknown value `{other}`"
                )))
            }
        },
    };
    cfg.finish()?;

    let solution = load_solution(&args.solution)?;
    let need_r = || require(radius, "R");
    let record: CheckRecord = match args.kind {
        CheckKind::Gradient => {
            let est = match estimate.unwrap_or(EstimateArg::Window) {
                EstimateArg::Window => Estimate::Window,
                EstimateArg::Threshold => Estimate::Threshold,
            };
            check_gradient_estimate(&solution, need_r()?, est)?.record()
        }
        CheckKind::Harnack => check_harnack(&solution, need_r()?)?.record(),
        CheckKind::Bochner | CheckKind::Bochner2 => {
            let log = truncated(&to_log_solution(&solution)?, radius);
            let mut bc = BochnerConfig::default();
            if let Some(t) = tol_rel {
                bc.tol_rel = t;
            }
            if let Some(f) = pass_fraction {
                bc.pass_fraction = f;
            }
            let mut rec = if matches!(args.kind, CheckKind::Bochner) {
                check_bochner_lemma(&log, &bc)?.record()
            } else {
                check_bochner_thm2(&log, &bc)?.record()
            };
            rec.radius = radius;
            rec
        }
        CheckKind::Caccioppoli => {
            let log = to_log_solution(&solution)?;
            let EquationParams { n, p, sigma, .. } = solution.params;
            let b_min = caccioppoli_b_min(n, p, beta(n, p, sigma, Sign::of(solution.params.a))?);
            let mut cc = CaccioppoliConfig::new(b.unwrap_or(2.0 * b_min));
            if let Some(m) = points {
                cc.quadrature_points = m;
            }
            check_caccioppoli(&log, &cc, need_r()?)?.record()
        }
        CheckKind::Sobolev => {
            let r = need_r()?;
            let log = to_log_solution(&solution)?;
            let m = points.unwrap_or(SOBOLEV_POINTS);
            if m < 5 {
                return Err(CliError::Invalid(
                    "quadrature_points must be at least 5".into(),
                ));
            }
            if log.samples.last().map_or(0.0, |s| s.r) < r * (1.0 - 1e-12) {
                return Err(CliError::Invalid(format!(
                    "solution is shorter than R = {r}"
                )));
            }
            let exponent = b.unwrap_or(2.0);
            let g = moser_test_function(&log, exponent, r, m)?;
            let mut rec = measure_sobolev_ratio(&g, &solution.space, r, m)?.record(solution.params);
            rec.metrics.insert("b".into(), json!(exponent));
            rec
        }
    };
    emit(&record, args.out.as_deref())?;
    Ok(record.pass)
}

fn axis(cfg: &mut FlatConfig, name: &'static str) -> Result<Axis, CliError> {
    if cfg.has(name) {
        return Ok(Axis::Values(cfg.list(name)?.unwrap_or_default()));
    }
    let key = |s: &str| format!("{name}_{s}");
    let start = require(cfg.f64(&key("min"), None)?, &key("min"))?;
    let stop = require(cfg.f64(&key("max"), None)?, &key("max"))?;
    let step = require(cfg.f64(&key("step"), None)?, &key("step"))?;
    Ok(Axis::Range { start, stop, step })
}

pub fn sweep(args: SweepArgs) -> Result<bool, CliError> {
    let mut cfg = FlatConfig::load(Some(&args.config))?;
    let n = require(cfg.u32("n", None)?, "n")?;
    let a = require(cfg.f64("a", None)?, "a")?;
    if a == 0.0 {
        return Err(CliError::Invalid(
            "invalid parameter `a`: must be nonzero".into(),
        ));
    }
    let k = cfg.f64("K", None)?.unwrap_or(0.0);
    let p = axis(&mut cfg, "p")?;
    let sigma = axis(&mut cfg, "sigma")?;
    let shooting_args = ShootingArgs {
        k: None,
        u0: None,
        r_max: args.r_max,
        abs_tol: None,
        rel_tol: None,
        zero_threshold: None,
        blowup_threshold: None,
        min_step: None,
        output_points: None,
    };
    let r_max = cfg.f64("r_max", args.r_max)?.unwrap_or(50.0);
    let mut grid = SweepGrid::new(n, Sign::of(a), k, p, sigma, r_max);
    grid.config = shooting(
        &mut cfg,
        &ShootingArgs {
            r_max: Some(r_max),
            ..shooting_args
        },
    )?;
    grid.u0_list = cfg.list("u0_list")?;
    if let Some(m) = cfg.f64("min_relative_change", None)? {
        grid.min_relative_change = m;
    }
    cfg.finish()?;

    let table = run_sweep(&grid)?;
    let mut w = create(&args.out)?;
    write_sweep_csv(&table, &mut w)?;
    w.flush()?;
    let cmp = compare_with_theory(&table);
    let mut summary = serde_json::to_value(&cmp)?;
    summary["n"] = json!(table.n);
    summary["sign"] = json!(table.sign);
    summary["K"] = json!(table.k);
    summary["contradiction_count"] = json!(cmp.contradictions.len());
    emit(&summary, args.summary.as_deref())?;
    if cmp.warning_count > 0 {
        eprintln!(
            "warning: {} cells failed numerically or were indeterminate",
            cmp.warning_count
        );
    }
    Ok(cmp.contradictions.is_empty())
}
