//! Acceptance suite: one line per criterion, then a single assertion that all
//! passed. Run with `cargo test -p plaplab --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use plaplab::geometry::ModelSpace;
use plaplab::solver::{
    first_zero, pde_residual, solve_radial, to_log_solution, LogSolution, RadialSample,
    RadialSolution, ShootingConfig, Termination,
};
use plaplab::sweep::{compare_with_theory, sweep, Axis, Classification, SweepGrid};
use plaplab::thresholds::{
    alpha, beta, caccioppoli_b_min, discriminant, moser_exponents, sigma1, thm2_threshold,
    EquationParams, Sign,
};
use plaplab::verify::{
    bound_shape, check_bochner_lemma, check_bochner_thm2, check_caccioppoli,
    check_gradient_estimate, check_harnack, scale_f, BochnerConfig, CaccioppoliConfig, Estimate,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    n: u32,
    p: f64,
    a: f64,
    sigma: f64,
    k: f64,
    u0: f64,
    r_max: f64,
    points: usize,
) -> RadialSolution {
    let params = EquationParams::new(n, p, a, sigma).unwrap();
    let space = ModelSpace::new(n, k).unwrap();
    let mut cfg = ShootingConfig::new(u0, r_max);
    cfg.output_points = points;
    solve_radial(&params, &space, &cfg).unwrap()
}

/// Instances for the Bochner and Harnack criteria: (n, p, a, σ, K, r_max).
const BOCHNER_SUITE: [(u32, f64, f64, f64, f64, f64); 8] = [
    (3, 2.0, 1.0, 1.0, 0.0, 3.0),
    (3, 2.0, 1.0, 1.0, 1.0, 2.5),
    (3, 1.5, 1.0, 0.5, 0.0, 3.0),
    (3, 3.0, 1.0, 1.5, 0.0, 3.0),
    (3, 2.0, -1.0, 3.0, 0.0, 3.0),
    (3, 3.0, -1.0, 4.0, 0.5, 3.0),
    (3, 1.5, -1.0, 1.0, 1.0, 3.0),
    (4, 2.5, 1.0, 1.5, 0.0, 3.0),
];

/// Caccioppoli instances inside the β window: (n, p, a, σ, K, r_max, R).
const CACCIOPPOLI_SUITE: [(u32, f64, f64, f64, f64, f64, f64); 4] = [
    (3, 2.0, 1.0, 1.0, 0.0, 3.0, 2.0),
    (3, 3.0, 1.0, 2.5, 1.0, 2.0, 1.5),
    (3, 2.0, -1.0, 3.0, 0.0, 2.2, 2.0),
    (4, 2.5, 1.0, 1.5, 0.0, 3.0, 2.5),
];

fn c1_threshold_quote() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=50u32 {
        let nf = n as f64;
        let quoted = 2.0 / (nf - 1.0) + 2.0 / (nf * (nf - 1.0)).sqrt();
        let got = sigma1(n, 2.0).unwrap() - 1.0;
        worst = worst.max((got - quoted).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("n = 3..50, max deviation {worst:.1e}"))
}

fn c2_alpha_and_gap() -> Outcome {
    let mut count = 0usize;
    let mut min_d = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    for n in 3..=27u32 {
        let nf = n as f64;
        let upper = 2.0 * nf - 1.0;
        for j in 0..400 {
            let p = 1.0 + (upper - 1.0) * (j as f64 + 0.5) / 400.0;
            let a = alpha(n, p).unwrap();
            let d = discriminant(n, p).unwrap();
            ensure(a > 0.0, || format!("α ≤ 0 at n = {n}, p = {p}"))?;
            ensure(d > 0.0, || format!("discriminant ≤ 0 at n = {n}, p = {p}"))?;
            let gap = sigma1(n, p).unwrap() - thm2_threshold(n, p);
            ensure(gap > 0.0, || {
                format!("threshold order fails at n = {n}, p = {p}")
            })?;
            min_d = min_d.min(d);
            min_gap = min_gap.min(gap);
            count += 1;
        }
        // continuity at the branch point 3 − 2/n: both formulas agree there
        let pb = 3.0 - 2.0 / nf;
        let eps = 1e-9;
        let jump = (alpha(n, pb + eps).unwrap() - alpha(n, pb - eps).unwrap()).abs();
        ensure(jump <= 10.0 * eps, || {
            format!("α jumps by {jump:e} at n = {n}")
        })?;
        let left = nf * (pb - 1.0).powi(2) / (nf - 1.0);
        let right = 2.0 * (pb - 1.0);
        ensure((left - right).abs() <= 1e-12, || {
            format!("branch mismatch at n = {n}")
        })?;
    }
    ensure(count == 10_000, || format!("grid has {count} points"))?;
    Ok(format!(
        "{count} points, min discriminant {min_d:.3e}, min σ₁ gap {min_gap:.3e}"
    ))
}

fn c3_oracle_solve() -> Outcome {
    let sol = solve(3, 2.0, 1.0, 1.0, 0.0, 1.0, 3.0, 3001);
    let err = sol
        .samples
        .iter()
        .map(|s| {
            let exact = if s.r == 0.0 { 1.0 } else { s.r.sin() / s.r };
            (s.u - exact).abs()
        })
        .fold(0.0, f64::max);
    ensure(err < 1e-6, || format!("max error {err:e}"))?;
    let res = pde_residual(&sol).map_err(|e| e.to_string())?;
    ensure(res < 1e-6, || format!("residual {res:e}"))?;
    let long = solve(3, 2.0, 1.0, 1.0, 0.0, 1.0, 4.0, 2001);
    let z = first_zero(&long).ok_or("no zero before r = 4")?;
    ensure((z - PI).abs() < 1e-4, || format!("first zero {z}"))?;
    Ok(format!(
        "max error {err:.1e}, residual {res:.1e}, r* − π = {:.1e}",
        z - PI
    ))
}

fn c4_symmetries() -> Outcome {
    let instances = [
        (1.5, 1.0, 0.5),
        (1.5, -1.0, 1.0),
        (2.0, 1.0, 1.0),
        (2.0, -1.0, 3.0),
        (3.0, 1.0, 1.5),
        (3.0, -1.0, 4.0),
    ];
    let (lambda, mu, r_max, pts) = (2.0f64, 2.0f64, 1.5, 1501);
    let mut worst: f64 = 0.0;
    for (p, a, sigma) in instances {
        let base = solve(3, p, a, sigma, 0.0, 1.0, r_max, pts);
        ensure(base.termination == Termination::ReachedRmax(r_max), || {
            format!("base run ended early: {:?}", base.termination)
        })?;
        // λu solves the equation with a λ^{p−1−σ}
        let scaled = solve(
            3,
            p,
            a * lambda.powf(p - 1.0 - sigma),
            sigma,
            0.0,
            lambda,
            r_max,
            pts,
        );
        // u(μ r) solves the equation with a μ^p
        let dilated = solve(3, p, a * mu.powf(p), sigma, 0.0, 1.0, r_max / mu, pts);
        for ((b, s), d) in base
            .samples
            .iter()
            .zip(&scaled.samples)
            .zip(&dilated.samples)
        {
            worst = worst.max((s.u / lambda - b.u).abs() / b.u);
            worst = worst.max((d.u - b.u).abs() / b.u);
        }
    }
    ensure(worst <= 1e-7, || {
        format!("max relative deviation {worst:e}")
    })?;
    Ok(format!("6 instances, max relative deviation {worst:.1e}"))
}

fn log_of(inst: (u32, f64, f64, f64, f64, f64)) -> LogSolution {
    let (n, p, a, sigma, k, r_max) = inst;
    to_log_solution(&solve(n, p, a, sigma, k, 1.0, r_max, 4001)).unwrap()
}

fn c5_bochner() -> Outcome {
    let cfg = BochnerConfig::default();
    let mut min_fraction: f64 = 1.0;
    for inst in BOCHNER_SUITE {
        let log = log_of(inst);
        let lemma = check_bochner_lemma(&log, &cfg).map_err(|e| e.to_string())?;
        let thm2 = check_bochner_thm2(&log, &cfg).map_err(|e| e.to_string())?;
        ensure(lemma.pass && thm2.pass, || {
            format!("{inst:?}: fractions {} / {}", lemma.fraction, thm2.fraction)
        })?;
        min_fraction = min_fraction.min(lemma.fraction).min(thm2.fraction);
    }
    let sinc = log_of(BOCHNER_SUITE[0]);
    let halved = check_bochner_lemma(&scale_f(&sinc, 0.5), &cfg).unwrap();
    let tripled_l = check_bochner_lemma(&scale_f(&sinc, 3.0), &cfg).unwrap();
    let tripled_t = check_bochner_thm2(&scale_f(&sinc, 3.0), &cfg).unwrap();
    ensure(!halved.pass && !tripled_l.pass && !tripled_t.pass, || {
        format!(
            "controls passed: f×0.5 {}, f×3 {} / {}",
            halved.fraction, tripled_l.fraction, tripled_t.fraction
        )
    })?;
    Ok(format!(
        "8 instances, min fraction {min_fraction:.3}; controls f×0.5 {:.2}, f×3 {:.2} / {:.2}",
        halved.fraction, tripled_l.fraction, tripled_t.fraction
    ))
}

fn c6_caccioppoli() -> Outcome {
    let mut min_rel = f64::INFINITY;
    for (n, p, a, sigma, k, r_max, radius) in CACCIOPPOLI_SUITE {
        let log = log_of((n, p, a, sigma, k, r_max));
        let b_min = caccioppoli_b_min(n, p, beta(n, p, sigma, Sign::of(a)).unwrap());
        for factor in [1.1, 2.0, 4.0] {
            let rep = check_caccioppoli(&log, &CaccioppoliConfig::new(factor * b_min), radius)
                .map_err(|e| e.to_string())?;
            ensure(rep.pass && rep.slack >= 0.0, || {
                format!(
                    "({n}, {p}, {a}, {sigma}, K={k}) b = {}: slack {:e}",
                    rep.b, rep.slack
                )
            })?;
            min_rel = min_rel.min(rep.slack / rep.scale);
        }
    }
    Ok(format!(
        "4 instances × 3 exponents, min slack/scale {min_rel:.3e}"
    ))
}

fn c7_scale_invariance() -> Outcome {
    // At p = 2 the dilation u(μr) with a μ² leaves sup|u′|/u · R^{p/2} unchanged;
    // for other p it scales as μ^{1−p/2}.
    let (p, sigma, r_max, radius) = (2.0, 2.0, 3.0, 2.0);
    let mut cs = Vec::new();
    for mu in [1.0f64, 2.0, 4.0, 8.0] {
        let sol = solve(3, p, mu.powf(p), sigma, 0.0, 1.0, r_max / mu, 3001);
        let rep = check_gradient_estimate(&sol, radius / mu, Estimate::Window)
            .map_err(|e| e.to_string())?;
        ensure(rep.applicable, || "instance outside the window".into())?;
        let shape = bound_shape(p, 0.0, radius / mu);
        ensure((rep.bound_shape - shape).abs() <= 1e-12 * shape, || {
            "bound shape mismatch".into()
        })?;
        cs.push(rep.empirical_c);
    }
    let max = cs.iter().cloned().fold(f64::MIN, f64::max);
    let min = cs.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min - 1.0;
    ensure(spread <= 0.02, || format!("C = {cs:?}"))?;
    Ok(format!(
        "C = {:.6}, spread {spread:.1e} over μ = 1, 2, 4, 8",
        cs[0]
    ))
}

fn c8_harnack() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, p, a, sigma, k, r_max) in BOCHNER_SUITE {
        let sol = solve(n, p, a, sigma, k, 1.0, r_max, 4001);
        let radius = 0.8 * sol.r_end();
        let rep = check_harnack(&sol, radius).map_err(|e| e.to_string())?;
        ensure(rep.pass && rep.ratio >= 1.0, || {
            format!(
                "{:?}: {} vs {}",
                (n, p, a, sigma, k),
                rep.ratio,
                rep.integrated_bound
            )
        })?;
        worst = worst.max(rep.ratio.ln() / rep.integrated_bound.ln());
        count += 1;
    }
    let params = EquationParams::new(3, 2.0, 1.0, 1.0).unwrap();
    let space = ModelSpace::euclidean(3).unwrap();
    let samples = (0..101)
        .map(|i| RadialSample {
            r: 0.02 * i as f64,
            u: 1.0,
            du: 0.0,
            w: 0.0,
        })
        .collect();
    let one = RadialSolution::from_samples(
        params,
        space,
        ShootingConfig::new(1.0, 2.0),
        samples,
        Termination::ReachedRmax(2.0),
    )
    .unwrap();
    let rep = check_harnack(&one, 2.0).unwrap();
    ensure(rep.ratio == 1.0 && rep.pass, || {
        format!("u ≡ 1 gave ratio {}", rep.ratio)
    })?;
    Ok(format!(
        "{count} instances, max log-ratio / log-bound {worst:.3}; u ≡ 1 ratio 1"
    ))
}

fn c9_sweep() -> Outcome {
    let grid = SweepGrid::new(
        3,
        Sign::Positive,
        0.0,
        Axis::single(2.0),
        Axis::Range {
            start: 0.5,
            stop: 2.75,
            step: 0.25,
        },
        50.0,
    );
    let table = sweep(&grid).map_err(|e| e.to_string())?;
    ensure(table.cells.len() == 10, || {
        format!("{} cells", table.cells.len())
    })?;
    if let Some(c) = table
        .cells
        .iter()
        .find(|c| !matches!(c.classification, Classification::ZeroHit { .. }))
    {
        return Err(format!(
            "σ = {} classified {}",
            c.sigma,
            c.classification.name()
        ));
    }
    let cmp = compare_with_theory(&table);
    ensure(cmp.contradictions.is_empty(), || {
        format!("{} contradictions", cmp.contradictions.len())
    })?;
    let critical = SweepGrid {
        sigma: Axis::single(5.0),
        ..grid
    };
    let crit = sweep(&critical).map_err(|e| e.to_string())?;
    let class = &crit.cells[0].classification;
    ensure(matches!(class, Classification::Persists { .. }), || {
        format!("σ = 5 classified {}", class.name())
    })?;
    let last = table.cells.last().unwrap().classification.radius().unwrap();
    Ok(format!(
        "10 cells zero_hit (r* up to {last:.3}), 0 contradictions, σ = 5 persists"
    ))
}

fn c10_moser() -> Outcome {
    let len = 40;
    let mut worst: f64 = 0.0;
    for n in [3u32, 4, 5] {
        let nf = n as f64;
        let seq = moser_exponents(n, 2.0, 1.0, len).map_err(|e| e.to_string())?;
        let b1 = seq.exponents[0];
        let r = (nf - 2.0) / nf;
        let lf = len as f64;
        let tail = r.powi(len as i32) / (1.0 - r) / b1;
        let tail_l = ((lf + 1.0) * r.powi(len as i32) - lf * r.powi(len as i32 + 1))
            / (1.0 - r).powi(2)
            / b1;
        let gap = nf / (2.0 * b1) - seq.sum_inv;
        let gap_l = nf * nf / (4.0 * b1) - seq.sum_l_inv;
        ensure(gap >= -1e-14 && gap <= tail * (1.0 + 1e-9) + 1e-14, || {
            format!("n = {n}: Σ1/b gap {gap:e} vs tail {tail:e}")
        })?;
        ensure(
            gap_l >= -1e-14 && gap_l <= tail_l * (1.0 + 1e-9) + 1e-14,
            || format!("n = {n}: Σl/b gap {gap_l:e} vs tail {tail_l:e}"),
        )?;
        worst = worst.max((gap - tail).abs()).max((gap_l - tail_l).abs());
    }
    Ok(format!("n = 3, 4, 5, L = 40; |gap − tail| ≤ {worst:.1e}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (
            "threshold quote σ₁(n, 2) − 1",
            c1_threshold_quote,
            Duration::from_secs(1),
        ),
        (
            "α continuity, discriminant, threshold order",
            c2_alpha_and_gap,
            Duration::from_secs(1),
        ),
        (
            "oracle solve sin r / r",
            c3_oracle_solve,
            Duration::from_secs(1),
        ),
        (
            "solver scaling and dilation",
            c4_symmetries,
            Duration::from_secs(10),
        ),
        (
            "Bochner suite and negative control",
            c5_bochner,
            Duration::from_secs(30),
        ),
        (
            "Caccioppoli slack ladder",
            c6_caccioppoli,
            Duration::from_secs(30),
        ),
        (
            "gradient-estimate scale invariance",
            c7_scale_invariance,
            Duration::from_secs(20),
        ),
        (
            "Harnack ratio against integrated bound",
            c8_harnack,
            Duration::from_secs(5),
        ),
        ("nonexistence sweep", c9_sweep, Duration::from_secs(120)),
        ("Moser exponent series", c10_moser, Duration::from_secs(1)),
    ];
    let mut failures = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; over budget {budget:?}")),
            other => other,
        };
        match &outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                println!("FAIL [{:>2}] {name}: {why} ({elapsed:.2?})", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
