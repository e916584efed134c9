//! Solution files: `#`-prefixed `key = value` metadata, then `r,u,du,w` rows
//! written with 17 significant digits.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{RadialSample, RadialSolution, ShootingConfig, Termination};
use crate::error::{LabError, Result};
use crate::geometry::ModelSpace;
use crate::thresholds::EquationParams;

const HEADER: &str = "r,u,du,w";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_solution_csv<W: Write>(solution: &RadialSolution, mut out: W) -> Result<()> {
    let p = &solution.params;
    let c = &solution.config;
    writeln!(out, "# plaplab radial solution")?;
    writeln!(out, "# n = {}", p.n)?;
    writeln!(out, "# p = {}", fmt(p.p))?;
    writeln!(out, "# a = {}", fmt(p.a))?;
    writeln!(out, "# sigma = {}", fmt(p.sigma))?;
    writeln!(out, "# K = {}", fmt(solution.space.k))?;
    writeln!(out, "# u0 = {}", fmt(c.u0))?;
    writeln!(out, "# r_max = {}", fmt(c.r_max))?;
    writeln!(out, "# abs_tol = {}", fmt(c.abs_tol))?;
    writeln!(out, "# rel_tol = {}", fmt(c.rel_tol))?;
    writeln!(out, "# zero_threshold = {}", fmt(c.zero_threshold))?;
    writeln!(out, "# blowup_threshold = {}", fmt(c.blowup_threshold))?;
    writeln!(out, "# min_step = {}", fmt(c.min_step))?;
    writeln!(out, "# output_points = {}", c.output_points)?;
    writeln!(out, "# termination = {}", solution.termination.name())?;
    writeln!(out, "# r_star = {}", fmt(solution.termination.radius()))?;
    writeln!(out, "{HEADER}")?;
    for s in &solution.samples {
        writeln!(out, "{},{},{},{}", fmt(s.r), fmt(s.u), fmt(s.du), fmt(s.w))?;
    }
    Ok(())
}

pub fn read_solution_csv<R: BufRead>(input: R) -> Result<RadialSolution> {
    let mut meta: HashMap<String, String> = HashMap::new();
    let mut samples = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(LabError::Input(format!(
                    "line {}: expected header `{HEADER}`, found `{line}`",
                    lineno + 1
                )));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(LabError::Input(format!(
                "line {}: expected 4 fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let mut vals = [0.0; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse()
                .map_err(|_| LabError::Input(format!("line {}: cannot parse `{f}`", lineno + 1)))?;
        }
        samples.push(RadialSample {
            r: vals[0],
            u: vals[1],
            du: vals[2],
            w: vals[3],
        });
    }
    if !seen_header {
        return Err(LabError::Input("missing `r,u,du,w` header".into()));
    }

    let get = |k: &str| -> Result<f64> {
        meta.get(k)
            .ok_or_else(|| LabError::Input(format!("missing metadata `{k}`")))?
            .parse()
            .map_err(|_| LabError::Input(format!("bad metadata value for `{k}`")))
    };
    let n = get("n")? as u32;
    let params = EquationParams::new(n, get("p")?, get("a")?, get("sigma")?)?;
    let space = ModelSpace::new(n, get("K")?)?;
    let mut config = ShootingConfig::new(get("u0")?, get("r_max")?);
    for (key, slot) in [
        ("abs_tol", &mut config.abs_tol),
        ("rel_tol", &mut config.rel_tol),
        ("zero_threshold", &mut config.zero_threshold),
        ("blowup_threshold", &mut config.blowup_threshold),
        ("min_step", &mut config.min_step),
    ] {
        if meta.contains_key(key) {
            *slot = get(key)?;
        }
    }
    if meta.contains_key("output_points") {
        config.output_points = get("output_points")? as usize;
    }
    let kind = meta
        .get("termination")
        .ok_or_else(|| LabError::Input("missing metadata `termination`".into()))?;
    let r_star = get("r_star")?;
    let termination = Termination::from_name(kind, r_star)
        .ok_or_else(|| LabError::Input(format!("unknown termination `{kind}`")))?;
    RadialSolution::from_samples(params, space, config, samples, termination)
}
