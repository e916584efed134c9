//! Small numerical kernels on uniform grids: finite differences, quadrature
//! and local interpolation.

use crate::error::{LabError, Result};

/// Fourth-order first derivative of uniformly spaced samples.
///
/// Central five-point stencil in the interior, one-sided fourth-order
/// stencils at the two points nearest each end.
pub fn derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 5 {
        return Err(LabError::Input(format!(
            "finite differences need at least 5 samples, got {n}"
        )));
    }
    let f = values;
    let c = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let m = n - 1;
    d[m] =
        -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
    d[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
    Ok(d)
}

/// Composite Simpson rule on uniformly spaced samples.
///
/// An even number of samples is handled with a 3/8 panel on the last four.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ if n % 2 == 1 => {
            let mut s = values[0] + values[n - 1];
            for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0
        }
        _ => {
            let k = n - 3;
            let tail = &values[k - 1..];
            simpson(&values[..k], h)
                + 3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
        }
    }
}

/// Adaptive Simpson quadrature of a smooth integrand on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Rough magnitude estimate to turn the relative tolerance into an absolute one.
    let probe = simpson(
        &(0..=64)
            .map(|i| f(a + (b - a) * i as f64 / 64.0).abs())
            .collect::<Vec<_>>(),
        (b - a) / 64.0,
    );
    let tol = rel_tol * probe.max(f64::MIN_POSITIVE);
    recurse(&f, a, b, fa, fm, fb, coarse, tol, 48)
}

/// Four-point Lagrange interpolation on a uniform grid starting at `x0`.
pub fn interp_cubic(x0: f64, h: f64, ys: &[f64], x: f64) -> f64 {
    let n = ys.len();
    debug_assert!(n >= 4);
    let t = (x - x0) / h;
    let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        let tj = (base + j) as f64;
        for k in 0..4 {
            if k != j {
                let tk = (base + k) as f64;
                w *= (t - tk) / (tj - tk);
            }
        }
        acc += w * ys[base + j];
    }
    acc
}
