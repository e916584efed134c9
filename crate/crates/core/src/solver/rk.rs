//! Dormand–Prince 5(4) embedded Runge–Kutta step for two-component systems.

pub(crate) type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Fifth-order weights (same as the last stage row, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(crate) struct StepResult {
    pub y: State,
    /// Scaled RMS error; a step is acceptable when this is ≤ 1.
    pub err: f64,
}

/// One Dormand–Prince step of size `h` from `(r, y)`. Returns `None` when a
/// stage produced a non-finite value.
pub(crate) fn dopri_step<F>(
    rhs: &F,
    r: f64,
    y: &State,
    h: f64,
    atol: f64,
    rtol: f64,
) -> Option<StepResult>
where
    F: Fn(f64, &State) -> State,
{
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[s] = rhs(r + C[s] * h, &ys);
        if !(k[s][0].is_finite() && k[s][1].is_finite()) {
            return None;
        }
    }
    let mut y_new = *y;
    let mut e = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y_new[i] += h * B[s] * k[s][i];
            e[i] += h * E[s] * k[s][i];
        }
    }
    if !(y_new[0].is_finite() && y_new[1].is_finite()) {
        return None;
    }
    let mut acc = 0.0;
    for i in 0..2 {
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        acc += (e[i] / scale).powi(2);
    }
    Some(StepResult {
        y: y_new,
        err: (acc / 2.0).sqrt(),
    })
}

/// Step-size factor after a step with scaled error `err`.
pub(crate) fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}
