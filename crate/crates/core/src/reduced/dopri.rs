use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Error-per-step control with mixed tolerance `atol + rtol·|y|`.
    Adaptive { rtol: f64, atol: f64 },
    /// Equal steps, the last one shortened to land on the end point.
    Fixed { h: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            rtol: 1e-10,
            atol: 1e-10,
        }
    }
}

/// Accepted node `(t, y, y')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

const MAX_STEPS: usize = 200_000;

/// Integrate `y' = f(t, y)` from `(t0, y0)` to `t1 > t0`, returning every
/// accepted node including both end points.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    control: StepControl,
) -> Result<Vec<Node<N>>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "integration needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y)?;
    let mut nodes = vec![Node { t, y, dy: k0 }];
    let mut h = match control {
        StepControl::Fixed { h } if h > 0.0 => h,
        StepControl::Fixed { h } => {
            return Err(Error::InvalidParameter(format!("fixed step must be positive, got {h}")))
        }
        StepControl::Adaptive { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::InvalidParameter("integrator tolerances must be positive".into()));
            }
            initial_step(&y, &k0, span, rtol, atol)
        }
    };
    let min_step = 1e-14 * span.max(t1.abs());

    for _ in 0..MAX_STEPS {
        let remaining = t1 - t;
        if remaining <= 1e-15 * span {
            return Ok(nodes);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (y_new, k_new, err_vec) = stage(&f, t, &y, &k0, step)?;
        match control {
            StepControl::Fixed { .. } => {
                t = if last { t1 } else { t + step };
                y = y_new;
                k0 = k_new;
                nodes.push(Node { t, y, dy: k0 });
            }
            StepControl::Adaptive { rtol, atol } => {
                let mut sum = 0.0;
                for i in 0..N {
                    let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                    sum += (err_vec[i] / sc).powi(2);
                }
                let err = (sum / N as f64).sqrt();
                if !err.is_finite() {
                    h = 0.25 * step;
                } else if err <= 1.0 {
                    t = if last { t1 } else { t + step };
                    y = y_new;
                    k0 = k_new;
                    nodes.push(Node { t, y, dy: k0 });
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = step * factor;
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                }
                if h < min_step {
                    return Err(Error::StepFailure(format!("step size underflow at t = {t}")));
                }
            }
        }
    }
    Err(Error::StepFailure(format!("more than {MAX_STEPS} steps on [{t0}, {t1}]")))
}

type StageOut<const N: usize> = ([f64; N], [f64; N], [f64; N]);

fn stage<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k0: &[f64; N], h: f64) -> Result<StageOut<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if s == 6 {
            // FSAL: the seventh stage sits at the fifth-order solution
            let ks = f(t + h, &ys)?;
            k[6] = ks;
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            }
            if ys.iter().any(|v| !v.is_finite()) {
                return Err(Error::StepFailure(format!("non-finite state at t = {}", t + h)));
            }
            return Ok((ys, ks, err));
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    unreachable!("loop returns at the last stage")
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], span: f64, rtol: f64, atol: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(0.1 * span).max(1e-10 * span)
}
