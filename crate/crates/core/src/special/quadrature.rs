use super::{Interval, Tolerance};
use crate::error::{Error, Result};

// 15-point Kronrod nodes (non-negative half) and weights, with the embedded
// 7-point Gauss weights, as tabulated in QUADPACK's qk15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{lo}, {hi}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `interval`.
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol·|result|)`. `tol.max_iter`
/// bounds the number of bisections.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    interval: Interval,
    tol: Tolerance,
) -> Result<f64> {
    let mut segments = vec![kronrod15(&f, interval.lo, interval.hi)?];
    for _ in 0..tol.max_iter {
        let (total, err) = totals(&segments);
        if err <= tol.threshold(total) {
            return Ok(total);
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if !(mid > seg.lo && mid < seg.hi) {
            break;
        }
        segments.push(kronrod15(&f, seg.lo, mid)?);
        segments.push(kronrod15(&f, mid, seg.hi)?);
    }
    let (total, err) = totals(&segments);
    if err <= tol.threshold(total) {
        return Ok(total);
    }
    Err(Error::NotConverged {
        what: "adaptive quadrature",
        iterations: tol.max_iter,
        residual: err,
    })
}

fn totals(segments: &[Segment]) -> (f64, f64) {
    // sorted summation keeps the result independent of segment order
    let mut values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let total = values.iter().sum();
    let err = segments.iter().map(|s| s.error).sum();
    (total, err)
}

/// Integral over `[a, b]` that also accepts `a > b` (sign flips) and `a == b`.
pub(crate) fn integrate_signed<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a < b {
        integrate_adaptive(f, Interval::new(a, b)?, tol)
    } else {
        Ok(-integrate_adaptive(f, Interval::new(b, a)?, tol)?)
    }
}
