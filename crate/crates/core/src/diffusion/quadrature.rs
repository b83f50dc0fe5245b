//! Adaptive Simpson quadrature on finite and semi-infinite intervals, and
//! log-domain Gauss-Kronrod integrals of steep exponentials.

use serde::Serialize;
use thiserror::Error;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum bisection depth of a single panel.
pub const MAX_DEPTH: u32 = 48;
/// Integrand evaluations allowed per call.
pub const MAX_EVALUATIONS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {x} (value {value})")]
    NonFinite { x: f64, value: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// Every panel met its share of the tolerance.
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// `∫_lo^hi f`, with `hi = f64::INFINITY` allowed.
///
/// The semi-infinite case substitutes `u = lo + s / (1 - s)`; the endpoint
/// `s = 1` is sampled at `1 - 1e-12`, and a non-finite value there is read
/// as the limit `0`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(lo.is_finite() && hi >= lo) || hi.is_nan() {
        return Err(QuadratureError::Interval { lo, hi });
    }
    if hi == lo {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    if hi.is_infinite() {
        let g = |s: f64| {
            let last = s >= 1.0;
            let s = if last { 1.0 - 1e-12 } else { s };
            let one_minus = 1.0 - s;
            let v = f(lo + s / one_minus) / (one_minus * one_minus);
            if last && !v.is_finite() {
                0.0
            } else {
                v
            }
        };
        return simpson_adaptive(g, 0.0, 1.0, tol);
    }
    simpson_adaptive(f, lo, hi, tol)
}

fn simpson_adaptive(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    adaptive(&f, lo, hi, tol, |v| v.abs().max(1.0))
}

/// Runs passes with a shrinking absolute tolerance until the error estimate
/// meets `tol * scale(value)`. The first pass guesses the magnitude from a
/// coarse Simpson sum, which can overshoot for sharply peaked integrands.
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    scale: impl Fn(f64) -> f64,
) -> Result<QuadratureResult, QuadratureError> {
    let mut abs_tol = None;
    let mut evaluations = 0;
    let mut last = None;
    for _ in 0..4 {
        let pass = simpson_pass(f, lo, hi, tol, abs_tol)?;
        evaluations += pass.evaluations;
        let target = tol * scale(pass.value);
        let done = pass.error_estimate <= target || !pass.converged;
        last = Some(QuadratureResult {
            evaluations,
            converged: pass.converged && pass.error_estimate <= target,
            ..pass
        });
        if done || target == 0.0 {
            break;
        }
        abs_tol = Some(0.5 * target);
    }
    Ok(last.expect("at least one pass"))
}

fn simpson_pass(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    abs_tol: Option<f64>,
) -> Result<QuadratureResult, QuadratureError> {
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: f64| -> Result<f64, QuadratureError> {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x, value: v })
        }
    };
    // start from eight panels so narrow features are less likely to be missed
    const START: usize = 8;
    let mut stack = Vec::new();
    let width = (hi - lo) / START as f64;
    let mut coarse = 0.0;
    let mut fa = eval(lo)?;
    for k in 0..START {
        let a = lo + k as f64 * width;
        let b = if k + 1 == START { hi } else { a + width };
        let fm = eval(0.5 * (a + b))?;
        let fb = eval(b)?;
        let whole = simpson(a, b, fa, fm, fb);
        coarse += whole.abs();
        stack.push(Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
            depth: 0,
        });
        fa = fb;
    }
    let abs_tol = abs_tol.unwrap_or(tol * coarse).max(1e-300);
    let total_width = hi - lo;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m))?;
        let frm = eval(0.5 * (m + p.b))?;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        let share = abs_tol * (p.b - p.a) / total_width;
        let out_of_budget = p.depth >= MAX_DEPTH || evaluations.get() >= MAX_EVALUATIONS;
        if diff.abs() <= 15.0 * share || out_of_budget {
            if out_of_budget && diff.abs() > 15.0 * share {
                converged = false;
            }
            value += left + right + diff / 15.0;
            error += diff.abs() / 15.0;
            continue;
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            depth: p.depth + 1,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate: error,
        evaluations: evaluations.get(),
        converged,
    })
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod value and its difference from the embedded 7-point
/// Gauss rule.
fn kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x, value: v })
        }
    };
    let centre = eval(mid)?;
    let mut kronrod = KRONROD_WEIGHTS[7] * centre;
    let mut gauss = GAUSS7_WEIGHTS[3] * centre;
    for k in 0..7 {
        let d = half * KRONROD_NODES[k];
        let pair = eval(mid - d)? + eval(mid + d)?;
        kronrod += KRONROD_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[k / 2] * pair;
        }
    }
    Ok((kronrod * half, (kronrod - gauss).abs() * half))
}

/// Adaptive Gauss-Kronrod with relative tolerance `tol`, for the smooth
/// positive integrands of [`ln_integrate`].
fn kronrod_adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult, QuadratureError> {
    let (whole, whole_err) = kronrod15(f, lo, hi)?;
    let mut evaluations = 15;
    if whole_err <= tol * whole.abs() {
        return Ok(QuadratureResult {
            value: whole,
            error_estimate: whole_err,
            evaluations,
            converged: true,
        });
    }
    let mut abs_tol = tol * whole.abs();
    let mut last = None;
    for _ in 0..4 {
        let mut stack = vec![(lo, hi, 0u32)];
        let (mut value, mut error, mut converged) = (0.0, 0.0, true);
        while let Some((a, b, depth)) = stack.pop() {
            let m = 0.5 * (a + b);
            let (left, left_err) = kronrod15(f, a, m)?;
            let (right, right_err) = kronrod15(f, m, b)?;
            evaluations += 30;
            let err = left_err + right_err;
            let share = abs_tol * (b - a) / (hi - lo);
            let out_of_budget = depth >= MAX_DEPTH || evaluations >= MAX_EVALUATIONS;
            if err <= share || out_of_budget {
                converged &= err <= share;
                value += left + right;
                error += err;
            } else {
                stack.push((a, m, depth + 1));
                stack.push((m, b, depth + 1));
            }
        }
        let target = tol * value.abs();
        let done = error <= target || !converged || target == 0.0;
        last = Some(QuadratureResult {
            value,
            error_estimate: error,
            evaluations,
            converged: converged && error <= target,
        });
        if done {
            break;
        }
        abs_tol = 0.5 * target;
    }
    Ok(last.expect("at least one pass"))
}

/// `ln ∫_lo^hi exp(g)` for a log-integrand `g`, without overflow.
///
/// The integrand is rescaled by its largest sampled value; if the rescaled
/// integrand still overflows the interval is split. A peak much narrower
/// than the interval is resolved on pieces graded geometrically towards it.
pub(crate) fn ln_integrate(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    ln_integrate_depth(g, lo, hi, tol, 0, f64::NEG_INFINITY)
}

// drop in g between neighbouring samples that counts as a narrow peak
const STEEP_DROP: f64 = 30.0;
// pieces below the running total by this much in log are skipped
const NEGLIGIBLE: f64 = 45.0;
const MAX_SPLIT_DEPTH: u32 = 40;

fn ln_integrate_depth(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    floor: f64,
) -> Result<f64, QuadratureError> {
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let mut samples = [0.0; 5];
    let mut points = [0.0; 5];
    for k in 0..5 {
        let x = if k == 4 { hi } else { lo + (hi - lo) * k as f64 / 4.0 };
        let v = g(x);
        if v.is_nan() || v == f64::INFINITY {
            return Err(QuadratureError::NonFinite { x, value: v });
        }
        samples[k] = v;
        points[k] = x;
    }
    let (argmax, shift) = samples
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    if shift == f64::NEG_INFINITY || shift + (hi - lo).ln() < floor - NEGLIGIBLE {
        return Ok(f64::NEG_INFINITY);
    }
    if depth < MAX_SPLIT_DEPTH {
        let steep_left = argmax == 0 && samples[1] < shift - STEEP_DROP;
        let steep_right = argmax == 4 && samples[3] < shift - STEEP_DROP;
        let narrow_inside = (1..4).contains(&argmax)
            && samples[argmax - 1] < shift - STEEP_DROP
            && samples[argmax + 1] < shift - STEEP_DROP;
        if steep_left || steep_right {
            let drop = if steep_left {
                shift - samples[1]
            } else {
                shift - samples[3]
            };
            // e-folding length of a linear decay through the two samples
            let scale = 0.25 * (hi - lo) / drop;
            return graded(g, lo, hi, tol, depth, floor, scale, steep_left);
        }
        if narrow_inside {
            let mid = points[argmax];
            let left = ln_integrate_depth(g, lo, mid, tol, depth + 1, floor)?;
            let right = ln_integrate_depth(g, mid, hi, tol, depth + 1, floor.max(left))?;
            return Ok(crate::model::log_add(left, right));
        }
    }
    // rounding in g, and in the sample positions times the slope of g, bound
    // the relative accuracy of exp(g) where it matters
    let relevant = |v: f64| v >= shift - 50.0;
    let magnitude = samples
        .iter()
        .filter(|&&v| relevant(v))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let slope = (0..4)
        .filter(|&k| relevant(samples[k].max(samples[k + 1])))
        .map(|k| (samples[k + 1] - samples[k]).abs() / (points[k + 1] - points[k]))
        .filter(|d| d.is_finite())
        .fold(0.0f64, f64::max);
    let position = (0..5)
        .filter(|&k| relevant(samples[k]))
        .fold(0.0f64, |m, k| m.max(points[k].abs()));
    let tol = tol.max(8.0 * f64::EPSILON * (magnitude + slope * position));
    let r = kronrod_adaptive(&|x| (g(x) - shift).exp(), lo, hi, tol);
    match r {
        Ok(r) if r.value > 0.0 => Ok(shift + r.value.ln()),
        Ok(_) => Ok(f64::NEG_INFINITY),
        Err(QuadratureError::NonFinite { .. }) if depth < MAX_SPLIT_DEPTH => {
            let mid = 0.5 * (lo + hi);
            let left = ln_integrate_depth(g, lo, mid, tol, depth + 1, floor)?;
            let right = ln_integrate_depth(g, mid, hi, tol, depth + 1, floor)?;
            Ok(crate::model::log_add(left, right))
        }
        Err(e) => Err(e),
    }
}

/// Pieces of doubling width starting at `scale / 2^10` next to the peak
/// (at `lo`, or at `hi` when `towards_lo` is false), summed outwards.
#[allow(clippy::too_many_arguments)]
fn graded(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    floor: f64,
    scale: f64,
    towards_lo: bool,
) -> Result<f64, QuadratureError> {
    let h = hi - lo;
    let mut width = (scale / 1024.0).min(h / 4.0);
    let mut total = f64::NEG_INFINITY;
    let mut done = 0.0;
    while done < h {
        let next = if done + 2.0 * width >= h { h } else { done + width };
        let (a, b) = if towards_lo {
            (lo + done, if next == h { hi } else { lo + next })
        } else {
            (if next == h { lo } else { hi - next }, hi - done)
        };
        let part = ln_integrate_depth(g, a, b, tol, depth + 1, total.max(floor))?;
        total = crate::model::log_add(total, part);
        done = next;
        width *= 2.0;
    }
    Ok(total)
}
