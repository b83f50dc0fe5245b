use super::criteria::{golden_max, DiffusionAnalysis};
use super::profile::{DiffusionProfile, GRID_MIN};
use super::quadrature::integrate;
use super::DiffusionError;
use crate::chain::ORACLE_TOL;
use crate::eigen::TridiagonalMatrix;
use crate::gap::{Boundary, Delta, GapEstimate, OracleValue, VariationalBound};
use crate::model::{log_add, DiffusionModel};
use crate::verdict::{decide_series_blocks, log_sub, Outcome};

/// Default number of grid steps of the finite-difference oracle.
pub const FD_STEPS: usize = 4096;
/// Largest mass fraction the oracle may leave beyond its cutoff.
pub const FD_TAIL: f64 = 1e-8;
/// The default cutoff is this multiple of the smallest dyadic cutoff
/// satisfying [`FD_TAIL`].
pub const FD_CUTOFF_FACTOR: f64 = 4.0;

const C_TOL: f64 = 1e-12;

/// Test function `f` for the variational bound and the Rayleigh quotient.
pub trait TestFunction {
    fn value(&self, x: f64) -> f64;

    /// `ln (f(x) - f(0))`; override when `f` itself overflows.
    fn ln_rise(&self, x: f64) -> f64 {
        (self.value(x) - self.value(0.0)).ln()
    }

    /// `ln f'(x)` when known in closed form.
    fn ln_derivative(&self, _x: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> TestFunction for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Interpolation points per panel for the representative function.
const REP_NODES: usize = 12;

/// `f(x) = sqrt(∫_0^x e^{-C})`, defined on `[0, end]` of the profile grid.
///
/// On panels where the drift is smooth, `ln(∫_0^x e^{-C} / x)` is
/// interpolated through Chebyshev-Lobatto points; elsewhere it is
/// integrated at each call.
#[derive(Debug, Clone)]
pub struct RepresentativeF<'a, 'm> {
    profile: &'a DiffusionProfile<'m>,
    // ln(S(u)/u) at the interpolation points of each smooth panel
    tables: Vec<Option<[f64; REP_NODES]>>,
}

fn lobatto(lo: f64, hi: f64, j: usize) -> f64 {
    if j == 0 {
        return lo;
    }
    if j == REP_NODES - 1 {
        return hi;
    }
    let t = (std::f64::consts::PI * j as f64 / (REP_NODES - 1) as f64).cos();
    0.5 * (lo + hi) - 0.5 * (hi - lo) * t
}

impl<'a, 'm> RepresentativeF<'a, 'm> {
    pub fn new(profile: &'a DiffusionProfile<'m>) -> Result<Self, DiffusionError> {
        let n = profile.knots.len();
        let mut tables = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            if !profile.smooth[i] {
                tables.push(None);
                continue;
            }
            let (lo, hi) = (profile.knots[i], profile.knots[i + 1]);
            let mut t = [0.0; REP_NODES];
            for (j, v) in t.iter_mut().enumerate() {
                let u = lobatto(lo, hi, j);
                *v = if u == 0.0 {
                    // S(u)/u -> e^{-C(0)} = 1
                    0.0
                } else {
                    profile.ln_scale_to(u)? - u.ln()
                };
            }
            tables.push(Some(t));
        }
        Ok(Self { profile, tables })
    }

    fn ln_value(&self, x: f64) -> f64 {
        if !(0.0..=self.profile.end()).contains(&x) {
            return f64::NAN;
        }
        if x == 0.0 {
            return f64::NEG_INFINITY;
        }
        let i = self.profile.panel(x);
        let Some(t) = &self.tables[i] else {
            return self.profile.ln_scale_to(x).map_or(f64::NAN, |v| 0.5 * v);
        };
        let (lo, hi) = (self.profile.knots[i], self.profile.knots[i + 1]);
        // barycentric interpolation
        let (mut num, mut den) = (0.0, 0.0);
        for (j, &v) in t.iter().enumerate() {
            let u = lobatto(lo, hi, j);
            if x == u {
                return 0.5 * (v + x.ln());
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == REP_NODES - 1 {
                w *= 0.5;
            }
            let w = w / (x - u);
            num += w * v;
            den += w;
        }
        0.5 * (num / den + x.ln())
    }
}

impl TestFunction for RepresentativeF<'_, '_> {
    fn value(&self, x: f64) -> f64 {
        self.ln_value(x).exp()
    }

    fn ln_rise(&self, x: f64) -> f64 {
        self.ln_value(x)
    }

    // f' = e^{-C} / (2 f)
    fn ln_derivative(&self, x: f64) -> Option<f64> {
        let c = self.profile.c_at(x).ok()?;
        Some(-c - std::f64::consts::LN_2 - self.ln_value(x))
    }
}

pub fn representative_f<'a, 'm>(analysis: &'a DiffusionAnalysis<'m>) -> Result<RepresentativeF<'a, 'm>, DiffusionError> {
    RepresentativeF::new(analysis.profile())
}

/// `δ = sup_x ∫_0^x e^{-C} ∫_x^∞ e^C / a`, the Poincaré-row quantity.
pub fn delta_diff(analysis: &DiffusionAnalysis<'_>) -> Result<Delta, DiffusionError> {
    Ok(Delta::from_verdict(&analysis.delta()?))
}

fn missing_tails(analysis: &DiffusionAnalysis<'_>) -> Delta {
    if analysis.profile().mass_verdict().fails() {
        Delta::Infinite
    } else {
        Delta::Undecided
    }
}

/// `sup_x x ∫_x^∞ 1/a` for a driftless model.
pub fn kac_krein_delta(analysis: &DiffusionAnalysis<'_>) -> Result<Delta, DiffusionError> {
    if !analysis.model().is_driftless() {
        return Err(DiffusionError::NotDriftless);
    }
    match &analysis.profile().ln_tail_rel {
        Some(t) => Ok(Delta::from_verdict(&analysis.sup_at(t, |x, t, _, _| x.ln() + t)?)),
        None => Ok(missing_tails(analysis)),
    }
}

/// Weighted Hardy constant `B = sup_x π[x,∞) ∫_0^x e^{-C}` for `ν = π` and
/// `λ = e^C dx`; equals `δ / μ[0,∞)`.
pub fn muckenhoupt_b(analysis: &DiffusionAnalysis<'_>) -> Result<Delta, DiffusionError> {
    let Some(t) = &analysis.profile().ln_tail_rel else {
        return Err(DiffusionError::NotErgodic);
    };
    let ln_z = t[0];
    Ok(Delta::from_verdict(&analysis.sup_at(t, |_, t, s, _| t + s - ln_z)?))
}

/// `[(4δ)⁻¹, δ⁻¹]` for `λ₀` (`Absorbing`) or `λ₁` (`Reflecting`); the same
/// `δ` serves both.
pub fn gap_bounds_diff(analysis: &DiffusionAnalysis<'_>, _boundary: Boundary) -> Result<GapEstimate, DiffusionError> {
    Ok(GapEstimate::from_delta(delta_diff(analysis)?))
}

fn diff_step(x: f64) -> f64 {
    1e-6f64.max(1e-6 * x.abs())
}

/// `ln f'(x)` from the closed form or a central difference of `ln_rise`.
fn ln_slope(f: &dyn TestFunction, x: f64) -> Result<f64, DiffusionError> {
    if let Some(d) = f.ln_derivative(x) {
        return if d.is_nan() { Err(DiffusionError::NotIncreasing { x }) } else { Ok(d) };
    }
    let h = diff_step(x);
    let (lo, hi) = ((x - h).max(0.0), x + h);
    let (r_lo, r_hi) = (f.ln_rise(lo), f.ln_rise(hi));
    if r_lo.is_nan() || r_hi.is_nan() || r_hi <= r_lo {
        return Err(DiffusionError::NotIncreasing { x });
    }
    Ok(log_sub(r_hi, r_lo) - (hi - lo).ln())
}

/// `f'(x)` by central differences of `f` (one-sided near `0`).
fn slope(f: &dyn TestFunction, x: f64) -> f64 {
    if let Some(d) = f.ln_derivative(x) {
        return d.exp();
    }
    let h = diff_step(x);
    let (lo, hi) = ((x - h).max(0.0), x + h);
    (f.value(hi) - f.value(lo)) / (hi - lo)
}

/// `inf_x I(f)(x)⁻¹` with `I(f)(x) = e^{-C(x)} / f'(x) ∫_x^∞ f e^C / a`, over
/// the knots in `[1e-3, end/16]` with golden-section refinement around the
/// smallest value.
///
/// `f` must be strictly increasing; if `π(f) < 0` it is lifted by a constant
/// to `π(f) = 0`. The value is 0 when `∫ f e^C / a` diverges.
pub fn variational_lower_diff(
    analysis: &DiffusionAnalysis<'_>,
    f: &dyn TestFunction,
) -> Result<VariationalBound, DiffusionError> {
    let p = analysis.profile();
    let n = p.knots.len();
    let f0 = f.value(0.0);
    if !f0.is_finite() {
        return Err(DiffusionError::NotIncreasing { x: 0.0 });
    }
    let mut prev = f64::NEG_INFINITY;
    for &x in &p.knots[1..] {
        let r = f.ln_rise(x);
        if r.is_nan() || r <= prev {
            return Err(DiffusionError::NotIncreasing { x });
        }
        prev = r;
    }
    let divergent = VariationalBound {
        value: 0.0,
        argmin: f64::NAN,
        residual: f64::INFINITY,
        converged: false,
    };
    let Some(tails) = &p.ln_tail_rel else {
        return Ok(divergent);
    };

    // ln ∫ (f - f(0)) e^{C - C_i} / a over each panel
    let ln_rise = |u: f64| f.ln_rise(u);
    let mut panels = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        panels.push(p.ln_local_weighted(i, p.knots[i], p.knots[i + 1], 1.0, true, &ln_rise)?.0);
    }
    let blocks = p.blocks(|i| panels[i] + p.c[i]);
    let decision = decide_series_blocks(&p.horizons(), &blocks);
    let (ln_rem, converged) = match decision.verdict.outcome {
        Outcome::Holds => (decision.ln_remainder, true),
        Outcome::Fails => return Ok(divergent),
        Outcome::Inconclusive => (f64::NEG_INFINITY, false),
    };
    let mut rise = vec![f64::NEG_INFINITY; n];
    rise[n - 1] = ln_rem - p.c[n - 1];
    for i in (0..n - 1).rev() {
        rise[i] = log_add(panels[i], rise[i + 1] + p.dc[i]);
    }
    let shift = if f0 >= 0.0 { f0 } else { f0.max(-(rise[0] - tails[0]).exp()) };
    // ln ∫_x^∞ f e^{C - C(x)} / a from its two parts
    let tail_integral = |g: f64, t: f64| {
        if shift >= 0.0 {
            log_add(g, shift.ln() + t)
        } else {
            log_sub(g, (-shift).ln() + t)
        }
    };

    let last = p.end() / 16.0;
    let mut best = (f64::INFINITY, 0);
    for i in 1..n {
        let x = p.knots[i];
        if x < GRID_MIN {
            continue;
        }
        if x > last {
            break;
        }
        let q = ln_slope(f, x)? - tail_integral(rise[i], tails[i]);
        if q < best.0 {
            best = (q, i);
        }
    }
    let (mut ln_q, k) = best;
    let mut argmin = p.knots[k];
    if k > 1 && k + 1 < n {
        let at = |x: f64| -> Result<f64, DiffusionError> {
            let i = p.panel(x);
            let next = p.knots[i + 1];
            let part = p.ln_local_weighted(i, x, next, 1.0, true, &ln_rise)?.0;
            let g = log_add(part, rise[i + 1] + p.drift_over(i, x, next - x));
            let t = p.ln_tail_rel_at(x)?.expect("tails exist");
            Ok(tail_integral(g, t) - ln_slope(f, x)?)
        };
        let (x, v) = golden_max(at, p.knots[k - 1], p.knots[k + 1])?;
        if -v < ln_q {
            ln_q = -v;
            argmin = x;
        }
    }
    let at_k = tail_integral(rise[k], tails[k]) + p.c[k];
    Ok(VariationalBound {
        value: ln_q.exp(),
        argmin,
        residual: (ln_rem - at_k).exp(),
        converged,
    })
}

/// `ln ∫_0^upper exp(ln_w) e^C / a^{with_a}` summed over the grid panels.
fn ln_weighted_integral(
    p: &DiffusionProfile<'_>,
    upper: f64,
    with_a: bool,
    ln_w: &dyn Fn(f64) -> f64,
) -> Result<f64, DiffusionError> {
    if !(0.0..=p.end()).contains(&upper) {
        return Err(DiffusionError::Domain(upper));
    }
    let mut acc = f64::NEG_INFINITY;
    for i in 0..p.knots.len() - 1 {
        let lo = p.knots[i];
        if lo >= upper {
            break;
        }
        let hi = p.knots[i + 1].min(upper);
        acc = log_add(acc, p.ln_local_weighted(i, lo, hi, 1.0, with_a, ln_w)?.0 + p.c[i]);
    }
    Ok(acc)
}

fn ln_mass(analysis: &DiffusionAnalysis<'_>) -> Result<f64, DiffusionError> {
    match &analysis.profile().ln_tail_rel {
        Some(t) => Ok(t[0]),
        None => Err(DiffusionError::NotErgodic),
    }
}

/// `D(f) = ∫_0^upper a f'^2 dπ` with `π = e^C dx / (a μ[0,∞))`.
pub fn dirichlet_form(
    analysis: &DiffusionAnalysis<'_>,
    f: &dyn TestFunction,
    upper: f64,
) -> Result<f64, DiffusionError> {
    let ln_z = ln_mass(analysis)?;
    let ln_w = |u: f64| 2.0 * slope(f, u).abs().ln();
    Ok((ln_weighted_integral(analysis.profile(), upper, false, &ln_w)? - ln_z).exp())
}

/// `π(f^2) - π(f)^2` with the integrals cut at `upper`.
pub fn variance(analysis: &DiffusionAnalysis<'_>, f: &dyn TestFunction, upper: f64) -> Result<f64, DiffusionError> {
    let ln_z = ln_mass(analysis)?;
    let p = analysis.profile();
    let moment = |ln_w: &dyn Fn(f64) -> f64| -> Result<f64, DiffusionError> {
        Ok((ln_weighted_integral(p, upper, true, ln_w)? - ln_z).exp())
    };
    let positive = moment(&|u| f.value(u).max(0.0).ln())?;
    let negative = moment(&|u| (-f.value(u)).max(0.0).ln())?;
    let square = moment(&|u| 2.0 * f.value(u).abs().ln())?;
    let mean = positive - negative;
    Ok(square - mean * mean)
}

/// `D(f) / Var(f)`, an upper bound on `λ₁` for any non-constant `f`.
pub fn rayleigh_quotient(
    analysis: &DiffusionAnalysis<'_>,
    f: &dyn TestFunction,
    upper: f64,
) -> Result<f64, DiffusionError> {
    Ok(dirichlet_form(analysis, f, upper)? / variance(analysis, f, upper)?)
}

/// Lowest eigenvalue (`Absorbing`) or gap (`Reflecting`) of the flux-form
/// finite-difference generator on `[0, cutoff]` with `steps` steps, reflecting
/// at `cutoff`. The matrix is symmetrised with the weights `e^C / a` times the
/// cell fraction, so its entries only involve differences of `C` within a
/// step.
pub fn fd_eigenvalue(
    model: &DiffusionModel,
    cutoff: f64,
    steps: usize,
    boundary: Boundary,
) -> Result<f64, DiffusionError> {
    if steps < 2 {
        return Err(DiffusionError::GridTooSmall(steps));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(DiffusionError::Domain(cutoff));
    }
    let h = cutoff / steps as f64;
    let ratio = |x: f64| model.drift_ratio(x).unwrap_or(f64::NAN);
    let half_step = |x: f64| -> Result<f64, DiffusionError> {
        Ok(integrate(ratio, x, x + 0.5 * h, C_TOL)
            .map_err(DiffusionError::Quadrature)?
            .value)
    };
    // C(x_j + h/2) - C(x_j) and C(x_{j+1}) - C(x_j + h/2)
    let mut up = Vec::with_capacity(steps);
    let mut down = Vec::with_capacity(steps);
    let mut a = Vec::with_capacity(steps + 1);
    for j in 0..=steps {
        let x = j as f64 * h;
        a.push(model.diffusion(x)?);
        if j < steps {
            up.push(half_step(x)?);
            down.push(half_step(x + 0.5 * h)?);
        }
    }
    let first = match boundary {
        Boundary::Reflecting => 0,
        Boundary::Absorbing => 1,
    };
    let cell = |j: usize| if j == 0 || j == steps { 0.5 } else { 1.0 };
    let h2 = h * h;
    let mut diag = Vec::with_capacity(steps + 1 - first);
    let mut off = Vec::with_capacity(steps - first);
    for j in first..=steps {
        let left = if j > 0 { (-down[j - 1]).exp() } else { 0.0 };
        let right = if j < steps { up[j].exp() } else { 0.0 };
        diag.push(a[j] * (left + right) / (cell(j) * h2));
        if j < steps {
            let scale = (a[j] * a[j + 1] / (cell(j) * cell(j + 1))).sqrt();
            off.push(-scale * (0.5 * (up[j] - down[j])).exp() / h2);
        }
    }
    let t = TridiagonalMatrix::new(diag, off)?;
    match boundary {
        Boundary::Absorbing => Ok(t.kth_eigenvalue(0, ORACLE_TOL)?),
        Boundary::Reflecting => {
            let ground = t.kth_eigenvalue(0, ORACLE_TOL)?;
            let norm = t.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if ground.abs() > 1e-6 * norm.max(1.0) {
                return Err(DiffusionError::NonzeroGround { value: ground });
            }
            Ok(t.kth_eigenvalue(1, ORACLE_TOL)?)
        }
    }
}

/// `μ[x,∞) / μ[0,∞)` in log form.
fn ln_tail_fraction(analysis: &DiffusionAnalysis<'_>, x: f64) -> Result<f64, DiffusionError> {
    let ln_z = ln_mass(analysis)?;
    let t = analysis.profile().ln_tail_from(x)?.ok_or(DiffusionError::NotErgodic)?;
    Ok(t - ln_z)
}

/// [`FD_CUTOFF_FACTOR`] times the smallest power of two leaving less than
/// [`FD_TAIL`] of the mass beyond it, capped at the grid end.
pub fn default_cutoff(analysis: &DiffusionAnalysis<'_>) -> Result<f64, DiffusionError> {
    let end = analysis.profile().end();
    let mut x = 1.0;
    while x <= end {
        if ln_tail_fraction(analysis, x)? < FD_TAIL.ln() {
            return Ok((FD_CUTOFF_FACTOR * x).min(end));
        }
        x *= 2.0;
    }
    Err(DiffusionError::CutoffTooSmall {
        cutoff: end,
        fraction: ln_tail_fraction(analysis, end)?.exp(),
    })
}

/// Finite-difference eigenvalue at `steps` steps, with the change from
/// halving the steps as its error estimate. The cutoff defaults to
/// [`default_cutoff`] and must leave less than [`FD_TAIL`] of the mass
/// beyond it.
pub fn fd_gap_oracle(
    analysis: &DiffusionAnalysis<'_>,
    cutoff: Option<f64>,
    steps: usize,
    boundary: Boundary,
) -> Result<OracleValue, DiffusionError> {
    if steps < 64 {
        return Err(DiffusionError::GridTooSmall(steps));
    }
    let cutoff = match cutoff {
        Some(l) => {
            if !(l > 0.0 && l <= analysis.profile().end()) {
                return Err(DiffusionError::Domain(l));
            }
            let fraction = ln_tail_fraction(analysis, l)?;
            if fraction >= FD_TAIL.ln() {
                return Err(DiffusionError::CutoffTooSmall {
                    cutoff: l,
                    fraction: fraction.exp(),
                });
            }
            l
        }
        None => default_cutoff(analysis)?,
    };
    let model = analysis.model();
    let value = fd_eigenvalue(model, cutoff, steps, boundary)?;
    let coarse = fd_eigenvalue(model, cutoff, steps / 2, boundary)?;
    Ok(OracleValue {
        value,
        size: steps,
        error_estimate: (value - coarse).abs(),
        cutoff: Some(cutoff),
    })
}
