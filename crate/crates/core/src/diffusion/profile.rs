use super::quadrature::{integrate, ln_integrate, QuadratureError};
use super::DiffusionError;
use crate::model::{log_add, DiffusionModel};
use crate::verdict::{decide_series, decide_series_blocks, Budget, SeriesDecision, Verdict};

/// Left end of the log-spaced part of the grid.
pub const GRID_MIN: f64 = 1e-3;
/// Log-spaced grid density.
pub const POINTS_PER_DECADE: usize = 64;
/// The grid ends at `2^LAST_HORIZON_LOG2` (about 1e6) at the default budget.
pub const LAST_HORIZON_LOG2: u32 = 20;

const PANEL_TOL: f64 = 1e-11;
const C_TOL: f64 = 1e-12;

const GL8_NODES: [f64; 4] = [
    0.1834346424956498,
    0.525_532_409_916_329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gauss8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for k in 0..4 {
        let d = half * GL8_NODES[k];
        s += GL8_WEIGHTS[k] * (f(mid - d) + f(mid + d));
    }
    s * half
}

/// Value of `μ[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuValue {
    Finite(f64),
    Infinite,
    Undecided,
}

/// `C(x) = ∫_0^x b/a` and the integrals of `e^{-C}` and `e^C / a` on a
/// fixed grid, all in log form.
///
/// The grid is `{0}`, 64 log-spaced points per decade from `1e-3`, and the
/// dyadic points `2^k`; it ends at `2^20` (one more doubling per doubling of
/// the budget). Integrals are stored relative to `C` at the knot they are
/// attached to (`*_rel` arrays), so products such as
/// `μ[x,∞) ∫_0^x e^{-C}` never subtract two large values of `C`. Tails
/// `μ[x, ∞)` are summed backwards from the end plus the extrapolated
/// remainder and exist only when the total mass is finite.
#[derive(Debug, Clone)]
pub struct DiffusionProfile<'m> {
    model: &'m DiffusionModel,
    pub(crate) knots: Vec<f64>,
    pub(crate) c: Vec<f64>,
    /// `C(x_{i+1}) - C(x_i)`
    pub(crate) dc: Vec<f64>,
    // whether 8-point Gauss reproduces the panel's increment of C
    pub(crate) smooth: Vec<bool>,
    /// `ln ∫_{x_i}^{x_{i+1}} e^{C_i - C}`
    pub(crate) ln_scale_panel: Vec<f64>,
    /// `ln ∫_{x_i}^{x_{i+1}} e^{C - C_i} / a`
    pub(crate) ln_mass_panel: Vec<f64>,
    /// `ln ∫_{x_i}^{x_{i+1}} e^{C_{i+1} - C}`
    pub(crate) ln_scale_panel_hi: Vec<f64>,
    /// `ln ∫_{x_i}^{x_{i+1}} e^{C - C_{i+1}} / a`
    pub(crate) ln_mass_panel_hi: Vec<f64>,
    /// `ln ∫_0^{x_i} e^{-C}`
    pub(crate) ln_scale_prefix: Vec<f64>,
    /// `ln ∫_0^{x_i} e^C / a`
    pub(crate) ln_mass_prefix: Vec<f64>,
    /// `ln ∫_0^{x_i} e^{C_i - C}`
    pub(crate) ln_scale_rel: Vec<f64>,
    /// `ln ∫_0^{x_i} e^{C - C_i} / a`
    pub(crate) ln_mass_rel: Vec<f64>,
    /// knot index of each dyadic horizon `2^k`, `k = 0..`
    pub(crate) horizon_idx: Vec<usize>,
    pub(crate) mass: SeriesDecision,
    /// `ln ∫_{x_i}^∞ e^{C - C_i} / a`
    pub(crate) ln_tail_rel: Option<Vec<f64>>,
}

fn quad_err(e: QuadratureError) -> DiffusionError {
    DiffusionError::Quadrature(e)
}

impl<'m> DiffusionProfile<'m> {
    pub fn new(model: &'m DiffusionModel, budget: Budget) -> Result<Self, DiffusionError> {
        let extra = budget.doublings.saturating_sub(Budget::default().doublings);
        let last_log2 = LAST_HORIZON_LOG2 + extra;
        let end = 2f64.powi(last_log2 as i32);

        let mut knots = vec![0.0];
        let mut k = 0;
        loop {
            let x = GRID_MIN * 10f64.powf(k as f64 / POINTS_PER_DECADE as f64);
            if x >= end {
                break;
            }
            knots.push(x);
            k += 1;
        }
        for j in -9..=last_log2 as i32 {
            knots.push(2f64.powi(j));
        }
        knots.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
        knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        let horizon_idx: Vec<usize> = (0..=last_log2)
            .map(|j| {
                let x = 2f64.powi(j as i32);
                knots.iter().position(|&k| k == x).expect("dyadic knot")
            })
            .collect();

        let ratio = |x: f64| model.drift_ratio(x).unwrap_or(f64::NAN);
        let n = knots.len();
        let mut c = Vec::with_capacity(n);
        let mut dc = Vec::with_capacity(n - 1);
        let mut smooth = Vec::with_capacity(n - 1);
        c.push(0.0);
        for i in 0..n - 1 {
            let (a, b) = (knots[i], knots[i + 1]);
            let r = integrate(ratio, a, b, C_TOL).map_err(quad_err)?;
            let g = gauss8(&ratio, a, b);
            smooth.push((r.value - g).abs() <= 1e-11 * r.value.abs().max(1.0));
            dc.push(r.value);
            c.push(c[i] + r.value);
        }

        let mut profile = Self {
            model,
            knots,
            c,
            dc,
            smooth,
            ln_scale_panel: Vec::with_capacity(n - 1),
            ln_mass_panel: Vec::with_capacity(n - 1),
            ln_scale_panel_hi: Vec::with_capacity(n - 1),
            ln_mass_panel_hi: Vec::with_capacity(n - 1),
            ln_scale_prefix: Vec::with_capacity(n),
            ln_mass_prefix: Vec::with_capacity(n),
            ln_scale_rel: Vec::with_capacity(n),
            ln_mass_rel: Vec::with_capacity(n),
            horizon_idx,
            mass: decide_series(&[1.0], &[0.0]),
            ln_tail_rel: None,
        };
        for i in 0..n - 1 {
            let (a, b) = (profile.knots[i], profile.knots[i + 1]);
            let (s, s_hi) = profile.ln_local(i, a, b, -1.0, false)?;
            let (m, m_hi) = profile.ln_local(i, a, b, 1.0, true)?;
            profile.ln_scale_panel.push(s);
            profile.ln_mass_panel.push(m);
            profile.ln_scale_panel_hi.push(s_hi);
            profile.ln_mass_panel_hi.push(m_hi);
        }
        let p = &mut profile;
        let (mut s, mut m) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let (mut sr, mut mr) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        p.ln_scale_prefix.push(s);
        p.ln_mass_prefix.push(m);
        p.ln_scale_rel.push(sr);
        p.ln_mass_rel.push(mr);
        for i in 0..n - 1 {
            s = log_add(s, p.ln_scale_panel[i] - p.c[i]);
            m = log_add(m, p.ln_mass_panel[i] + p.c[i]);
            sr = log_add(sr + p.dc[i], p.ln_scale_panel_hi[i]);
            mr = log_add(mr - p.dc[i], p.ln_mass_panel_hi[i]);
            p.ln_scale_prefix.push(s);
            p.ln_mass_prefix.push(m);
            p.ln_scale_rel.push(sr);
            p.ln_mass_rel.push(mr);
        }

        let hs = p.horizons();
        let blocks = p.blocks(|i| p.ln_mass_panel[i] + p.c[i]);
        p.mass = decide_series_blocks(&hs, &blocks);
        if p.mass.verdict.holds() {
            let mut tail = vec![f64::NEG_INFINITY; n];
            tail[n - 1] = p.mass.ln_remainder - p.c[n - 1];
            for i in (0..n - 1).rev() {
                tail[i] = log_add(p.ln_mass_panel[i], tail[i + 1] + p.dc[i]);
            }
            p.ln_tail_rel = Some(tail);
        }
        Ok(profile)
    }

    /// Log block sums of per-panel log values between consecutive horizons
    /// (the first block starts at 0).
    pub(crate) fn blocks(&self, ln_panel: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.horizon_idx.len());
        let mut i = 0;
        for &h in &self.horizon_idx {
            let mut acc = f64::NEG_INFINITY;
            while i < h {
                acc = log_add(acc, ln_panel(i));
                i += 1;
            }
            out.push(acc);
        }
        out
    }

    pub fn model(&self) -> &'m DiffusionModel {
        self.model
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Right end of the grid.
    pub fn end(&self) -> f64 {
        *self.knots.last().expect("nonempty grid")
    }

    /// The dyadic horizons `1, 2, 4, ...` used by the verdicts.
    pub fn horizons(&self) -> Vec<f64> {
        self.horizon_idx.iter().map(|&i| self.knots[i]).collect()
    }

    pub fn mass_verdict(&self) -> &Verdict {
        &self.mass.verdict
    }

    /// Index of the panel containing `x` (the last panel for `x >= end`).
    pub(crate) fn panel(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&x).expect("finite"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => (i - 1).min(n - 2),
        }
    }

    fn check_domain(x: f64) -> Result<(), DiffusionError> {
        if x < 0.0 || !x.is_finite() {
            return Err(DiffusionError::Domain(x));
        }
        Ok(())
    }

    /// `C(x)`.
    pub fn c_at(&self, x: f64) -> Result<f64, DiffusionError> {
        Self::check_domain(x)?;
        let i = self.panel(x);
        Ok(self.c[i] + self.increment(i, x)?)
    }

    /// `C(x) - C(x_i)` for `x` in panel `i` (or beyond the last knot).
    pub(crate) fn increment(&self, i: usize, x: f64) -> Result<f64, DiffusionError> {
        let a = self.knots[i];
        if x == a {
            return Ok(0.0);
        }
        let ratio = |u: f64| self.model.drift_ratio(u).unwrap_or(f64::NAN);
        let inc = if self.smooth[i] && x <= self.knots[i + 1] {
            gauss8(&ratio, a, x)
        } else {
            integrate(ratio, a, x, C_TOL).map_err(quad_err)?.value
        };
        if !inc.is_finite() {
            return Err(DiffusionError::Quadrature(QuadratureError::NonFinite {
                x,
                value: inc,
            }));
        }
        Ok(inc)
    }

    /// `∫ b/a` over `[start, start + len]` (`len` may be negative), exact in
    /// `len` so that offsets far below the spacing of floats near `start`
    /// still count.
    pub(crate) fn drift_over(&self, i: usize, start: f64, len: f64) -> f64 {
        let ratio = |u: f64| self.model.drift_ratio(u).unwrap_or(f64::NAN);
        if self.smooth[i] {
            let half = 0.5 * len;
            let mid = start + half;
            let mut s = 0.0;
            for k in 0..4 {
                let d = half * GL8_NODES[k];
                s += GL8_WEIGHTS[k] * (ratio(mid - d) + ratio(mid + d));
            }
            s * half
        } else if len >= 0.0 {
            integrate(ratio, start, start + len, C_TOL).map_or(f64::NAN, |r| r.value)
        } else {
            integrate(ratio, start + len, start, C_TOL).map_or(f64::NAN, |r| -r.value)
        }
    }

    /// `ln ∫_lo^hi exp(sign (C - C(anchor))) / a^{with_a}` inside panel `i`,
    /// anchored at `lo` and at `hi`.
    ///
    /// The integrand is parametrised by the distance from whichever end it
    /// is larger at, so a peak narrower than the float spacing at `lo` is
    /// still resolved.
    pub(crate) fn ln_local(&self, i: usize, lo: f64, hi: f64, sign: f64, with_a: bool) -> Result<(f64, f64), DiffusionError> {
        self.ln_local_weighted(i, lo, hi, sign, with_a, &|_| 0.0)
    }

    /// As [`Self::ln_local`] with the extra factor `exp(ln_w)` in the integrand.
    pub(crate) fn ln_local_weighted(
        &self,
        i: usize,
        lo: f64,
        hi: f64,
        sign: f64,
        with_a: bool,
        ln_w: &dyn Fn(f64) -> f64,
    ) -> Result<(f64, f64), DiffusionError> {
        if hi <= lo {
            return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
        }
        let model = self.model;
        let ln_a = |u: f64| if with_a { model.ln_a(u).unwrap_or(f64::NAN) } else { 0.0 };
        let across = self.drift_over(i, lo, hi - lo);
        if !across.is_finite() {
            return Err(DiffusionError::Quadrature(QuadratureError::NonFinite {
                x: hi,
                value: across,
            }));
        }
        let len = hi - lo;
        if sign * across > 0.0 {
            let g = |s: f64| sign * self.drift_over(i, hi, -s) - ln_a(hi - s) + ln_w(hi - s);
            let v = ln_integrate(&g, 0.0, len, PANEL_TOL).map_err(quad_err)?;
            Ok((v + sign * across, v))
        } else {
            let g = |t: f64| sign * self.drift_over(i, lo, t) - ln_a(lo + t) + ln_w(lo + t);
            let v = ln_integrate(&g, 0.0, len, PANEL_TOL).map_err(quad_err)?;
            Ok((v, v - sign * across))
        }
    }

    /// `ln ∫_0^x e^{C(x) - C}`.
    pub(crate) fn ln_scale_rel_at(&self, x: f64) -> Result<f64, DiffusionError> {
        let i = self.panel(x);
        let inc = self.increment(i, x)?;
        let (_, part) = self.ln_local(i, self.knots[i], x, -1.0, false)?;
        Ok(log_add(self.ln_scale_rel[i] + inc, part))
    }

    /// `ln ∫_0^x e^{C - C(x)} / a`.
    pub(crate) fn ln_mass_rel_at(&self, x: f64) -> Result<f64, DiffusionError> {
        let i = self.panel(x);
        let inc = self.increment(i, x)?;
        let (_, part) = self.ln_local(i, self.knots[i], x, 1.0, true)?;
        Ok(log_add(self.ln_mass_rel[i] - inc, part))
    }

    /// `ln ∫_x^∞ e^{C - C(x)} / a` when the total mass is finite.
    pub(crate) fn ln_tail_rel_at(&self, x: f64) -> Result<Option<f64>, DiffusionError> {
        let Some(tail) = &self.ln_tail_rel else {
            return Ok(None);
        };
        let i = self.panel(x);
        let next = self.knots[i + 1];
        if x > next {
            return Err(DiffusionError::Domain(x));
        }
        if x == next {
            return Ok(Some(tail[i + 1]));
        }
        let (part, _) = self.ln_local(i, x, next, 1.0, true)?;
        let rest = self.drift_over(i, x, next - x);
        Ok(Some(log_add(part, tail[i + 1] + rest)))
    }

    /// `ln ∫_0^x e^{-C}`.
    pub fn ln_scale_to(&self, x: f64) -> Result<f64, DiffusionError> {
        Self::check_domain(x)?;
        Ok(self.ln_scale_rel_at(x)? - self.c_at(x)?)
    }

    /// `ln ∫_0^x e^C / a`.
    pub fn ln_mass_to(&self, x: f64) -> Result<f64, DiffusionError> {
        Self::check_domain(x)?;
        Ok(self.ln_mass_rel_at(x)? + self.c_at(x)?)
    }

    /// `ln μ[x, ∞)` when the total mass is finite; `x` inside the grid.
    pub fn ln_tail_from(&self, x: f64) -> Result<Option<f64>, DiffusionError> {
        Self::check_domain(x)?;
        match self.ln_tail_rel_at(x)? {
            Some(t) => Ok(Some(t + self.c_at(x)?)),
            None => Ok(None),
        }
    }

    /// `μ[x, y]`, with `y = None` for `+∞`.
    pub fn mu_xy(&self, x: f64, y: Option<f64>) -> Result<MuValue, DiffusionError> {
        Self::check_domain(x)?;
        if let Some(y) = y {
            if !(x <= y && y.is_finite()) {
                return Err(DiffusionError::Domain(y));
            }
            if y > self.end() {
                let c_end = self.c[self.knots.len() - 1];
                let integrand = |u: f64| {
                    let c = if u > self.end() {
                        match integrate(
                            |v| self.model.drift_ratio(v).unwrap_or(f64::NAN),
                            self.end(),
                            u,
                            C_TOL,
                        ) {
                            Ok(r) => c_end + r.value,
                            Err(_) => f64::NAN,
                        }
                    } else {
                        self.c_at(u).unwrap_or(f64::NAN)
                    };
                    c - self.model.ln_a(u).unwrap_or(f64::NAN)
                };
                let v = ln_integrate(&integrand, x, y, PANEL_TOL).map_err(quad_err)?;
                return Ok(MuValue::Finite(v.exp()));
            }
            let hi = self.ln_mass_to(y)?;
            let lo = self.ln_mass_to(x)?;
            return Ok(MuValue::Finite(hi.exp() - lo.exp()));
        }
        match self.ln_tail_from(x.min(self.end()))? {
            Some(t) => Ok(MuValue::Finite(t.exp())),
            None if self.mass.verdict.fails() => Ok(MuValue::Infinite),
            None => Ok(MuValue::Undecided),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(a: &str, b: &str) -> DiffusionProfile<'static> {
        let m = Box::leak(Box::new(DiffusionModel::from_strs(a, b).unwrap()));
        DiffusionProfile::new(m, Budget::default()).unwrap()
    }

    #[test]
    fn drift_integral() {
        let p = profile("1", "0");
        assert_eq!(p.c_at(5.0).unwrap(), 0.0);
        let p = profile("1", "-x");
        assert!((p.c_at(2.0).unwrap() + 2.0).abs() < 1e-12);
        assert!((p.c_at(0.37).unwrap() + 0.37 * 0.37 / 2.0).abs() < 1e-12);
        let p = profile("1", "-2");
        assert!((p.c_at(3.0).unwrap() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn total_masses() {
        let p = profile("1", "-2");
        let MuValue::Finite(z) = p.mu_xy(0.0, None).unwrap() else {
            panic!()
        };
        assert!((z - 0.5).abs() < 1e-12, "{z}");
        let p = profile("1", "-x");
        let MuValue::Finite(z) = p.mu_xy(0.0, None).unwrap() else {
            panic!()
        };
        assert!((z - 1.2533141373155003).abs() < 1e-9, "{z}");
        let p = profile("1", "0");
        assert_eq!(p.mu_xy(0.0, None).unwrap(), MuValue::Infinite);
        let MuValue::Finite(v) = p.mu_xy(1.0, Some(3.5)).unwrap() else {
            panic!()
        };
        assert!((v - 2.5).abs() < 1e-9);
    }

    #[test]
    fn tails_and_partial_integrals() {
        let p = profile("1", "-2");
        // μ[x, ∞) = e^{-2x} / 2 without cancellation far out
        let t = p.ln_tail_from(30.3).unwrap().unwrap();
        assert!((t - (-60.6 - 2f64.ln())).abs() < 1e-9, "{t}");
        let t = p.ln_tail_rel_at(1000.5).unwrap().unwrap();
        assert!((t + 2f64.ln()).abs() < 1e-12, "{t}");
        let r = p.ln_scale_rel_at(7.0).unwrap();
        assert!((r.exp() - (1.0 - (-14f64).exp()) / 2.0).abs() < 1e-12);
        let s = p.ln_scale_to(1.7).unwrap();
        assert!((s.exp() - ((3.4f64).exp() - 1.0) / 2.0).abs() < 1e-9);
    }
}
