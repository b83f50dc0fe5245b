use super::profile::DiffusionProfile;
use super::DiffusionError;
use crate::chain::decide_vanishing;
use crate::model::{log_add, DiffusionModel};
use crate::verdict::{decide_series_blocks, decide_sup_tol, Budget, Probe, SeriesDecision, Verdict};

/// Golden-section refinement stops once the bracket is this narrow relative
/// to its position.
pub const REFINE_TOL: f64 = 1e-4;

/// Running maxima of quadrature-based products within this (in log) count
/// as equal; panel integrals are accurate to about `1e-11` each.
pub const SUP_STABLE_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Relative integrals at the midpoint of every panel, for three-point
/// Simpson sums.
#[derive(Debug, Clone)]
struct Midpoints {
    ln_mass_rel: Vec<f64>,
    ln_tail_rel: Option<Vec<f64>>,
}

/// Criteria of the ergodicity properties for one diffusion on `[0, ∞)`.
#[derive(Debug, Clone)]
pub struct DiffusionAnalysis<'m> {
    profile: DiffusionProfile<'m>,
    mid: Midpoints,
}

fn ln_sum3(a: f64, b: f64, c: f64) -> f64 {
    log_add(log_add(a, b), c)
}

impl<'m> DiffusionAnalysis<'m> {
    pub fn new(model: &'m DiffusionModel, budget: Budget) -> Result<Self, DiffusionError> {
        let profile = DiffusionProfile::new(model, budget)?;
        let n = profile.knots.len();
        let mut mid = Midpoints {
            ln_mass_rel: Vec::with_capacity(n - 1),
            ln_tail_rel: profile.ln_tail_rel.as_ref().map(|_| Vec::with_capacity(n - 1)),
        };
        for i in 0..n - 1 {
            let m = 0.5 * (profile.knots[i] + profile.knots[i + 1]);
            mid.ln_mass_rel.push(profile.ln_mass_rel_at(m)?);
            if let Some(t) = mid.ln_tail_rel.as_mut() {
                t.push(profile.ln_tail_rel_at(m)?.expect("tails exist"));
            }
        }
        Ok(Self { profile, mid })
    }

    pub fn model(&self) -> &'m DiffusionModel {
        self.profile.model()
    }

    pub fn profile(&self) -> &DiffusionProfile<'m> {
        &self.profile
    }

    /// Series verdict on `∫_0^H exp(g)` over the dyadic horizons, where `g`
    /// is given at the knots and at the panel midpoints.
    fn integral(
        &self,
        at_knot: impl Fn(usize) -> f64,
        at_mid: impl Fn(usize) -> f64,
    ) -> SeriesDecision {
        let p = &self.profile;
        let blocks = p.blocks(|i| {
            let w = (p.knots[i + 1] - p.knots[i]) / 6.0;
            w.ln() + ln_sum3(at_knot(i), 4f64.ln() + at_mid(i), at_knot(i + 1))
        });
        decide_series_blocks(&p.horizons(), &blocks)
    }

    /// Sup verdict on `exp(φ)` over the knots `x > 0`, where `φ` is given as a
    /// function of `ln ∫_x^∞ e^{C - C(x)} / a`, `ln ∫_0^x e^{C(x) - C}` and
    /// `C(x)`. A finite supremum attained inside the grid is refined by
    /// golden-section search.
    fn sup(&self, tails: &[f64], phi: impl Fn(f64, f64, f64) -> f64) -> Result<Verdict, DiffusionError> {
        self.sup_at(tails, |_, t, s, c| phi(t, s, c))
    }

    /// As [`Self::sup`] with `x` as the first argument of `φ`.
    pub(crate) fn sup_at(
        &self,
        tails: &[f64],
        phi: impl Fn(f64, f64, f64, f64) -> f64,
    ) -> Result<Verdict, DiffusionError> {
        let p = &self.profile;
        let value = |i: usize| phi(p.knots[i], tails[i], p.ln_scale_rel[i], p.c[i]);
        let mut maxima = Vec::with_capacity(p.horizon_idx.len());
        let mut best = f64::NEG_INFINITY;
        let mut argmax = 1;
        let mut i = 1;
        for &h in &p.horizon_idx {
            while i <= h {
                let v = value(i);
                if v > best {
                    best = v;
                    argmax = i;
                }
                i += 1;
            }
            maxima.push(best);
        }
        // first knot within the stability tolerance of the maximum
        let first = (1..=argmax)
            .find(|&i| value(i) >= best - SUP_STABLE_TOL)
            .unwrap_or(argmax);
        let mut verdict = decide_sup_tol(&p.horizons(), &maxima, p.knots[first], SUP_STABLE_TOL);
        if verdict.holds() && argmax + 1 < p.knots.len() && best.is_finite() {
            let at = |x: f64| -> Result<f64, DiffusionError> {
                let t = p.ln_tail_rel_at(x)?.expect("tails exist");
                Ok(phi(x, t, p.ln_scale_rel_at(x)?, p.c_at(x)?))
            };
            let lo = p.knots[argmax - 1].max(p.knots[argmax] * 0.5);
            let (_, refined) = golden_max(at, lo, p.knots[argmax + 1])?;
            if refined > best {
                verdict.quantity = Some(refined.exp());
            }
        }
        Ok(verdict)
    }

    fn tails(&self) -> Result<&[f64], Verdict> {
        match &self.profile.ln_tail_rel {
            Some(t) => Ok(t),
            None => Err(self.profile.mass.verdict.clone()),
        }
    }

    /// `∫_0^∞ μ[0,x] e^{-C(x)} dx = ∞`.
    pub fn uniqueness(&self) -> Verdict {
        let p = &self.profile;
        let m = &self.mid;
        self.integral(|i| p.ln_mass_rel[i], |i| m.ln_mass_rel[i])
            .verdict
            .negated()
    }

    /// `∫_0^∞ e^{-C} = ∞`.
    pub fn recurrence(&self) -> Verdict {
        let p = &self.profile;
        let blocks = p.blocks(|i| p.ln_scale_panel[i] - p.c[i]);
        decide_series_blocks(&p.horizons(), &blocks).verdict.negated()
    }

    /// Uniqueness and `μ[0,∞) < ∞`; the quantity is `μ[0,∞)`.
    pub fn ergodicity(&self) -> Verdict {
        let unique = self.uniqueness();
        self.profile.mass.verdict.clone().requiring(&[&unique])
    }

    fn with_tails(
        &self,
        f: impl FnOnce(&[f64]) -> Result<Verdict, DiffusionError>,
    ) -> Result<Verdict, DiffusionError> {
        let ergodic = self.ergodicity();
        let row = match self.tails() {
            Ok(t) => f(t)?,
            Err(mass) => mass,
        };
        Ok(row.requiring(&[&ergodic]))
    }

    /// `δ = sup_{x>0} μ[x,∞) ∫_0^x e^{-C}` without the ergodicity
    /// prerequisite; `Fails` when the mass is infinite.
    pub fn delta(&self) -> Result<Verdict, DiffusionError> {
        match self.tails() {
            Ok(t) => self.sup(t, |t, s, _| t + s),
            Err(mass) => Ok(mass),
        }
    }

    /// Poincaré inequality: `δ < ∞`; the quantity is `δ`.
    pub fn poincare(&self) -> Result<Verdict, DiffusionError> {
        self.with_tails(|t| self.sup(t, |t, s, _| t + s))
    }

    /// `lim_n sup_{x>n} μ[x,∞) ∫_n^x e^{-C} = 0`, probed at `n = 2^j` up to a
    /// sixteenth of the grid end.
    pub fn discrete_spectrum(&self) -> Result<Verdict, DiffusionError> {
        let p = &self.profile;
        self.with_tails(|t| {
            let last = p.horizon_idx.len().saturating_sub(5);
            let mut probes = Vec::new();
            for &start in &p.horizon_idx[..=last] {
                // ln ∫_n^{x_k} e^{C_k - C}
                let mut acc = f64::NEG_INFINITY;
                let mut best = f64::NEG_INFINITY;
                for k in start + 1..p.knots.len() {
                    acc = log_add(acc + p.dc[k - 1], p.ln_scale_panel_hi[k - 1]);
                    best = best.max(t[k] + acc);
                }
                probes.push(Probe {
                    horizon: p.knots[start],
                    value: best.exp(),
                });
            }
            Ok(decide_vanishing(probes))
        })
    }

    /// `sup μ[x,∞) ln(1/μ[x,∞)) ∫_0^x e^{-C} < ∞`, skipping `μ[x,∞) >= 1`.
    pub fn log_sobolev(&self) -> Result<Verdict, DiffusionError> {
        self.with_tails(|t| {
            self.sup(t, |t, s, c| {
                let ln_tail = t + c;
                if ln_tail >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t + s + (-ln_tail).ln()
                }
            })
        })
    }

    /// `∫_0^∞ μ[x,∞) e^{-C(x)} dx < ∞`. Only conjectured to characterise
    /// strong ergodicity.
    pub fn strong_ergodicity(&self) -> Result<Verdict, DiffusionError> {
        let m = &self.mid;
        self.with_tails(|t| {
            let mt = m.ln_tail_rel.as_ref().expect("tails exist");
            Ok(self.integral(|i| t[i], |i| mt[i]).verdict)
        })
    }

    /// Sufficient criterion for a Nash inequality of dimension `nu > 2`:
    /// `sup μ[x,∞)^{(ν-2)/ν} ∫_0^x e^{-C} < ∞`.
    pub fn nash(&self, nu: f64) -> Result<Verdict, DiffusionError> {
        if !(nu > 2.0 && nu.is_finite()) {
            return Err(DiffusionError::NashExponent(nu));
        }
        let power = (nu - 2.0) / nu;
        self.with_tails(|t| self.sup(t, |t, s, c| power * (t + c) + s - c))
    }
}

/// Position and value of the maximum of `f` on `[lo, hi]` by golden-section
/// search, assuming a single interior peak; endpoints are included in the
/// comparison.
pub(crate) fn golden_max(
    f: impl Fn(f64) -> Result<f64, DiffusionError>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64), DiffusionError> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = (lo, f(lo)?);
    for (x, v) in [(hi, f(hi)?), (c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    for _ in 0..200 {
        if b - a <= REFINE_TOL * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analysis(a: &str, b: &str) -> DiffusionAnalysis<'static> {
        let m = Box::leak(Box::new(DiffusionModel::from_strs(a, b).unwrap()));
        DiffusionAnalysis::new(m, Budget::default()).unwrap()
    }

    #[test]
    fn ornstein_uhlenbeck_rows() {
        let d = analysis("1", "-x");
        assert!(d.uniqueness().holds());
        assert!(d.recurrence().holds());
        let e = d.ergodicity();
        assert!((e.quantity.unwrap() - 1.2533141373155003).abs() < 1e-8);
        let p = d.poincare().unwrap();
        assert!((p.quantity.unwrap() - 0.478812895038).abs() < 1e-6, "{p:?}");
        assert!(d.discrete_spectrum().unwrap().holds());
        assert!(d.log_sobolev().unwrap().holds());
        assert!(d.strong_ergodicity().unwrap().fails());
    }

    #[test]
    fn drifted_brownian_motion_rows() {
        let d = analysis("1", "-2");
        assert!(d.ergodicity().holds());
        let p = d.poincare().unwrap();
        assert!((p.quantity.unwrap() - 0.25).abs() < 1e-9, "{p:?}");
        assert!(d.log_sobolev().unwrap().fails());
        assert!(d.discrete_spectrum().unwrap().fails());
        assert!(d.strong_ergodicity().unwrap().fails());
    }

    #[test]
    fn brownian_motion_rows() {
        let d = analysis("1", "0");
        assert!(d.recurrence().holds());
        assert!(d.uniqueness().holds());
        assert!(d.ergodicity().fails());
        assert!(d.poincare().unwrap().fails());
        assert!(d.delta().unwrap().fails());
    }

    #[test]
    fn strong_drift_is_strongly_ergodic() {
        // ∫_0^∞ μ[x,∞) e^{-C} converges once b ~ -x^3
        let d = analysis("1", "-x^3");
        assert!(d.strong_ergodicity().unwrap().holds());
        assert!(d.discrete_spectrum().unwrap().holds());
    }

    #[test]
    fn transient_drift() {
        let d = analysis("1", "1");
        assert!(d.recurrence().fails());
        assert!(d.ergodicity().fails());
    }

    #[test]
    fn nash_rows() {
        let d = analysis("1", "-x");
        assert!(d.nash(2.0).is_err());
        assert!(d.nash(4.0).unwrap().fails());
        // b = 0, a = (1+x)^4: μ[x,∞) = (1+x)^{-3}/3, so the product is
        // bounded exactly when 3(ν-2)/ν >= 1
        let d = analysis("(1+x)^4", "0");
        assert!(d.nash(4.0).unwrap().holds());
        assert!(d.nash(2.5).unwrap().fails());
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, m) = golden_max(|x| Ok(-(x - 0.3).powi(2)), 0.0, 1.0).unwrap();
        assert!(m > -1e-8);
        assert!((x - 0.3).abs() < 1e-4, "{x}");
    }
}
