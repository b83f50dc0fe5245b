use thiserror::Error;

use super::ladder::{ChainProfile, MuLadder};
use crate::model::{log_add, BirthDeathModel, ModelError};
use crate::verdict::{decide_series_blocks, decide_sup, Budget, SUP_STABLE_TOL, Outcome, Probe, Reason, Verdict};

/// Below this the discrete-spectrum quantity counts as vanished.
pub const DISCRETE_VANISH: f64 = 1e-6;
/// Per-doubling decay ratio that also counts as vanishing.
pub const DISCRETE_DECAY_RATIO: f64 = 0.75;
/// Above this (and not decaying) the quantity counts as stuck.
pub const DISCRETE_STUCK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("Nash exponent nu must exceed 2, got {0}")]
    NashExponent(f64),
    #[error("index must be at least 1, got {0}")]
    IndexZero(usize),
    #[error("lambda = {lambda} is not below the total rate q_{index} = {rate}")]
    LambdaTooLarge { lambda: f64, index: usize, rate: f64 },
    #[error("test sequence value y_{index} = {value} is not a nonnegative finite number")]
    BadSequenceValue { index: usize, value: f64 },
    #[error("lambda must be a nonnegative finite number, got {0}")]
    BadLambda(f64),
}

/// Mean hitting time of `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HittingTime {
    Finite(f64),
    Diverged,
    Undecided,
}

impl HittingTime {
    pub fn value(self) -> Option<f64> {
        match self {
            HittingTime::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Result of checking a candidate solution of the drift inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSequenceCheck {
    /// `Holds` means "verified on `0..=horizon`", never a proof for all indices.
    pub verdict: Verdict,
    pub horizon: usize,
    /// Largest `lhs + λ y_i + 1` over checked indices (`<= 0` is satisfied).
    pub worst_residual: f64,
    pub worst_index: usize,
    /// Largest `|lhs + λ y_i + 1|`, useful when `y` should solve with equality.
    pub max_equality_residual: f64,
    pub violations: usize,
    pub first_violation: Option<usize>,
}

/// Criteria of the classical ergodicity properties for one chain.
///
/// Every row is evaluated on a single snapshot of the speed measure up to
/// the budget's largest horizon.
#[derive(Debug, Clone)]
pub struct ChainAnalysis<'m> {
    model: &'m BirthDeathModel,
    profile: ChainProfile,
}

impl<'m> ChainAnalysis<'m> {
    pub fn new(model: &'m BirthDeathModel, budget: Budget) -> Result<Self, ModelError> {
        let profile = MuLadder::new(model).profile(budget)?;
        Ok(Self { model, profile })
    }

    pub fn model(&self) -> &'m BirthDeathModel {
        self.model
    }

    pub fn profile(&self) -> &ChainProfile {
        &self.profile
    }

    fn series(&self, ln_term: impl Fn(usize) -> f64) -> crate::verdict::SeriesDecision {
        let p = &self.profile;
        let mut blocks = Vec::new();
        let mut n = 0;
        for h in p.budget.horizons() {
            let mut block = f64::NEG_INFINITY;
            while n < h {
                block = log_add(block, ln_term(n));
                n += 1;
            }
            blocks.push(block);
        }
        decide_series_blocks(&p.horizons_f64(), &blocks)
    }

    fn sup(&self, ln_value: impl Fn(usize) -> f64) -> Verdict {
        let p = &self.profile;
        let mut maxima = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut argmax = 1;
        let mut n = 1;
        for h in p.budget.horizons() {
            while n < h {
                let v = ln_value(n);
                if v > best {
                    if v > best + SUP_STABLE_TOL {
                        argmax = n;
                    }
                    best = v;
                }
                n += 1;
            }
            maxima.push(best);
        }
        decide_sup(&p.horizons_f64(), &maxima, argmax as f64)
    }

    /// Mass verdict when undecided or infinite, for rows that need tails.
    fn tails(&self) -> Result<&[f64], Verdict> {
        match &self.profile.ln_tail {
            Some(t) => Ok(t),
            None => Err(self.profile.mass.verdict.clone()),
        }
    }

    /// Non-explosion: `Σ s_n μ[0,n] = ∞`.
    pub fn uniqueness(&self) -> Verdict {
        let p = &self.profile;
        self.series(|n| p.ln_scale[n] + p.ln_mass_prefix[n])
            .verdict
            .negated()
    }

    /// `Σ s_n = ∞`.
    pub fn recurrence(&self) -> Verdict {
        let p = &self.profile;
        self.series(|n| p.ln_scale[n]).verdict.negated()
    }

    /// Uniqueness and finite total mass; the quantity is `μ[0, ∞)`.
    pub fn ergodicity(&self) -> Verdict {
        let unique = self.uniqueness();
        self.profile.mass.verdict.clone().requiring(&[&unique])
    }

    fn with_tails(&self, f: impl FnOnce(&[f64]) -> Verdict) -> Verdict {
        let ergodic = self.ergodicity();
        let row = match self.tails() {
            Ok(t) => f(t),
            Err(mass) => mass.negated(),
        };
        row.requiring(&[&ergodic])
    }

    /// `δ = sup_{n>=1} μ[n,∞) Σ_{j<n} s_j < ∞`; the quantity is `δ`.
    pub fn exponential_ergodicity(&self) -> Verdict {
        let p = &self.profile;
        self.with_tails(|t| self.sup(|n| t[n] + p.ln_scale_before(n)))
    }

    /// `sup_{k>n} μ[k,∞) Σ_{j=n}^{k-1} s_j → 0`, probed at doubling `n` up to
    /// a sixteenth of the horizon.
    pub fn discrete_spectrum(&self) -> Verdict {
        let p = &self.profile;
        self.with_tails(|t| {
            let h = p.horizon;
            let mut probes = Vec::new();
            let mut n = p.budget.start / 16;
            while n <= h / 16 {
                let mut acc = f64::NEG_INFINITY;
                let mut best = f64::NEG_INFINITY;
                for k in n + 1..h {
                    acc = log_add(acc, p.ln_scale[k - 1]);
                    best = best.max(t[k] + acc);
                }
                probes.push(Probe {
                    horizon: n as f64,
                    value: best.exp(),
                });
                n *= 2;
            }
            decide_vanishing(probes)
        })
    }

    /// `sup μ[n,∞) ln(1/μ[n,∞)) Σ_{j<n} s_j < ∞`, skipping `μ[n,∞) >= 1`.
    pub fn log_sobolev(&self) -> Verdict {
        let p = &self.profile;
        self.with_tails(|t| {
            self.sup(|n| {
                if t[n] >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t[n] + (-t[n]).ln() + p.ln_scale_before(n)
                }
            })
        })
    }

    /// `S = Σ_{n>=1} μ_n Σ_{j<n} s_j < ∞`; the quantity is `S`.
    pub fn strong_ergodicity(&self) -> Verdict {
        let p = &self.profile;
        let unique = self.uniqueness();
        self.series(|n| p.ln_mu[n] + p.ln_scale_before(n))
            .verdict
            .requiring(&[&unique])
    }

    /// The same `S` summed as `Σ_{n>=0} s_n μ[n+1, ∞)`.
    pub fn strong_ergodicity_dual_sum(&self) -> Option<f64> {
        let p = &self.profile;
        let t = p.ln_tail.as_ref()?;
        let d = self.series(|n| p.ln_scale[n] + t[n + 1]);
        d.verdict.quantity
    }

    /// Sufficient criterion for a Nash inequality of dimension `nu > 2`:
    /// `sup μ[n,∞)^{(ν-2)/ν} Σ_{j<n} s_j < ∞`. Known to fall a little short
    /// of being necessary.
    pub fn nash(&self, nu: f64) -> Result<Verdict, CriteriaError> {
        if !(nu > 2.0 && nu.is_finite()) {
            return Err(CriteriaError::NashExponent(nu));
        }
        let p = &self.profile;
        let power = (nu - 2.0) / nu;
        Ok(self.with_tails(|t| self.sup(|n| power * t[n] + p.ln_scale_before(n))))
    }

    /// `E_i σ_0 = Σ_{k=1}^{i} μ[k,∞) / (μ_k a_k)`.
    pub fn mean_hitting_time(&self, i: usize) -> Result<HittingTime, CriteriaError> {
        if i == 0 {
            return Err(CriteriaError::IndexZero(0));
        }
        let p = &self.profile;
        assert!(i < p.horizon, "index beyond the analysed horizon");
        let t = match &p.ln_tail {
            Some(t) => t,
            None if p.mass.verdict.fails() => return Ok(HittingTime::Diverged),
            None => return Ok(HittingTime::Undecided),
        };
        let mut sum = 0.0;
        for k in 1..=i {
            sum += (t[k] - p.ln_mu[k] - p.ln_death[k]).exp();
        }
        Ok(HittingTime::Finite(sum))
    }

    /// Mean hitting times `E_i σ_0` for `i = 0..=n` in one pass (`y_0 = 0`).
    pub fn mean_hitting_times(&self, n: usize) -> Option<Vec<f64>> {
        let p = &self.profile;
        assert!(n < p.horizon, "index beyond the analysed horizon");
        let t = p.ln_tail.as_ref()?;
        let mut out = Vec::with_capacity(n + 1);
        let mut sum = 0.0;
        out.push(0.0);
        for k in 1..=n {
            sum += (t[k] - p.ln_mu[k] - p.ln_death[k]).exp();
            out.push(sum);
        }
        Some(out)
    }
}

/// Decision on a sequence that should tend to zero.
pub(crate) fn decide_vanishing(probes: Vec<Probe>) -> Verdict {
    let mut v = Verdict::inconclusive(probes);
    let d: Vec<f64> = v.probes.iter().map(|p| p.value).collect();
    if d.len() < 4 {
        return v;
    }
    let k = d.len() - 1;
    let ratio = |j: usize| if d[j - 1] > 0.0 { d[j] / d[j - 1] } else { 0.0 };
    let decreasing = (k - 2..=k).all(|j| d[j] <= d[j - 1]);
    let small = d[k] < DISCRETE_VANISH && decreasing;
    let decaying = (k - 2..=k).all(|j| ratio(j) <= DISCRETE_DECAY_RATIO);
    if small || decaying {
        v.outcome = Outcome::Holds;
        v.reason = Reason::Converged;
        v.quantity = Some(d[k]);
    } else if (k - 2..=k).all(|j| d[j] >= DISCRETE_STUCK && ratio(j) >= 0.9) {
        v.outcome = Outcome::Fails;
        v.reason = Reason::DivergedTermBound;
        v.quantity = Some(d[k]);
    }
    v
}

/// Checks `b_i (y_{i+1} - y_i) - a_i (y_i - y_{i-1}) <= -λ y_i - 1` for
/// `i ∉ hitting_set`, `i <= horizon`, to within `tol` relative to the size of
/// the terms, and that the boundary sums on the hitting set are finite.
pub fn verify_test_sequence(
    model: &BirthDeathModel,
    y: impl Fn(usize) -> f64,
    lambda: f64,
    hitting_set: &[usize],
    horizon: usize,
    tol: f64,
) -> Result<TestSequenceCheck, CriteriaError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CriteriaError::BadLambda(lambda));
    }
    let ys: Vec<f64> = (0..=horizon + 1).map(&y).collect();
    if let Some((index, &value)) = ys
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(CriteriaError::BadSequenceValue { index, value });
    }
    let mut check = TestSequenceCheck {
        verdict: Verdict::inconclusive(Vec::new()),
        horizon,
        worst_residual: f64::NEG_INFINITY,
        worst_index: 0,
        max_equality_residual: 0.0,
        violations: 0,
        first_violation: None,
    };
    let mut boundary_finite = true;
    for i in 0..=horizon {
        let b = model.birth(i)?;
        let a = if i == 0 { 0.0 } else { model.death(i)? };
        if lambda > 0.0 && lambda >= a + b {
            return Err(CriteriaError::LambdaTooLarge {
                lambda,
                index: i,
                rate: a + b,
            });
        }
        let up = b * ys[i + 1];
        let down = if i == 0 { 0.0 } else { a * ys[i - 1] };
        if hitting_set.contains(&i) {
            boundary_finite &= (up + down).is_finite();
            continue;
        }
        let step_up = b * (ys[i + 1] - ys[i]);
        let step_down = if i == 0 { 0.0 } else { a * (ys[i] - ys[i - 1]) };
        let residual = step_up - step_down + lambda * ys[i] + 1.0;
        let size = 1.0 + step_up.abs() + step_down.abs() + lambda * ys[i];
        check.max_equality_residual = check.max_equality_residual.max(residual.abs());
        if residual > tol * size {
            check.violations += 1;
            check.first_violation.get_or_insert(i);
        }
        if residual > check.worst_residual {
            check.worst_residual = residual;
            check.worst_index = i;
        }
    }
    let ok = check.violations == 0 && boundary_finite;
    check.verdict = Verdict {
        outcome: if ok { Outcome::Holds } else { Outcome::Fails },
        reason: if ok {
            Reason::Converged
        } else {
            Reason::DivergedTermBound
        },
        probes: vec![Probe {
            horizon: horizon as f64,
            value: check.worst_residual,
        }],
        quantity: Some(check.worst_residual),
    };
    Ok(check)
}
