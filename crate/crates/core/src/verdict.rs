//! Three-valued convergence decisions for series and suprema.
//!
//! Numeric probing cannot decide convergence in general. Every decision here
//! is driven by an explicit trigger evaluated on partial sums (or running
//! maxima) at a doubling schedule of horizons; when no trigger fires the
//! outcome is [`Outcome::Inconclusive`] and the probe trace is returned.
//!
//! Series triggers, with `S_k` the partial sum up to horizon `N_k` and
//! `B_k = S_k - S_{k-1}` the block sums:
//!
//! * finite: relative increment `B_k / max(S_k, 1e-300) < 1e-8` at the last
//!   two doublings, or the last three block ratios `B_k / B_{k-1}` are all
//!   `<= 0.85` (geometric tail, remainder extrapolated);
//! * diverged (term bound): the last three block ratios are all `>= 0.995`,
//!   i.e. `term(N) * N` stays bounded below;
//! * diverged (growth): `S_k / S_{k-1} >= 1.001` at the last three doublings
//!   and the blocks decay no faster than `(log N)^-1.5`. Without the second
//!   condition `Σ 1/(n log² n)` would be called divergent.
//!
//! Supremum triggers mirror these on the running maximum `M_k`, with the
//! increments `M_k - M_{k-1}` in the role of the blocks.
//!
//! All arithmetic is done on natural logs so that quantities such as `μ_n`
//! for fast-growing rates stay representable.

use serde::Serialize;

/// Relative-increment threshold for the finite trigger.
pub const REL_INCREMENT_TOL: f64 = 1e-8;
/// Floor in relative-increment tests.
pub const EPS_FLOOR: f64 = 1e-300;
/// Block ratio at or below which a tail counts as geometric.
pub const GEOMETRIC_RATIO: f64 = 0.85;
/// Block ratio at or above which terms count as non-decaying.
pub const TERM_BOUND_RATIO: f64 = 0.995;
/// Largest fitted decay exponent still read as divergence by growth.
pub const DIVERGENT_DECAY_EXPONENT: f64 = 1.5;
/// Growth factor per doubling for the divergence-by-growth trigger.
pub const GROWTH_FACTOR: f64 = 1.001;
/// Relative tolerance for "running maximum unchanged"; tail sums over 2^16
/// terms carry about 1e-12 of rounding.
pub const SUP_STABLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Converged,
    DivergedGrowth,
    DivergedTermBound,
    BudgetExhausted,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Converged => "converged",
            Reason::DivergedGrowth => "diverged-growth",
            Reason::DivergedTermBound => "diverged-term-bound",
            Reason::BudgetExhausted => "budget-exhausted",
        }
    }

    pub fn is_divergence(self) -> bool {
        matches!(self, Reason::DivergedGrowth | Reason::DivergedTermBound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub horizon: f64,
    pub value: f64,
}

/// Outcome of a numeric criterion, with the probes that produced it.
///
/// For the raw series/sup procedures `Holds` means "finite" and `Fails`
/// means "diverged"; property rows remap the outcome but keep the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: Reason,
    pub probes: Vec<Probe>,
    pub quantity: Option<f64>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == Outcome::Inconclusive
    }

    /// Same trace, opposite reading: finite ⇄ diverged.
    pub fn negated(mut self) -> Self {
        self.outcome = match self.outcome {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Inconclusive => Outcome::Inconclusive,
        };
        self
    }

    /// Conjunction of prerequisite rows: the first `Fails` wins, then the
    /// first `Inconclusive`, otherwise `self`.
    pub fn requiring(self, prerequisites: &[&Verdict]) -> Self {
        if let Some(f) = prerequisites.iter().find(|v| v.fails()) {
            return Verdict {
                outcome: Outcome::Fails,
                reason: f.reason,
                probes: self.probes,
                quantity: self.quantity,
            };
        }
        if self.fails() {
            return self;
        }
        if let Some(u) = prerequisites.iter().find(|v| v.is_inconclusive()) {
            return Verdict {
                outcome: Outcome::Inconclusive,
                reason: u.reason,
                probes: self.probes,
                quantity: self.quantity,
            };
        }
        self
    }

    pub(crate) fn inconclusive(probes: Vec<Probe>) -> Self {
        Verdict {
            outcome: Outcome::Inconclusive,
            reason: Reason::BudgetExhausted,
            probes,
            quantity: None,
        }
    }
}

/// Doubling schedule `N_k = start * 2^k`, `k = 0..=doublings`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub start: usize,
    pub doublings: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            start: 256,
            doublings: 8,
        }
    }
}

impl Budget {
    /// Multiplies the largest horizon by `factor` (rounded up to a power of two).
    pub fn scaled(self, factor: f64) -> Self {
        if factor.is_nan() || factor <= 1.0 {
            return self;
        }
        let extra = factor.log2().ceil().min(16.0) as u32;
        Budget {
            doublings: self.doublings + extra,
            ..self
        }
    }

    pub fn horizons(&self) -> Vec<usize> {
        (0..=self.doublings).map(|k| self.start << k).collect()
    }

    pub fn max_horizon(&self) -> usize {
        self.start << self.doublings
    }
}

/// Finite/diverged decision plus the log of the estimated remainder.
#[derive(Debug, Clone)]
pub(crate) struct SeriesDecision {
    pub verdict: Verdict,
    /// `ln` of the extrapolated tail beyond the last horizon (`-inf` if none).
    pub ln_remainder: f64,
}

fn ratio(ln_num: f64, ln_den: f64) -> f64 {
    if ln_num == f64::NEG_INFINITY {
        0.0
    } else if ln_den == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (ln_num - ln_den).exp()
    }
}

/// `ln(e^hi - e^lo)` for `hi >= lo`.
pub(crate) fn log_sub(hi: f64, lo: f64) -> f64 {
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if lo >= hi {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// Decides a series from the logs of its partial sums at increasing horizons.
pub(crate) fn decide_series(horizons: &[f64], ln_partial: &[f64]) -> SeriesDecision {
    let mut ln_blocks = Vec::with_capacity(ln_partial.len());
    for (k, &s) in ln_partial.iter().enumerate() {
        ln_blocks.push(if k == 0 { s } else { log_sub(s, ln_partial[k - 1]) });
    }
    decide_series_blocks(horizons, &ln_blocks)
}

/// Decides a series from the logs of its block sums: `ln_blocks[0]` is the
/// partial sum at the first horizon and `ln_blocks[k]` the sum of the terms
/// between horizons `k - 1` and `k`. Summing blocks directly keeps their
/// digits once they drop below the rounding of the partial sums.
pub(crate) fn decide_series_blocks(horizons: &[f64], ln_blocks: &[f64]) -> SeriesDecision {
    assert_eq!(horizons.len(), ln_blocks.len());
    let mut ln_partial = Vec::with_capacity(ln_blocks.len());
    let mut acc = f64::NEG_INFINITY;
    for &b in ln_blocks {
        acc = crate::model::log_add(acc, b);
        ln_partial.push(acc);
    }
    let probes: Vec<Probe> = horizons
        .iter()
        .zip(&ln_partial)
        .map(|(&h, &s)| Probe {
            horizon: h,
            value: s.exp(),
        })
        .collect();
    let k_last = ln_partial.len() - 1;
    let ln_last = ln_partial[k_last];
    let mut decision = SeriesDecision {
        verdict: Verdict::inconclusive(probes),
        ln_remainder: f64::NEG_INFINITY,
    };
    if ln_partial.len() < 5 {
        return decision;
    }
    if ln_last == f64::INFINITY {
        decision.verdict.outcome = Outcome::Fails;
        decision.verdict.reason = Reason::DivergedGrowth;
        return decision;
    }
    let blocks = &ln_blocks[1..];
    let nb = blocks.len();
    let ratios: Vec<f64> = (nb - 3..nb).map(|k| ratio(blocks[k], blocks[k - 1])).collect();
    let ln_eps = EPS_FLOOR.ln();
    let rel_inc = |k: usize| ratio(blocks[k - 1], ln_partial[k].max(ln_eps));
    let growth = |k: usize| ratio(ln_partial[k], ln_partial[k - 1]);

    let tiny_increments =
        rel_inc(k_last) < REL_INCREMENT_TOL && rel_inc(k_last - 1) < REL_INCREMENT_TOL;
    let geometric = ratios.iter().all(|&r| r <= GEOMETRIC_RATIO);
    if tiny_increments || geometric {
        decision.ln_remainder = blocks[nb - 1] + ln_remainder_factor(&ratios);
        let total = crate::model::log_add(ln_last, decision.ln_remainder);
        decision.verdict.outcome = Outcome::Holds;
        decision.verdict.reason = Reason::Converged;
        decision.verdict.quantity = Some(total.exp());
        return decision;
    }
    if ratios.iter().all(|&r| r >= TERM_BOUND_RATIO) {
        decision.verdict.outcome = Outcome::Fails;
        decision.verdict.reason = Reason::DivergedTermBound;
        return decision;
    }
    let growing = (k_last - 2..=k_last).all(|k| growth(k) >= GROWTH_FACTOR);
    if growing && block_decay_exponent(horizons, blocks) <= DIVERGENT_DECAY_EXPONENT {
        decision.verdict.outcome = Outcome::Fails;
        decision.verdict.reason = Reason::DivergedGrowth;
    }
    decision
}

/// `ln Σ_{m>=1} Π_{j<=m} r_j` for the block ratios `r_j` beyond the last one.
///
/// Ratios settling geometrically (as for power-law terms, whose block
/// ratios approach `2^-p` with corrections halving at each doubling) are
/// extrapolated by Aitken's rule and the modelled blocks summed. Otherwise
/// the largest of the last three ratios is taken as constant.
fn ln_remainder_factor(ratios: &[f64]) -> f64 {
    let (r1, r2, r3) = (ratios[0], ratios[1], ratios[2]);
    let (d1, d2) = (r2 - r1, r3 - r2);
    if d1 != 0.0 && d2 != 0.0 {
        let q = d2 / d1;
        let limit = r3 + d2 * q / (1.0 - q);
        if q > 0.0 && q < 0.9 && limit > 0.0 && limit.max(r3) < 1.0 {
            let (mut term, mut sum, mut gap) = (1.0, 0.0, r3 - limit);
            for _ in 0..10_000 {
                gap *= q;
                term *= limit + gap;
                sum += term;
                if term <= 1e-17 * sum {
                    break;
                }
            }
            return sum.ln();
        }
    }
    let r_hat = ratios.iter().cloned().fold(0.0, f64::max);
    if r_hat > 0.0 && r_hat < 1.0 {
        (r_hat / (1.0 - r_hat)).ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Largest `q` over the last three block pairs in a fit `B ~ (log2 N)^-q`.
///
/// Terms like `1/(n log^q n)` give block sums `~ k^-q` on a doubling
/// schedule, so the series of blocks diverges iff `q <= 1`.
fn block_decay_exponent(horizons: &[f64], ln_blocks: &[f64]) -> f64 {
    let nb = ln_blocks.len();
    let mut q_max = f64::NEG_INFINITY;
    for j in nb - 3..nb {
        // block j covers [horizons[j], horizons[j + 1])
        let (b0, b1) = (ln_blocks[j - 1], ln_blocks[j]);
        let q = if b1 == f64::NEG_INFINITY {
            f64::INFINITY
        } else if b0 == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            let span = (horizons[j + 1].log2() / horizons[j].log2()).ln();
            -(b1 - b0) / span
        };
        q_max = q_max.max(q);
    }
    q_max
}

/// Decides a supremum from the logs of the running maxima at increasing
/// horizons and the location of the final maximiser.
pub(crate) fn decide_sup(horizons: &[f64], ln_running_max: &[f64], argmax: f64) -> Verdict {
    decide_sup_tol(horizons, ln_running_max, argmax, SUP_STABLE_TOL)
}

/// As [`decide_sup`], with running maxima within `ln_tol` of each other
/// counted as equal.
pub(crate) fn decide_sup_tol(
    horizons: &[f64],
    ln_running_max: &[f64],
    argmax: f64,
    ln_tol: f64,
) -> Verdict {
    assert_eq!(horizons.len(), ln_running_max.len());
    let probes: Vec<Probe> = horizons
        .iter()
        .zip(ln_running_max)
        .map(|(&h, &m)| Probe {
            horizon: h,
            value: m.exp(),
        })
        .collect();
    let k = ln_running_max.len() - 1;
    let last = ln_running_max[k];
    let mut verdict = Verdict::inconclusive(probes);
    if ln_running_max.len() < 4 {
        return verdict;
    }
    if last == f64::INFINITY {
        verdict.outcome = Outcome::Fails;
        verdict.reason = Reason::DivergedGrowth;
        return verdict;
    }
    let same = |a: f64, b: f64| a == b || (a - b).abs() <= ln_tol;
    let stable = same(ln_running_max[k], ln_running_max[k - 1])
        && same(ln_running_max[k - 1], ln_running_max[k - 2])
        && argmax < horizons[k] / 2.0;
    // increments D_j = M_j - M_{j-1}
    let incs: Vec<f64> = (1..=k)
        .map(|j| log_sub(ln_running_max[j], ln_running_max[j - 1]))
        .collect();
    let ni = incs.len();
    let inc_ratios: Vec<f64> = (ni - 3..ni).map(|j| ratio(incs[j], incs[j - 1])).collect();
    let decaying = inc_ratios.iter().all(|&r| r <= GEOMETRIC_RATIO);
    if stable || decaying {
        verdict.outcome = Outcome::Holds;
        verdict.reason = Reason::Converged;
        verdict.quantity = Some(last.exp());
        return verdict;
    }
    let growing = (k - 2..=k).all(|j| ratio(ln_running_max[j], ln_running_max[j - 1]) >= GROWTH_FACTOR);
    if growing && block_decay_exponent(horizons, &incs) <= DIVERGENT_DECAY_EXPONENT {
        verdict.outcome = Outcome::Fails;
        verdict.reason = Reason::DivergedGrowth;
    }
    verdict
}

/// Probes `Σ_{n>=0} term(n)` on the budget's doubling schedule.
///
/// `term` must be nonnegative; an evaluation error aborts the probe.
pub fn series_verdict<E>(
    term: impl Fn(usize) -> Result<f64, E>,
    budget: Budget,
) -> Result<Verdict, E> {
    series_verdict_ln(|n| term(n).map(f64::ln), budget)
}

/// As [`series_verdict`] with terms given by their natural logs.
pub fn series_verdict_ln<E>(
    ln_term: impl Fn(usize) -> Result<f64, E>,
    budget: Budget,
) -> Result<Verdict, E> {
    let horizons = budget.horizons();
    let mut ln_partial = Vec::with_capacity(horizons.len());
    let mut acc = f64::NEG_INFINITY;
    let mut n = 0;
    for &h in &horizons {
        while n < h {
            acc = crate::model::log_add(acc, ln_term(n)?);
            n += 1;
        }
        ln_partial.push(acc);
    }
    let hs: Vec<f64> = horizons.iter().map(|&h| h as f64).collect();
    Ok(decide_series(&hs, &ln_partial).verdict)
}

/// Probes `sup_{n>=1} value(n)` on the budget's doubling schedule.
pub fn sup_verdict<E>(
    value: impl Fn(usize) -> Result<f64, E>,
    budget: Budget,
) -> Result<Verdict, E> {
    sup_verdict_ln(|n| value(n).map(f64::ln), budget)
}

/// As [`sup_verdict`] with values given by their natural logs.
pub fn sup_verdict_ln<E>(
    ln_value: impl Fn(usize) -> Result<f64, E>,
    budget: Budget,
) -> Result<Verdict, E> {
    let horizons = budget.horizons();
    let mut maxima = Vec::with_capacity(horizons.len());
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 1usize;
    let mut n = 1;
    for &h in &horizons {
        while n < h {
            let v = ln_value(n)?;
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
    let hs: Vec<f64> = horizons.iter().map(|&h| h as f64).collect();
    Ok(decide_sup(&hs, &maxima, argmax as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::convert::Infallible;

    fn series(f: impl Fn(f64) -> f64) -> Verdict {
        series_verdict(|n| Ok::<_, Infallible>(f(n as f64)), Budget::default()).unwrap()
    }

    fn sup(f: impl Fn(f64) -> f64) -> Verdict {
        sup_verdict(|n| Ok::<_, Infallible>(f(n as f64)), Budget::default()).unwrap()
    }

    #[test]
    fn geometric_series_is_finite() {
        let v = series(|n| 2f64.powf(-n));
        assert!(v.holds());
        assert_eq!(v.reason, Reason::Converged);
        assert!((v.quantity.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_series_diverges() {
        let v = series(|n| 1.0 / (n + 1.0));
        assert!(v.fails());
        assert!(v.reason.is_divergence());
    }

    #[test]
    fn constant_and_growing_terms_diverge() {
        assert!(series(|_| 1.0).fails());
        assert!(series(|n| n * n).fails());
    }

    #[test]
    fn log_squared_series_is_not_called_divergent() {
        let v = series(|n| 1.0 / ((n + 2.0) * (n + 2.0).ln().powi(2)));
        assert!(!v.fails(), "{v:?}");
        let v = series_verdict(
            |n| Ok::<_, Infallible>(1.0 / ((n as f64 + 2.0) * (n as f64 + 2.0).ln().powi(2))),
            Budget::default().scaled(64.0),
        )
        .unwrap();
        assert!(!v.fails());
    }

    #[test]
    fn polynomial_tail_extrapolated() {
        // Σ_{n>=0} 1/(n+1)^2 = π²/6
        let v = series(|n| 1.0 / ((n + 1.0) * (n + 1.0)));
        assert!(v.holds());
        let q = v.quantity.unwrap();
        assert!((q - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-8, "{q}");
    }

    #[test]
    fn series_probes_nondecreasing() {
        let v = series(|n| (n + 1.0).powf(-1.3));
        for w in v.probes.windows(2) {
            assert!(w[1].value >= w[0].value);
        }
    }

    #[test]
    fn bounded_increasing_sup_holds() {
        let v = sup(|n| 1.0 - 1.0 / n);
        assert!(v.holds(), "{v:?}");
        let q = v.quantity.unwrap();
        assert!((1.0 - 2f64.powi(-8)..=1.0).contains(&q));
    }

    #[test]
    fn unbounded_sup_diverges() {
        assert!(sup(|n| (n + 1.0).ln()).fails());
        assert!(sup(|n| n.sqrt()).fails());
    }

    #[test]
    fn early_maximum_is_stable() {
        let v = sup(|n| (-(n - 5.0).powi(2)).exp());
        assert!(v.holds());
        assert_eq!(v.quantity, Some(1.0));
    }

    #[test]
    fn errors_propagate() {
        let r = series_verdict(|n| if n == 300 { Err(n) } else { Ok(1.0) }, Budget::default());
        assert_eq!(r.unwrap_err(), 300);
    }

    #[test]
    fn budget_scaling() {
        let b = Budget::default();
        assert_eq!(b.max_horizon(), 65536);
        assert_eq!(b.scaled(4.0).max_horizon(), 262144);
        assert_eq!(b.scaled(1.0), b);
    }

    #[test]
    fn requiring_prerequisites() {
        let holds = series(|n| 2f64.powf(-n));
        let fails = series(|_| 1.0);
        assert!(holds.clone().requiring(&[&fails]).fails());
        assert!(holds.clone().requiring(&[&holds]).holds());
        assert!(fails.clone().negated().holds());
    }

    proptest! {
        #[test]
        fn eventually_geometric_terms_are_finite(
            ratio in 0.01f64..0.5, head in proptest::collection::vec(0.0f64..100.0, 0..50)
        ) {
            let h = head.clone();
            let v = series_verdict(
                |n| Ok::<_, Infallible>(if n < h.len() { h[n] } else { ratio.powi((n - h.len()) as i32) }),
                Budget::default(),
            ).unwrap();
            prop_assert!(v.holds());
        }

        #[test]
        fn terms_bounded_below_diverge(c in 1e-6f64..10.0, wiggle in 0.0f64..1.0) {
            let v = series_verdict(
                |n| Ok::<_, Infallible>(c * (1.0 + wiggle * ((n as f64).sin()).abs())),
                Budget::default(),
            ).unwrap();
            prop_assert!(v.fails());
        }

        #[test]
        fn sup_probes_nondecreasing(seed in 0u64..1000) {
            let v = sup_verdict(
                |n| Ok::<_, Infallible>(((n as u64).wrapping_mul(seed + 7) % 97) as f64 + 1.0),
                Budget::default(),
            ).unwrap();
            for w in v.probes.windows(2) {
                prop_assert!(w[1].value >= w[0].value);
            }
        }
    }
}
