use thiserror::Error;

use super::criteria::ChainAnalysis;
use super::ladder::MuLadder;
use crate::eigen::{EigenError, TridiagonalMatrix};
use crate::gap::{Boundary, Delta, GapEstimate, OracleValue, VariationalBound};
use crate::model::{log_add, BirthDeathModel, ModelError};
use crate::verdict::{decide_series_blocks, Outcome};

/// Relative bisection tolerance used by the oracles.
pub const ORACLE_TOL: f64 = 1e-13;
/// Largest representative test-sequence value before truncation.
pub const W_MAX: f64 = 1e150;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("truncation size {0} is too small")]
    TooSmall(usize),
    #[error("test sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("test sequence needs at least two finite values")]
    TooShort,
    #[error("smallest eigenvalue {value} of the reflecting truncation is not zero")]
    NonzeroGround { value: f64 },
}

/// A strictly increasing sequence `w_0 < w_1 < ... < w_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSequence {
    values: Vec<f64>,
}

impl TestSequence {
    pub fn new(values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::TooShort);
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SpectralError::NotIncreasing(i + 1));
        }
        Ok(Self { values })
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self, SpectralError> {
        Self::new((0..len).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `δ` read off the exponential-ergodicity row (the same computation).
pub fn delta_bd(analysis: &ChainAnalysis<'_>) -> Delta {
    Delta::from_verdict(&analysis.exponential_ergodicity())
}

pub fn gap_bounds_bd(analysis: &ChainAnalysis<'_>) -> GapEstimate {
    GapEstimate::from_delta(delta_bd(analysis))
}

/// `w_i = sqrt(Σ_{j<i} 1/(μ_j b_j))` for `i = 0..=n`, cut short before
/// exceeding [`W_MAX`] or losing strict increase.
pub fn representative_w(model: &BirthDeathModel, n: usize) -> Result<TestSequence, SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooSmall(n));
    }
    let ladder = MuLadder::new(model);
    let mut values = vec![0.0];
    let mut ln_sum = f64::NEG_INFINITY;
    for j in 0..n {
        ln_sum = log_add(ln_sum, -(ladder.ln_mu(j)? + model.ln_birth(j)?));
        let w = (0.5 * ln_sum).exp();
        if w > W_MAX || w <= *values.last().expect("nonempty") {
            break;
        }
        values.push(w);
    }
    TestSequence::new(values)
}

/// `inf_{0<=i<N} I_i(w)⁻¹` with `I_i(w) = Σ_{j>i} μ_j w_j / (μ_i b_i (w_{i+1} - w_i))`,
/// `N` a sixteenth of the sequence length.
///
/// Any strictly increasing `w` with `π(w) >= 0` gives a lower bound on the
/// gap. A `w` with `π(w) < 0` is shifted up by `-π(w)` first.
pub fn variational_lower_bd(
    model: &BirthDeathModel,
    w: &TestSequence,
) -> Result<VariationalBound, SpectralError> {
    let ladder = MuLadder::new(model);
    let wv = w.values();
    let m = wv.len() - 1;
    let mut ln_mu = Vec::with_capacity(m + 1);
    for j in 0..=m {
        ln_mu.push(ladder.ln_mu(j)?);
    }
    // split w into positive and negative parts so sums stay in log form
    let ln_pos: Vec<f64> = wv.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
    let ln_neg: Vec<f64> = wv.iter().map(|&v| if v < 0.0 { (-v).ln() } else { f64::NEG_INFINITY }).collect();

    let remainder = |ln_term: &dyn Fn(usize) -> f64| -> (Outcome, f64, f64) {
        let mut horizons: Vec<usize> = (0..=8).rev().map(|k| (m + 1) >> k).filter(|&h| h > 0).collect();
        horizons.dedup();
        let mut blocks = Vec::new();
        let mut acc = f64::NEG_INFINITY;
        let mut n = 0;
        for &h in &horizons {
            let mut block = f64::NEG_INFINITY;
            while n < h {
                block = log_add(block, ln_term(n));
                n += 1;
            }
            acc = log_add(acc, block);
            blocks.push(block);
        }
        let hs: Vec<f64> = horizons.iter().map(|&h| h as f64).collect();
        let d = decide_series_blocks(&hs, &blocks);
        (d.verdict.outcome, d.ln_remainder, acc)
    };

    let (pos_state, ln_pos_rem, ln_pos_total) = remainder(&|j| ln_mu[j] + ln_pos[j]);
    let (mass_state, ln_mass_rem, ln_mass_total) = remainder(&|j| ln_mu[j]);
    if pos_state == Outcome::Fails {
        return Ok(VariationalBound {
            value: 0.0,
            argmin: 0.0,
            residual: f64::INFINITY,
            converged: false,
        });
    }
    let ln_neg_total = ln_neg
        .iter()
        .zip(&ln_mu)
        .fold(f64::NEG_INFINITY, |acc, (a, b)| log_add(acc, a + b));
    let ln_mass = log_add(ln_mass_total, ln_mass_rem);
    let ln_pi_pos = log_add(ln_pos_total, ln_pos_rem) - ln_mass;
    let ln_pi_neg = ln_neg_total - ln_mass;
    // shift c = max(0, -π(w))
    let ln_shift = if ln_pi_neg > ln_pi_pos {
        crate::verdict::log_sub(ln_pi_neg, ln_pi_pos)
    } else {
        f64::NEG_INFINITY
    };

    // backward tails over j > i of μ_j (w_j + c), positive part only
    // (negative w_j occur only at small j where the shifted tail is still positive)
    let mut tail_pos = log_add(ln_pos_rem, ln_shift + ln_mass_rem);
    let mut tail_neg = f64::NEG_INFINITY;
    let n_inf = (m / 16).max(1);
    let mut best = f64::INFINITY;
    let mut argmin = 0;
    let mut best_tail = f64::NEG_INFINITY;
    for i in (0..m).rev() {
        let j = i + 1;
        tail_pos = log_add(tail_pos, log_add(ln_mu[j] + ln_pos[j], ln_shift + ln_mu[j]));
        tail_neg = log_add(tail_neg, ln_mu[j] + ln_neg[j]);
        if i >= n_inf {
            continue;
        }
        let ln_tail = crate::verdict::log_sub(tail_pos, tail_neg);
        let ln_inv = ln_mu[i] + model.ln_birth(i)? + (wv[i + 1] - wv[i]).ln() - ln_tail;
        if ln_inv < best {
            best = ln_inv;
            argmin = i;
            best_tail = ln_tail;
        }
    }
    let ln_rem = log_add(ln_pos_rem, ln_shift + ln_mass_rem);
    let converged = pos_state == Outcome::Holds && mass_state == Outcome::Holds;
    Ok(VariationalBound {
        value: best.exp(),
        argmin: argmin as f64,
        residual: (ln_rem - best_tail).exp(),
        converged,
    })
}

/// Symmetrised `-Q` on `{0..=n}` (reflecting, birth rate at `n` deleted) or
/// on `{1..=n}` (killed at `0`). Off-diagonals are `-sqrt(b_i a_{i+1})`.
pub fn truncated_matrix(
    model: &BirthDeathModel,
    n: usize,
    boundary: Boundary,
) -> Result<TridiagonalMatrix, SpectralError> {
    if n < 1 {
        return Err(SpectralError::TooSmall(n));
    }
    let first = match boundary {
        Boundary::Reflecting => 0,
        Boundary::Absorbing => 1,
    };
    let mut diag = Vec::with_capacity(n + 1 - first);
    let mut off = Vec::with_capacity(n - first);
    for i in first..=n {
        let up = if i < n { model.birth(i)? } else { 0.0 };
        let down = if i > 0 { model.death(i)? } else { 0.0 };
        diag.push(up + down);
        if i < n {
            off.push(-(0.5 * (model.ln_birth(i)? + model.ln_death(i + 1)?)).exp());
        }
    }
    Ok(TridiagonalMatrix::new(diag, off)?)
}

/// Gap (`Reflecting`) or `λ₀` (`Absorbing`) of the truncation to `n` states.
pub fn truncation_eigenvalue(
    model: &BirthDeathModel,
    n: usize,
    boundary: Boundary,
) -> Result<f64, SpectralError> {
    let t = truncated_matrix(model, n, boundary)?;
    match boundary {
        Boundary::Absorbing => Ok(t.kth_eigenvalue(0, ORACLE_TOL)?),
        Boundary::Reflecting => {
            let ground = t.kth_eigenvalue(0, ORACLE_TOL)?;
            let norm = t.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if ground.abs() > 1e-9 * norm.max(1.0) {
                return Err(SpectralError::NonzeroGround { value: ground });
            }
            Ok(t.kth_eigenvalue(1, ORACLE_TOL)?)
        }
    }
}

/// Truncated-generator eigenvalue at size `n`, with `|value(n) - value(n/2)|`
/// as the error estimate.
pub fn truncated_gap_oracle(
    model: &BirthDeathModel,
    n: usize,
    boundary: Boundary,
) -> Result<OracleValue, SpectralError> {
    if n < 3 {
        return Err(SpectralError::TooSmall(n));
    }
    let value = truncation_eigenvalue(model, n, boundary)?;
    let coarse = truncation_eigenvalue(model, n / 2, boundary)?;
    Ok(OracleValue {
        value,
        size: n,
        error_estimate: (value - coarse).abs(),
        cutoff: None,
    })
}
