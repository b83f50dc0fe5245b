use std::sync::RwLock;

use thiserror::Error;

use crate::model::{log_add, BirthDeathModel, ModelError};
use crate::verdict::{decide_series_blocks, Budget, SeriesDecision, Verdict};

/// Smallest and largest `μ_n` returned in linear form.
pub const MU_MIN: f64 = 1e-300;
pub const MU_MAX: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LadderError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("mu_{index} = exp({ln_mu}) is outside [1e-300, 1e300]; use ln_mu")]
    OutOfRange { index: usize, ln_mu: f64 },
}

#[derive(Debug, Clone, Default)]
struct Cache {
    ln_birth: Vec<f64>,
    // index 0 is unused
    ln_death: Vec<f64>,
    ln_mu: Vec<f64>,
    // linear μ_n via the recurrence, NaN when outside [MU_MIN, MU_MAX]
    mu: Vec<f64>,
    // ln Σ_{j<=n} μ_j
    ln_mass_prefix: Vec<f64>,
}

/// Cached speed measure `μ_0 = 1`, `μ_n = b_0⋯b_{n-1} / a_1⋯a_n`.
///
/// Values are kept in log form throughout; the linear value is produced by
/// the multiplicative recurrence while it stays representable. The cache is
/// filled under a write lock and read concurrently.
#[derive(Debug)]
pub struct MuLadder<'m> {
    model: &'m BirthDeathModel,
    cache: RwLock<Cache>,
}

impl<'m> MuLadder<'m> {
    pub fn new(model: &'m BirthDeathModel) -> Self {
        Self {
            model,
            cache: RwLock::new(Cache::default()),
        }
    }

    pub fn model(&self) -> &'m BirthDeathModel {
        self.model
    }

    /// Makes indices `0..len` available.
    fn ensure(&self, len: usize) -> Result<(), ModelError> {
        if self.cache.read().expect("ladder lock").ln_mu.len() >= len {
            return Ok(());
        }
        let mut c = self.cache.write().expect("ladder lock");
        let mut n = c.ln_mu.len();
        while n < len {
            let b = self.model.birth(n)?;
            let ln_b = if b.is_normal() && b.is_finite() {
                b.ln()
            } else {
                self.model.ln_birth(n)?
            };
            if n == 0 {
                c.ln_death.push(f64::NAN);
                c.ln_mu.push(0.0);
                c.mu.push(1.0);
                c.ln_mass_prefix.push(0.0);
            } else {
                let a = self.model.death(n)?;
                let ln_a = if a.is_normal() && a.is_finite() {
                    a.ln()
                } else {
                    self.model.ln_death(n)?
                };
                let ln_mu = c.ln_mu[n - 1] + c.ln_birth[n - 1] - ln_a;
                let prev = c.mu[n - 1];
                let b_prev = c.ln_birth[n - 1].exp();
                let mut mu = if prev.is_nan() {
                    ln_mu.exp()
                } else {
                    prev * b_prev / a
                };
                if !(MU_MIN..=MU_MAX).contains(&mu) || !b_prev.is_finite() {
                    mu = f64::NAN;
                }
                c.ln_death.push(ln_a);
                c.ln_mu.push(ln_mu);
                c.mu.push(mu);
                let prefix = log_add(c.ln_mass_prefix[n - 1], ln_mu);
                c.ln_mass_prefix.push(prefix);
            }
            c.ln_birth.push(ln_b);
            n += 1;
        }
        Ok(())
    }

    /// `μ_n` in linear form.
    pub fn mu(&self, n: usize) -> Result<f64, LadderError> {
        self.ensure(n + 1)?;
        let c = self.cache.read().expect("ladder lock");
        let v = c.mu[n];
        if v.is_nan() {
            Err(LadderError::OutOfRange {
                index: n,
                ln_mu: c.ln_mu[n],
            })
        } else {
            Ok(v)
        }
    }

    pub fn ln_mu(&self, n: usize) -> Result<f64, ModelError> {
        self.ensure(n + 1)?;
        Ok(self.cache.read().expect("ladder lock").ln_mu[n])
    }

    /// `μ[i, k] = Σ_{i<=j<=k} μ_j`.
    pub fn mu_segment(&self, i: usize, k: usize) -> Result<f64, LadderError> {
        assert!(i <= k, "empty segment");
        self.ensure(k + 1)?;
        let c = self.cache.read().expect("ladder lock");
        // out-of-range terms are exponentiated directly (they round to 0 or inf)
        let sum = (i..=k)
            .map(|j| if c.mu[j].is_nan() { c.ln_mu[j].exp() } else { c.mu[j] })
            .sum();
        Ok(sum)
    }

    /// Finite/diverged verdict on `μ[0, ∞)`; the quantity is the total mass.
    pub fn total_mass(&self, budget: Budget) -> Result<Verdict, ModelError> {
        Ok(self.profile(budget)?.mass.verdict.clone())
    }

    /// Snapshot of every log-domain array needed by the criteria, up to the
    /// budget's largest horizon.
    pub fn profile(&self, budget: Budget) -> Result<ChainProfile, ModelError> {
        let h = budget.max_horizon();
        self.ensure(h + 1)?;
        let c = self.cache.read().expect("ladder lock");
        let ln_death = c.ln_death[..=h].to_vec();
        let ln_mu = c.ln_mu[..=h].to_vec();
        let ln_mass_prefix = c.ln_mass_prefix[..=h].to_vec();

        let ln_scale: Vec<f64> = (0..=h).map(|n| -(ln_mu[n] + c.ln_birth[n])).collect();
        drop(c);
        let mut ln_scale_prefix = Vec::with_capacity(h + 1);
        let mut acc = f64::NEG_INFINITY;
        for &s in &ln_scale {
            acc = log_add(acc, s);
            ln_scale_prefix.push(acc);
        }

        let horizons = budget.horizons();
        let hs: Vec<f64> = horizons.iter().map(|&n| n as f64).collect();
        let mut blocks = Vec::with_capacity(horizons.len());
        let mut n = 0;
        for &h in &horizons {
            let mut block = f64::NEG_INFINITY;
            while n < h {
                block = log_add(block, ln_mu[n]);
                n += 1;
            }
            blocks.push(block);
        }
        let mass = decide_series_blocks(&hs, &blocks);
        let ln_tail = mass.verdict.holds().then(|| {
            let mut tail = vec![f64::NEG_INFINITY; h + 1];
            tail[h] = mass.ln_remainder;
            for n in (0..h).rev() {
                tail[n] = log_add(tail[n + 1], ln_mu[n]);
            }
            tail
        });
        Ok(ChainProfile {
            budget,
            horizon: h,
            ln_death,
            ln_mu,
            ln_mass_prefix,
            ln_scale,
            ln_scale_prefix,
            mass,
            ln_tail,
        })
    }
}

/// Log-domain arrays of a chain on `0..=horizon`.
///
/// `scale` is `s_n = 1 / (μ_n b_n)`; prefixes are inclusive. Tails
/// `μ[n, ∞)` are summed backwards from the horizon plus the extrapolated
/// remainder, and exist only when the total mass was decided finite.
#[derive(Debug, Clone)]
pub struct ChainProfile {
    pub(crate) budget: Budget,
    pub(crate) horizon: usize,
    pub(crate) ln_death: Vec<f64>,
    pub(crate) ln_mu: Vec<f64>,
    pub(crate) ln_mass_prefix: Vec<f64>,
    pub(crate) ln_scale: Vec<f64>,
    pub(crate) ln_scale_prefix: Vec<f64>,
    pub(crate) mass: SeriesDecision,
    pub(crate) ln_tail: Option<Vec<f64>>,
}

impl ChainProfile {
    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn mass_verdict(&self) -> &Verdict {
        &self.mass.verdict
    }

    /// `ln μ[n, ∞)`, when the total mass is finite.
    pub fn ln_tail(&self, n: usize) -> Option<f64> {
        self.ln_tail.as_ref().map(|t| t[n])
    }

    /// `ln Σ_{j<n} s_j` (`-inf` for `n = 0`).
    pub(crate) fn ln_scale_before(&self, n: usize) -> f64 {
        if n == 0 {
            f64::NEG_INFINITY
        } else {
            self.ln_scale_prefix[n - 1]
        }
    }

    pub(crate) fn horizons_f64(&self) -> Vec<f64> {
        self.budget.horizons().iter().map(|&n| n as f64).collect()
    }
}
