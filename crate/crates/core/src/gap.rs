//! Two-sided spectral gap estimates shared by chains and diffusions.

use serde::Serialize;

use crate::verdict::Verdict;

/// Boundary treatment at `0` of a truncated generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Reflecting at both ends; the second eigenvalue is the gap `λ₁`.
    Reflecting,
    /// Killed at `0`; the first eigenvalue is `λ₀`.
    Absorbing,
}

/// Value of the `δ` quantity whose finiteness decides a positive gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum Delta {
    Finite(f64),
    Infinite,
    Undecided,
}

impl Delta {
    /// Reads `δ` off a supremum verdict (`Holds` = finite, `Fails` = infinite).
    pub fn from_verdict(v: &Verdict) -> Self {
        if v.holds() {
            Delta::Finite(v.quantity.expect("finite verdict carries a quantity"))
        } else if v.fails() {
            Delta::Infinite
        } else {
            Delta::Undecided
        }
    }

    pub fn status(self) -> &'static str {
        match self {
            Delta::Finite(_) => "finite",
            Delta::Infinite => "infinite",
            Delta::Undecided => "undecided",
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Delta::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Eigenvalue of a truncated operator, with the change from halving the
/// resolution as its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    pub size: usize,
    pub error_estimate: f64,
    /// Right end of the truncated interval for diffusions.
    pub cutoff: Option<f64>,
}

/// `inf` of the variational quotient for one test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalBound {
    pub value: f64,
    /// Where the infimum was attained (index or position).
    pub argmin: f64,
    /// Extrapolated tail beyond the data, relative to the tail at `argmin`.
    pub residual: f64,
    /// False when the weighted tail sum was not decided finite; the value is
    /// then 0 (divergent) or computed without a remainder (undecided).
    pub converged: bool,
}

/// `(4δ)⁻¹ <= λ₀ <= δ⁻¹` (`λ₀` killed at 0, itself a lower bound for the
/// gap `λ₁`), optionally with a variational lower bound and
/// an oracle value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEstimate {
    pub delta: Delta,
    pub lower: f64,
    pub upper: f64,
    pub variational_lower: Option<VariationalBound>,
    pub oracle: Option<OracleValue>,
}

impl GapEstimate {
    /// `δ = ∞` gives a zero gap; an undecided `δ` gives the vacuous `[0, ∞]`.
    pub fn from_delta(delta: Delta) -> Self {
        let (lower, upper) = match delta {
            Delta::Finite(d) => (1.0 / (4.0 * d), 1.0 / d),
            Delta::Infinite => (0.0, 0.0),
            Delta::Undecided => (0.0, f64::INFINITY),
        };
        Self {
            delta,
            lower,
            upper,
            variational_lower: None,
            oracle: None,
        }
    }

    /// Whether `value` lies in `[lower (1 - tol), upper (1 + tol)]`.
    pub fn brackets(&self, value: f64, tol: f64) -> bool {
        value >= self.lower * (1.0 - tol) && value <= self.upper * (1.0 + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_from_delta() {
        let g = GapEstimate::from_delta(Delta::Finite(2.0));
        assert_eq!((g.lower, g.upper), (0.125, 0.5));
        assert_eq!(g.upper, 4.0 * g.lower);
        assert!(g.brackets(0.171573, 0.0));
        let g = GapEstimate::from_delta(Delta::Infinite);
        assert_eq!((g.lower, g.upper), (0.0, 0.0));
        let g = GapEstimate::from_delta(Delta::Undecided);
        assert!(g.upper.is_infinite());
    }
}
