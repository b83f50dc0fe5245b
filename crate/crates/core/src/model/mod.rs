//! Model descriptions: birth-death chains on `{0, 1, 2, ...}` and diffusions on `[0, ∞)`.

mod expr;
mod file;

use std::collections::BTreeMap;

use thiserror::Error;

pub use expr::{parse_expr, BinOp, CmpOp, EvalError, Expr, Func, ParseError, RateExpression};
pub use file::{load_model, parse_model, FileError, Model};
pub(crate) use expr::log_add;

/// Number of chain indices probed for positivity when a model is loaded.
pub const CHAIN_PROBE_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("birth rate b_{index} is not positive ({detail})")]
    BirthNonPositive { index: usize, detail: String },
    #[error("death rate a_{index} is not positive ({detail})")]
    DeathNonPositive { index: usize, detail: String },
    #[error("diffusion coefficient a(x) is not positive at x = {x} ({detail})")]
    DiffusionNonPositive { x: f64, detail: String },
    #[error("drift b(x) cannot be evaluated at x = {x}: {source}")]
    Drift { x: f64, source: EvalError },
    #[error("b0 must be a positive finite number, got {0}")]
    BadB0(f64),
    #[error("a death-rate override at index 0 is meaningless")]
    DeathOverrideAtZero,
    #[error("override value at index {index} must be positive and finite, got {value}")]
    BadOverride { index: usize, value: f64 },
}

/// Birth-death chain: `i -> i+1` at rate `b_i`, `i -> i-1` at rate `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathModel {
    b0: f64,
    birth: RateExpression,
    death: RateExpression,
    birth_overrides: BTreeMap<usize, f64>,
    death_overrides: BTreeMap<usize, f64>,
}

impl BirthDeathModel {
    /// Builds a model and probes positivity on `0..=CHAIN_PROBE_MAX`.
    pub fn new(b0: f64, birth: RateExpression, death: RateExpression) -> Result<Self, ModelError> {
        Self::with_overrides(b0, birth, death, BTreeMap::new(), BTreeMap::new())
    }

    pub fn with_overrides(
        b0: f64,
        birth: RateExpression,
        death: RateExpression,
        birth_overrides: BTreeMap<usize, f64>,
        death_overrides: BTreeMap<usize, f64>,
    ) -> Result<Self, ModelError> {
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(ModelError::BadB0(b0));
        }
        if death_overrides.contains_key(&0) {
            return Err(ModelError::DeathOverrideAtZero);
        }
        for (&index, &value) in birth_overrides.iter().chain(death_overrides.iter()) {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::BadOverride { index, value });
            }
        }
        let model = Self {
            b0,
            birth,
            death,
            birth_overrides,
            death_overrides,
        };
        for i in 0..=CHAIN_PROBE_MAX {
            model.ln_birth(i)?;
            if i >= 1 {
                model.ln_death(i)?;
            }
        }
        Ok(model)
    }

    /// Convenience constructor from expression text in `n`.
    pub fn from_strs(b0: f64, birth: &str, death: &str) -> Result<Self, crate::Error> {
        let birth = RateExpression::parse(birth, "n")?;
        let death = RateExpression::parse(death, "n")?;
        Ok(Self::new(b0, birth, death)?)
    }

    /// The `a_i = b_i = i^γ`, `b_0 = 1` family.
    pub fn gamma_family(gamma: f64) -> Self {
        let text = format!("n^{gamma:?}");
        let e = RateExpression::parse(&text, "n").expect("valid power expression");
        Self::new(1.0, e.clone(), e).expect("positive rates")
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn birth_expr(&self) -> &RateExpression {
        &self.birth
    }

    pub fn death_expr(&self) -> &RateExpression {
        &self.death
    }

    /// `ln b_i`. Overrides shadow the expression; `b_0` is the scalar key.
    pub fn ln_birth(&self, i: usize) -> Result<f64, ModelError> {
        if i == 0 {
            return Ok(self.b0.ln());
        }
        if let Some(&v) = self.birth_overrides.get(&i) {
            return Ok(v.ln());
        }
        match self.birth.ln_eval(i as f64) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(ModelError::BirthNonPositive {
                index: i,
                detail: format!("ln b = {v}"),
            }),
            Err(e) => Err(ModelError::BirthNonPositive {
                index: i,
                detail: e.to_string(),
            }),
        }
    }

    /// `ln a_i` for `i >= 1`.
    pub fn ln_death(&self, i: usize) -> Result<f64, ModelError> {
        debug_assert!(i >= 1);
        if let Some(&v) = self.death_overrides.get(&i) {
            return Ok(v.ln());
        }
        match self.death.ln_eval(i as f64) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(ModelError::DeathNonPositive {
                index: i,
                detail: format!("ln a = {v}"),
            }),
            Err(e) => Err(ModelError::DeathNonPositive {
                index: i,
                detail: e.to_string(),
            }),
        }
    }

    /// `b_i`, evaluated directly when representable so small integer rates stay exact.
    pub fn birth(&self, i: usize) -> Result<f64, ModelError> {
        if i == 0 {
            return Ok(self.b0);
        }
        if let Some(&v) = self.birth_overrides.get(&i) {
            return Ok(v);
        }
        match self.birth.eval(i as f64) {
            Ok(v) if v > 0.0 => Ok(v),
            _ => self.ln_birth(i).map(f64::exp),
        }
    }

    /// `a_i`, with `a_0 = 0`.
    pub fn death(&self, i: usize) -> Result<f64, ModelError> {
        if i == 0 {
            return Ok(0.0);
        }
        if let Some(&v) = self.death_overrides.get(&i) {
            return Ok(v);
        }
        match self.death.eval(i as f64) {
            Ok(v) if v > 0.0 => Ok(v),
            _ => self.ln_death(i).map(f64::exp),
        }
    }

    /// Total jump rate `q_i = a_i + b_i` (with `a_0 = 0`).
    pub fn total_rate(&self, i: usize) -> Result<f64, ModelError> {
        let b = self.birth(i)?;
        Ok(if i == 0 { b } else { b + self.death(i)? })
    }
}

/// Diffusion `L = a(x) d²/dx² + b(x) d/dx` on the half line.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionModel {
    a: RateExpression,
    b: RateExpression,
}

impl DiffusionModel {
    /// Builds a model and probes `a > 0` and finiteness of `b` on a log grid in `(0, 1e3]`.
    pub fn new(a: RateExpression, b: RateExpression) -> Result<Self, ModelError> {
        let model = Self { a, b };
        for k in 0..=48 {
            let x = 10f64.powf(-3.0 + k as f64 / 8.0);
            model.ln_a(x)?;
            model.drift(x)?;
        }
        Ok(model)
    }

    pub fn from_strs(a: &str, b: &str) -> Result<Self, crate::Error> {
        let a = RateExpression::parse(a, "x")?;
        let b = RateExpression::parse(b, "x")?;
        Ok(Self::new(a, b)?)
    }

    pub fn diffusion_expr(&self) -> &RateExpression {
        &self.a
    }

    pub fn drift_expr(&self) -> &RateExpression {
        &self.b
    }

    /// True when the drift is the literal constant zero.
    pub fn is_driftless(&self) -> bool {
        self.b.ast().is_zero_constant()
    }

    pub fn ln_a(&self, x: f64) -> Result<f64, ModelError> {
        match self.a.ln_eval(x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(ModelError::DiffusionNonPositive {
                x,
                detail: format!("ln a = {v}"),
            }),
            Err(e) => Err(ModelError::DiffusionNonPositive {
                x,
                detail: e.to_string(),
            }),
        }
    }

    pub fn diffusion(&self, x: f64) -> Result<f64, ModelError> {
        let v = self.a.eval(x).map_err(|e| ModelError::DiffusionNonPositive {
            x,
            detail: e.to_string(),
        })?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(ModelError::DiffusionNonPositive {
                x,
                detail: format!("a = {v}"),
            })
        }
    }

    pub fn drift(&self, x: f64) -> Result<f64, ModelError> {
        self.b.eval(x).map_err(|source| ModelError::Drift { x, source })
    }

    /// `b(x) / a(x)`, the integrand of `C`.
    pub fn drift_ratio(&self, x: f64) -> Result<f64, ModelError> {
        Ok(self.drift(x)? / self.diffusion(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_two_rates() {
        let m = BirthDeathModel::gamma_family(2.0);
        assert_eq!(m.birth(0).unwrap(), 1.0);
        assert!((m.birth(3).unwrap() - 9.0).abs() < 1e-12);
        assert!((m.death(3).unwrap() - 9.0).abs() < 1e-12);
        assert!((m.total_rate(2).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn zero_death_rate_rejected_at_index_one() {
        let err = BirthDeathModel::from_strs(1.0, "n^2", "0").unwrap_err();
        match err {
            crate::Error::Model(ModelError::DeathNonPositive { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn birth_vanishing_inside_probe_range() {
        let err = BirthDeathModel::from_strs(1.0, "10 - n", "1").unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Model(ModelError::BirthNonPositive { index: 10, .. })
        ));
    }

    #[test]
    fn overrides_shadow_expression() {
        // log(n - 3) is undefined at n = 3; the override means it is never evaluated there.
        let birth = RateExpression::parse("if(n < 4, 1, log(n - 3) + 1)", "n").unwrap();
        let death = RateExpression::parse("1 / (n - 5)^2", "n").unwrap();
        let mut d = BTreeMap::new();
        d.insert(5, 2.5);
        let m = BirthDeathModel::with_overrides(1.0, birth, death, BTreeMap::new(), d).unwrap();
        assert_eq!(m.death(5).unwrap(), 2.5);
        assert!(BirthDeathModel::from_strs(1.0, "1", "1 / (n - 5)^2").is_err());
    }

    #[test]
    fn bad_b0() {
        assert!(matches!(
            BirthDeathModel::from_strs(0.0, "1", "1"),
            Err(crate::Error::Model(ModelError::BadB0(_)))
        ));
    }

    #[test]
    fn diffusion_positivity() {
        assert!(DiffusionModel::from_strs("1", "-x").is_ok());
        assert!(DiffusionModel::from_strs("x - 1", "0").is_err());
        assert!(DiffusionModel::from_strs("1", "log(x - 1)").is_err());
        assert!(DiffusionModel::from_strs("1", "0").unwrap().is_driftless());
        assert!(!DiffusionModel::from_strs("1", "-x").unwrap().is_driftless());
    }
}
