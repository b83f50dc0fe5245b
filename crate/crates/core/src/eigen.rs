//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.
//!
//! Only one or two extreme eigenvalues are ever needed by the oracles, so
//! plain bisection on the Gershgorin interval is enough and easy to trust.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("off-diagonal length {offdiag} does not match diagonal length {diag}")]
    LengthMismatch { diag: usize, offdiag: usize },
    #[error("non-finite matrix entry at index {0}")]
    NonFinite(usize),
    #[error("eigenvalue index {k} out of range for a {n}x{n} matrix")]
    IndexOutOfRange { k: usize, n: usize },
}

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    off_sq: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self, EigenError> {
        if diag.is_empty() {
            return Err(EigenError::Empty);
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(EigenError::LengthMismatch {
                diag: diag.len(),
                offdiag: offdiag.len(),
            });
        }
        if let Some(i) = diag.iter().position(|v| !v.is_finite()) {
            return Err(EigenError::NonFinite(i));
        }
        if let Some(i) = offdiag.iter().position(|v| !v.is_finite()) {
            return Err(EigenError::NonFinite(i));
        }
        let off_sq = offdiag.iter().map(|e| e * e).collect();
        Ok(Self {
            diag,
            offdiag,
            off_sq,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let e = self.offdiag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (d + e).max(1.0)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let omega = 1e-300 * self.scale();
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for k in 0..self.len() {
            if k > 0 {
                d = (self.diag[k] - x) - self.off_sq[k - 1] / d;
            }
            if d.abs() < omega || d.is_nan() {
                d = -omega;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected until the bracket is
    /// narrower than `tol * max(1, |midpoint|)`.
    pub fn kth_eigenvalue(&self, k: usize, tol: f64) -> Result<f64, EigenError> {
        let n = self.len();
        if k >= n {
            return Err(EigenError::IndexOutOfRange { k, n });
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * self.scale();
        lo -= pad;
        hi += pad;
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo < tol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.sturm_count(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// All eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self, tol: f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.kth_eigenvalue(k, tol).expect("index in range"))
            .collect()
    }
}
