use serde::{Deserialize, Serialize};

/// Absolute and relative tolerance pair.
///
/// Two numbers agree when `|x - y| <= abs_tol + rel_tol * max(|x|, |y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-9, rel_tol: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Option<Self> {
        (abs_tol > 0.0 && rel_tol > 0.0).then_some(Tolerance { abs_tol, rel_tol })
    }

    pub fn close(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.abs_tol + self.rel_tol * x.abs().max(y.abs())
    }

    /// Coefficients below this are dropped from sparse forms.
    pub fn prune_threshold(&self) -> f64 {
        self.abs_tol / 10.0
    }
}

impl Tolerance {
    /// A pinned check bound, loosened or tightened with `abs_tol` relative to
    /// its default.
    pub fn scaled(&self, pinned: f64) -> f64 {
        pinned * (self.abs_tol / Tolerance::default().abs_tol)
    }
}
