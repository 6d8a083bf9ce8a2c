use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{increasing_tuples, KForm, Scalar};
use crate::tensor::DenseTensor;

/// Bracket coefficients in an orthonormal frame: `c[i][j][k]` is the
/// coefficient of `e_k` in `[e_i, e_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTable<S: Scalar = f64> {
    dim: usize,
    c: Vec<S>,
}

impl<S: Scalar> StructureTable<S> {
    pub fn zeros(dim: usize) -> Self {
        StructureTable { dim, c: vec![S::zero(); dim * dim * dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> S) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    t.c[(i * dim + j) * dim + k] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> S {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: S) {
        self.c[(i * self.dim + j) * self.dim + k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: S) {
        let p = (i * self.dim + j) * self.dim + k;
        self.c[p] = self.c[p] + v;
    }

    /// Sets `[e_i, e_j]` component `k` and the antisymmetric partner.
    pub fn set_bracket(&mut self, i: usize, j: usize, k: usize, v: S) {
        self.set(i, j, k, v);
        self.set(j, i, k, -v);
    }

    /// Table in the relabeled frame `e'_a = e_{perm[a]}`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.dim, |i, j, k| self.get(perm[i], perm[j], perm[k]))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> StructureTable<T> {
        StructureTable { dim: self.dim, c: self.c.iter().map(|&v| f(v)).collect() }
    }

    pub fn to_f64(&self) -> StructureTable<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn scaled(&self, s: S) -> Self {
        self.map(|v| v * s)
    }
}

impl StructureTable<f64> {
    /// Bracket of two vectors given in frame coordinates.
    pub fn bracket(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = u[i] * v[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += w * self.get(i, j, k);
                }
            }
        }
        out
    }

    /// Bracket of frame vector `e_i` with `e_j` as a coordinate vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| self.get(i, j, k))
    }

    /// Matrix of `ad(e_i)`: column `j` holds `[e_i, e_j]`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.get(i, j, k))
    }

    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor::from_fn(self.dim, 3, |idx| self.get(idx[0], idx[1], idx[2]))
    }

    pub fn from_dense(t: &DenseTensor) -> Self {
        Self::from_fn(t.dim(), |i, j, k| t.get(&[i, j, k]))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.c.iter().zip(&other.c).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Linear combination `Σ w_k C_k` of equal-size tables.
    pub fn combine(parts: &[(f64, &StructureTable)]) -> Self {
        let dim = parts[0].1.dim;
        let mut out = Self::zeros(dim);
        for (w, t) in parts {
            for (o, v) in out.c.iter_mut().zip(&t.c) {
                *o += w * v;
            }
        }
        out
    }
}

/// Residuals from [`validate_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureDiagnostics {
    pub jacobi: f64,
    pub antisymmetry: f64,
    pub total_skew: Option<f64>,
    pub pass: bool,
}

/// Jacobi, first-slot antisymmetry and (if `compact`) total skewness residuals.
pub fn validate_structure<S: Scalar>(c: &StructureTable<S>, compact: bool, abs_tol: f64) -> StructureDiagnostics {
    let n = c.dim();
    let mut anti: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                anti = anti.max((c.get(i, j, k) + c.get(j, i, k)).to_f64().abs());
                skew = skew.max((c.get(i, j, k) - c.get(j, k, i)).to_f64().abs());
            }
        }
    }
    let mut jac: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = S::zero();
                    for m in 0..n {
                        s = s + c.get(i, j, m) * c.get(m, k, l)
                            + c.get(j, k, m) * c.get(m, i, l)
                            + c.get(k, i, m) * c.get(m, j, l);
                    }
                    jac = jac.max(s.to_f64().abs());
                }
            }
        }
    }
    let total_skew = compact.then_some(skew);
    let pass = jac <= abs_tol && anti <= abs_tol && total_skew.is_none_or(|s| s <= abs_tol);
    StructureDiagnostics { jacobi: jac, antisymmetry: anti, total_skew, pass }
}

/// Rejects tables failing antisymmetry or Jacobi.
pub fn require_lie<S: Scalar>(c: &StructureTable<S>, abs_tol: f64) -> Result<()> {
    let d = validate_structure(c, false, abs_tol);
    if d.pass {
        Ok(())
    } else {
        Err(Error::InvalidTable(format!(
            "Jacobi residual {:e}, antisymmetry residual {:e}",
            d.jacobi, d.antisymmetry
        )))
    }
}

/// Chevalley–Eilenberg differential of a left-invariant k-form:
/// `dω(X_0..X_k) = Σ_{p<q} (-1)^{p+q} ω([X_p,X_q], X_0..^p..^q..X_k)`.
pub fn d_invariant<S: Scalar>(omega: &KForm<S>, c: &StructureTable<S>) -> Result<KForm<S>> {
    let n = c.dim();
    if omega.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: omega.dim() });
    }
    let k = omega.degree();
    let mut out = KForm::zero(n, k + 1).with_prune(omega.prune_threshold());
    if k + 1 > n {
        return Ok(out);
    }
    let mut args = vec![0usize; k];
    for tuple in increasing_tuples(n, k + 1) {
        let mut acc = S::zero();
        for p in 0..=k {
            for q in p + 1..=k {
                let rest: Vec<usize> =
                    tuple.iter().enumerate().filter(|&(s, _)| s != p && s != q).map(|(_, &v)| v).collect();
                let mut inner = S::zero();
                for m in 0..n {
                    let cm = c.get(tuple[p], tuple[q], m);
                    if cm.is_zero() {
                        continue;
                    }
                    if k > 0 {
                        args[0] = m;
                        args[1..].copy_from_slice(&rest);
                    }
                    inner = inner + cm * omega.eval(&args[..k]);
                }
                if k == 0 {
                    inner = S::zero();
                }
                acc = if (p + q) % 2 == 1 { acc - inner } else { acc + inner };
            }
        }
        out.add_term(&tuple, acc)?;
    }
    Ok(out)
}
