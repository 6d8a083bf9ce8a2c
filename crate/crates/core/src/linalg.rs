//! Rank decisions and subspace helpers built on nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Orthonormal basis (as columns) of the column span of `m`, keeping singular
/// values above `RANK_CUTOFF * max(σ_max, scale)`.
pub fn column_span(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let (u, sv, _) = checked_svd(m);
    let smax = sv.max().max(scale);
    if smax == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> =
        (0..sv.len()).filter(|&i| sv[i] > RANK_CUTOFF * smax).collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Thin SVD `(U, σ, V^T)` whose reconstruction is verified.
///
/// faer's SVD is used first. nalgebra's bidiagonal SVD returns factors that
/// do not reproduce some rank-deficient inputs, so it is only a fallback,
/// tried on the matrix and its transpose.
pub fn checked_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let bound = 1e-10 * m.amax().max(f64::MIN_POSITIVE);
    let recompose_err = |u: &DMatrix<f64>, s: &DVector<f64>, vt: &DMatrix<f64>| {
        (u * DMatrix::from_diagonal(s) * vt - m).amax()
    };
    if let Some((u, s, vt)) = faer_svd(m) {
        if recompose_err(&u, &s, &vt) <= bound {
            return (u, s, vt);
        }
    }
    let svd = m.clone().svd(true, true);
    let err = svd.clone().recompose().map(|r| (r - m).amax()).unwrap_or(f64::INFINITY);
    if err <= bound {
        return (svd.u.expect("requested U"), svd.singular_values, svd.v_t.expect("requested V^T"));
    }
    let t = m.transpose().svd(true, true);
    let err_t = t.clone().recompose().map(|r| (r - m.transpose()).amax()).unwrap_or(f64::INFINITY);
    if err_t < err {
        let u = t.v_t.expect("requested V^T").transpose();
        let vt = t.u.expect("requested U").transpose();
        return (u, t.singular_values, vt);
    }
    (svd.u.expect("requested U"), svd.singular_values, svd.v_t.expect("requested V^T"))
}

fn faer_svd(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let a = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = a.thin_svd().ok()?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = s.nrows();
    Some((
        DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        DVector::from_fn(k, |i, _| s[i]),
        DMatrix::from_fn(k, m.ncols(), |i, j| v[(j, i)]),
    ))
}

/// Numerical rank with the relative cutoff.
pub fn rank(m: &DMatrix<f64>) -> usize {
    column_span(m, 0.0).ncols()
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn kernel(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least n rows so the SVD exposes the full right space.
    let rows = m.nrows().max(n);
    let mut a = DMatrix::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let (_, sv, vt) = checked_svd(&a);
    let smax = sv.max();
    let idx: Vec<usize> = (0..sv.len())
        .filter(|&i| smax == 0.0 || sv[i] <= RANK_CUTOFF * smax)
        .collect();
    DMatrix::from_fn(n, idx.len(), |r, c| vt[(idx[c], r)])
}

/// Distance of `v` from the span of the orthonormal columns of `q`.
pub fn projection_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    let coeffs = q.transpose() * v;
    (v - q * coeffs).norm()
}

/// Flattens a matrix row-major into a vector.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Inverse of [`vectorize`] for square matrices.
pub fn unvectorize(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}
