use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::SkewEndomorphism;
use crate::linalg;

use super::{curvature, ConnectionForms, CurvatureOperator, StructureTable};

#[derive(Debug, Clone)]
pub struct HolonomyResult {
    /// Orthonormal (Frobenius) basis of the holonomy algebra.
    pub basis: Vec<SkewEndomorphism>,
    pub dim: usize,
    pub iterations: usize,
}

impl HolonomyResult {
    fn span_matrix(&self) -> DMatrix<f64> {
        let n = self.basis.first().map(|b| b.dim()).unwrap_or(0);
        let cols: Vec<DVector<f64>> = self.basis.iter().map(|b| linalg::vectorize(b.matrix())).collect();
        DMatrix::from_fn(n * n, self.dim, |r, c| cols[c][r])
    }

    /// Largest distance of `[h_i, h_j]` from the span.
    pub fn closure_residual(&self) -> f64 {
        let q = self.span_matrix();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let br = self.basis[i].bracket(&self.basis[j]);
                worst = worst.max(linalg::projection_residual(&q, &linalg::vectorize(br.matrix())));
            }
        }
        worst
    }

    /// Distance of an endomorphism from the span.
    pub fn distance(&self, m: &DMatrix<f64>) -> f64 {
        if self.dim == 0 {
            return m.norm();
        }
        linalg::projection_residual(&self.span_matrix(), &linalg::vectorize(m))
    }

    /// Coordinates of `m` in the orthonormal basis.
    pub fn coordinates(&self, m: &DMatrix<f64>) -> DVector<f64> {
        if self.dim == 0 {
            return DVector::zeros(0);
        }
        self.span_matrix().transpose() * linalg::vectorize(m)
    }
}

/// Holonomy algebra of an invariant connection from its curvature.
pub fn holonomy(lambda: &ConnectionForms, c: &StructureTable) -> Result<HolonomyResult> {
    let r = curvature(lambda, c);
    holonomy_from(lambda, &r)
}

/// Span of the curvature endomorphisms, closed under brackets with all
/// `Λ(e_i)` and under internal brackets.
pub fn holonomy_from(lambda: &ConnectionForms, r: &CurvatureOperator) -> Result<HolonomyResult> {
    let seeds = r.pair_endomorphisms();
    close_span(seeds, &lambda.lambda.iter().map(|l| l.matrix().clone()).collect::<Vec<_>>())
}

/// Smallest subspace containing `seeds`, stable under `[a, ·]` for each
/// `a` in `actors` and under its own brackets.
pub fn close_span(seeds: Vec<DMatrix<f64>>, actors: &[DMatrix<f64>]) -> Result<HolonomyResult> {
    let n = seeds.first().or(actors.first()).map(|m| m.nrows()).unwrap_or(0);
    let scale = seeds.iter().chain(actors).map(|m| m.amax()).fold(0.0, f64::max);
    let stack = |ms: &[DMatrix<f64>]| {
        DMatrix::from_fn(n * n, ms.len(), |row, col| ms[col][(row / n, row % n)])
    };
    let mut q = linalg::column_span(&stack(&seeds), scale);
    let max_iter = (n * (n.saturating_sub(1)) / 2).max(1);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let current: Vec<DMatrix<f64>> =
            (0..q.ncols()).map(|c| linalg::unvectorize(q.column(c).as_slice(), n)).collect();
        let mut cands = Vec::new();
        for a in actors {
            for b in &current {
                cands.push(a * b - b * a);
            }
        }
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                cands.push(&current[i] * &current[j] - &current[j] * &current[i]);
            }
        }
        let before = q.ncols();
        if !cands.is_empty() {
            let mut all = q.clone();
            let extra = stack(&cands);
            all = DMatrix::from_fn(n * n, all.ncols() + extra.ncols(), |r, c| {
                if c < all.ncols() {
                    all[(r, c)]
                } else {
                    extra[(r, c - all.ncols())]
                }
            });
            q = linalg::column_span(&all, 1.0);
        }
        if q.ncols() == before {
            break;
        }
        if iterations > max_iter {
            return Err(Error::NoStabilization(iterations));
        }
    }
    let basis: Vec<SkewEndomorphism> = (0..q.ncols())
        .map(|c| SkewEndomorphism::from_matrix_unchecked(linalg::unvectorize(q.column(c).as_slice(), n)))
        .collect();
    Ok(HolonomyResult { dim: basis.len(), basis, iterations })
}

/// Jacobi residual of the transvection algebra `m ⊕ hol` with brackets
/// `[X,Y] = -T(X,Y) - R(X,Y)`, `[A,X] = A X`, `[A,B] = AB - BA`.
///
/// It vanishes exactly when torsion and curvature are parallel and satisfy
/// the Bianchi identities, i.e. when the data come from a naturally
/// reductive space.
pub fn transvection_jacobi_residual(t: &crate::forms::KForm, r: &CurvatureOperator, hol: &HolonomyResult) -> f64 {
    let n = r.dim();
    let h = hol.dim;
    let td = t.to_dense();
    let qt = if h == 0 { DMatrix::zeros(0, n * n) } else { hol.span_matrix().transpose() };
    let coordinates = |m: &DMatrix<f64>| &qt * linalg::vectorize(m);
    let mut table = StructureTable::zeros(n + h);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                table.set(i, j, k, -td.get(&[i, j, k]));
            }
            let coords = coordinates(r.endomorphism(i, j));
            for a in 0..h {
                table.set(i, j, n + a, -coords[a]);
            }
        }
    }
    for a in 0..h {
        let m = hol.basis[a].matrix();
        for j in 0..n {
            for k in 0..n {
                table.set(n + a, j, k, m[(k, j)]);
                table.set(j, n + a, k, -m[(k, j)]);
            }
        }
        for b in 0..h {
            let br = hol.basis[a].bracket(&hol.basis[b]);
            let coords = coordinates(br.matrix());
            for c in 0..h {
                table.set(n + a, n + b, n + c, coords[c]);
            }
        }
    }
    super::validate_structure(&table, false, f64::INFINITY).jacobi
}
