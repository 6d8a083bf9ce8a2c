use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::forms::SkewEndomorphism;
use crate::tensor::DenseTensor;

use super::{ConnectionForms, StructureTable};

/// Extra terms for connections that are not plain left-invariant data.
#[derive(Debug, Clone, Default)]
pub struct CurvatureCorrections {
    /// Isotropy part of reductive brackets: `h_components[p][q][a]` is the
    /// `h_a` coefficient of `[e_p, e_q]`, and `isotropy[a]` is the action
    /// of `h_a` on the frame space.
    pub isotropy: Option<(DenseTensor, Vec<DMatrix<f64>>)>,
    /// `frame_derivatives[p][q]` is the derivative of `Λ(e_q)` along `e_p`.
    pub frame_derivatives: Option<Vec<Vec<DMatrix<f64>>>>,
}

/// Curvature endomorphisms `R(e_p, e_q)` with the lowered tensor
/// `R[p,q,c,d] = g(R(e_p,e_q) e_c, e_d)`.
#[derive(Debug, Clone)]
pub struct CurvatureOperator {
    dim: usize,
    endos: Vec<DMatrix<f64>>,
    lowered: DenseTensor,
    /// Rank decomposition `Σ c_k H_k⊗H_k` when one has been fitted.
    pub terms: Vec<(f64, SkewEndomorphism)>,
}

/// Result of fitting `R ≈ c Σ H_k⊗H_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureFit {
    pub coefficient: f64,
    pub residual: f64,
}

/// `R(X,Y) = [Λ(X),Λ(Y)] - Λ([X,Y]) (+ corrections)`.
pub fn curvature(lambda: &ConnectionForms, c: &StructureTable) -> CurvatureOperator {
    curvature_with(lambda, c, &CurvatureCorrections::default())
}

pub fn curvature_with(lambda: &ConnectionForms, c: &StructureTable, extra: &CurvatureCorrections) -> CurvatureOperator {
    let n = c.dim();
    let mut endos = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            let (lp, lq) = (lambda.matrix(p), lambda.matrix(q));
            let mut r = lp * lq - lq * lp;
            for k in 0..n {
                let ck = c.get(p, q, k);
                if ck != 0.0 {
                    r -= lambda.matrix(k) * ck;
                }
            }
            if let Some((hc, act)) = &extra.isotropy {
                for (a, m) in act.iter().enumerate() {
                    let w = hc.get(&[p, q, a]);
                    if w != 0.0 {
                        r -= m * w;
                    }
                }
            }
            if let Some(d) = &extra.frame_derivatives {
                r += &d[p][q] - &d[q][p];
            }
            endos.push(r);
        }
    }
    let lowered = DenseTensor::from_fn(n, 4, |ix| endos[ix[0] * n + ix[1]][(ix[3], ix[2])]);
    CurvatureOperator { dim: n, endos, lowered, terms: Vec::new() }
}

impl CurvatureOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn endomorphism(&self, p: usize, q: usize) -> &DMatrix<f64> {
        &self.endos[p * self.dim + q]
    }

    pub fn lowered(&self) -> &DenseTensor {
        &self.lowered
    }

    pub fn max_abs(&self) -> f64 {
        self.lowered.max_abs()
    }

    /// `max |R[p,q,c,d] - R[c,d,p,q]|`.
    pub fn pair_symmetry_residual(&self) -> f64 {
        self.lowered.max_diff(&self.lowered.permute_slots(&[2, 3, 0, 1]))
    }

    /// Symmetric-bilinear-form matrix on the basis `e_p∧e_q`, `p<q`.
    pub fn dense(&self) -> DMatrix<f64> {
        let pairs: Vec<(usize, usize)> =
            (0..self.dim).flat_map(|p| (p + 1..self.dim).map(move |q| (p, q))).collect();
        DMatrix::from_fn(pairs.len(), pairs.len(), |r, s| {
            let ((p, q), (c, d)) = (pairs[r], pairs[s]);
            self.lowered.get(&[p, q, c, d])
        })
    }

    /// Lowered tensor of `Σ H_k⊗H_k`: `B[a,b,c,d] = Σ_k H_k(a,b) H_k(c,d)`,
    /// reading each endomorphism as a 2-form.
    pub fn square_sum(hs: &[SkewEndomorphism], n: usize) -> DenseTensor {
        DenseTensor::from_fn(n, 4, |ix| {
            hs.iter().map(|h| h.matrix()[(ix[1], ix[0])] * h.matrix()[(ix[3], ix[2])]).sum()
        })
    }

    /// Least-squares coefficient against `Σ H_k⊗H_k` and the max-abs residual.
    pub fn fit(&self, hs: &[SkewEndomorphism]) -> CurvatureFit {
        let b = Self::square_sum(hs, self.dim);
        let bb = b.dot(&b);
        let coefficient = if bb > 0.0 { self.lowered.dot(&b) / bb } else { 0.0 };
        let residual = self.lowered.max_diff(&b.scale(coefficient));
        CurvatureFit { coefficient, residual }
    }

    /// Fits and records the decomposition in `terms`.
    pub fn fit_terms(&mut self, hs: &[SkewEndomorphism]) -> CurvatureFit {
        let fit = self.fit(hs);
        self.terms = hs.iter().map(|h| (fit.coefficient, h.clone())).collect();
        fit
    }

    /// Max deviation between the lowered tensor and its recorded decomposition.
    pub fn decomposition_residual(&self) -> f64 {
        let mut acc = DenseTensor::zeros(self.dim, 4);
        for (c, h) in &self.terms {
            acc = acc.add(&Self::square_sum(std::slice::from_ref(h), self.dim).scale(*c));
        }
        self.lowered.max_diff(&acc)
    }

    /// All `R(e_p,e_q)`, `p<q`.
    pub fn pair_endomorphisms(&self) -> Vec<DMatrix<f64>> {
        (0..self.dim).flat_map(|p| (p + 1..self.dim).map(move |q| (p, q))).map(|(p, q)| self.endomorphism(p, q).clone()).collect()
    }
}
