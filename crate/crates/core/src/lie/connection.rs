use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{two_form_to_endo, KForm, SkewEndomorphism};
use crate::linalg;
use crate::tensor::DenseTensor;

use super::StructureTable;

/// Almost Hermitian data on the frame.
///
/// `j` is tied to the fundamental form by `Ω(X, Y) = g(X, JY)`, so the matrix
/// of `J` equals the coefficient matrix `Ω(e_a, e_b)`. For
/// `Ω = -Σ x_i∧y_i` this gives `J x_i = y_i`.
#[derive(Debug, Clone)]
pub struct HermitianStructure {
    pub omega: KForm,
    pub j: DMatrix<f64>,
}

impl HermitianStructure {
    pub fn from_omega(omega: KForm, tol: f64) -> Result<Self> {
        if omega.degree() != 2 {
            return Err(Error::Degree("fundamental form must be a 2-form".into()));
        }
        let n = omega.dim();
        let j = DMatrix::from_fn(n, n, |a, b| omega.eval(&[a, b]));
        let id = DMatrix::<f64>::identity(n, n);
        let sq = (&j * &j + &id).amax();
        let orth = (j.transpose() * &j - &id).amax();
        if sq > tol || orth > tol {
            return Err(Error::InvalidTable(format!(
                "not an orthogonal complex structure: |J²+1| = {sq:e}, |JᵀJ-1| = {orth:e}"
            )));
        }
        Ok(HermitianStructure { omega, j })
    }

    /// `Ω = -Σ x_i∧y_i` on the frame `(x_1..x_n, y_1..y_n)`.
    pub fn standard(n: usize) -> Self {
        let mut omega = KForm::zero(2 * n, 2);
        for i in 0..n {
            omega.add_term(&[i, n + i], -1.0).expect("in range");
        }
        Self::from_omega(omega, 1e-12).expect("standard structure is valid")
    }
}

/// `Λ(e_i)` for every frame vector: `∇_{e_i} e_j = Λ(e_i) e_j`.
#[derive(Debug, Clone)]
pub struct ConnectionForms {
    pub lambda: Vec<SkewEndomorphism>,
}

impl ConnectionForms {
    pub fn zero(n: usize) -> Self {
        ConnectionForms { lambda: (0..n).map(|_| SkewEndomorphism::zero(n)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<f64> {
        self.lambda[i].matrix()
    }

    /// `Λ(X)` for a vector in frame coordinates.
    pub fn along(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] != 0.0 {
                m += self.matrix(i) * x[i];
            }
        }
        m
    }

    pub fn max_skew_residual(&self) -> f64 {
        self.lambda.iter().map(|l| l.skew_residual()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.lambda.iter().zip(&other.lambda).map(|(a, b)| (a.matrix() - b.matrix()).amax()).fold(0.0, f64::max)
    }

    /// `g(∇_{e_i} e_j, e_k)` as a rank-3 array.
    pub fn christoffel(&self) -> DenseTensor {
        DenseTensor::from_fn(self.dim(), 3, |ix| self.matrix(ix[0])[(ix[2], ix[1])])
    }

    pub fn from_christoffel(g: &DenseTensor) -> Self {
        let n = g.dim();
        ConnectionForms {
            lambda: (0..n)
                .map(|i| SkewEndomorphism::from_matrix_unchecked(DMatrix::from_fn(n, n, |k, j| g.get(&[i, j, k]))))
                .collect(),
        }
    }
}

/// Koszul formula for a left-invariant metric in an orthonormal frame:
/// `2 g(∇_{e_i} e_j, e_k) = C_ijk - C_jki + C_kij`.
pub fn levi_civita(c: &StructureTable) -> ConnectionForms {
    let n = c.dim();
    let g = DenseTensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        0.5 * (c.get(i, j, k) - c.get(j, k, i) + c.get(k, i, j))
    });
    ConnectionForms::from_christoffel(&g)
}

/// `Λ(e_i) = Λ_lc(e_i) + ½ endo(e_i ⌟ T)`.
pub fn connection_with_torsion(lc: &ConnectionForms, t: &KForm) -> Result<ConnectionForms> {
    if t.degree() != 3 || t.dim() != lc.dim() {
        return Err(Error::Degree("torsion must be a 3-form on the same frame".into()));
    }
    let lambda = (0..lc.dim())
        .map(|i| {
            let half = two_form_to_endo(&t.interior(i)?)?.scale(0.5);
            Ok(SkewEndomorphism::from_matrix_unchecked(lc.matrix(i) + half.matrix()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectionForms { lambda })
}

/// Nijenhuis tensor `N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]`, lowered.
#[derive(Debug, Clone)]
pub struct NijenhuisResult {
    pub dense: DenseTensor,
    pub form: KForm,
    /// Deviation from total skewness; nonzero means no characteristic
    /// connection exists.
    pub skew_residual: f64,
}

pub fn nijenhuis(j: &DMatrix<f64>, c: &StructureTable) -> NijenhuisResult {
    let n = c.dim();
    let cols: Vec<DVector<f64>> = (0..n).map(|i| j.column(i).into_owned()).collect();
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    let mut dense = DenseTensor::zeros(n, 3);
    for p in 0..n {
        for q in 0..n {
            let v = c.bracket(&cols[p], &cols[q])
                - j * c.bracket(&cols[p], &e(q))
                - j * c.bracket(&e(p), &cols[q])
                - c.bracket_basis(p, q);
            for k in 0..n {
                dense.set(&[p, q, k], v[k]);
            }
        }
    }
    let skew_residual = dense.antisymmetry_residual();
    let form = KForm::from_dense(&dense);
    NijenhuisResult { dense, form, skew_residual }
}

/// `dᴶΩ(X,Y,Z) = -dΩ(JX,JY,JZ)`.
pub fn twisted_derivative(omega: &KForm, j: &DMatrix<f64>, c: &StructureTable) -> Result<KForm> {
    if omega.degree() != 2 {
        return Err(Error::Degree("twisted derivative needs a 2-form".into()));
    }
    let d = super::d_invariant(omega, c)?.to_dense();
    Ok(KForm::from_dense(&d.transform_all(j).scale(-1.0)))
}

/// `T = N + dᴶΩ`.
pub fn characteristic_torsion(n: &KForm, d_j_omega: &KForm) -> Result<KForm> {
    n.add(d_j_omega)
}

/// Max deviation of `Λ(X)Y - Λ(Y)X - [X,Y]` from `T(X,Y,·)` over frame pairs.
pub fn torsion_identity_residual(lambda: &ConnectionForms, c: &StructureTable, t: &KForm) -> f64 {
    let n = c.dim();
    let td = t.to_dense();
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            for k in 0..n {
                let v = lambda.matrix(p)[(k, q)] - lambda.matrix(q)[(k, p)] - c.get(p, q, k);
                worst = worst.max((v - td.get(&[p, q, k])).abs());
            }
        }
    }
    worst
}

/// Algebraic covariant derivative of a tensor built from invariant data:
/// `(∇_{e_m} A)(X_1..X_r) = E_m(A) - Σ_s A(.., Λ(e_m) X_s, ..)`.
///
/// `directional` supplies `E_m(A)` when the coefficients vary along the frame;
/// pass `None` for left-invariant data. The result has the direction first.
pub fn covariant_derivative(lambda: &ConnectionForms, a: &DenseTensor, directional: Option<&[DenseTensor]>) -> DenseTensor {
    let parts: Vec<DenseTensor> = (0..lambda.dim())
        .map(|m| {
            let mut acc = match directional {
                Some(d) => d[m].clone(),
                None => DenseTensor::zeros(a.dim(), a.rank()),
            };
            for s in 0..a.rank() {
                acc = acc.sub(&a.transform_slot(s, lambda.matrix(m)));
            }
            acc
        })
        .collect();
    DenseTensor::stack(&parts)
}

/// `∇T` for an invariant 3-form and its max-abs norm.
pub fn covariant_derivative_3form(lambda: &ConnectionForms, t: &KForm) -> (DenseTensor, f64) {
    let d = covariant_derivative(lambda, &t.to_dense(), None);
    let m = d.max_abs();
    (d, m)
}

/// `δΩ = δ^∇Ω + ½ Σ_{i,j} (e_i⌟e_j⌟T) ∧ (e_i⌟e_j⌟Ω)` with
/// `δ^∇Ω = -Σ_i e_i ⌟ ∇_{e_i}Ω`.
pub fn codifferential_omega(omega: &KForm, t: &KForm, lambda: &ConnectionForms) -> Result<KForm> {
    let n = omega.dim();
    let nabla = covariant_derivative(lambda, &omega.to_dense(), None);
    let mut acc = KForm::zero(n, 1);
    for i in 0..n {
        let slice = KForm::from_dense(&nabla.leading_slice(i));
        acc = acc.sub(&slice.interior(i)?)?;
    }
    let mut torsion_part = KForm::zero(n, 1);
    for i in 0..n {
        for j in 0..n {
            let tt = t.interior(j)?.interior(i)?;
            let oo = omega.interior(j)?.interior(i)?;
            torsion_part = torsion_part.add(&tt.wedge(&oo)?)?;
        }
    }
    acc.add(&torsion_part.scale(0.5))
}

/// `max |⟨[X,Y],Z⟩ + ⟨Y,[X,Z]⟩|` over frame triples, for brackets already
/// projected to the complement.
pub fn natural_reductivity_check(c_m: &StructureTable) -> f64 {
    let n = c_m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((c_m.get(i, j, k) + c_m.get(i, k, j)).abs());
            }
        }
    }
    worst
}

/// Orthonormal basis of a subspace of the frame space.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub basis: DMatrix<f64>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Largest distance of a unit vector of `other` from this subspace, in
    /// both directions; zero iff the spans coincide.
    pub fn distance(&self, other: &DMatrix<f64>) -> f64 {
        let other = linalg::column_span(other, 0.0);
        if other.ncols() != self.dim() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for c in 0..other.ncols() {
            worst = worst.max(linalg::projection_residual(&self.basis, &other.column(c).into_owned()));
        }
        worst
    }
}

/// Kernel of `v ↦ v ⌟ T`.
pub fn torsion_kernel(t: &KForm) -> Subspace {
    let n = t.dim();
    let d = t.to_dense();
    let m = DMatrix::from_fn(n * n, n, |row, v| d.get(&[v, row / n, row % n]));
    Subspace { basis: linalg::kernel(&m) }
}
