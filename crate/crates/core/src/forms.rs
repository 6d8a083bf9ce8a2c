//! Exterior algebra on a fixed orthonormal frame.
//!
//! Indices are 0-based throughout the Rust API. A k-form stores one
//! coefficient per strictly increasing index tuple.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::tol::Tolerance;

/// Scalar field for forms: `f64` or exact rationals.
pub trait Scalar: Signed + Copy + fmt::Debug + Send + Sync + 'static {
    fn negligible(&self, threshold: f64) -> bool;
    fn to_f64(&self) -> f64;
    fn from_i64(v: i64) -> Self;
}

impl Scalar for f64 {
    fn negligible(&self, threshold: f64) -> bool {
        self.abs() < threshold
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for Rational64 {
    fn negligible(&self, _threshold: f64) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
}

/// Sorts `idx` in place and returns the permutation sign, or `None` when an
/// index repeats.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

#[derive(Clone, PartialEq)]
pub struct KForm<S: Scalar = f64> {
    dim: usize,
    degree: usize,
    prune: f64,
    coeffs: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> fmt::Debug for KForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(dim={}, deg={}, {:?})", self.dim, self.degree, self.coeffs)
    }
}

impl<S: Scalar> fmt::Display for KForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let name: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({:?}) e{}", c, name.join(","))?;
        }
        Ok(())
    }
}

impl<S: Scalar> KForm<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        KForm { dim, degree, prune: Tolerance::default().prune_threshold(), coeffs: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, value: S) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(&[], value).expect("degree 0 term");
        f
    }

    /// The monomial `e_{i1} ∧ … ∧ e_{ik}` with the sign of sorting applied.
    pub fn basis(dim: usize, idx: &[usize]) -> Result<Self> {
        let mut f = Self::zero(dim, idx.len());
        f.add_term(idx, S::one())?;
        Ok(f)
    }

    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self.coeffs.retain(|_, c| !c.negligible(threshold));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &S)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.degree {
            return Err(Error::Degree(format!("expected {} indices, got {}", self.degree, idx.len())));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim: self.dim });
        }
        Ok(())
    }

    /// Adds `value` to the coefficient of the monomial `idx` (any order).
    pub fn add_term(&mut self, idx: &[usize], value: S) -> Result<()> {
        self.check_indices(idx)?;
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return Ok(());
        };
        let v = if sign < 0 { -value } else { value };
        let entry = self.coeffs.entry(key.clone()).or_insert_with(S::zero);
        *entry = *entry + v;
        if entry.negligible(self.prune) {
            self.coeffs.remove(&key);
        }
        Ok(())
    }

    /// Value on the frame vectors `e_{idx[0]}, …` (alternating evaluation).
    pub fn eval(&self, idx: &[usize]) -> S {
        if idx.len() != self.degree {
            return S::zero();
        }
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            None => S::zero(),
            Some(sign) => {
                let c = self.coeffs.get(&key).copied().unwrap_or_else(S::zero);
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::Degree(format!("degree {} vs {}", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.prune = self.prune.min(other.prune);
        for (k, v) in &other.coeffs {
            out.add_term(k, *v)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-S::one()))
    }

    pub fn scale(&self, s: S) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        out.prune = self.prune;
        for (k, v) in &self.coeffs {
            let c = *v * s;
            if !c.negligible(self.prune) {
                out.coeffs.insert(k.clone(), c);
            }
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Largest absolute coefficient difference.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::Degree(format!("wedge degree {} exceeds dimension {}", degree, self.dim)));
        }
        let mut out = Self::zero(self.dim, degree);
        out.prune = self.prune.min(other.prune);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                let inversions = a.iter().map(|&i| b.iter().filter(|&&j| j < i).count()).sum::<usize>();
                let mut idx: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                idx.sort_unstable();
                let c = *ca * *cb;
                let c = if inversions % 2 == 1 { -c } else { c };
                out.add_term(&idx, c)?;
            }
        }
        Ok(out)
    }

    /// Contraction `e_v ⌟ self`.
    pub fn interior(&self, v: usize) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Degree("interior product of a 0-form".into()));
        }
        if v >= self.dim {
            return Err(Error::IndexOutOfRange { index: v, dim: self.dim });
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        out.prune = self.prune;
        for (idx, c) in &self.coeffs {
            if let Some(p) = idx.iter().position(|&i| i == v) {
                let mut rest = idx.clone();
                rest.remove(p);
                let c = if p % 2 == 1 { -*c } else { *c };
                out.add_term(&rest, c)?;
            }
        }
        Ok(out)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> KForm<T> {
        let mut out = KForm::<T>::zero(self.dim, self.degree);
        out.prune = self.prune;
        for (k, v) in &self.coeffs {
            let c = f(*v);
            if !c.negligible(self.prune) {
                out.coeffs.insert(k.clone(), c);
            }
        }
        out
    }
}

impl KForm<f64> {
    /// Reads the alternating part of a dense tensor: the coefficient of each
    /// increasing tuple is the tensor entry there.
    pub fn from_dense(t: &DenseTensor) -> Self {
        let mut out = Self::zero(t.dim(), t.rank());
        for idx in increasing_tuples(t.dim(), t.rank()) {
            let c = t.get(&idx);
            if !c.negligible(out.prune) {
                out.coeffs.insert(idx, c);
            }
        }
        out
    }

    /// Full alternating array with `(k!)`-free normalization: entry at an
    /// increasing tuple equals the stored coefficient.
    pub fn to_dense(&self) -> DenseTensor {
        let mut t = DenseTensor::zeros(self.dim, self.degree);
        for (idx, c) in &self.coeffs {
            for (perm, sign) in permutations_with_sign(idx) {
                t.set(&perm, sign as f64 * c);
            }
        }
        t
    }
}

/// `½ Σ_i (e_i ⌟ T) ∧ (e_i ⌟ T)`.
pub fn sigma_t<S: Scalar>(t: &KForm<S>) -> Result<KForm<S>> {
    if t.degree() != 3 {
        return Err(Error::Degree(format!("sigma_t needs a 3-form, got degree {}", t.degree())));
    }
    let mut acc = KForm::zero(t.dim(), 4);
    if t.dim() < 4 {
        return Ok(acc);
    }
    for i in 0..t.dim() {
        let c = t.interior(i)?;
        acc = acc.add(&c.wedge(&c)?)?;
    }
    let two = S::one() + S::one();
    Ok(acc.map_scalar(|c| c / two))
}

/// All strictly increasing tuples of length `k` from `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(n, k, 0, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn permutations_with_sign(idx: &[usize]) -> Vec<(Vec<usize>, i64)> {
    if idx.len() <= 1 {
        return vec![(idx.to_vec(), 1)];
    }
    let mut out = Vec::new();
    for p in 0..idx.len() {
        let mut rest = idx.to_vec();
        let head = rest.remove(p);
        for (mut tail, s) in permutations_with_sign(&rest) {
            tail.insert(0, head);
            out.push((tail, if p % 2 == 1 { -s } else { s }));
        }
    }
    out
}

/// Skew-symmetric endomorphism of the frame space.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewEndomorphism(DMatrix<f64>);

impl SkewEndomorphism {
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let r = (&m + m.transpose()).amax();
        if r > tol {
            return Err(Error::InvalidTable(format!("matrix not skew: residual {r:e}")));
        }
        Ok(SkewEndomorphism(m))
    }

    /// Wraps a matrix known to be skew by construction.
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        SkewEndomorphism(m)
    }

    pub fn zero(n: usize) -> Self {
        SkewEndomorphism(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn skew_residual(&self) -> f64 {
        (&self.0 + self.0.transpose()).amax()
    }

    pub fn bracket(&self, other: &Self) -> Self {
        SkewEndomorphism(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        SkewEndomorphism(&self.0 * s)
    }
}

/// Identification of 2-forms with skew endomorphisms.
///
/// The endomorphism `M` of a 2-form `w` satisfies `g(M e_j, e_k) = w(e_j, e_k)`,
/// so `e_1∧e_2` maps to the matrix with entry `+1` at row 2, column 1.
pub fn two_form_to_endo(w: &KForm) -> Result<SkewEndomorphism> {
    if w.degree() != 2 {
        return Err(Error::Degree(format!("expected a 2-form, got degree {}", w.degree())));
    }
    let n = w.dim();
    let mut m = DMatrix::zeros(n, n);
    for (idx, c) in w.terms() {
        let (i, j) = (idx[0], idx[1]);
        m[(j, i)] += *c;
        m[(i, j)] -= *c;
    }
    Ok(SkewEndomorphism(m))
}

/// Inverse of [`two_form_to_endo`].
pub fn endo_to_two_form(m: &SkewEndomorphism) -> KForm {
    let n = m.dim();
    let mut w = KForm::zero(n, 2);
    for i in 0..n {
        for j in i + 1..n {
            w.add_term(&[i, j], m.0[(j, i)]).expect("in range");
        }
    }
    w
}
