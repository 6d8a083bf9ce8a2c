//! Real Clifford representations on `ℝ⁸`, the Killing frame of `S⁷` and
//! the structure functions `τ_ijk(x) = 2⟨κ_iκ_jκ_k x, x⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const GOLDEN: &str = include_str!("../data/kappa7.txt");

/// Integer generators `κ_1..κ_n` acting on `ℝ⁸`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    pub n: usize,
    pub kappa: Vec<DMatrix<i64>>,
}

fn factor(c: char) -> Result<DMatrix<i64>> {
    let v = match c {
        'I' => [1, 0, 0, 1],
        'X' => [0, 1, 1, 0],
        'Z' => [1, 0, 0, -1],
        'E' => [0, -1, 1, 0],
        _ => return Err(Error::Config(format!("unknown Clifford factor {c}"))),
    };
    Ok(DMatrix::from_row_slice(2, 2, &v))
}

/// Kronecker product of the 2×2 factors named by `word`, left to right.
pub fn kronecker_word(word: &str) -> Result<DMatrix<i64>> {
    let mut m = DMatrix::from_element(1, 1, 1i64);
    for c in word.chars() {
        m = m.kronecker(&factor(c)?);
    }
    Ok(m)
}

/// Words whose Kronecker products give the frozen representation. Each
/// has an odd number of `E` factors (so the product is skew) and any two
/// differ in an odd number of non-identity positions (so they anticommute).
pub const WORDS: [&str; 7] = ["IIE", "IEX", "XEZ", "ZEZ", "EIZ", "EXX", "EZX"];

/// Rebuilds the seven generators from [`WORDS`].
pub fn kronecker_construction() -> Result<Vec<DMatrix<i64>>> {
    WORDS.iter().map(|w| kronecker_word(w)).collect()
}

/// Parses the golden data: blocks headed `k<i> <word>` followed by 8 rows.
pub fn parse_golden(text: &str) -> Result<Vec<(String, DMatrix<i64>)>> {
    let mut out = Vec::new();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    while let Some(head) = lines.next() {
        let word = head.split_whitespace().nth(1).unwrap_or("").to_string();
        let mut vals = Vec::with_capacity(64);
        for _ in 0..8 {
            let row = lines.next().ok_or_else(|| Error::Config("truncated Clifford data".into()))?;
            for tok in row.split_whitespace() {
                vals.push(tok.parse::<i64>().map_err(|e| Error::Config(format!("Clifford data: {e}")))?);
            }
        }
        if vals.len() != 64 {
            return Err(Error::Config(format!("Clifford block {head} has {} entries", vals.len())));
        }
        out.push((word, DMatrix::from_row_slice(8, 8, &vals)));
    }
    Ok(out)
}

/// Max entry of `κ_iκ_j + κ_jκ_i + 2δ_ij` (zero for a representation).
pub fn relation_defect(kappa: &[DMatrix<i64>]) -> i64 {
    let id = DMatrix::<i64>::identity(8, 8);
    let mut worst = 0;
    for (i, ki) in kappa.iter().enumerate() {
        for (j, kj) in kappa.iter().enumerate() {
            let mut m = ki * kj + kj * ki;
            if i == j {
                m += &id * 2;
            }
            worst = worst.max(m.amax());
        }
    }
    worst
}

/// Max entry of `κ_i + κ_iᵀ`.
pub fn skew_defect(kappa: &[DMatrix<i64>]) -> i64 {
    kappa.iter().map(|k| (k + k.transpose()).amax()).max().unwrap_or(0)
}

/// The frozen representation for `n = 7`, or its restriction to the first
/// six generators for `n = 6`.
pub fn build_clifford(n: usize) -> Result<CliffordRep> {
    if n != 6 && n != 7 {
        return Err(Error::Config(format!("Clifford representation available for n = 6, 7 (got {n})")));
    }
    let golden = parse_golden(GOLDEN)?;
    let kappa: Vec<DMatrix<i64>> = golden.into_iter().map(|(_, m)| m).collect();
    if kappa.len() != 7 || relation_defect(&kappa) != 0 || skew_defect(&kappa) != 0 {
        return Err(Error::Config("Clifford data violates the defining relations".into()));
    }
    Ok(CliffordRep { n, kappa: kappa.into_iter().take(n).collect() })
}

impl CliffordRep {
    pub fn float(&self) -> Vec<DMatrix<f64>> {
        self.kappa.iter().map(|k| k.map(|v| v as f64)).collect()
    }

    /// Ordered product `κ_1⋯κ_n`.
    pub fn volume(&self) -> DMatrix<i64> {
        self.kappa.iter().fold(DMatrix::identity(8, 8), |acc, k| acc * k)
    }
}

/// Unit spinor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.len() != 8 {
            return Err(Error::DimensionMismatch { expected: 8, got: x.len() });
        }
        if (x.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("sphere point has norm {}", x.norm())));
        }
        Ok(SpherePoint(x))
    }

    pub fn normalized(x: DVector<f64>) -> Result<Self> {
        let n = x.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("cannot normalize the zero spinor".into()));
        }
        Self::new(x / n)
    }

    pub fn basis(i: usize) -> Self {
        let mut v = DVector::zeros(8);
        v[i] = 1.0;
        SpherePoint(v)
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// `V_i(x) = κ_i x`.
pub fn sphere_frame(rep: &CliffordRep, x: &SpherePoint) -> Vec<DVector<f64>> {
    rep.float().iter().map(|k| k * x.vector()).collect()
}

/// `max |⟨V_i,V_j⟩ - δ_ij|` together with `max |⟨V_i, x⟩|`.
pub fn frame_orthonormality(rep: &CliffordRep, x: &SpherePoint) -> (f64, f64) {
    let v = sphere_frame(rep, x);
    let mut gram: f64 = 0.0;
    let mut normal: f64 = 0.0;
    for i in 0..v.len() {
        normal = normal.max(v[i].dot(x.vector()).abs());
        for j in 0..v.len() {
            let d = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((v[i].dot(&v[j]) - d).abs());
        }
    }
    (gram, normal)
}

/// Structure functions at one point.
#[derive(Debug, Clone)]
pub struct TauField {
    pub base: SpherePoint,
    pub tau: DenseTensor,
}

fn triple_products(k: &[DMatrix<f64>], x: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = k.len();
    let mut out = Vec::with_capacity(n * n * n);
    let kx: Vec<DVector<f64>> = k.iter().map(|m| m * x).collect();
    for i in 0..n {
        for j in 0..n {
            let kij = &k[i] * &k[j];
            out.extend(kx.iter().map(|v| &kij * v));
        }
    }
    out
}

pub fn tau(rep: &CliffordRep, x: &SpherePoint) -> TauField {
    let k = rep.float();
    let n = k.len();
    let prods = triple_products(&k, x.vector());
    let tau = DenseTensor::from_fn(n, 3, |ix| 2.0 * prods[(ix[0] * n + ix[1]) * n + ix[2]].dot(x.vector()));
    TauField { base: x.clone(), tau }
}

/// Derivative of `τ` along `V_m`:
/// `2⟨κ_iκ_jκ_kκ_m x, x⟩ + 2⟨κ_iκ_jκ_k x, κ_m x⟩`.
pub fn tau_derivative(rep: &CliffordRep, x: &SpherePoint, m: usize) -> DenseTensor {
    let k = rep.float();
    let n = k.len();
    let xv = x.vector();
    let kmx = &k[m] * xv;
    let prods = triple_products(&k, xv);
    let prods_m = triple_products(&k, &kmx);
    DenseTensor::from_fn(n, 3, |ix| {
        let id = (ix[0] * n + ix[1]) * n + ix[2];
        2.0 * prods_m[id].dot(xv) + 2.0 * prods[id].dot(&kmx)
    })
}

/// Central difference of `τ` along the great circle `cos t·x + sin t·V_m(x)`.
pub fn tau_derivative_fd(rep: &CliffordRep, x: &SpherePoint, m: usize, h: f64) -> DenseTensor {
    let k = rep.float();
    let v = &k[m] * x.vector();
    let at = |t: f64| {
        let p = SpherePoint(x.vector() * t.cos() + &v * t.sin());
        tau(rep, &p).tau
    };
    at(h).sub(&at(-h)).scale(0.5 / h)
}

/// Residuals of `2κ_iκ_j x = -Σ_k τ_ijk V_k(x)` over `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketIdentityRecord {
    /// Max norm of the difference.
    pub residual: f64,
    /// Max `|⟨2κ_iκ_j x, x⟩|`.
    pub normal_component: f64,
    /// Sign `s` with `[V_i, V_j] = s · 2κ_iκ_j x` for the Lie bracket of
    /// the linear vector fields `x ↦ κ_i x`.
    pub lie_bracket_sign: f64,
}

pub fn bracket_identity_check(rep: &CliffordRep, x: &SpherePoint) -> BracketIdentityRecord {
    let k = rep.float();
    let n = k.len();
    let xv = x.vector();
    let t = tau(rep, x).tau;
    let frame = sphere_frame(rep, x);
    let mut residual: f64 = 0.0;
    let mut normal: f64 = 0.0;
    let mut sign_num = 0.0;
    let mut sign_den = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let lhs = (&k[i] * (&k[j] * xv)) * 2.0;
            let mut rhs = DVector::zeros(8);
            for kk in 0..n {
                rhs -= &frame[kk] * t.get(&[i, j, kk]);
            }
            residual = residual.max((&lhs - rhs).norm());
            normal = normal.max(lhs.dot(xv).abs());
            // For linear fields A x and B x the bracket is (BA - AB) x.
            let lie = (&k[j] * &k[i] - &k[i] * &k[j]) * xv;
            sign_num += lie.dot(&lhs);
            sign_den += lhs.dot(&lhs);
        }
    }
    let lie_bracket_sign = if sign_den > 0.0 { (sign_num / sign_den).signum() } else { 0.0 };
    BracketIdentityRecord { residual, normal_component: normal, lie_bracket_sign }
}
