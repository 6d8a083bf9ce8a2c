//! Catalog of compact metric Lie algebras and algebra-file ingestion.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, validate_structure, StructureTable, Subspace};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Builtin,
    MatrixGenerated,
    File,
}

#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    pub name: String,
    pub table: StructureTable,
    pub provenance: Provenance,
}

impl AlgebraSpec {
    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// Exact rational copy when every constant is an integer.
    pub fn exact_table(&self) -> Option<StructureTable<Rational64>> {
        let n = self.dim();
        let mut out = StructureTable::<Rational64>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.table.get(i, j, k);
                    if (v - v.round()).abs() > 1e-12 {
                        return None;
                    }
                    out.set(i, j, k, Rational64::from_integer(v.round() as i64));
                }
            }
        }
        Some(out)
    }
}

/// Names accepted by [`preset`]; `abelianN` works for any positive `N`.
pub const CATALOG: &[&str] = &["su2", "su3", "so3", "so4", "so5", "u2", "su2+su2", "abelianN", "g2"];

pub fn preset(name: &str) -> Result<AlgebraSpec> {
    let spec = match name {
        "su2" => builtin("su2", levi_civita_symbol()),
        "so3" => builtin("so3", so_n(3)),
        "so4" => builtin("so4", so_n(4)),
        "so5" => builtin("so5", so_n(5)),
        "su3" => named(matrix_basis_constants(&gell_mann_basis())?, "su3"),
        "u2" => named(direct_sum(&preset("abelian1")?, &preset("su2")?), "u2"),
        "su2+su2" => named(direct_sum(&preset("su2")?, &preset("su2")?), "su2+su2"),
        "g2" => named(matrix_basis_constants(&g2_basis())?, "g2"),
        other => match other.strip_prefix("abelian").and_then(|d| d.parse::<usize>().ok()) {
            Some(d) if d > 0 => builtin(other, StructureTable::zeros(d)),
            _ => {
                return Err(Error::UnknownPreset { name: name.to_string(), available: CATALOG.join(", ") });
            }
        },
    };
    Ok(spec)
}

fn builtin(name: &str, table: StructureTable) -> AlgebraSpec {
    AlgebraSpec { name: name.to_string(), table, provenance: Provenance::Builtin }
}

fn named(mut spec: AlgebraSpec, name: &str) -> AlgebraSpec {
    spec.name = name.to_string();
    spec
}

/// `C_ijk = ε_ijk`.
pub fn levi_civita_symbol() -> StructureTable {
    StructureTable::from_fn(3, |i, j, k| {
        if i == j || j == k || i == k {
            0.0
        } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
            1.0
        } else {
            -1.0
        }
    })
}

/// `so(n)` in the basis `L_ab = E_ab - E_ba` (`a<b`), orthonormal for
/// `-½ tr(XY)`; all constants are integers.
pub fn so_n(n: usize) -> StructureTable {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let gen = |(a, b): (usize, usize)| {
        let mut m = DMatrix::<f64>::zeros(n, n);
        m[(a, b)] = 1.0;
        m[(b, a)] = -1.0;
        m
    };
    let mats: Vec<DMatrix<f64>> = pairs.iter().map(|&p| gen(p)).collect();
    StructureTable::from_fn(pairs.len(), |i, j, k| {
        let br = &mats[i] * &mats[j] - &mats[j] * &mats[i];
        let (a, b) = pairs[k];
        br[(a, b)]
    })
}

/// Block-diagonal sum; the frame of `a` comes first.
pub fn direct_sum(a: &AlgebraSpec, b: &AlgebraSpec) -> AlgebraSpec {
    let (na, nb) = (a.dim(), b.dim());
    let table = StructureTable::from_fn(na + nb, |i, j, k| {
        if i < na && j < na && k < na {
            a.table.get(i, j, k)
        } else if i >= na && j >= na && k >= na {
            b.table.get(i - na, j - na, k - na)
        } else {
            0.0
        }
    });
    let provenance = if a.provenance == b.provenance { a.provenance } else { Provenance::MatrixGenerated };
    AlgebraSpec { name: format!("{}+{}", a.name, b.name), table, provenance }
}

pub fn center(a: &AlgebraSpec) -> Subspace {
    lie::center(&a.table)
}

fn trace_inner(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    -(x * y).trace().re
}

/// Structure constants of a matrix Lie algebra, orthonormalized for
/// `⟨X,Y⟩ = -Re tr(XY)`.
pub fn matrix_basis_constants(basis: &[DMatrix<Complex64>]) -> Result<AlgebraSpec> {
    let mut ortho: Vec<DMatrix<Complex64>> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for q in &ortho {
            let c = trace_inner(&v, q);
            v -= q * Complex64::new(c, 0.0);
        }
        let norm = trace_inner(&v, &v);
        if norm <= 1e-20 {
            return Err(Error::InvalidTable("matrix basis is linearly dependent".into()));
        }
        ortho.push(v / Complex64::new(norm.sqrt(), 0.0));
    }
    let n = ortho.len();
    let mut table = StructureTable::zeros(n);
    let mut closure: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let br = &ortho[i] * &ortho[j] - &ortho[j] * &ortho[i];
            let mut rest = br.clone();
            for k in 0..n {
                let c = trace_inner(&br, &ortho[k]);
                table.set(i, j, k, c);
                rest -= &ortho[k] * Complex64::new(c, 0.0);
            }
            closure = closure.max(rest.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    if closure > 1e-9 {
        return Err(Error::NotClosed(closure));
    }
    Ok(AlgebraSpec { name: "matrix".into(), table, provenance: Provenance::MatrixGenerated })
}

/// `i λ_a` for the eight Gell-Mann matrices.
pub fn gell_mann_basis() -> Vec<DMatrix<Complex64>> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut ms: Vec<DMatrix<Complex64>> = (0..8).map(|_| DMatrix::from_element(3, 3, z)).collect();
    ms[0][(0, 1)] = o;
    ms[0][(1, 0)] = o;
    ms[1][(0, 1)] = -i;
    ms[1][(1, 0)] = i;
    ms[2][(0, 0)] = o;
    ms[2][(1, 1)] = -o;
    ms[3][(0, 2)] = o;
    ms[3][(2, 0)] = o;
    ms[4][(0, 2)] = -i;
    ms[4][(2, 0)] = i;
    ms[5][(1, 2)] = o;
    ms[5][(2, 1)] = o;
    ms[6][(1, 2)] = -i;
    ms[6][(2, 1)] = i;
    ms[7][(0, 0)] = s;
    ms[7][(1, 1)] = s;
    ms[7][(2, 2)] = -s * 2.0;
    ms.into_iter().map(|m| m * i).collect()
}

/// Associative calibration on ℝ⁷ used to cut `g2` out of `so(7)`.
const G2_FORM: [([usize; 3], f64); 7] = [
    ([0, 1, 2], 1.0),
    ([0, 3, 4], 1.0),
    ([0, 5, 6], 1.0),
    ([1, 3, 5], 1.0),
    ([1, 4, 6], -1.0),
    ([2, 3, 6], -1.0),
    ([2, 4, 5], -1.0),
];

/// Basis of the stabilizer of [`G2_FORM`] inside `so(7)`.
pub fn g2_basis() -> Vec<DMatrix<Complex64>> {
    let n = 7;
    let mut phi = crate::forms::KForm::zero(n, 3);
    for (idx, c) in G2_FORM {
        phi.add_term(&idx, c).expect("in range");
    }
    let phi = phi.to_dense();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let gens: Vec<DMatrix<f64>> = pairs
        .iter()
        .map(|&(a, b)| {
            let mut m = DMatrix::zeros(n, n);
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
            m
        })
        .collect();
    // Column p: the derivation action of generator p on the form.
    let action = DMatrix::from_fn(n * n * n, gens.len(), |row, p| {
        let mut acc = 0.0;
        for slot in 0..3 {
            acc += phi.transform_slot(slot, &gens[p]).data()[row];
        }
        acc
    });
    let ker = linalg::kernel(&action);
    (0..ker.ncols())
        .map(|c| {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (p, g) in gens.iter().enumerate() {
                m += g * ker[(p, c)];
            }
            m.map(|v| Complex64::new(v, 0.0))
        })
        .collect()
}

/// Algebra file: `{ "name": .., "dim": .., "entries": [[i, j, k, value], ..] }`
/// with 1-based indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub name: String,
    pub dim: usize,
    pub entries: Vec<(usize, usize, usize, f64)>,
}

pub fn parse_algebra(text: &str, abs_tol: f64) -> Result<AlgebraSpec> {
    let file: AlgebraFile = serde_json::from_str(text)?;
    from_entries(&file, abs_tol)
}

pub fn load_algebra(path: &Path, abs_tol: f64) -> Result<AlgebraSpec> {
    parse_algebra(&std::fs::read_to_string(path)?, abs_tol)
}

/// Builds a table from 1-based entries, completing `[e_j,e_i] = -[e_i,e_j]`
/// and rejecting contradictions or Jacobi failures.
pub fn from_entries(file: &AlgebraFile, abs_tol: f64) -> Result<AlgebraSpec> {
    let spec = complete_entries(file, abs_tol)?;
    let diag = validate_structure(&spec.table, false, abs_tol);
    if !diag.pass {
        return Err(Error::InvalidTable(format!(
            "Jacobi residual {:e}, antisymmetry residual {:e}",
            diag.jacobi, diag.antisymmetry
        )));
    }
    Ok(spec)
}

/// Like [`from_entries`] without the Jacobi check.
pub fn complete_entries(file: &AlgebraFile, abs_tol: f64) -> Result<AlgebraSpec> {
    let n = file.dim;
    let mut given = vec![None::<f64>; n * n * n];
    let at = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    for &(i, j, k, v) in &file.entries {
        for idx in [i, j, k] {
            if idx == 0 || idx > n {
                return Err(Error::IndexOutOfRange { index: idx, dim: n });
            }
        }
        let p = at(i - 1, j - 1, k - 1);
        if let Some(old) = given[p] {
            if (old - v).abs() > abs_tol {
                return Err(Error::InvalidTable(format!("entry ({i},{j},{k}) given twice with different values")));
            }
        }
        given[p] = Some(v);
    }
    let mut table = StructureTable::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = match (given[at(i, j, k)], given[at(j, i, k)]) {
                    (Some(a), Some(b)) if (a + b).abs() > abs_tol => {
                        return Err(Error::InvalidTable(format!(
                            "entries ({},{},{}) and ({},{},{}) are not antisymmetric",
                            i + 1,
                            j + 1,
                            k + 1,
                            j + 1,
                            i + 1,
                            k + 1
                        )));
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => -b,
                    (None, None) => 0.0,
                };
                table.set(i, j, k, v);
            }
        }
    }
    Ok(AlgebraSpec { name: file.name.clone(), table, provenance: Provenance::File })
}

/// Serializes a table in the algebra-file layout (nonzero entries, `i<j`).
pub fn to_algebra_file(spec: &AlgebraSpec) -> AlgebraFile {
    let n = spec.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let v = spec.table.get(i, j, k);
                if v != 0.0 {
                    entries.push((i + 1, j + 1, k + 1, v));
                }
            }
        }
    }
    AlgebraFile { name: spec.name.clone(), dim: n, entries }
}
