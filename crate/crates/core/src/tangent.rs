//! Tangent Lie groups `G ⋉ g` with the metrics `g_{a,b}` and the isometric
//! direct-product model.
//!
//! The frame is `(x_1..x_n, y_1..y_n)` with `x_i` at index `i` and `y_i` at
//! index `n + i`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{KForm, SkewEndomorphism};
use crate::lie::{
    self, characteristic, covariant_derivative, curvature, holonomy_from, torsion_identity_residual,
    torsion_kernel, transvection_jacobi_residual, BiInvarianceWitness, CharacteristicData, ConnectionForms,
    CurvatureOperator, HermitianStructure, HolonomyResult, StructureTable,
};
use crate::presets::AlgebraSpec;
use crate::report::{InputEcho, Num, VerificationReport};
use crate::tensor::DenseTensor;
use crate::tol::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentMetricParams {
    pub a: f64,
    pub b: f64,
}

impl TangentMetricParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::Degenerate(format!("metric parameter a must be finite and nonzero (a = {a}, b = {b})")));
        }
        Ok(TangentMetricParams { a, b })
    }

    pub fn is_flat_locus(&self) -> bool {
        self.b == 0.0
    }

    /// `b²/a² (a² + b²)`.
    pub fn curvature_scalar(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        b * b / (a * a) * (a * a + b * b)
    }
}

/// `[x_i,x_j] = aC x_k`, `[x_i,y_j] = aC y_k`, `[y_i,y_j] = C(2b y_k - (b²/a) x_k)`.
pub fn tangent_brackets(g: &AlgebraSpec, p: TangentMetricParams) -> Result<StructureTable> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let n = g.dim();
    let (a, b) = (p.a, p.b);
    let mut t = StructureTable::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = g.table.get(i, j, k);
                if c == 0.0 {
                    continue;
                }
                t.add(i, j, k, a * c);
                t.add(i, n + j, n + k, a * c);
                t.add(n + j, i, n + k, -a * c);
                t.add(n + i, n + j, n + k, 2.0 * b * c);
                t.add(n + i, n + j, k, -b * b / a * c);
            }
        }
    }
    Ok(t)
}

/// `[x_i,x_j] = aC x_k`, `[x_i,y_j] = bC x_k`, `[y_i,y_j] = (b²/a)C x_k`.
pub fn direct_product_brackets(g: &AlgebraSpec, p: TangentMetricParams) -> Result<StructureTable> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let n = g.dim();
    let (a, b) = (p.a, p.b);
    let mut t = StructureTable::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = g.table.get(i, j, k);
                if c == 0.0 {
                    continue;
                }
                t.add(i, j, k, a * c);
                t.add(i, n + j, k, b * c);
                t.add(n + j, i, k, -b * c);
                t.add(n + i, n + j, k, b * b / a * c);
            }
        }
    }
    Ok(t)
}

/// `H_i = Σ_{j<k} C_ijk (x_j∧x_k + y_j∧y_k)` as endomorphisms:
/// `H_i x_j = Σ_k C_ijk x_k`, same on the `y` block.
pub fn h_endomorphisms(g: &AlgebraSpec) -> Vec<SkewEndomorphism> {
    let n = g.dim();
    (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            for j in 0..n {
                for k in 0..n {
                    let c = g.table.get(i, j, k);
                    m[(k, j)] += c;
                    m[(n + k, n + j)] += c;
                }
            }
            SkewEndomorphism::from_matrix_unchecked(m)
        })
        .collect()
}

/// Dense torsion of the form
/// `Σ_{i<j<k} C_ijk [p x_ijk + q y_ijk + r (x_i y_jk + y_i x_j y_k + y_ij x_k)
///  + s (y_i x_jk + x_i y_j x_k + x_ij y_k)]`.
pub fn lifted_three_form(c: &StructureTable, p: f64, q: f64, r: f64, s: f64) -> DenseTensor {
    let n = c.dim();
    let mut t = DenseTensor::zeros(2 * n, 3);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = c.get(i, j, k);
                if c == 0.0 {
                    continue;
                }
                t.set(&[i, j, k], p * c);
                t.set(&[n + i, n + j, n + k], q * c);
                t.set(&[i, n + j, n + k], r * c);
                t.set(&[n + i, j, n + k], r * c);
                t.set(&[n + i, n + j, k], r * c);
                t.set(&[n + i, j, k], s * c);
                t.set(&[i, n + j, k], s * c);
                t.set(&[i, j, n + k], s * c);
            }
        }
    }
    t
}

/// Closed-form torsion of the semidirect model:
/// `(a + 2b²/a) x_ijk - 2b y_ijk + (b²/a)(mixed with two y's)`.
pub fn expected_torsion(g: &AlgebraSpec, p: TangentMetricParams) -> DenseTensor {
    let (a, b) = (p.a, p.b);
    lifted_three_form(&g.table, a + 2.0 * b * b / a, -2.0 * b, b * b / a, 0.0)
}

/// Everything the characteristic pipeline produces for one metric.
#[derive(Debug, Clone)]
pub struct TangentStructure {
    pub table: StructureTable,
    pub hermitian: HermitianStructure,
    pub data: CharacteristicData,
    pub curvature: CurvatureOperator,
}

impl TangentStructure {
    pub fn torsion(&self) -> &KForm {
        &self.data.torsion
    }

    pub fn connection(&self) -> &ConnectionForms {
        &self.data.connection
    }
}

pub fn build_structure(table: StructureTable) -> Result<TangentStructure> {
    let n = table.dim() / 2;
    let hermitian = HermitianStructure::standard(n);
    let data = characteristic(&table, &hermitian)?;
    let curvature = curvature(&data.connection, &table);
    Ok(TangentStructure { table, hermitian, data, curvature })
}

pub fn semidirect_structure(g: &AlgebraSpec, p: TangentMetricParams) -> Result<TangentStructure> {
    build_structure(tangent_brackets(g, p)?)
}

pub fn direct_structure(g: &AlgebraSpec, p: TangentMetricParams) -> Result<TangentStructure> {
    build_structure(direct_product_brackets(g, p)?)
}

fn echo(g: &AlgebraSpec, p: TangentMetricParams) -> InputEcho {
    InputEcho {
        algebra: Some(g.name.clone()),
        params: [("a".to_string(), Num(p.a)), ("b".to_string(), Num(p.b))].into_iter().collect(),
        samples: None,
        seed: None,
    }
}

/// Largest deviation of `Λ(e_i)` from `coef_i · H` over the given frame range.
fn lambda_deviation(conn: &ConnectionForms, hs: &[SkewEndomorphism], offset: usize, coef: f64) -> f64 {
    hs.iter()
        .enumerate()
        .map(|(i, h)| (conn.matrix(offset + i) - h.matrix() * coef).amax())
        .fold(0.0, f64::max)
}

/// Full verification of the naturally reductive structure on `G ⋉ g`.
pub fn tangent_pipeline(g: &AlgebraSpec, p: TangentMetricParams, tol: &Tolerance) -> Result<VerificationReport> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let n = g.dim();
    let s = semidirect_structure(g, p)?;
    let mut rep = VerificationReport::new("tangent", echo(g, p));
    let (a, b) = (p.a, p.b);
    let scale = 1f64.max(a.abs()).max(b.abs()).max(b * b / a.abs());

    let diag = lie::validate_structure(&s.table, false, f64::INFINITY);
    rep.check("table_jacobi", &[diag.jacobi], Some(0.0), diag.jacobi, tol.scaled(1e-9) * scale * scale);
    rep.check(
        "nijenhuis_skew",
        &[s.data.nijenhuis.skew_residual],
        Some(0.0),
        s.data.nijenhuis.skew_residual,
        tol.scaled(1e-9),
    );

    let expected = expected_torsion(g, p);
    let t_dense = s.torsion().to_dense();
    let dev = t_dense.max_diff(&expected);
    let mut coefs = vec![a + 2.0 * b * b / a, -2.0 * b, b * b / a];
    if let Some((i, j, k)) = first_triple(g) {
        let c = g.table.get(i, j, k);
        coefs = vec![
            t_dense.get(&[i, j, k]) / c,
            t_dense.get(&[n + i, n + j, n + k]) / c,
            t_dense.get(&[i, n + j, n + k]) / c,
        ];
    }
    rep.check("torsion_closed_form", &coefs, None, dev, tol.scaled(1e-12) * scale.max(scale * scale / a.abs().max(1.0)));

    let hs = h_endomorphisms(g);
    let lx = lambda_deviation(s.connection(), &hs, 0, a + b * b / a);
    let ly = lambda_deviation(s.connection(), &hs, n, 0.0);
    rep.check("connection_x", &[a + b * b / a], Some(a + b * b / a), lx, tol.scaled(1e-10) * scale);
    rep.check("connection_y", &[ly], Some(0.0), ly, tol.scaled(1e-10) * scale);
    rep.check(
        "metric_connection",
        &[s.connection().max_skew_residual()],
        Some(0.0),
        s.connection().max_skew_residual(),
        tol.scaled(1e-12) * scale,
    );
    let tid = torsion_identity_residual(s.connection(), &s.table, s.torsion());
    rep.check("torsion_identity", &[tid], Some(0.0), tid, tol.scaled(1e-10) * scale);

    let nabla_omega = covariant_derivative(s.connection(), &s.hermitian.omega.to_dense(), None).max_abs();
    rep.check("nabla_omega", &[nabla_omega], Some(0.0), nabla_omega, tol.scaled(1e-8));

    let (_, nabla_t) = lie::covariant_derivative_3form(s.connection(), s.torsion());
    rep.check("nabla_torsion", &[nabla_t], Some(0.0), nabla_t, tol.scaled(1e-8));
    let nabla_r = covariant_derivative(s.connection(), s.curvature.lowered(), None).max_abs();
    rep.check("nabla_curvature", &[nabla_r], Some(0.0), nabla_r, tol.scaled(1e-8));

    let kappa = p.curvature_scalar();
    let fit = s.curvature.fit(&hs);
    let r_scale = 1f64.max(kappa.abs());
    rep.check("curvature_fit_residual", &[fit.residual], Some(0.0), fit.residual, tol.scaled(1e-9) * r_scale);
    if lie::derived_dim(&g.table) > 0 {
        rep.check_rel("curvature_scalar", fit.coefficient, kappa, 1e-9 * tol.abs_tol / 1e-9, tol.scaled(1e-12));
    }
    let sym = s.curvature.pair_symmetry_residual();
    rep.check("curvature_pair_symmetry", &[sym], Some(0.0), sym, tol.scaled(1e-9) * r_scale);
    if p.is_flat_locus() {
        let m = s.curvature.max_abs();
        rep.check("flat_curvature", &[m], Some(0.0), m, tol.scaled(1e-12));
    }

    let hol = holonomy_from(s.connection(), &s.curvature)?;
    let expected_dim = if p.is_flat_locus() { 0 } else { lie::derived_dim(&g.table) };
    rep.check_eq("holonomy_dim", hol.dim, expected_dim);
    let closure = hol.closure_residual();
    rep.check("holonomy_closure", &[closure], Some(0.0), closure, tol.scaled(1e-8));
    let hol_contains_h = hs.iter().map(|h| hol.distance(h.matrix())).fold(0.0, f64::max);
    if !p.is_flat_locus() {
        rep.check("holonomy_spanned_by_h", &[hol_contains_h], Some(0.0), hol_contains_h, tol.scaled(1e-8));
    }

    let delta = lie::codifferential_omega(&s.hermitian.omega, s.torsion(), s.connection())?.max_abs();
    rep.check("codifferential_omega", &[delta], Some(0.0), delta, tol.scaled(1e-8));

    let tj = transvection_jacobi_residual(s.torsion(), &s.curvature, &hol);
    rep.check("transvection_jacobi", &[tj], Some(0.0), tj, tol.scaled(1e-8) * r_scale * scale);

    rep.observe("curvature_coefficient", &[fit.coefficient], None);
    rep.observe("holonomy_iterations", &[hol.iterations as f64], None);
    let kernel = torsion_kernel(s.torsion());
    rep.observe("torsion_kernel_dim", &[kernel.dim() as f64], None);
    if let Some(w) = lie::biinvariance_witness(&s.table, tol.abs_tol) {
        rep.observe("biinvariance_witness", &[w.x as f64, w.y as f64, w.z as f64, w.residual], Some("frame triple (0-based) and residual"));
    }
    Ok(rep)
}

fn first_triple(g: &AlgebraSpec) -> Option<(usize, usize, usize)> {
    let n = g.dim();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if g.table.get(i, j, k).abs() > 1e-12 {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// `(α, α', β)` of the six-dimensional ansatz realized by `G ⋉ g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
}

impl AnsatzParams {
    /// `α = a + 2b²/a`, `α' = 2b`, `β = b²/a`.
    pub fn from_metric(p: TangentMetricParams) -> Self {
        let (a, b) = (p.a, p.b);
        AnsatzParams { alpha: a + 2.0 * b * b / a, alpha_prime: 2.0 * b, beta: b * b / a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRecord {
    pub params: AnsatzParams,
    /// `(α')² - 4β(α - 2β)`.
    pub quadratic_residual: f64,
    /// `β(α - β) - b²/a² (a² + b²)`.
    pub curvature_residual: f64,
    /// `β ≠ 0`, `α ≠ β` and `α ≠ 2β`.
    pub nondegenerate: bool,
}

pub fn ansatz_crosscheck(p: TangentMetricParams) -> Result<AnsatzRecord> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let q = AnsatzParams::from_metric(p);
    let quadratic_residual = q.alpha_prime * q.alpha_prime - 4.0 * q.beta * (q.alpha - 2.0 * q.beta);
    let curvature_residual = q.beta * (q.alpha - q.beta) - p.curvature_scalar();
    let nondegenerate = q.beta != 0.0 && q.alpha != q.beta && q.alpha != 2.0 * q.beta;
    Ok(AnsatzRecord { params: q, quadratic_residual, curvature_residual, nondegenerate })
}

/// Interleaved six-dimensional frame `(x_1, y_1, x_2, y_2, x_3, y_3)` as a
/// permutation of the block frame.
pub const INTERLEAVED_SU2: [usize; 6] = [0, 3, 1, 4, 2, 5];

/// `α e_135 + α' e_246 + β (e_245 + e_236 + e_146)` (1-based labels).
pub fn ansatz_torsion(q: AnsatzParams) -> KForm {
    let mut t = KForm::zero(6, 3);
    let terms = [
        ([0, 2, 4], q.alpha),
        ([1, 3, 5], q.alpha_prime),
        ([1, 3, 4], q.beta),
        ([1, 2, 5], q.beta),
        ([0, 3, 5], q.beta),
    ];
    for (idx, c) in terms {
        t.add_term(&idx, c).expect("in range");
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryRecord {
    /// `+1` or `-1`: the global sign relating the two torsions.
    pub torsion_sign: f64,
    pub torsion_deviation: f64,
    pub curvature_deviation: f64,
    /// Deviation of the direct-product `Λ` from `Λ(x_i) = -(b²/a)H_i`,
    /// `Λ(y_i) = bH_i`.
    pub lambda_deviation: f64,
    /// `max |C_semidirect - C_direct|`.
    pub table_difference: f64,
}

pub fn isometry_crosscheck(g: &AlgebraSpec, p: TangentMetricParams) -> Result<IsometryRecord> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let n = g.dim();
    let semi = semidirect_structure(g, p)?;
    let direct = direct_structure(g, p)?;
    let ts = semi.torsion().to_dense();
    let td = direct.torsion().to_dense();
    let plus = ts.max_diff(&td);
    let minus = ts.max_diff(&td.scale(-1.0));
    let (torsion_sign, torsion_deviation) = if minus <= plus { (-1.0, minus) } else { (1.0, plus) };
    let curvature_deviation = semi.curvature.lowered().max_diff(direct.curvature.lowered());
    let hs = h_endomorphisms(g);
    let (a, b) = (p.a, p.b);
    let lambda_deviation = lambda_deviation(direct.connection(), &hs, 0, -b * b / a)
        .max(lambda_deviation(direct.connection(), &hs, n, b));
    Ok(IsometryRecord {
        torsion_sign,
        torsion_deviation,
        curvature_deviation,
        lambda_deviation,
        table_difference: semi.table.max_diff(&direct.table),
    })
}

#[derive(Debug, Clone)]
pub struct SplittingRecord {
    pub center_dim: usize,
    pub kernel_dim: usize,
    /// Distance between the torsion kernel and the lifted center
    /// `span{x(z), y(z)}`; infinite when the dimensions differ.
    pub span_distance: f64,
}

pub fn splitting_check(g: &AlgebraSpec, p: TangentMetricParams) -> Result<SplittingRecord> {
    let n = g.dim();
    let z = lie::center(&g.table);
    let s = semidirect_structure(g, p)?;
    let kernel = torsion_kernel(s.torsion());
    let pz = z.dim();
    let lifted = DMatrix::from_fn(2 * n, 2 * pz, |r, c| {
        let (block, col) = (c / pz, c % pz);
        if block == 0 && r < n {
            z.basis[(r, col)]
        } else if block == 1 && r >= n {
            z.basis[(r - n, col)]
        } else {
            0.0
        }
    });
    let span_distance = if pz == 0 && kernel.dim() == 0 { 0.0 } else { kernel.distance(&lifted) };
    Ok(SplittingRecord { center_dim: pz, kernel_dim: kernel.dim(), span_distance })
}

/// See [`lie::biinvariance_witness`].
pub fn biinvariance_witness(table: &StructureTable, tol: f64) -> Option<BiInvarianceWitness> {
    lie::biinvariance_witness(table, tol)
}

/// Holonomy of the characteristic connection of `G ⋉ g`.
pub fn tangent_holonomy(g: &AlgebraSpec, p: TangentMetricParams) -> Result<HolonomyResult> {
    let s = semidirect_structure(g, p)?;
    holonomy_from(s.connection(), &s.curvature)
}

/// Report comparing the semidirect model with the isometric direct product.
pub fn direct_product_pipeline(g: &AlgebraSpec, p: TangentMetricParams, tol: &Tolerance) -> Result<VerificationReport> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let r = isometry_crosscheck(g, p)?;
    let mut rep = VerificationReport::new("direct-product-crosscheck", echo(g, p));
    let scale = 1f64.max(p.a.abs()).max(p.b.abs()).max(p.b * p.b / p.a.abs());
    let bound = tol.scaled(1e-10) * scale * scale;
    rep.check("torsion_up_to_sign", &[r.torsion_sign, r.torsion_deviation], Some(0.0), r.torsion_deviation, bound);
    rep.check("curvature_equal", &[r.curvature_deviation], Some(0.0), r.curvature_deviation, bound);
    rep.check("direct_connection_closed_form", &[r.lambda_deviation], Some(0.0), r.lambda_deviation, bound);
    rep.observe("torsion_sign", &[r.torsion_sign], None);
    rep.observe("table_difference", &[r.table_difference], Some("the two bracket tables differ; only the geometry agrees"));
    Ok(rep)
}
