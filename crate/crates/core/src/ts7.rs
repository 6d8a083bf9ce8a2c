//! The almost Hermitian structure on `S⁷ × ℝ⁷`.
//!
//! Frame at `(x, z)`: `X_i = a W_i`, `Y_i = b W_i + f_i`, where
//! `W_i(x) = -κ_i x` and `f_i = ∂/∂z_i`. With this sign the Lie bracket of
//! the linear fields satisfies `[W_i, W_j] = -Σ τ_ijk W_k`, so the frame
//! obeys `[X_i,X_j] = -aτX`, `[X_i,Y_j] = -bτX`, `[Y_i,Y_j] = -(b²/a)τX`
//! with point-dependent `τ`.

use nalgebra::DMatrix;

use crate::clifford::{self, bracket_identity_check, frame_orthonormality, tau, tau_derivative, CliffordRep, SpherePoint};
use crate::error::Result;
use crate::forms::SkewEndomorphism;
use crate::lie::{
    self, characteristic, close_span, covariant_derivative, curvature_with, CharacteristicData, CurvatureCorrections,
    CurvatureOperator, HermitianStructure, StructureTable,
};
use crate::report::{InputEcho, Num, VerificationReport};
use crate::tangent::{lifted_three_form, TangentMetricParams};
use crate::tensor::DenseTensor;
use crate::tol::Tolerance;

/// Bracket table of the frame for structure functions `t`.
pub fn ts7_table(t: &DenseTensor, p: TangentMetricParams) -> StructureTable {
    let n = t.dim();
    let (a, b) = (p.a, p.b);
    let mut c = StructureTable::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = t.get(&[i, j, k]);
                if v == 0.0 {
                    continue;
                }
                c.add(i, j, k, -a * v);
                c.add(i, n + j, k, -b * v);
                c.add(n + j, i, k, b * v);
                c.add(n + i, n + j, k, -b * b / a * v);
            }
        }
    }
    c
}

/// `H_i` with `H_i X_j = -Σ_k τ_ijk X_k`, same on the `Y` block.
pub fn tau_endomorphisms(t: &DenseTensor) -> Vec<SkewEndomorphism> {
    let n = t.dim();
    (0..n)
        .map(|i| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            for j in 0..n {
                for k in 0..n {
                    let v = t.get(&[i, j, k]);
                    m[(k, j)] -= v;
                    m[(n + k, n + j)] -= v;
                }
            }
            SkewEndomorphism::from_matrix_unchecked(m)
        })
        .collect()
}

/// Pointwise data of the structure at one sphere point.
#[derive(Debug, Clone)]
pub struct Ts7Structure {
    pub params: TangentMetricParams,
    pub tau: DenseTensor,
    pub table: StructureTable,
    pub hermitian: HermitianStructure,
    pub data: CharacteristicData,
    /// Characteristic data of the tables built from `E_p(τ)`, one per frame vector.
    pub derivative_data: Vec<CharacteristicData>,
    pub curvature: CurvatureOperator,
}

impl Ts7Structure {
    /// `E_m(T̃)` for each frame direction.
    pub fn torsion_derivatives(&self) -> Vec<DenseTensor> {
        self.derivative_data.iter().map(|d| d.torsion.to_dense()).collect()
    }

    /// `∇T̃` with the direction slot first, including derivatives of the
    /// coefficient functions.
    pub fn nabla_torsion(&self) -> DenseTensor {
        covariant_derivative(&self.data.connection, &self.data.torsion.to_dense(), Some(&self.torsion_derivatives()))
    }
}

pub fn ts7_structure(rep: &CliffordRep, p: TangentMetricParams, x: &SpherePoint) -> Result<Ts7Structure> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let n = rep.n;
    let t = tau(rep, x).tau;
    let table = ts7_table(&t, p);
    let hermitian = HermitianStructure::standard(n);
    let data = characteristic(&table, &hermitian)?;
    // X_p moves x along a W_m = -a κ_m x, Y_p along -b κ_m x; all data are
    // linear in τ, so their derivatives come from the tables of E_p(τ).
    let dtau: Vec<DenseTensor> = (0..n).map(|m| tau_derivative(rep, x, m)).collect();
    let mut derivative_data = Vec::with_capacity(2 * n);
    for e in 0..2 * n {
        let coef = if e < n { p.a } else { p.b };
        let et = dtau[e % n].scale(-coef);
        derivative_data.push(characteristic(&ts7_table(&et, p), &hermitian)?);
    }
    let frame_derivatives: Vec<Vec<DMatrix<f64>>> = derivative_data
        .iter()
        .map(|d| (0..2 * n).map(|q| d.connection.matrix(q).clone()).collect())
        .collect();
    let extra = CurvatureCorrections { isotropy: None, frame_derivatives: Some(frame_derivatives) };
    let curvature = curvature_with(&data.connection, &table, &extra);
    Ok(Ts7Structure { params: p, tau: t, table, hermitian, data, derivative_data, curvature })
}

/// Closed-form torsion `(a + 2b²/a) τX_ijk - 2b τY_ijk + (b²/a) τ X_k Y_ij`.
pub fn expected_ts7_torsion(t: &DenseTensor, p: TangentMetricParams) -> DenseTensor {
    let (a, b) = (p.a, p.b);
    lifted_three_form(&StructureTable::from_dense(t), a + 2.0 * b * b / a, -2.0 * b, b * b / a, 0.0)
}

pub fn expected_ts7_nijenhuis(t: &DenseTensor, p: TangentMetricParams) -> DenseTensor {
    let (a, b) = (p.a, p.b);
    let q = a - b * b / a;
    lifted_three_form(&StructureTable::from_dense(t), q, -2.0 * b, -q, 2.0 * b)
}

pub fn expected_ts7_twisted(t: &DenseTensor, p: TangentMetricParams) -> DenseTensor {
    let (a, b) = (p.a, p.b);
    lifted_three_form(&StructureTable::from_dense(t), 3.0 * b * b / a, 0.0, a, -2.0 * b)
}

fn echo(p: TangentMetricParams, x: &SpherePoint) -> InputEcho {
    let mut params: std::collections::BTreeMap<String, Num> =
        [("a".to_string(), Num(p.a)), ("b".to_string(), Num(p.b))].into_iter().collect();
    for (i, v) in x.vector().iter().enumerate() {
        params.insert(format!("x{}", i + 1), Num(*v));
    }
    InputEcho { algebra: Some("s7xr7".into()), params, samples: None, seed: None }
}

/// Verification of the structure at one point.
///
/// The curvature fit against `4b²/a²(a²+b²) Σ H_k⊗H_k` and the total
/// antisymmetry of `∇T̃` are reported as gating checks.
pub fn ts7_pipeline(rep: &CliffordRep, p: TangentMetricParams, x: &SpherePoint, tol: &Tolerance) -> Result<VerificationReport> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let mut rep_out = VerificationReport::new("s7", echo(p, x));
    let (a, b) = (p.a, p.b);
    let scale = 1f64.max(a.abs()).max(b.abs()).max(b * b / a.abs());

    let rel = clifford::relation_defect(&rep.kappa) as f64;
    rep_out.check("clifford_relations", &[rel], Some(0.0), rel, 0.0);
    let (gram, normal) = frame_orthonormality(rep, x);
    rep_out.check("frame_orthonormality", &[gram, normal], Some(0.0), gram.max(normal), tol.scaled(1e-12));
    let br = bracket_identity_check(rep, x);
    rep_out.check("bracket_identity", &[br.residual, br.normal_component], Some(0.0), br.residual, tol.scaled(1e-10));
    rep_out.observe("lie_bracket_sign", &[br.lie_bracket_sign], Some("[κ_i x, κ_j x] = s·2κ_iκ_j x as linear vector fields"));

    let s = ts7_structure(rep, p, x)?;
    let t = &s.tau;
    let tau_skew = t.antisymmetry_residual();
    rep_out.check("tau_antisymmetry", &[tau_skew], Some(0.0), tau_skew, tol.scaled(1e-12));
    rep_out.check(
        "nijenhuis_skew",
        &[s.data.nijenhuis.skew_residual],
        Some(0.0),
        s.data.nijenhuis.skew_residual,
        tol.scaled(1e-9) * scale,
    );
    let ndev = s.data.nijenhuis.form.to_dense().max_diff(&expected_ts7_nijenhuis(t, p));
    rep_out.check("nijenhuis_closed_form", &[ndev], Some(0.0), ndev, tol.scaled(1e-10) * scale);
    let ddev = s.data.d_j_omega.to_dense().max_diff(&expected_ts7_twisted(t, p));
    rep_out.check("twisted_closed_form", &[ddev], Some(0.0), ddev, tol.scaled(1e-10) * scale);
    let tdev = s.data.torsion.to_dense().max_diff(&expected_ts7_torsion(t, p));
    rep_out.check("torsion_closed_form", &[tdev], Some(0.0), tdev, tol.scaled(1e-10) * scale);

    let n = rep.n;
    let hs = tau_endomorphisms(t);
    let mut ldev: f64 = 0.0;
    for i in 0..n {
        ldev = ldev.max((s.data.connection.matrix(i) - hs[i].matrix() * (-b * b / a)).amax());
        ldev = ldev.max((s.data.connection.matrix(n + i) - hs[i].matrix() * b).amax());
    }
    rep_out.check("connection_closed_form", &[-b * b / a, b], None, ldev, tol.scaled(1e-10) * scale);
    let nabla_omega =
        covariant_derivative(&s.data.connection, &s.hermitian.omega.to_dense(), None).max_abs();
    rep_out.check("nabla_omega", &[nabla_omega], Some(0.0), nabla_omega, tol.scaled(1e-9) * scale);

    let nt = s.nabla_torsion();
    let nt_norm = nt.max_abs();
    let nt_skew = nt.antisymmetry_residual();
    rep_out.check("nabla_torsion_antisymmetry", &[nt_skew, nt_norm], Some(0.0), nt_skew, tol.scaled(1e-8) * scale * scale);
    rep_out.observe("nabla_torsion_norm", &[nt_norm], Some("max |∇T̃| including coefficient derivatives"));

    let kappa = 4.0 * b * b / (a * a) * (a * a + b * b);
    let fit = s.curvature.fit(&hs);
    let r_scale = 1f64.max(kappa.abs());
    rep_out.check_rel("curvature_scalar", fit.coefficient, kappa, 1e-8 * tol.abs_tol / 1e-9, tol.scaled(1e-10));
    rep_out.check("curvature_fit_residual", &[fit.residual], Some(0.0), fit.residual, tol.scaled(1e-8) * r_scale);
    let sym = s.curvature.pair_symmetry_residual();
    rep_out.observe("curvature_pair_symmetry", &[sym], None);
    rep_out.observe("curvature_max", &[s.curvature.max_abs()], None);
    if b == 0.0 {
        let m = s.curvature.max_abs();
        rep_out.check("flat_curvature", &[m], Some(0.0), m, tol.scaled(1e-10) * scale);
    }

    let hol = close_span(hs.iter().map(|h| h.matrix().clone()).collect(), &[])?;
    rep_out.check_eq("holonomy_dim", hol.dim, 21);
    let closure = hol.closure_residual();
    rep_out.check("holonomy_closure", &[closure], Some(0.0), closure, tol.scaled(1e-8));
    let curv_hol = lie::holonomy_from(&s.data.connection, &s.curvature).map(|h| h.dim as f64).unwrap_or(f64::NAN);
    rep_out.observe("curvature_span_dim", &[curv_hol], Some("span of curvature endomorphisms closed under Λ and brackets"));
    Ok(rep_out)
}
