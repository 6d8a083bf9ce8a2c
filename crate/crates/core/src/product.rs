//! The five-parameter family on `G × G` realized as `(G×G×G)/ΔG`.
//!
//! Ambient algebra `g⊕g⊕g`, isotropy `h_i = (e_i,e_i,e_i)`, complement
//! spanned by `x_i = (e_i, a e_i, b e_i)` and `y_i = λ(e_i, c e_i, d e_i)`.
//! The frame `(x_1..x_n, y_1..y_n)` is orthonormal for the metric
//! `B(X₁,X₂) + λ⁻² B(Y₁,Y₂)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{KForm, SkewEndomorphism};
use crate::lie::{
    self, characteristic, covariant_derivative, curvature_with, holonomy_from, transvection_jacobi_residual,
    CharacteristicData, CurvatureCorrections, CurvatureOperator, HermitianStructure, StructureTable,
};
use crate::linalg;
use crate::presets::AlgebraSpec;
use crate::report::{InputEcho, Num, VerificationReport};
use crate::tangent::{h_endomorphisms, lifted_three_form};
use crate::tensor::DenseTensor;
use crate::tol::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
}

impl ProductParams {
    /// Rejects non-positive `λ` and a vanishing determinant `Δ`.
    pub fn new(a: f64, b: f64, c: f64, d: f64, lambda: f64) -> Result<Self> {
        let p = ProductParams { a, b, c, d, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.c, self.d, self.lambda].iter().all(|v| v.is_finite()) {
            return Err(Error::Degenerate("product parameters must be finite".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::Degenerate(format!("lambda must be positive (got {})", self.lambda)));
        }
        let delta = self.delta();
        if delta.abs() <= 1e-12 * self.scale().powi(2) {
            return Err(Error::Degenerate(format!(
                "(a-1)(d-1) - (b-1)(c-1) = {delta:e}: the complement is not transversal to the diagonal"
            )));
        }
        Ok(())
    }

    /// `Δ = (a-1)(d-1) - (b-1)(c-1)`.
    pub fn delta(&self) -> f64 {
        (self.a - 1.0) * (self.d - 1.0) - (self.b - 1.0) * (self.c - 1.0)
    }

    fn scale(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|v| (v - 1.0).abs()).fold(1.0, f64::max)
    }

    /// The loci `(c=1, b=1)` and `(a=1, d=1)`.
    pub fn is_listed_flat_locus(&self) -> bool {
        (self.c == 1.0 && self.b == 1.0) || (self.a == 1.0 && self.d == 1.0)
    }
}

/// The nine bracket coefficients with `Δ` and the curvature scalar `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma: f64,
    pub tau: f64,
    pub xi: f64,
    pub eta: f64,
    pub theta: f64,
    #[serde(rename = "Delta")]
    pub det: f64,
    #[serde(rename = "Sigma")]
    pub curvature: f64,
}

/// Ratio between the tabulated coefficients and the bracket components
/// obtained by projection in the orthonormal frame.
pub const TABULATED_TO_PROJECTED: f64 = -0.5;

impl CoefficientTable {
    /// Closed-form coefficients in their tabulated normalization.
    pub fn tabulated(p: &ProductParams) -> Result<Self> {
        p.validate()?;
        let ProductParams { a, b, c, d, lambda } = *p;
        let det = p.delta();
        let k = -2.0 / det;
        let mut t = CoefficientTable {
            alpha: k * ((a * a - 1.0) * (d - 1.0) - (b * b - 1.0) * (c - 1.0)),
            beta: k * (b - 1.0) * (a - 1.0) * (b - a),
            gamma: k * (a * (d - b * b) + a * a * (b - d) + (b * b - b) * c),
            delta: k * (c * (a * (d - 1.0) - b * d + 1.0) + (b - 1.0) * d),
            sigma: -k * ((a - 1.0) * (1.0 - b * d) + (a * c - 1.0) * (b - 1.0)),
            tau: -k * (a * c * (d - b) + c * b * (1.0 - d) + a * d * (b - 1.0)),
            xi: k * (c - 1.0) * (d - 1.0) * (c - d),
            eta: k * ((d * d - 1.0) * (a - 1.0) - (c * c - 1.0) * (b - 1.0)),
            theta: k * (d * d * (c - a) + c * c * (b - d) + (d * a - c * b)),
            det,
            curvature: 0.0,
        };
        t.curvature = t.sigma_formula(lambda);
        Ok(t)
    }

    /// Coefficients rescaled to the projected bracket normalization.
    pub fn projected(p: &ProductParams) -> Result<Self> {
        let t = Self::tabulated(p)?;
        Ok(t.rescaled(TABULATED_TO_PROJECTED, p.lambda))
    }

    fn rescaled(&self, f: f64, lambda: f64) -> Self {
        let mut t = CoefficientTable {
            alpha: f * self.alpha,
            beta: f * self.beta,
            gamma: f * self.gamma,
            delta: f * self.delta,
            sigma: f * self.sigma,
            tau: f * self.tau,
            xi: f * self.xi,
            eta: f * self.eta,
            theta: f * self.theta,
            det: self.det,
            curvature: 0.0,
        };
        t.curvature = t.sigma_formula(lambda);
        t
    }

    /// `β²/λ² + λ⁴ξ² - λ²ξ(2σ-α) - β(2δ-η)`.
    pub fn sigma_formula(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.beta * self.beta / l2 + l2 * l2 * self.xi * self.xi
            - l2 * self.xi * (2.0 * self.sigma - self.alpha)
            - self.beta * (2.0 * self.delta - self.eta)
    }

    /// `[p, q, r, s]` torsion coefficients for [`lifted_three_form`].
    pub fn torsion_pattern(&self, lambda: f64) -> [f64; 4] {
        let l2 = lambda * lambda;
        [
            -2.0 * l2 * self.xi + 2.0 * self.sigma - self.alpha,
            -2.0 * self.beta / lambda + lambda * (2.0 * self.delta - self.eta),
            -l2 * self.xi,
            -self.beta / lambda,
        ]
    }

    pub fn nijenhuis_pattern(&self, lambda: f64) -> [f64; 4] {
        let p = lambda * lambda * self.xi + 2.0 * self.sigma - self.alpha;
        let q = self.beta / lambda + lambda * (2.0 * self.delta - self.eta);
        [p, q, -p, -q]
    }

    pub fn twisted_pattern(&self, lambda: f64) -> [f64; 4] {
        [
            -3.0 * lambda * lambda * self.xi,
            -3.0 * self.beta / lambda,
            2.0 * self.sigma - self.alpha,
            lambda * (2.0 * self.delta - self.eta),
        ]
    }

    /// `(Λ(x_i), Λ(y_i))` as multiples of `H_i`.
    pub fn connection_coefficients(&self, lambda: f64) -> (f64, f64) {
        (-lambda * lambda * self.xi + self.sigma, -self.beta / lambda + lambda * self.delta)
    }

    /// Bracket components in the orthonormal frame as
    /// `[(x,x) → (x, y, h)], [(x,y) → ...], [(y,y) → ...]`.
    pub fn bracket_pattern(&self, lambda: f64) -> [[f64; 3]; 3] {
        let l = lambda;
        [
            [self.alpha, self.beta / l, self.gamma],
            [l * self.delta, self.sigma, l * self.tau],
            [l * l * self.xi, l * self.eta, l * l * self.theta],
        ]
    }
}

/// Ambient basis of `g⊕g⊕g` adapted to `m ⊕ h`.
#[derive(Debug, Clone)]
pub struct ReductiveDecomposition {
    pub n: usize,
    /// Columns: `x_1..x_n, y_1..y_n, h_1..h_n`.
    pub basis: DMatrix<f64>,
    pub rank: usize,
}

impl ReductiveDecomposition {
    pub fn assemble(n: usize, p: &ProductParams) -> Self {
        let mut basis = DMatrix::zeros(3 * n, 3 * n);
        let l = p.lambda;
        for i in 0..n {
            for (s, w) in [1.0, p.a, p.b].iter().enumerate() {
                basis[(s * n + i, i)] = *w;
            }
            for (s, w) in [1.0, p.c, p.d].iter().enumerate() {
                basis[(s * n + i, n + i)] = l * w;
            }
            for s in 0..3 {
                basis[(s * n + i, 2 * n + i)] = 1.0;
            }
        }
        let rank = linalg::rank(&basis);
        ReductiveDecomposition { n, basis, rank }
    }

    pub fn is_complement(&self) -> bool {
        self.rank == 3 * self.n
    }

    /// Coordinates of an ambient vector in the adapted basis.
    pub fn coordinates(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.basis
            .clone()
            .lu()
            .solve(v)
            .ok_or_else(|| Error::Degenerate("complement is not transversal to the diagonal".into()))
    }
}

fn ambient_bracket(g: &StructureTable, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = g.dim();
    let mut out = DVector::zeros(3 * n);
    for s in 0..3 {
        let us = u.rows(s * n, n).into_owned();
        let vs = v.rows(s * n, n).into_owned();
        out.rows_mut(s * n, n).copy_from(&g.bracket(&us, &vs));
    }
    out
}

/// Projected brackets on the complement.
#[derive(Debug, Clone)]
pub struct ProductBrackets {
    /// `m`-components of `[e_p, e_q]` in the frame `(x, y)`.
    pub table: StructureTable,
    /// `h`-components: `isotropy_part[p,q,a]`.
    pub isotropy_part: DenseTensor,
    /// Action of `h_a` on the frame space.
    pub isotropy_action: Vec<DMatrix<f64>>,
    /// Largest `h`-component of `[h_a, m]`.
    pub reductivity_residual: f64,
}

pub fn product_brackets(p: &ProductParams, g: &AlgebraSpec) -> Result<ProductBrackets> {
    p.validate()?;
    let n = g.dim();
    let dec = ReductiveDecomposition::assemble(n, p);
    if !dec.is_complement() {
        return Err(Error::Degenerate("adapted basis is rank deficient".into()));
    }
    let lu = dec.basis.clone().lu();
    let solve = |v: &DVector<f64>| lu.solve(v).ok_or_else(|| Error::Degenerate("singular adapted basis".into()));
    let col = |i: usize| dec.basis.column(i).into_owned();
    let m = 2 * n;
    let mut table = StructureTable::zeros(m);
    let mut iso = DenseTensor::zeros(m, 3);
    let mut iso_part = vec![0.0; m * m * n];
    for pi in 0..m {
        for qi in 0..m {
            let co = solve(&ambient_bracket(&g.table, &col(pi), &col(qi)))?;
            for k in 0..m {
                table.set(pi, qi, k, co[k]);
            }
            for a in 0..n {
                iso_part[(pi * m + qi) * n + a] = co[m + a];
            }
        }
    }
    // DenseTensor is cubic, so the h-components live in the first n slots of the third index.
    for pi in 0..m {
        for qi in 0..m {
            for a in 0..n {
                iso.set(&[pi, qi, a], iso_part[(pi * m + qi) * n + a]);
            }
        }
    }
    let mut action = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let mut mat = DMatrix::zeros(m, m);
        for q in 0..m {
            let co = solve(&ambient_bracket(&g.table, &col(m + a), &col(q)))?;
            for k in 0..m {
                mat[(k, q)] = co[k];
            }
            for b in 0..n {
                worst = worst.max(co[m + b].abs());
            }
        }
        action.push(mat);
    }
    Ok(ProductBrackets { table, isotropy_part: iso, isotropy_action: action, reductivity_residual: worst })
}

/// Rank and reductivity of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductiveRecord {
    pub rank: usize,
    pub full_rank: bool,
    pub reductivity_residual: f64,
}

pub fn reductive_check(p: &ProductParams, g: &AlgebraSpec) -> ReductiveRecord {
    let n = g.dim();
    let dec = ReductiveDecomposition::assemble(n, p);
    let reductivity_residual = if dec.is_complement() && p.lambda > 0.0 {
        product_brackets(p, g).map(|b| b.reductivity_residual).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    ReductiveRecord { rank: dec.rank, full_rank: dec.is_complement(), reductivity_residual }
}

/// Characteristic data of the homogeneous structure.
#[derive(Debug, Clone)]
pub struct ProductStructure {
    pub params: ProductParams,
    pub brackets: ProductBrackets,
    pub hermitian: HermitianStructure,
    pub data: CharacteristicData,
    pub curvature: CurvatureOperator,
}

pub fn product_structure(p: &ProductParams, g: &AlgebraSpec) -> Result<ProductStructure> {
    let brackets = product_brackets(p, g)?;
    let n = g.dim();
    let hermitian = HermitianStructure::standard(n);
    let data = characteristic(&brackets.table, &hermitian)?;
    let extra = CurvatureCorrections {
        isotropy: Some((brackets.isotropy_part.clone(), brackets.isotropy_action.clone())),
        frame_derivatives: None,
    };
    let curvature = curvature_with(&data.connection, &brackets.table, &extra);
    Ok(ProductStructure { params: *p, brackets, hermitian, data, curvature })
}

fn echo(g: &AlgebraSpec, p: &ProductParams) -> InputEcho {
    InputEcho {
        algebra: Some(g.name.clone()),
        params: [("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d), ("lambda", p.lambda)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), Num(v)))
            .collect(),
        samples: None,
        seed: None,
    }
}

fn pattern_form(g: &AlgebraSpec, pat: [f64; 4]) -> DenseTensor {
    lifted_three_form(&g.table, pat[0], pat[1], pat[2], pat[3])
}

/// Least-squares ratio `⟨u,v⟩/⟨v,v⟩` and the residual of `u - ratio·v`.
fn ratio(u: &[f64], v: &[f64]) -> (f64, f64) {
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv == 0.0 {
        return (f64::NAN, u.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let r = u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() / vv;
    let res = u.iter().zip(v).map(|(x, y)| (x - r * y).abs()).fold(0.0, f64::max);
    (r, res)
}

/// Projected bracket components against the tabulated coefficients, flattened.
fn bracket_comparison(g: &AlgebraSpec, s: &ProductStructure, tab: &CoefficientTable) -> (Vec<f64>, Vec<f64>) {
    let n = g.dim();
    let pat = tab.bracket_pattern(s.params.lambda);
    let mut got = Vec::new();
    let mut want = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = g.table.get(i, j, k);
                for (row, (pi, qi)) in [(i, j), (i, n + j), (n + i, n + j)].into_iter().enumerate() {
                    got.push(s.brackets.table.get(pi, qi, k));
                    want.push(pat[row][0] * c);
                    got.push(s.brackets.table.get(pi, qi, n + k));
                    want.push(pat[row][1] * c);
                    got.push(s.brackets.isotropy_part.get(&[pi, qi, k]));
                    want.push(pat[row][2] * c);
                }
            }
        }
    }
    (got, want)
}

/// Full verification of one member of the five-parameter family.
pub fn gxg_pipeline(p: &ProductParams, g: &AlgebraSpec, tol: &Tolerance) -> Result<VerificationReport> {
    p.validate()?;
    let n = g.dim();
    let s = product_structure(p, g)?;
    let lambda = p.lambda;
    let tab = CoefficientTable::tabulated(p)?;
    let proj = tab.rescaled(TABULATED_TO_PROJECTED, lambda);
    let mut rep = VerificationReport::new("gxg", echo(g, p));
    let scale = [proj.alpha, proj.beta, proj.gamma, proj.delta, proj.sigma, proj.tau, proj.xi, proj.eta, proj.theta]
        .iter()
        .map(|v| v.abs())
        .fold(1.0, f64::max)
        * lambda.max(1.0 / lambda).powi(2);

    let dec = ReductiveDecomposition::assemble(n, p);
    rep.check_eq("adapted_basis_rank", dec.rank, 3 * n);
    rep.check(
        "reductivity",
        &[s.brackets.reductivity_residual],
        Some(0.0),
        s.brackets.reductivity_residual,
        tol.scaled(1e-10) * scale,
    );
    let hs = h_endomorphisms(g);
    let iso_dev = hs
        .iter()
        .zip(&s.brackets.isotropy_action)
        .map(|(h, m)| (h.matrix() - m).amax())
        .fold(0.0, f64::max);
    rep.check("isotropy_action", &[iso_dev], Some(0.0), iso_dev, tol.scaled(1e-10));
    let diag = lie::validate_structure(&g.table, false, f64::INFINITY);
    let mut h_closure: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut want = DMatrix::zeros(2 * n, 2 * n);
            for k in 0..n {
                want += hs[k].matrix() * g.table.get(i, j, k);
            }
            h_closure = h_closure.max((hs[i].bracket(&hs[j]).matrix() - want).amax());
        }
    }
    rep.check("isotropy_brackets", &[h_closure, diag.jacobi], Some(0.0), h_closure, tol.scaled(1e-10));

    let (got, want) = bracket_comparison(g, &s, &tab);
    let (factor, factor_res) = ratio(&got, &want);
    if factor.is_finite() {
        rep.observe(
            "tabulated_bracket_factor",
            &[factor, factor_res],
            Some("projected components divided by the tabulated coefficients, and the residual of that single factor"),
        );
    }
    let (_, want_proj) = bracket_comparison(g, &s, &proj);
    let bdev = got.iter().zip(&want_proj).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    rep.check("bracket_components", &[bdev], Some(0.0), bdev, tol.scaled(1e-10) * scale);

    rep.check(
        "nijenhuis_skew",
        &[s.data.nijenhuis.skew_residual],
        Some(0.0),
        s.data.nijenhuis.skew_residual,
        tol.scaled(1e-9) * scale,
    );
    let t_scale = scale * lambda.max(1.0 / lambda);
    let ndev = s.data.nijenhuis.form.to_dense().max_diff(&pattern_form(g, proj.nijenhuis_pattern(lambda)));
    rep.check("nijenhuis_closed_form", &[ndev], Some(0.0), ndev, tol.scaled(1e-9) * t_scale);
    let ddev = s.data.d_j_omega.to_dense().max_diff(&pattern_form(g, proj.twisted_pattern(lambda)));
    rep.check("twisted_closed_form", &[ddev], Some(0.0), ddev, tol.scaled(1e-9) * t_scale);
    let tpat = proj.torsion_pattern(lambda);
    let tdev = s.data.torsion.to_dense().max_diff(&pattern_form(g, tpat));
    rep.check("torsion_closed_form", &tpat, None, tdev, tol.scaled(1e-9) * t_scale);

    let (lx, ly) = proj.connection_coefficients(lambda);
    let mut ldev: f64 = 0.0;
    for i in 0..n {
        ldev = ldev.max((s.data.connection.matrix(i) - hs[i].matrix() * lx).amax());
        ldev = ldev.max((s.data.connection.matrix(n + i) - hs[i].matrix() * ly).amax());
    }
    rep.check("connection_closed_form", &[lx, ly], None, ldev, tol.scaled(1e-9) * t_scale);

    let (_, lt) = lie::covariant_derivative_3form(&s.data.connection, &s.data.torsion);
    rep.check("nabla_torsion", &[lt], Some(0.0), lt, tol.scaled(1e-9) * t_scale);
    let lr = covariant_derivative(&s.data.connection, s.curvature.lowered(), None).max_abs();
    rep.check("nabla_curvature", &[lr], Some(0.0), lr, tol.scaled(1e-9) * t_scale * t_scale);
    let nabla_omega = covariant_derivative(&s.data.connection, &s.hermitian.omega.to_dense(), None).max_abs();
    rep.check("nabla_omega", &[nabla_omega], Some(0.0), nabla_omega, tol.scaled(1e-9) * t_scale);

    let fit = s.curvature.fit(&hs);
    let sigma = proj.curvature;
    let r_scale = 1f64.max(sigma.abs());
    rep.check("curvature_fit_residual", &[fit.residual], Some(0.0), fit.residual, tol.scaled(1e-9) * r_scale);
    if lie::derived_dim(&g.table) > 0 {
        rep.check_rel("curvature_scalar", fit.coefficient, sigma, 1e-9 * tol.abs_tol / 1e-9, tol.scaled(1e-10) * t_scale * t_scale);
    }
    rep.observe("tabulated_sigma", &[tab.curvature], Some("curvature scalar evaluated on the tabulated coefficients"));
    let sym = s.curvature.pair_symmetry_residual();
    rep.check("curvature_pair_symmetry", &[sym], Some(0.0), sym, tol.scaled(1e-9) * r_scale);

    let flat = sigma.abs() <= 1e-10 * t_scale * t_scale || lie::derived_dim(&g.table) == 0;
    if flat {
        let m = s.curvature.max_abs();
        rep.check("flat_curvature", &[m], Some(0.0), m, tol.scaled(1e-10) * t_scale * t_scale);
    }
    let hol = holonomy_from(&s.data.connection, &s.curvature)?;
    let expected_dim = if flat { 0 } else { lie::derived_dim(&g.table) };
    rep.check_eq("holonomy_dim", hol.dim, expected_dim);
    let closure = hol.closure_residual();
    rep.check("holonomy_closure", &[closure], Some(0.0), closure, tol.scaled(1e-8));

    let delta = lie::codifferential_omega(&s.hermitian.omega, &s.data.torsion, &s.data.connection)?.max_abs();
    rep.check("codifferential_omega", &[delta], Some(0.0), delta, tol.scaled(1e-9) * t_scale);

    let tj = transvection_jacobi_residual(&s.data.torsion, &s.curvature, &hol);
    rep.check("transvection_jacobi", &[tj], Some(0.0), tj, tol.scaled(1e-8) * t_scale.powi(3));
    let raw = lie::natural_reductivity_check(&s.brackets.table);
    rep.observe(
        "complement_skewness",
        &[raw],
        Some("max |<[X,Y]_m,Z> + <Y,[X,Z]_m>| for the chosen complement"),
    );
    rep.observe("curvature_coefficient", &[fit.coefficient], None);
    rep.observe("delta", &[tab.det], None);
    Ok(rep)
}

/// Torsion as a form, for callers that only want the 3-form.
pub fn product_torsion(p: &ProductParams, g: &AlgebraSpec) -> Result<KForm> {
    Ok(product_structure(p, g)?.data.torsion)
}

/// `H_i` restricted to the complement, as used by the curvature fit.
pub fn isotropy_endomorphisms(g: &AlgebraSpec) -> Vec<SkewEndomorphism> {
    h_endomorphisms(g)
}
