//! Spinorial description of the six-dimensional tangent-group structure.
//!
//! Works in the interleaved frame `e_1..e_6 = x_1, y_1, x_2, y_2, x_3, y_3`
//! of `TSU(2)` with the generators `κ_1..κ_6`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clifford::{build_clifford, CliffordRep};
use crate::error::{Error, Result};
use crate::lie::{levi_civita, StructureTable};
use crate::linalg;
use crate::presets::preset;
use crate::report::{InputEcho, Num, VerificationReport};
use crate::tangent::{tangent_brackets, AnsatzParams, TangentMetricParams, INTERLEAVED_SU2};
use crate::tol::Tolerance;

/// Spin lift of the Levi-Civita connection:
/// `A_m = ½ Σ_{i<j} g(∇_{e_m} e_i, e_j) κ_iκ_j`.
///
/// With this normalization `[A_m, κ_j] = Σ_k g(∇_{e_m} e_j, e_k) κ_k`.
pub fn spinor_connection_dim6(c: &StructureTable, rep: &CliffordRep) -> Result<Vec<DMatrix<f64>>> {
    let n = c.dim();
    if rep.n != n {
        return Err(Error::DimensionMismatch { expected: rep.n, got: n });
    }
    let lc = levi_civita(c);
    let k = rep.float();
    Ok((0..n)
        .map(|m| {
            let mut a = DMatrix::zeros(8, 8);
            for i in 0..n {
                for j in i + 1..n {
                    let g = lc.matrix(m)[(j, i)];
                    if g != 0.0 {
                        a += &k[i] * &k[j] * (0.5 * g);
                    }
                }
            }
            a
        })
        .collect())
}

/// `max |[A_m, κ_j] - Σ_k Γ_mjk κ_k|`.
pub fn spin_lift_defect(c: &StructureTable, rep: &CliffordRep, lifts: &[DMatrix<f64>]) -> f64 {
    let lc = levi_civita(c);
    let k = rep.float();
    let n = c.dim();
    let mut worst: f64 = 0.0;
    for m in 0..n {
        for j in 0..n {
            let lhs = &lifts[m] * &k[j] - &k[j] * &lifts[m];
            let mut rhs = DMatrix::zeros(8, 8);
            for kk in 0..n {
                rhs += &k[kk] * lc.matrix(m)[(kk, j)];
            }
            worst = worst.max((lhs - rhs).amax());
        }
    }
    worst
}

/// Interleaved-frame table of `TSU(2)` with the metric `g_{a,b}`.
pub fn interleaved_table(p: TangentMetricParams) -> Result<StructureTable> {
    Ok(tangent_brackets(&preset("su2")?, p)?.permuted(&INTERLEAVED_SU2))
}

/// Fundamental form `Ω = -(e12 + e34 + e56)` as a dense matrix `Ω_ij`.
pub fn interleaved_omega() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    for p in 0..3 {
        m[(2 * p, 2 * p + 1)] = -1.0;
        m[(2 * p + 1, 2 * p)] = 1.0;
    }
    m
}

struct Problem {
    lifts: Vec<DMatrix<f64>>,
    pairs: Vec<(DMatrix<f64>, f64)>,
    vol: DMatrix<f64>,
}

impl Problem {
    fn new(lifts: Vec<DMatrix<f64>>, rep: &CliffordRep) -> Self {
        let k = rep.float();
        let omega = interleaved_omega();
        let mut pairs = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                pairs.push((&k[i] * &k[j], omega[(i, j)]));
            }
        }
        let vol = rep.volume().map(|v| v as f64);
        Problem { lifts, pairs, vol }
    }

    /// Quadratic forms `φ ↦ ⟨M φ, vol φ⟩ - c` with their symmetric matrices.
    fn forms(&self) -> Vec<(DMatrix<f64>, f64)> {
        let sym = |m: &DMatrix<f64>| {
            let q = self.vol.transpose() * m;
            (&q + q.transpose()) * 0.5
        };
        self.lifts.iter().map(|a| (sym(a), 0.0)).chain(self.pairs.iter().map(|(m, c)| (sym(m), *c))).collect()
    }
}

fn residual(forms: &[(DMatrix<f64>, f64)], phi: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(forms.len(), forms.iter().map(|(q, c)| phi.dot(&(q * phi)) - c))
}

/// Damped Gauss–Newton on the unit sphere from one start.
fn descend(forms: &[(DMatrix<f64>, f64)], start: DVector<f64>) -> (f64, DVector<f64>) {
    let mut phi = start.normalize();
    let mut mu = 1e-3;
    let mut r = residual(forms, &phi);
    let mut cost = r.norm_squared();
    for _ in 0..400 {
        if cost < 1e-30 {
            break;
        }
        let jac = DMatrix::from_fn(forms.len(), 8, |row, col| 2.0 * (&forms[row].0 * &phi)[col]);
        let proj = DMatrix::identity(8, 8) - &phi * phi.transpose();
        let jt = &jac * &proj;
        let lhs = jt.transpose() * &jt + DMatrix::identity(8, 8) * mu;
        let Some(step) = lhs.cholesky().map(|c| c.solve(&(-(jt.transpose() * &r)))) else {
            mu *= 10.0;
            continue;
        };
        let trial = (&phi + &proj * step).normalize();
        let tr = residual(forms, &trial);
        let tc = tr.norm_squared();
        if tc < cost {
            phi = trial;
            r = tr;
            cost = tc;
            mu = (mu * 0.3).max(1e-15);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                break;
            }
        }
    }
    (cost, phi)
}

/// Outcome of the spinor search and the recovered data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinorRecord {
    pub params: TangentMetricParams,
    pub ansatz: AnsatzParams,
    pub phi: Vec<f64>,
    /// `Σ_m ⟨A_m φ, vol·φ⟩²`: component of `∇ᵍφ` outside `span{φ, e_k·φ}`.
    pub spinor_residual: f64,
    /// Max deviation of `⟨κ_iκ_jφ, vol·φ⟩` from the fundamental form.
    pub form_residual: f64,
    pub starts: usize,
    pub accepted_starts: usize,
    /// Max distance of the solution from `ker(Ω·² + 9)`.
    pub kernel_distance: f64,
    pub eta: Vec<f64>,
    /// `S[k][m] = ⟨A_m φ, κ_k φ⟩`, row-major.
    pub s: Vec<f64>,
    pub lsq_residual: f64,
    pub id_coefficient: f64,
    pub j_coefficient: f64,
    /// Diagonal of the `J`-anticommuting part.
    pub anti_diagonal: Vec<f64>,
    /// Entries `(2p, 2p+1)` of the `J`-anticommuting part.
    pub anti_offdiagonal: Vec<f64>,
    /// Entries of the anticommuting part outside the 2×2 diagonal blocks.
    pub anti_outside_blocks: f64,
    pub commuting_rest: f64,
    pub s_asymmetry: f64,
    /// Coefficient of `φ` in `Dφ`.
    pub dirac_phi: f64,
    /// Norm of the part of `Dφ` orthogonal to `φ`; `φ̃` is that part normalized.
    pub dirac_phi_tilde: f64,
    /// `⟨φ̃, vol·φ⟩`, `±1` when `φ̃` is the volume image of `φ`.
    pub phi_tilde_orientation: f64,
    /// Norm of the part of `Dφ` outside `span{φ, vol·φ}`.
    pub dirac_residual: f64,
}

/// Spinor search and recovery of `η`, `S` and the Dirac expansion.
pub fn spinor_check(p: TangentMetricParams, seed: u64, starts: usize) -> Result<SpinorRecord> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let rep = build_clifford(6)?;
    let k = rep.float();
    let c = interleaved_table(p)?;
    let lifts = spinor_connection_dim6(&c, &rep)?;
    let problem = Problem::new(lifts.clone(), &rep);
    let forms = problem.forms();
    let vol = problem.vol.clone();

    let results: Vec<(f64, DVector<f64>)> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let v: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
            descend(&forms, DVector::from_vec(v))
        })
        .collect();
    let accepted_starts = results.iter().filter(|(c, _)| *c <= 1e-16).count();
    let (_, best) = results
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::Config("at least one start is required".into()))?;

    // Fix the phase on the circle cos t·φ + sin t·vol·φ so that
    // ⟨κ_1κ_3κ_5 ψ, ψ⟩ is minimal.
    let k135 = &k[0] * &k[2] * &k[4];
    let vphi = &vol * &best;
    let q = |u: &DVector<f64>, v: &DVector<f64>| u.dot(&(&k135 * v));
    let (cc, ss, cs) = (q(&best, &best), q(&vphi, &vphi), q(&best, &vphi) + q(&vphi, &best));
    // f(t) = cc cos² + ss sin² + cs sin cos = m + A cos 2t + B sin 2t
    let (amp_c, amp_s) = ((cc - ss) / 2.0, cs / 2.0);
    let t = 0.5 * (-amp_s).atan2(-amp_c);
    let phi = (&best * t.cos() + &vphi * t.sin()).normalize();
    let vphi = &vol * &phi;

    let spinor_residual: f64 = lifts.iter().map(|a| (a * &phi).dot(&vphi).powi(2)).sum();
    let mut form_residual: f64 = 0.0;
    let omega = interleaved_omega();
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                let v = (&k[i] * &k[j] * &phi).dot(&vphi);
                form_residual = form_residual.max((v - omega[(i, j)]).abs());
            }
        }
    }

    // Independent characterization: φ spans, with vol·φ, the eigenspace of
    // Ω· = -(κ_1κ_2 + κ_3κ_4 + κ_5κ_6) for the eigenvalue with square -9.
    let omega_dot = -(&k[0] * &k[1] + &k[2] * &k[3] + &k[4] * &k[5]);
    let ker = linalg::kernel(&(&omega_dot * &omega_dot + DMatrix::identity(8, 8) * 9.0));
    let kernel_distance = if ker.ncols() == 2 {
        linalg::projection_residual(&ker, &phi).max(linalg::projection_residual(&ker, &vphi))
    } else {
        f64::INFINITY
    };

    // ∇ᵍ_m φ = η_m φ + Σ_k S_km κ_k φ + (component along vol·φ)
    let basis: Vec<DVector<f64>> = k.iter().map(|km| km * &phi).collect();
    let eta: Vec<f64> = lifts.iter().map(|a| (a * &phi).dot(&phi)).collect();
    let s_mat = DMatrix::from_fn(6, 6, |kk, m| (&lifts[m] * &phi).dot(&basis[kk]));
    let mut lsq_residual: f64 = 0.0;
    for m in 0..6 {
        let mut recon = &phi * eta[m];
        for kk in 0..6 {
            recon += &basis[kk] * s_mat[(kk, m)];
        }
        lsq_residual = lsq_residual.max((&lifts[m] * &phi - recon).norm());
    }

    // J of the fundamental form in the convention Ω(X, Y) = g(JX, Y).
    let j = -omega.clone();
    let id_coefficient = s_mat.trace() / 6.0;
    let j_coefficient = -(&j * &s_mat).trace() / 6.0;
    let anti = (&s_mat + &j * &s_mat * &j) * 0.5;
    let commuting = (&s_mat - &j * &s_mat * &j) * 0.5;
    let commuting_rest = (commuting - DMatrix::identity(6, 6) * id_coefficient - &j * j_coefficient).amax();
    let anti_diagonal: Vec<f64> = (0..6).map(|i| anti[(i, i)]).collect();
    let anti_offdiagonal: Vec<f64> = (0..3).map(|b| anti[(2 * b, 2 * b + 1)]).collect();
    let mut anti_outside_blocks: f64 = 0.0;
    for r in 0..6 {
        for cidx in 0..6 {
            if r / 2 != cidx / 2 {
                anti_outside_blocks = anti_outside_blocks.max(anti[(r, cidx)].abs());
            }
        }
    }
    let s_asymmetry = (&s_mat - s_mat.transpose()).amax();

    // Dφ = Σ_m κ_m ∇_m φ, expanded on φ and vol·φ.
    let mut dirac = DVector::zeros(8);
    for m in 0..6 {
        dirac += &k[m] * (&lifts[m] * &phi);
    }
    let dirac_phi = dirac.dot(&phi);
    let orth = &dirac - &phi * dirac_phi;
    let dirac_phi_tilde = orth.norm();
    let phi_tilde_orientation = if dirac_phi_tilde > 1e-12 { orth.dot(&vphi) / dirac_phi_tilde } else { 0.0 };
    let dirac_residual = (&orth - &vphi * orth.dot(&vphi)).norm();

    Ok(SpinorRecord {
        params: p,
        ansatz: AnsatzParams::from_metric(p),
        phi: phi.iter().copied().collect(),
        spinor_residual,
        form_residual,
        starts,
        accepted_starts,
        kernel_distance,
        eta,
        s: s_mat.transpose().iter().copied().collect(),
        lsq_residual,
        id_coefficient,
        j_coefficient,
        anti_diagonal,
        anti_offdiagonal,
        anti_outside_blocks,
        commuting_rest,
        s_asymmetry,
        dirac_phi,
        dirac_phi_tilde,
        phi_tilde_orientation,
        dirac_residual,
    })
}

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2101;
pub const DEFAULT_STARTS: usize = 64;

/// Report for the spinorial description at one metric.
pub fn spinor_pipeline(p: TangentMetricParams, seed: u64, tol: &Tolerance) -> Result<VerificationReport> {
    let p = TangentMetricParams::new(p.a, p.b)?;
    let r = spinor_check(p, seed, DEFAULT_STARTS)?;
    let AnsatzParams { alpha, alpha_prime, beta } = r.ansatz;
    let params = [("a".to_string(), Num(p.a)), ("b".to_string(), Num(p.b))].into_iter().collect();
    let echo = InputEcho { algebra: Some("su2".into()), params, samples: Some(DEFAULT_STARTS), seed: Some(seed) };
    let mut rep = VerificationReport::new("spinor", echo);
    let fine = tol.scaled(1e-8);
    let coarse = tol.scaled(1e-6);

    let rep6 = build_clifford(6)?;
    let lifts = spinor_connection_dim6(&interleaved_table(p)?, &rep6)?;
    let lift = spin_lift_defect(&interleaved_table(p)?, &rep6, &lifts);
    rep.check("spin_lift_compatibility", &[lift], Some(0.0), lift, fine);
    rep.check("spinor_residual", &[r.spinor_residual], Some(0.0), r.spinor_residual, fine);
    rep.check("fundamental_form", &[r.form_residual], Some(0.0), r.form_residual, fine);
    rep.check("kernel_oracle", &[r.kernel_distance], Some(0.0), r.kernel_distance, fine);
    rep.observe("accepted_starts", &[r.accepted_starts as f64, r.starts as f64], None);
    let eta = r.eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    rep.check("eta", &r.eta, Some(0.0), eta, fine);
    rep.check("s_recovery", &[r.lsq_residual], Some(0.0), r.lsq_residual, fine);

    let jc = -alpha_prime / 8.0;
    rep.check("s_j_coefficient", &[r.j_coefficient], Some(jc), (r.j_coefficient - jc).abs(), coarse);
    let ic = (3.0 * beta - alpha) / 8.0;
    rep.check("s_identity_coefficient", &[r.id_coefficient], Some(ic), (r.id_coefficient - ic).abs(), coarse);
    let dc = (beta + alpha).abs() / 8.0;
    let mut block: f64 = r.anti_outside_blocks.max(r.commuting_rest);
    for pair in r.anti_diagonal.chunks(2) {
        // opposite signs within each 2×2 block
        block = block.max((pair[0] + pair[1]).abs()).max((pair[0].abs() - dc).abs());
    }
    let oc = alpha_prime.abs() / 8.0;
    for o in &r.anti_offdiagonal {
        block = block.max((o.abs() - oc).abs());
    }
    rep.check("s_anticommuting_block", &[dc, oc], None, block, coarse);

    let d1 = 3.0 * (alpha - 3.0 * beta) / 4.0;
    let d2 = 3.0 * alpha_prime.abs() / 4.0;
    let dirac = (r.dirac_phi - d1).abs().max((r.dirac_phi_tilde - d2).abs()).max(r.dirac_residual);
    rep.check("dirac_expansion", &[r.dirac_phi, r.dirac_phi_tilde], None, dirac, coarse);
    rep.observe(
        "phi_tilde_orientation",
        &[r.phi_tilde_orientation],
        Some("⟨φ̃, vol·φ⟩ with φ̃ the normalized part of Dφ orthogonal to φ"),
    );

    let symmetric = r.s_asymmetry <= fine;
    let flat = alpha_prime.abs() <= fine;
    rep.check("s_symmetric_iff_flat", &[r.s_asymmetry, alpha_prime], None, if symmetric == flat { 0.0 } else { 1.0 }, 0.0);
    Ok(rep)
}
