//! Metric Lie algebra machinery on orthonormal frames.

mod connection;
mod curvature;
mod holonomy;
mod table;

pub use connection::{
    characteristic_torsion, codifferential_omega, connection_with_torsion, covariant_derivative,
    covariant_derivative_3form, levi_civita, natural_reductivity_check, nijenhuis, torsion_identity_residual,
    torsion_kernel, twisted_derivative, ConnectionForms, HermitianStructure, NijenhuisResult, Subspace,
};
pub use curvature::{curvature, curvature_with, CurvatureCorrections, CurvatureFit, CurvatureOperator};
pub use holonomy::{close_span, holonomy, holonomy_from, transvection_jacobi_residual, HolonomyResult};
pub use table::{d_invariant, require_lie, validate_structure, StructureDiagnostics, StructureTable};

use crate::linalg;
use nalgebra::DMatrix;

/// Dimension of the derived algebra `[g, g]`.
pub fn derived_dim(c: &StructureTable) -> usize {
    let n = c.dim();
    let pairs = n * (n.saturating_sub(1)) / 2;
    let mut m = DMatrix::zeros(n, pairs.max(1));
    let mut col = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                m[(k, col)] = c.get(i, j, k);
            }
            col += 1;
        }
    }
    linalg::rank(&m)
}

/// Kernel of `X ↦ ad(X)`.
pub fn center(c: &StructureTable) -> Subspace {
    let n = c.dim();
    let m = DMatrix::from_fn(n * n, n, |row, i| c.get(i, row / n, row % n));
    Subspace { basis: linalg::kernel(&m) }
}

/// A frame triple where `ad` fails to be skew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiInvarianceWitness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub residual: f64,
}

/// Searches frame triples for `|⟨[X,Y],Z⟩ + ⟨Y,[X,Z]⟩| > tol` and returns
/// the worst one.
pub fn biinvariance_witness(c: &StructureTable, tol: f64) -> Option<BiInvarianceWitness> {
    let n = c.dim();
    let mut best: Option<BiInvarianceWitness> = None;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let r = (c.get(x, y, z) + c.get(x, z, y)).abs();
                if r > tol && best.is_none_or(|b| r > b.residual) {
                    best = Some(BiInvarianceWitness { x, y, z, residual: r });
                }
            }
        }
    }
    best
}

use crate::error::Result;
use crate::forms::KForm;

/// Output of the characteristic-connection construction for an almost
/// Hermitian structure on a frame with bracket table `table`.
#[derive(Debug, Clone)]
pub struct CharacteristicData {
    pub nijenhuis: NijenhuisResult,
    pub d_j_omega: KForm,
    pub torsion: KForm,
    pub levi_civita: ConnectionForms,
    pub connection: ConnectionForms,
}

/// `T = N + dᴶΩ` and `∇ = ∇ᵍ + ½T`.
pub fn characteristic(table: &StructureTable, hermitian: &HermitianStructure) -> Result<CharacteristicData> {
    let nijenhuis = nijenhuis(&hermitian.j, table);
    let d_j_omega = twisted_derivative(&hermitian.omega, &hermitian.j, table)?;
    let torsion = characteristic_torsion(&nijenhuis.form, &d_j_omega)?;
    let levi_civita = levi_civita(table);
    let connection = connection_with_torsion(&levi_civita, &torsion)?;
    Ok(CharacteristicData { nijenhuis, d_j_omega, torsion, levi_civita, connection })
}
