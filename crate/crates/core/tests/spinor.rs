use nalgebra::DMatrix;
use natred::clifford::build_clifford;
use natred::lie::StructureTable;
use natred::presets::{direct_sum, preset};
use natred::spinor::*;
use natred::tangent::{AnsatzParams, TangentMetricParams};
use natred::Tolerance;

fn p(a: f64, b: f64) -> TangentMetricParams {
    TangentMetricParams::new(a, b).unwrap()
}

#[test]
fn abelian_lift_vanishes() {
    let rep = build_clifford(6).unwrap();
    let lifts = spinor_connection_dim6(&StructureTable::zeros(6), &rep).unwrap();
    assert!(lifts.iter().all(|m| m.amax() == 0.0));
}

#[test]
fn biinvariant_lift_is_quarter_structure_constants() {
    let rep = build_clifford(6).unwrap();
    let k = rep.float();
    let c = direct_sum(&preset("su2").unwrap(), &preset("abelian3").unwrap()).table;
    let lifts = spinor_connection_dim6(&c, &rep).unwrap();
    for m in 0..6 {
        let mut expect = DMatrix::zeros(8, 8);
        for i in 0..6 {
            for j in i + 1..6 {
                expect += &k[i] * &k[j] * (0.25 * c.get(m, i, j));
            }
        }
        assert!((&lifts[m] - expect).amax() <= 1e-14);
    }
    assert!(spin_lift_defect(&c, &rep, &lifts) <= 1e-14);
}

#[test]
fn lift_is_compatible_with_clifford_multiplication() {
    let rep = build_clifford(6).unwrap();
    for (a, b) in [(1.0, 1.0), (2.0, -0.5), (0.4, 3.0)] {
        let c = interleaved_table(p(a, b)).unwrap();
        let lifts = spinor_connection_dim6(&c, &rep).unwrap();
        assert!(spin_lift_defect(&c, &rep, &lifts) <= 1e-12);
    }
}

#[test]
fn wrong_dimension_rejected() {
    let rep = build_clifford(7).unwrap();
    assert!(spinor_connection_dim6(&StructureTable::zeros(6), &rep).is_err());
}

#[test]
fn example_values_at_unit_metric() {
    let r = spinor_check(p(1.0, 1.0), DEFAULT_SEED, DEFAULT_STARTS).unwrap();
    assert_eq!(r.ansatz, AnsatzParams { alpha: 3.0, alpha_prime: 2.0, beta: 1.0 });
    assert!(r.spinor_residual <= 1e-8);
    assert!(r.eta.iter().all(|v| v.abs() <= 1e-8));
    assert!(r.id_coefficient.abs() <= 1e-6);
    assert!((r.j_coefficient + 0.25).abs() <= 1e-6);
    for d in &r.anti_diagonal {
        assert!((d.abs() - 0.5).abs() <= 1e-6);
    }
    for o in &r.anti_offdiagonal {
        assert!((o.abs() - 0.25).abs() <= 1e-6);
    }
    assert!(r.dirac_phi.abs() <= 1e-6);
    assert!((r.dirac_phi_tilde - 1.5).abs() <= 1e-6);
    assert!(r.dirac_residual <= 1e-6);
    // φ̃ is the volume image of φ, up to orientation
    assert!((r.phi_tilde_orientation.abs() - 1.0).abs() <= 1e-9);
    assert!(r.s_asymmetry > 0.1);
}

#[test]
fn solution_lies_in_independent_kernel() {
    let r = spinor_check(p(2.0, 0.7), 99, 16).unwrap();
    assert!(r.kernel_distance <= 1e-8);
    assert!(r.form_residual <= 1e-8);
    assert!(r.accepted_starts > 0);
}

#[test]
fn flat_case_dirac_eigenvalue() {
    let r = spinor_check(p(1.6, 0.0), DEFAULT_SEED, DEFAULT_STARTS).unwrap();
    assert!((r.dirac_phi - 0.75 * 1.6).abs() <= 1e-9);
    assert!(r.dirac_phi_tilde <= 1e-9);
    assert!(r.s_asymmetry <= 1e-9);
}

#[test]
fn symmetry_of_s_tracks_alpha_prime() {
    let tol = Tolerance::default();
    for b in [0.0, 1.0, -1.0] {
        let rep = spinor_pipeline(p(1.0, b), DEFAULT_SEED, &tol).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
        let sym = rep.check_named("s_symmetric_iff_flat").unwrap();
        assert_eq!(sym.values[0].0 <= 1e-8, b == 0.0);
    }
}

#[test]
fn pipeline_passes_on_grid() {
    let tol = Tolerance::default();
    for (a, b) in [(2.0, 1.0), (0.5, -2.0), (-1.0, 0.3)] {
        let rep = spinor_pipeline(p(a, b), 7, &tol).unwrap();
        assert!(rep.pass, "{}", rep.to_text());
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let a = spinor_check(p(1.3, 0.4), 5, 32).unwrap();
    let b = spinor_check(p(1.3, 0.4), 5, 32).unwrap();
    assert_eq!(a.phi, b.phi);
}
