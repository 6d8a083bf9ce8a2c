use nalgebra::DMatrix;
use natred::forms::{two_form_to_endo, KForm};
use natred::lie::*;
use natred::presets::{levi_civita_symbol, preset, so_n};
use num_rational::Rational64;
use proptest::prelude::*;

fn su2() -> StructureTable {
    levi_civita_symbol()
}

#[test]
fn validation_examples() {
    let d = validate_structure(&su2(), true, 1e-12);
    assert_eq!((d.jacobi, d.antisymmetry, d.total_skew), (0.0, 0.0, Some(0.0)));
    assert!(d.pass);
    let d = validate_structure(&StructureTable::<f64>::zeros(4), true, 1e-12);
    assert!(d.pass);

    let mut c = su2();
    c.set(0, 1, 2, 1.1);
    c.set(1, 0, 2, -1.1);
    let d = validate_structure(&c, true, 1e-12);
    assert!(d.jacobi <= 1e-15);
    assert_eq!(d.antisymmetry, 0.0);
    assert!((d.total_skew.unwrap() - 0.1).abs() <= 1e-12);
    assert!(!d.pass);
    assert!(validate_structure(&c, false, 1e-12).pass);
}

#[test]
fn jacobi_failure_is_rejected() {
    // [e1,e2] = e3, [e1,e3] = e1 violates Jacobi
    let mut c = StructureTable::zeros(3);
    c.set_bracket(0, 1, 2, 1.0);
    c.set_bracket(0, 2, 0, 1.0);
    let d = validate_structure(&c, false, 1e-12);
    assert!(d.jacobi > 0.5);
    assert!(require_lie(&c, 1e-12).is_err());
}

#[test]
fn levi_civita_examples() {
    let lc = levi_civita(&StructureTable::zeros(5));
    assert_eq!(lc.max_diff(&ConnectionForms::zero(5)), 0.0);
    for name in ["su2", "su3", "so4"] {
        let c = preset(name).unwrap().table;
        let lc = levi_civita(&c);
        for i in 0..c.dim() {
            assert!((lc.matrix(i) - c.ad(i) * 0.5).amax() <= 1e-14);
        }
    }
}

#[test]
fn d_of_one_form_on_su2() {
    let d = d_invariant(&KForm::basis(3, &[0]).unwrap(), &su2()).unwrap();
    assert_eq!(d, KForm::basis(3, &[1, 2]).unwrap().scale(-1.0));

    let exact = su2().map(|v| Rational64::from_integer(v as i64));
    let one = KForm::<Rational64>::basis(3, &[0]).unwrap();
    let d = d_invariant(&one, &exact).unwrap();
    assert_eq!(d.eval(&[1, 2]), Rational64::from_integer(-1));
}

#[test]
fn d_on_abelian_vanishes() {
    let omega = natred::lie::HermitianStructure::standard(2).omega;
    assert!(d_invariant(&omega, &StructureTable::zeros(4)).unwrap().is_zero());
    let d = twisted_derivative(&omega, &HermitianStructure::standard(2).j, &StructureTable::zeros(4)).unwrap();
    assert!(d.is_zero());
    let n = nijenhuis(&HermitianStructure::standard(2).j, &StructureTable::zeros(4));
    assert!(n.form.is_zero());
}

#[test]
fn standard_complex_structure() {
    let h = HermitianStructure::standard(3);
    assert_eq!(h.j[(3, 0)], 1.0);
    assert_eq!(h.j[(0, 3)], -1.0);
    let id = DMatrix::<f64>::identity(6, 6);
    assert_eq!(&h.j * &h.j, -id);
    let mut bad = KForm::zero(4, 2);
    bad.add_term(&[0, 1], 2.0).unwrap();
    bad.add_term(&[2, 3], 1.0).unwrap();
    assert!(HermitianStructure::from_omega(bad, 1e-12).is_err());
}

#[test]
fn zero_torsion_gives_levi_civita() {
    let c = preset("su3").unwrap().table;
    let lc = levi_civita(&c);
    let conn = connection_with_torsion(&lc, &KForm::zero(8, 3)).unwrap();
    assert_eq!(conn.max_diff(&lc), 0.0);
    assert!(connection_with_torsion(&lc, &KForm::zero(8, 2)).is_err());
    assert!(characteristic_torsion(&KForm::zero(8, 3), &KForm::zero(8, 3)).unwrap().is_zero());
}

#[test]
fn zero_connection_cases() {
    let c = su2();
    let t = KForm::basis(3, &[0, 1, 2]).unwrap();
    let (_, m) = covariant_derivative_3form(&ConnectionForms::zero(3), &t);
    assert_eq!(m, 0.0);
    let hol = holonomy(&ConnectionForms::zero(3), &StructureTable::zeros(3)).unwrap();
    assert_eq!(hol.dim, 0);
    let omega = HermitianStructure::standard(1).omega;
    let d = codifferential_omega(&omega, &KForm::zero(2, 3), &ConnectionForms::zero(2)).unwrap();
    assert!(d.is_zero());
    assert_eq!(natural_reductivity_check(&c), 0.0);
    assert_eq!(natural_reductivity_check(&StructureTable::zeros(3)), 0.0);
}

#[test]
fn torsion_kernel_examples() {
    assert_eq!(torsion_kernel(&KForm::zero(5, 3)).dim(), 5);
    assert_eq!(torsion_kernel(&KForm::basis(5, &[0, 1, 2]).unwrap()).dim(), 2);
    assert_eq!(torsion_kernel(&KForm::basis(3, &[0, 1, 2]).unwrap()).dim(), 0);
}

#[test]
fn biinvariant_curvature_is_quarter_bracket() {
    // R(X,Y) = -¼ ad[X,Y] for the Levi-Civita connection of a bi-invariant metric
    let c = preset("su3").unwrap().table;
    let r = curvature(&levi_civita(&c), &c);
    for p in 0..8 {
        for q in 0..8 {
            let mut expect = DMatrix::zeros(8, 8);
            for k in 0..8 {
                expect += c.ad(k) * (-0.25 * c.get(p, q, k));
            }
            assert!((r.endomorphism(p, q) - expect).amax() <= 1e-13);
        }
    }
    assert!(r.pair_symmetry_residual() <= 1e-13);
}

#[test]
fn cartan_schouten_connections_are_flat() {
    // Λ = 0 and Λ = ad are the flat connections of a compact group
    let c = preset("so4").unwrap().table;
    let r0 = curvature(&ConnectionForms::zero(6), &c);
    assert_eq!(r0.max_abs(), 0.0);
    let ad = ConnectionForms {
        lambda: (0..6).map(|i| natred::SkewEndomorphism::from_matrix_unchecked(c.ad(i))).collect(),
    };
    assert!(curvature(&ad, &c).max_abs() <= 1e-13);
}

#[test]
fn derived_algebra_and_center() {
    assert_eq!(derived_dim(&su2()), 3);
    assert_eq!(derived_dim(&preset("u2").unwrap().table), 3);
    assert_eq!(derived_dim(&StructureTable::zeros(3)), 0);
    assert_eq!(center(&preset("u2").unwrap().table).dim(), 1);
    assert_eq!(center(&so_n(4)).dim(), 0);
}

#[test]
fn witness_search() {
    assert!(biinvariance_witness(&su2(), 1e-10).is_none());
    let mut c = StructureTable::zeros(2);
    c.set_bracket(0, 1, 1, 1.0);
    let w = biinvariance_witness(&c, 1e-10).unwrap();
    assert!(w.residual >= 1.0);
}

#[test]
fn close_span_closes_rotations() {
    // two rotation generators in so(3) generate all of so(3)
    let gens: Vec<DMatrix<f64>> = [[0, 1], [1, 2]]
        .iter()
        .map(|&[a, b]| {
            let mut m = DMatrix::zeros(3, 3);
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
            m
        })
        .collect();
    let h = close_span(gens, &[]).unwrap();
    assert_eq!(h.dim, 3);
    assert!(h.closure_residual() <= 1e-12);
}

/// Random semidirect products ℝ ⋉ ℝᵏ: every `A` gives a Lie algebra, so
/// these exercise the machinery on non-unimodular, non-skew tables.
fn semidirect(a: &DMatrix<f64>) -> StructureTable {
    let k = a.nrows();
    let mut c = StructureTable::zeros(k + 1);
    for i in 0..k {
        for j in 0..k {
            if a[(j, i)] != 0.0 {
                c.set_bracket(0, i + 1, j + 1, a[(j, i)]);
            }
        }
    }
    c
}

fn arb_semidirect() -> impl Strategy<Value = StructureTable> {
    (2usize..=5).prop_flat_map(|k| {
        prop::collection::vec(-1.5f64..1.5, k * k).prop_map(move |v| semidirect(&DMatrix::from_vec(k, k, v)))
    })
}

fn arb_torsion(n: usize) -> impl Strategy<Value = KForm> {
    prop::collection::vec(-1.0f64..1.0, n * n * n).prop_map(move |v| {
        let mut t = KForm::zero(n, 3);
        for (i, c) in v.into_iter().enumerate() {
            t.add_term(&[i / (n * n), (i / n) % n, i % n], c).unwrap();
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semidirect_tables_are_lie(c in arb_semidirect()) {
        prop_assert!(validate_structure(&c, false, 1e-12).pass);
    }

    #[test]
    fn levi_civita_is_metric_and_torsion_free(c in arb_semidirect()) {
        let lc = levi_civita(&c);
        prop_assert!(lc.max_skew_residual() <= 1e-12);
        prop_assert!(torsion_identity_residual(&lc, &c, &KForm::zero(c.dim(), 3)) <= 1e-12);
    }

    #[test]
    fn levi_civita_curvature_has_riemannian_symmetries(c in arb_semidirect()) {
        let r = curvature(&levi_civita(&c), &c);
        prop_assert!(r.pair_symmetry_residual() <= 1e-10);
        let l = r.lowered();
        let n = c.dim();
        for a in 0..n { for b in 0..n { for x in 0..n { for d in 0..n {
            let bianchi = l.get(&[a, b, x, d]) + l.get(&[b, x, a, d]) + l.get(&[x, a, b, d]);
            prop_assert!(bianchi.abs() <= 1e-10);
        }}}}
    }

    #[test]
    fn skew_torsion_connection_identity(t in arb_torsion(4), v in prop::collection::vec(-1.5f64..1.5, 9)) {
        let c = semidirect(&DMatrix::from_vec(3, 3, v));
        let conn = connection_with_torsion(&levi_civita(&c), &t).unwrap();
        prop_assert!(conn.max_skew_residual() <= 1e-12);
        prop_assert!(torsion_identity_residual(&conn, &c, &t) <= 1e-12);
    }

    #[test]
    fn endomorphism_of_contraction_is_skew(t in arb_torsion(5), i in 0usize..5) {
        let m = two_form_to_endo(&t.interior(i).unwrap()).unwrap();
        prop_assert!(m.skew_residual() == 0.0);
    }

    #[test]
    fn holonomy_is_closed(c in arb_semidirect()) {
        let h = holonomy(&levi_civita(&c), &c).unwrap();
        prop_assert!(h.closure_residual() <= 1e-8);
    }
}
