use super::*;
use crate::forms::{Branch, SubTorus};
use crate::samples;
use num_rational::BigRational;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m1(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}

fn pair_all(f: &TrigPolyForm) -> Vec<Complex64> {
    SubTorus::odd_coordinate_cycles(f.dim())
        .iter()
        .map(|s| f.pair(s).unwrap())
        .collect()
}

#[test]
fn curvature_examples() {
    let abelian = Connection::circle_diagonal(&[c(0.2, 0.3), c(-0.1, 0.4)]).unwrap();
    assert!(curvature(&abelian).is_zero());

    let c1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let c2 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let c3 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let conn = Connection::from_constant(&[c1.clone(), c2.clone(), c3.clone()]).unwrap();
    let theta = curvature(&conn);
    for (i, j, a, b) in [(0, 1, &c1, &c2), (0, 2, &c1, &c3), (1, 2, &c2, &c3)] {
        let comm = a * b - b * a;
        assert!((theta.constant_coefficient(&[i, j]) - comm).norm() < 1e-14);
    }

    let n = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let a = TrigPolyForm::monomial(3, n.clone(), &[1, 0, 0], &[1]).unwrap();
    let conn = Connection::new(a, Metric::identity(3, 2)).unwrap();
    let expected = TrigPolyForm::monomial(3, n * two_pi_i(), &[1, 0, 0], &[0, 1]).unwrap();
    assert!(curvature(&conn).approx_eq(&expected, 1e-14));
}

#[test]
fn omega_rank_one_and_unitary() {
    let conn = Connection::from_constant(&[m1(c(0.7, -1.3))]).unwrap();
    let expected = TrigPolyForm::monomial(1, m1(c(-1.4, 0.0)), &[0], &[0]).unwrap();
    assert!(omega_metric(&conn).approx_eq(&expected, 1e-14));

    let mut rng = samples::rng(1);
    let u = Connection::from_constant(&[samples::anti_hermitian(&mut rng, 3, 1.0)]).unwrap();
    assert!(omega_metric(&u).is_zero_within(1e-14));
}

/// `d⟨u, v⟩_g = ⟨∇u, v⟩_g + ⟨u, (∇ + ω) v⟩_g` for sections stored as the
/// columns of matrix-valued 0-forms.
fn metric_defect(conn: &Connection, u: &TrigPolyForm, v: &TrigPolyForm) -> f64 {
    let g = conn.metric().g();
    let adj = adjoint_connection(conn);
    let nabla_u = &u.ext_d() + &conn.form().wedge(u).unwrap();
    let nabla_v = &v.ext_d() + &adj.form().wedge(v).unwrap();
    let lhs = u.dagger().wedge(g).unwrap().wedge(v).unwrap().ext_d();
    let rhs = &nabla_u.dagger().wedge(g).unwrap().wedge(v).unwrap()
        + &u.dagger().wedge(g).unwrap().wedge(&nabla_v).unwrap();
    lhs.distance(&rhs)
}

#[test]
fn adjoint_is_metric_dual_on_monomial_sections() {
    let mut rng = samples::rng(2);
    for dim in [1usize, 3] {
        let base = samples::connection(&mut rng, dim, 2, 4);
        let conn = base.with_metric(samples::metric(&mut rng, dim, 2)).unwrap();
        for _ in 0..3 {
            let u = samples::form(&mut rng, dim, 2, &[0], 1, 1);
            let v = samples::form(&mut rng, dim, 2, &[0], 1, 1);
            assert!(metric_defect(&conn, &u, &v) < 1e-12);
        }
    }
}

#[test]
fn hermitian_part_examples() {
    let conn = Connection::from_constant(&[m1(c(0.7, -1.3))]).unwrap();
    let e = hermitian_part(&conn);
    assert!((e.form().constant_coefficient(&[0])[(0, 0)] - c(0.0, -1.3)).norm() < 1e-14);

    let mut rng = samples::rng(3);
    let u = Connection::from_constant(&[samples::anti_hermitian(&mut rng, 2, 1.0)]).unwrap();
    assert_eq!(hermitian_part(&u).form(), u.form());

    for dim in [1usize, 3] {
        let base = samples::connection(&mut rng, dim, 2, 5);
        let conn = base.with_metric(samples::metric(&mut rng, dim, 2)).unwrap();
        assert!(omega_metric(&hermitian_part(&conn)).is_zero_within(1e-12));
    }
}

#[test]
fn r_deformation_special_values() {
    let mut rng = samples::rng(4);
    let base = samples::connection(&mut rng, 3, 2, 5);
    let conn = base.with_metric(samples::metric(&mut rng, 3, 2)).unwrap();
    assert!(r_deformation(&conn, c(0.0, 0.0))
        .form()
        .approx_eq(hermitian_part(&conn).form(), 1e-13));
    assert!(r_deformation(&conn, c(0.0, 1.0))
        .form()
        .approx_eq(conn.form(), 1e-13));
    assert!(r_deformation(&conn, c(0.0, -1.0))
        .form()
        .approx_eq(adjoint_connection(&conn).form(), 1e-13));
    for r in [-1.5, 0.3, 2.0] {
        assert!(omega_metric(&r_deformation(&conn, c(r, 0.0))).is_zero_within(1e-12));
    }
}

#[test]
fn chern_odd_examples() {
    let mut rng = samples::rng(5);
    let u = samples::flat_constant(&mut rng, 3, 2, true);
    for j in 0..2 {
        assert!(chern_odd(&u, j).is_zero_within(1e-14));
    }
    let conn = Connection::from_constant(&[m1(c(0.7, -1.3))]).unwrap();
    let c1 = chern_odd(&conn, 0);
    assert!((c1.pair(&SubTorus::full(1)).unwrap() - c(-0.7, 0.0)).norm() < 1e-14);

    let diag = samples::flat_constant(&mut rng, 3, 3, false);
    let diag = Connection::from_constant(
        &diag
            .constant_components()
            .unwrap()
            .iter()
            .map(|m| CMat::from_diagonal(&m.diagonal()))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(chern_odd(&diag, 1).is_zero_within(1e-13));
    assert!(chern_odd(&diag, 2).is_zero());
}

#[test]
fn chern_odd_closed_for_flat_connections() {
    let mut rng = samples::rng(6);
    for _ in 0..4 {
        let conn = samples::flat_nonconstant(&mut rng, 3, 3);
        assert!(conn.is_flat(1e-12));
        assert!(!omega_metric(&conn).is_constant());
        for j in 0..2 {
            assert!(chern_odd(&conn, j).ext_d().is_zero_within(1e-10));
        }
    }
    // a non-flat connection generally has non-closed odd Chern forms
    let conn = samples::connection(&mut rng, 3, 2, 6);
    assert!(!chern_odd(&conn, 0).ext_d().is_zero_within(1e-6));
}

fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn a_coeff_values() {
    for r in [c(0.0, 0.0), c(1.3, 0.0), c(0.2, -0.7)] {
        assert_eq!(a_coeff(0, r), c(1.0, 0.0));
    }
    assert!((a_coeff(1, c(0.0, 1.0)) - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
    let quad = simpson(|u| (1.0 + u * u).powi(2), 2000);
    assert!((quad - 28.0 / 15.0).abs() < 1e-12);
    assert!((a_coeff(2, c(1.0, 0.0)) - c(quad, 0.0)).norm() < 1e-12);
    for j in 0..5 {
        for r in [0.5, 2.0] {
            let q = simpson(|u| (1.0 + u * u * r * r).powi(j as i32), 4000);
            assert!((a_coeff(j, c(r, 0.0)).re - q).abs() < 1e-9 * q.max(1.0));
        }
    }
}

#[test]
fn a_coeff_exact_at_imaginary_unit() {
    let minus_one = BigRational::from_integer((-1).into());
    for j in 0..=6usize {
        let lhs = a_coeff_exact(j, &minus_one);
        let mut fact = BigRational::from_integer(1.into());
        for q in 1..=j {
            fact *= BigRational::from_integer((q as i64).into());
        }
        let mut odd_fact = BigRational::from_integer(1.into());
        for q in 1..=(2 * j + 1) {
            odd_fact *= BigRational::from_integer((q as i64).into());
        }
        let four_j = BigRational::from_integer((4i64.pow(j as u32)).into());
        let rhs = four_j * &fact * &fact / odd_fact;
        assert_eq!(lhs, rhs, "j = {j}");
        let w = imaginary_pairing_weight(j);
        assert!((a_coeff(j, c(0.0, 1.0)).re / fact_f64(j) - w).abs() < 1e-14);
    }
}

fn fact_f64(j: usize) -> f64 {
    (1..=j).map(|q| q as f64).product()
}

#[test]
fn cs_of_equal_connections_vanishes() {
    let mut rng = samples::rng(7);
    let conn = samples::connection(&mut rng, 3, 2, 5);
    assert!(cs_form(&conn, &conn).unwrap().is_zero_within(1e-14));
}

#[test]
fn cs_for_flat_linear_path() {
    let mut rng = samples::rng(8);
    // diagonal constants commute, so the whole linear path is flat
    let d0: Vec<CMat> = (0..3)
        .map(|_| {
            CMat::from_diagonal(&nalgebra::DVector::from_fn(2, |_, _| {
                samples::complex(&mut rng, 1.0)
            }))
        })
        .collect();
    let d1: Vec<CMat> = (0..3)
        .map(|_| {
            CMat::from_diagonal(&nalgebra::DVector::from_fn(2, |_, _| {
                samples::complex(&mut rng, 1.0)
            }))
        })
        .collect();
    let c0 = Connection::from_constant(&d0).unwrap();
    let c1 = Connection::from_constant(&d1).unwrap();
    let cs = cs_form(&c0, &c1).unwrap();
    let expected = (c0.form() - c1.form()).trace().scale(two_pi_i().inv());
    assert!(cs.approx_eq(&expected, 1e-13));
}

#[test]
fn transgression_identity_for_non_flat_connections() {
    let mut rng = samples::rng(9);
    for _ in 0..3 {
        let c0 = samples::connection(&mut rng, 3, 2, 5);
        let c1 = samples::connection(&mut rng, 3, 2, 5);
        let cs = cs_form(&c0, &c1).unwrap();
        let diff =
            &chern_character(&c1, Branch::Principal) - &chern_character(&c0, Branch::Principal);
        assert!(cs.ext_d().approx_eq(&diff, 1e-10));
        assert!(cs.degrees().iter().all(|p| p % 2 == 1));
    }
}

#[test]
fn branch_flip_leaves_pairings_unchanged() {
    let mut rng = samples::rng(10);
    let c0 = samples::flat_constant(&mut rng, 3, 2, false);
    let c1 = samples::flat_constant(&mut rng, 3, 2, false);
    let p = cs_form_with_branch(&c0, &c1, Branch::Principal).unwrap();
    let f = cs_form_with_branch(&c0, &c1, Branch::Flipped).unwrap();
    for (a, b) in pair_all(&p).iter().zip(pair_all(&f)) {
        assert!((a - b).norm() < 1e-13);
    }
    let ch_p = chern_character(&samples::connection(&mut rng, 3, 2, 4), Branch::Principal);
    let ch_f = chern_character(&samples::connection(&mut rng, 3, 2, 4), Branch::Flipped);
    assert!(ch_p.degrees().iter().all(|p| p % 2 == 0));
    assert!(ch_f.degrees().iter().all(|p| p % 2 == 0));
}

#[test]
fn cs_r_poly_matches_direct_evaluation() {
    let mut rng = samples::rng(11);
    for dim in [1usize, 3] {
        let base = samples::connection(&mut rng, dim, 2, 5);
        let conn = base.with_metric(samples::metric(&mut rng, dim, 2)).unwrap();
        let poly = cs_r_poly(&conn).unwrap();
        assert_eq!(poly.coeffs().len(), dim + 1);
        assert!(poly.coeff(0).is_zero());
        assert!(poly.eval(c(0.0, 0.0)).is_zero());
        let e = hermitian_part(&conn);
        for r in [c(0.7, 0.0), c(-1.3, 0.0), c(0.0, 1.0), c(0.4, -0.9)] {
            let direct = cs_form(&e, &r_deformation(&conn, r)).unwrap();
            assert!(poly.eval(r).approx_eq(&direct, 1e-10), "dim {dim}, r {r}");
        }
    }
    let u = samples::flat_constant(&mut rng, 3, 2, true);
    assert!(cs_r_poly(&u)
        .unwrap()
        .coeffs()
        .iter()
        .all(TrigPolyForm::is_zero));
}

#[test]
fn chern_character_examples() {
    let mut rng = samples::rng(12);
    let flat = samples::flat_constant(&mut rng, 3, 3, false);
    let ch = chern_character(&flat, Branch::Principal);
    assert!(ch.approx_eq(&TrigPolyForm::scalar(3, c(3.0, 0.0)), 1e-13));

    let conn = samples::connection(&mut rng, 3, 2, 5);
    let ch = chern_character(&conn, Branch::Principal);
    let theta = curvature(&conn);
    assert!((ch.degree_part(0)).approx_eq(&TrigPolyForm::scalar(3, c(2.0, 0.0)), 1e-14));
    assert!(ch
        .degree_part(2)
        .approx_eq(&theta.trace().scale(-two_pi_i().inv()), 1e-12));
    assert!(ch.ext_d().is_zero_within(1e-10));
}

fn entry(f: &TrigPolyForm, i: usize, j: usize) -> TrigPolyForm {
    let mut out = TrigPolyForm::zero(f.dim(), 1);
    for (k, m) in f.terms() {
        out.add_term(k.freq.clone(), k.indices, m1(m[(i, j)]));
    }
    out
}

#[test]
fn l_form_flat_and_low_dimensions() {
    let mut rng = samples::rng(13);
    assert_eq!(
        l_form(&TrigPolyForm::zero(3, 2), Branch::Principal).unwrap(),
        TrigPolyForm::identity(3, 1)
    );
    // on T^3 every even power of a 2-form beyond the first exceeds the degree
    let r = samples::form(&mut rng, 3, 2, &[2], 4, 1);
    assert!(l_form(&r, Branch::Principal)
        .unwrap()
        .approx_eq(&TrigPolyForm::identity(3, 1), 1e-14));
    assert!(l_form(
        &samples::form(&mut rng, 3, 2, &[1], 2, 1),
        Branch::Principal
    )
    .is_err());
}

#[test]
fn l_form_matches_determinant_series_on_t5() {
    let mut rng = samples::rng(14);
    for _ in 0..3 {
        let r = samples::form(&mut rng, 5, 2, &[2], 5, 1);
        // f(R) = (R/2)/tanh(R/2) = I + R²/12 + … ; R⁴ has degree 8 > 5
        let f = &TrigPolyForm::identity(5, 2) + &r.wedge(&r).unwrap().scale_re(1.0 / 12.0);
        let det = &entry(&f, 0, 0).wedge(&entry(&f, 1, 1)).unwrap()
            - &entry(&f, 0, 1).wedge(&entry(&f, 1, 0)).unwrap();
        let x = &det - &TrigPolyForm::identity(5, 1);
        let sqrt = &(&TrigPolyForm::identity(5, 1) + &x.scale_re(0.5))
            - &x.wedge(&x).unwrap().scale_re(0.125);
        let expected = sqrt.phi_normalize(Branch::Principal);
        assert!(l_form(&r, Branch::Principal)
            .unwrap()
            .approx_eq(&expected, 1e-12));
    }
}

#[test]
fn l_form_diagonal_curvature_on_t5() {
    let r1 = TrigPolyForm::monomial(5, m1(c(1.0, 0.0)), &[0; 5], &[0, 1]).unwrap();
    let r2 = TrigPolyForm::monomial(5, m1(c(0.5, 0.2)), &[1, 0, 0, 0, 0], &[2, 3]).unwrap();
    let mut r = TrigPolyForm::zero(5, 2);
    for (i, ri) in [&r1, &r2].into_iter().enumerate() {
        for (k, m) in ri.terms() {
            let mut e = CMat::zeros(2, 2);
            e[(i, i)] = m[(0, 0)];
            r.add_term(k.freq.clone(), k.indices, e);
        }
    }
    // Π_i sqrt(f(r_i)) with f = 1 + r²/12, so sqrt(f) = 1 + r²/24
    let one = TrigPolyForm::identity(5, 1);
    let s1 = &one + &r1.wedge(&r1).unwrap().scale_re(1.0 / 24.0);
    let s2 = &one + &r2.wedge(&r2).unwrap().scale_re(1.0 / 24.0);
    let expected = s1.wedge(&s2).unwrap().phi_normalize(Branch::Principal);
    assert!(l_form(&r, Branch::Principal)
        .unwrap()
        .approx_eq(&expected, 1e-14));
}

#[test]
fn odd_chern_character_windings() {
    let constant = GaugeMap::new(
        TrigPolyForm::constant(1, m1(c(2.0, 1.0))),
        TrigPolyForm::constant(1, m1(c(2.0, 1.0).inv())),
    )
    .unwrap();
    assert!(odd_chern_char(&constant, Branch::Principal).is_zero_within(1e-14));
    for w in -3i64..=3 {
        let g = GaugeMap::circle_winding(1, w).unwrap();
        let total = odd_chern_char(&g, Branch::Principal)
            .pair(&SubTorus::full(1))
            .unwrap();
        assert!((total - c(w as f64, 0.0)).norm() < 1e-13);
    }
    let g = GaugeMap::circle_winding(2, 1).unwrap();
    let total = odd_chern_char(&g, Branch::Flipped)
        .pair(&SubTorus::full(1))
        .unwrap();
    assert!((total - c(1.0, 0.0)).norm() < 1e-13);

    let g = GaugeMap::diagonal_windings(3, &[vec![1, -2, 0], vec![0, 1, 3]]).unwrap();
    let ch = odd_chern_char(&g, Branch::Principal);
    let pairings = pair_all(&ch);
    // cycles: x1, x2, x3, then the full torus
    let expected = [1.0, -1.0, 3.0, 0.0];
    for (p, e) in pairings.iter().zip(expected) {
        assert!((p - c(e, 0.0)).norm() < 1e-13);
    }
}

#[test]
fn odd_chern_character_of_unipotent_map_is_exact() {
    let mut rng = samples::rng(15);
    let mut n = CMat::zeros(3, 3);
    n[(0, 1)] = samples::complex(&mut rng, 1.0);
    n[(1, 2)] = samples::complex(&mut rng, 1.0);
    let nf = &TrigPolyForm::monomial(3, n.clone(), &[1, 0, 0], &[]).unwrap()
        + &TrigPolyForm::monomial(3, n, &[0, 1, -1], &[]).unwrap();
    let g = GaugeMap::unipotent(&nf).unwrap();
    for p in pair_all(&odd_chern_char(&g, Branch::Principal)) {
        assert!(p.norm() < 1e-12);
    }
}

#[test]
fn holonomy_ode_matches_matrix_exponential() {
    let mut rng = samples::rng(16);
    let conn = samples::constant_connection(&mut rng, 1, 2, 1.0);
    let hol = holonomy(&conn, 0, &[0.0], 1).unwrap();
    let expected = (-conn.constant_components().unwrap()[0].clone()).exp();
    assert!((hol - &expected).norm() < 1e-14);

    // a gauge-equivalent non-constant connection has conjugate holonomy
    let mut n = CMat::zeros(2, 2);
    n[(0, 1)] = c(0.8, -0.3);
    let gm = GaugeMap::unipotent(&TrigPolyForm::monomial(1, n, &[2], &[]).unwrap()).unwrap();
    let moved = conn.gauge_transform(&gm).unwrap();
    assert!(!moved.is_constant());
    let base = 0.3;
    let g0 = gm.g().eval_function(&[base]);
    let g0_inv = gm.g_inv().eval_function(&[base]);
    let expected = &g0_inv * &expected * &g0;
    let ode = holonomy(&moved, 0, &[base], 2000).unwrap();
    assert!((ode - expected).norm() < 1e-10);

    // parallel transport along the loop of exp(−a x) for rank-1 constant a
    let a = c(0.4, 2.0);
    let conn = Connection::from_constant(&[m1(a)]).unwrap();
    let h = holonomy(&conn, 0, &[0.0], 1).unwrap()[(0, 0)];
    assert!((h - (-a).exp()).norm() < 1e-14);
}

#[test]
fn gauge_transform_preserves_flatness_and_metric_compatibility() {
    let mut rng = samples::rng(17);
    let u = samples::flat_constant(&mut rng, 3, 2, true);
    let g = GaugeMap::diagonal_windings(3, &[vec![1, 0, 2], vec![0, -1, 0]]).unwrap();
    let moved = u.gauge_transform(&g).unwrap();
    assert!(moved.is_flat(1e-12));
    assert!(omega_metric(&moved).is_zero_within(1e-12));
    let h = samples::metric(&mut rng, 3, 2);
    let gm = GaugeMap::new(h.g().clone(), h.g_inv().clone()).unwrap();
    let moved = u.gauge_transform(&gm).unwrap();
    assert!(omega_metric(&moved).is_zero_within(1e-11));
}

#[test]
fn r_deformation_pairings_at_form_level() {
    let mut rng = samples::rng(18);
    for dim in [1usize, 3] {
        for _ in 0..3 {
            let conn = samples::flat_constant(&mut rng, dim, 2, false);
            let e = hermitian_part(&conn);
            for r in [0.5, 1.0, 2.0] {
                let cs = cs_form(&e, &r_deformation(&conn, c(r, 0.0))).unwrap();
                let mut rhs = TrigPolyForm::zero(dim, 1);
                for j in 0..=(dim - 1) / 2 {
                    let w = a_coeff(j, c(r, 0.0)) / fact_f64(j) * (-r / (2.0 * PI));
                    rhs += &chern_odd(&conn, j).scale(w);
                }
                for (a, b) in pair_all(&cs).iter().zip(pair_all(&rhs)) {
                    assert!((a - b).norm() < 1e-9, "dim {dim} r {r}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn connection_json_round_trip() {
    let mut rng = samples::rng(19);
    let conn = samples::connection(&mut rng, 3, 2, 3)
        .with_metric(samples::metric(&mut rng, 3, 2))
        .unwrap();
    let text = serde_json::to_string(&conn).unwrap();
    let back: Connection = serde_json::from_str(&text).unwrap();
    assert!(back.form().approx_eq(conn.form(), 1e-15));
    assert!(back.metric().g().approx_eq(conn.metric().g(), 1e-15));

    let plain = Connection::circle_diagonal(&[c(0.25, 0.0)]).unwrap();
    let text = serde_json::to_string(&plain).unwrap();
    assert!(!text.contains("\"g\""));

    let mut v: serde_json::Value = serde_json::to_value(&conn).unwrap();
    v.as_object_mut().unwrap().remove("g_inv");
    assert!(serde_json::from_value::<Connection>(v).is_err());
}
