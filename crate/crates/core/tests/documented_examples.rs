//! Closed-form values quoted for small cases, checked directly.

mod common;

use common::{c, close, jacobi, periodic_oprl, rng, verblunsky};
use orthobracket_core::flows::{exact_flow_opuc, hamiltonian_rhs, oprl_ode_check, opuc_ode_check, FlowSpec, OprlHamiltonian};
use orthobracket_core::oprl::{jacobi_to_measure, monic_oprl};
use orthobracket_core::opuc::{caratheodory_f, para_family};
use orthobracket_core::periodic::{monodromy, trace_polynomial, PeriodicParams};
use orthobracket_core::poisson::{
    bracket, jacobian_opuc, jacobian_oprl, symplectic_check, AnalyticField, Backend, BracketReport, JacobianVariant,
    ParamPoint, PoissonTensor, Tolerances,
};
use orthobracket_core::poly::bezout_kernel;
use orthobracket_core::{JacobiParams, Poly, VerblunskyParams, C64};
use rand::Rng;

fn passes(reports: &[BracketReport], id: &str) {
    let r = reports.iter().find(|r| r.identity_id == id).unwrap_or_else(|| panic!("{id} missing"));
    assert_eq!(r.pass, Some(true), "{id}: {} > {} ({})", r.max_residual, r.tolerance, r.notes);
}

#[test]
fn bezout_of_a_polynomial_with_itself_vanishes() {
    let f = Poly::new(vec![c(0.3, -1.0), c(2.0, 0.5), c(-0.7, 0.0), c(1.0, 0.2)]);
    for (z, w) in [(c(0.4, 0.1), c(-1.2, 0.7)), (c(2.0, 0.0), c(3.0, 0.0))] {
        assert!(bezout_kernel(&f, &f, &z, &w).norm() < 1e-14);
    }
}

#[test]
fn first_monic_polynomial_is_x_minus_b() {
    let j = JacobiParams::new(vec![0.75], vec![]).unwrap();
    let p = monic_oprl(&j, 1).unwrap();
    assert_eq!(p.coeffs, vec![-0.75, 1.0]);
}

#[test]
fn size_one_circle_families() {
    let beta = C64::from_polar(1.0, 0.9);
    let bb = beta.conj();
    let v = VerblunskyParams::new(vec![], beta).unwrap();
    let fam = para_family(&v);
    assert!(close(fam.p.coeff(0), -bb, 1e-15) && close(fam.p.coeff(1), c(1.0, 0.0), 1e-15));
    assert!(close(fam.q.coeff(0), bb, 1e-15) && close(fam.q.coeff(1), c(1.0, 0.0), 1e-15));
    assert!(fam.c.coeff(0).norm() < 1e-15 && close(fam.c.coeff(1), c(1.0, 0.0), 1e-15));
    assert!(close(fam.s.coeff(0), -bb, 1e-15) && fam.s.coeff(1).norm() < 1e-15);
    for z in [c(0.3, 0.2), c(-1.5, 0.4)] {
        let f = caratheodory_f(&v, z).unwrap();
        assert!(close(f, -(z + bb) / (z - bb), 1e-13));
    }
}

#[test]
fn coordinate_brackets() {
    let mut r = rng(1);
    let j = jacobi(&mut r, 3);
    let t = PoissonTensor::oprl_finite(3);
    let a1 = j.a()[0];
    assert!((t.entry(0, 3, &j.to_point()).unwrap() + a1 / 4.0).abs() < 1e-15);

    let v = verblunsky(&mut r, 4);
    let p = v.to_point();
    let dim = p.len();
    let mut df = vec![c(0.0, 0.0); dim];
    let mut dg = df.clone();
    df[0] = c(1.0, 0.0);
    df[1] = c(0.0, 1.0);
    dg[0] = c(1.0, 0.0);
    dg[1] = c(0.0, -1.0);
    let got = PoissonTensor::opuc_finite(4).contract(&p, &df, &dg).unwrap();
    let rho0_sq = 1.0 - v.alpha()[0].norm_sqr();
    assert!(close(got, c(0.0, -rho0_sq), 1e-14), "{got}");
}

#[test]
fn traces_of_powers_commute() {
    let mut r = rng(2);
    for n in 2..=6 {
        let j = jacobi(&mut r, n);
        let tr2 = AnalyticField(OprlHamiltonian { c: vec![0.0, 1.0] });
        let tr3 = AnalyticField(OprlHamiltonian { c: vec![0.0, 0.0, 1.5] });
        let b = bracket(&tr2, &tr3, &j.to_point(), &PoissonTensor::oprl_finite(n), Backend::Dual).unwrap();
        assert!(b.norm() < 1e-11, "N={n}: {b}");
    }
}

#[test]
fn toda_equations_of_motion() {
    let mut r = rng(3);
    let n = 5;
    let j = jacobi(&mut r, n);
    let h = AnalyticField(OprlHamiltonian { c: vec![0.0, 2.0] });
    let rhs = hamiltonian_rhs(&h, &j.to_point(), &PoissonTensor::oprl_finite(n), Backend::Dual).unwrap();
    let (b, a) = (j.b(), j.a());
    let ak = |k: usize| if k == 0 || k == n { 0.0 } else { a[k - 1] };
    for k in 1..=n {
        let expect = 2.0 * (ak(k).powi(2) - ak(k - 1).powi(2));
        assert!((rhs[k - 1] - expect).abs() < 1e-12, "b_{k}");
    }
    for k in 1..n {
        let expect = a[k - 1] * (b[k] - b[k - 1]);
        assert!((rhs[n + k - 1] - expect).abs() < 1e-12, "a_{k}");
    }
}

#[test]
fn schur_flow_from_time_derivative_of_exact_solution() {
    let mut r = rng(4);
    let v = verblunsky(&mut r, 5);
    let spec = FlowSpec::schur(1.0, 1e-3).unwrap();
    let h = 1e-5;
    let plus = exact_flow_opuc(&v, &spec, h).unwrap();
    let minus = exact_flow_opuc(&v, &spec, -h).unwrap();
    let al = v.alpha();
    let m = al.len();
    let ext = |j: isize| -> C64 {
        if j < 0 {
            c(-1.0, 0.0)
        } else if j as usize == m {
            v.beta()
        } else {
            al[j as usize]
        }
    };
    for j in 0..m {
        let d = (plus.alpha()[j] - minus.alpha()[j]) / (2.0 * h);
        let rho_sq = 1.0 - al[j].norm_sqr();
        let expect = (ext(j as isize + 1) - ext(j as isize - 1)) * rho_sq;
        assert!(close(d, expect, 1e-7), "alpha_{j}: {d} vs {expect}");
    }
}

#[test]
fn induced_equation_special_cases() {
    let mut r = rng(5);
    let j = jacobi(&mut r, 5);
    let reports = oprl_ode_check(&j, &FlowSpec::toda(1.0, 1e-3).unwrap(), &Tolerances::default()).unwrap();
    passes(&reports, "oprl_ode_linear_special");
    passes(&reports, "oprl_ode_quadratic_special");
    let v = verblunsky(&mut r, 5);
    let reports = opuc_ode_check(&v, &FlowSpec::schur(1.0, 1e-3).unwrap(), &Tolerances::default()).unwrap();
    passes(&reports, "opuc_ode_ismail_degree");
}

#[test]
fn two_point_jacobian_formula() {
    let j = JacobiParams::new(vec![0.3, -0.8], vec![1.1]).unwrap();
    let m = jacobi_to_measure(&j).unwrap();
    let check = jacobian_oprl(&j, JacobianVariant::FixedTrace).unwrap();
    let formula = 0.5 * 1.1 / (m.rho()[0] * m.rho()[1]);
    assert!((check.formula_det - formula).abs() < 1e-12 * formula);
    assert!(check.relative_error < 1e-7);
}

#[test]
fn circle_jacobian_free_beta_matches_fixed_beta() {
    let mut r = rng(6);
    for n in 2..=4 {
        let v = verblunsky(&mut r, n);
        let fixed = jacobian_opuc(&v, JacobianVariant::FixedBeta).unwrap();
        let free = jacobian_opuc(&v, JacobianVariant::FreeBeta).unwrap();
        assert!((fixed.formula_det - free.formula_det).abs() < 1e-12 * fixed.formula_det);
        assert!((fixed.numeric_det - free.numeric_det).abs() < 1e-6 * fixed.numeric_det);
    }
}

#[test]
fn three_point_symplectic_matrix_is_lower_triangular() {
    let mut r = rng(7);
    let j = jacobi(&mut r, 3);
    let reports = symplectic_check(&ParamPoint::Oprl(j), &Tolerances::default()).unwrap();
    passes(&reports, "oprl_symplectic_w_lower_triangular");
}

#[test]
fn period_four_monodromy_and_leading_coefficient() {
    let mut r = rng(8);
    let p = periodic_oprl(&mut r, 4);
    let prod: f64 = p.a().iter().product();
    let params = PeriodicParams::Oprl(p);
    for _ in 0..10 {
        let z = c(r.gen_range(-2.0..2.0), r.gen_range(-1.0..1.0));
        assert!((monodromy(&params, z).unwrap().det() - 1.0).norm() < 1e-12);
    }
    let lead = trace_polynomial(&params).coeff(4);
    assert!((lead - 1.0 / prod).norm() < 1e-10 * (1.0 / prod).max(1.0));
}
