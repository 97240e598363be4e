mod common;

use common::{c, close, jacobi, periodic_oprl, periodic_opuc, rng, verblunsky};
use num_complex::Complex;
use orthobracket_core::flows::{exact_flow_opuc, exact_flow_oprl, FlowSpec};
use orthobracket_core::oprl::{jacobi_to_measure, measure_to_jacobi, monic_values};
use orthobracket_core::opuc::{cmv_to_measure, measure_to_verblunsky};
use orthobracket_core::periodic::{elementary_symmetric, newton_s_from_t, newton_t_from_s, power_sums};
use orthobracket_core::poisson::{
    bracket, evaluate_with_gradients, Analytic, AnalyticField, Backend, FnField, PoissonTensor, ScalarField,
};
use orthobracket_core::poly::bezout_kernel;
use orthobracket_core::scalar::{cplx, lift};
use orthobracket_core::{Poly, Real, Result, C64};
use proptest::prelude::*;
use rand::Rng;

/// `P_n(z)` as a function of the OPRL coordinates.
struct MonicAt {
    n: usize,
    z: C64,
}

impl Analytic for MonicAt {
    fn eval<R: Real>(&self, p: &[R]) -> Result<Vec<Complex<R>>> {
        let size = p.len().div_ceil(2);
        let b: Vec<Complex<R>> = p[..size].iter().cloned().map(cplx).collect();
        let a: Vec<Complex<R>> = p[size..].iter().cloned().map(cplx).collect();
        Ok(vec![monic_values(&b, &a, &lift(self.z), self.n).pop().unwrap()])
    }
}

struct Product(MonicAt, MonicAt);

impl Analytic for Product {
    fn eval<R: Real>(&self, p: &[R]) -> Result<Vec<Complex<R>>> {
        Ok(vec![self.0.eval(p)?[0].clone() * self.1.eval(p)?[0].clone()])
    }
}

/// Tensor and point for one of the four structures.
fn structure(kind: u8, seed: u64, n: usize) -> (PoissonTensor, Vec<f64>) {
    let mut r = rng(seed);
    match kind % 4 {
        0 => (PoissonTensor::oprl_finite(n), jacobi(&mut r, n).to_point()),
        1 => (PoissonTensor::opuc_finite(n), verblunsky(&mut r, n).to_point()),
        2 => (PoissonTensor::oprl_periodic(n), periodic_oprl(&mut r, n).to_point()),
        _ => {
            let p = 2 * n.div_ceil(2);
            (PoissonTensor::opuc_periodic(p), periodic_opuc(&mut r, p).to_point())
        }
    }
}

fn entry(t: &PoissonTensor, x: &[f64], i: usize, j: usize) -> f64 {
    t.entry(i, j, x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensors_are_antisymmetric(kind in 0u8..4, seed in any::<u64>(), n in 2usize..7) {
        let (t, x) = structure(kind, seed, n);
        let m = t.matrix(&x).unwrap();
        let d = m.n;
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(*m.get(i, j), -*m.get(j, i));
            }
        }
    }

    #[test]
    fn tensors_satisfy_the_jacobi_identity(kind in 0u8..4, seed in any::<u64>(), n in 2usize..6) {
        let (t, x) = structure(kind, seed, n);
        let d = x.len();
        let h = 1e-5;
        // dpi[l][i][j] = d pi_ij / d x_l by central differences
        let dpi: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|l| {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[l] += h;
                xm[l] -= h;
                (0..d).map(|i| (0..d).map(|j| (entry(&t, &xp, i, j) - entry(&t, &xm, i, j)) / (2.0 * h)).collect()).collect()
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let s: f64 = (0..d)
                        .map(|l| {
                            entry(&t, &x, i, l) * dpi[l][j][k] + entry(&t, &x, j, l) * dpi[l][k][i] + entry(&t, &x, k, l) * dpi[l][i][j]
                        })
                        .sum();
                    prop_assert!(s.abs() < 1e-7, "({i},{j},{k}): {s}");
                }
            }
        }
    }

    #[test]
    fn trace_is_a_casimir(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let (t, x) = (PoissonTensor::oprl_finite(n), jacobi(&mut r, n).to_point());
        for k in 0..x.len() {
            let s: f64 = (0..n).map(|i| entry(&t, &x, k, i)).sum();
            prop_assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_line_casimirs(seed in any::<u64>(), p in 1usize..7) {
        let mut r = rng(seed);
        let per = periodic_oprl(&mut r, p);
        let (t, x) = (PoissonTensor::oprl_periodic(p), per.to_point());
        let prod = per.prod_a();
        for k in 0..x.len() {
            let sum_b: f64 = (0..p).map(|i| entry(&t, &x, k, i)).sum();
            let prod_a: f64 = (0..p).map(|i| entry(&t, &x, k, p + i) * prod / x[p + i]).sum();
            prop_assert!(sum_b.abs() < 1e-13 && prod_a.abs() < 1e-12 * prod.max(1.0), "{sum_b} {prod_a}");
        }
    }

    #[test]
    fn bracket_obeys_leibniz(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let j = jacobi(&mut r, n);
        let (x, t) = (j.to_point(), PoissonTensor::oprl_finite(n));
        let z = |r: &mut rand_chacha::ChaCha8Rng| c(r.gen_range(-3.0..3.0), r.gen_range(-0.5..0.5));
        let (f, g, h) = (MonicAt { n, z: z(&mut r) }, MonicAt { n: n - 1, z: z(&mut r) }, MonicAt { n, z: z(&mut r) });
        let fv = f.eval::<f64>(&x).unwrap()[0];
        let gv = g.eval::<f64>(&x).unwrap()[0];
        let (fz, gz) = (f.z, g.z);
        let lhs = bracket(&AnalyticField(Product(f, g)), &AnalyticField(MonicAt { n: h.n, z: h.z }), &x, &t, Backend::Dual).unwrap();
        let gh = bracket(&AnalyticField(MonicAt { n: n - 1, z: gz }), &AnalyticField(MonicAt { n: h.n, z: h.z }), &x, &t, Backend::Dual).unwrap();
        let fh = bracket(&AnalyticField(MonicAt { n, z: fz }), &AnalyticField(h), &x, &t, Backend::Dual).unwrap();
        let rhs = fv * gh + gv * fh;
        prop_assert!(close(lhs, rhs, 1e-11), "{lhs} vs {rhs}");
    }

    #[test]
    fn dual_and_finite_difference_gradients_agree(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let x = jacobi(&mut r, n).to_point();
        let f = MonicAt { n, z: c(r.gen_range(-2.0..2.0), r.gen_range(-1.0..1.0)) };
        let dual = evaluate_with_gradients(&AnalyticField(MonicAt { n: f.n, z: f.z }), &x, Backend::Dual).unwrap();
        let values_only = FnField(move |p: &[f64]| f.eval::<f64>(p));
        let fd = evaluate_with_gradients(&values_only as &dyn ScalarField, &x, Backend::Fd).unwrap();
        prop_assert_eq!(fd.backend, Backend::Fd);
        for (a, b) in dual.grads[0].iter().zip(&fd.grads[0]) {
            prop_assert!((a - b).norm() < 1e-6 * a.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn newton_identities_roundtrip(seed in any::<u64>(), len in 1usize..9) {
        let mut r = rng(seed);
        let vals: Vec<C64> = (0..len).map(|_| c(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))).collect();
        let t = power_sums(&vals, len);
        let s = newton_s_from_t(&t);
        for (a, b) in s.iter().zip(elementary_symmetric(&vals)) {
            prop_assert!(close(*a, b, 1e-10));
        }
        for (a, b) in newton_t_from_s(&s).iter().zip(&t) {
            prop_assert!(close(*a, *b, 1e-10));
        }
    }

    #[test]
    fn exact_flows_form_a_group(seed in any::<u64>(), n in 2usize..7, s in -0.8f64..0.8, u in -0.8f64..0.8) {
        let mut r = rng(seed);
        let j = jacobi(&mut r, n);
        let toda = FlowSpec::oprl(vec![0.3, -1.0, 0.5], 1.0, 1e-3).unwrap();
        let twice = exact_flow_oprl(&exact_flow_oprl(&j, &toda, s).unwrap(), &toda, u).unwrap();
        prop_assert!(twice.max_diff(&exact_flow_oprl(&j, &toda, s + u).unwrap()) < 1e-9);
        let v = verblunsky(&mut r, n);
        let schur = FlowSpec::opuc(vec![c(0.2, 0.0), c(1.0, 0.3)], 1.0, 1e-3).unwrap();
        let twice = exact_flow_opuc(&exact_flow_opuc(&v, &schur, s).unwrap(), &schur, u).unwrap();
        prop_assert!(twice.max_diff(&exact_flow_opuc(&v, &schur, s + u).unwrap()) < 1e-9);
    }

    #[test]
    fn bezout_kernel_symmetries(seed in any::<u64>(), deg in 0usize..6) {
        let mut r = rng(seed);
        let mut poly = || Poly::new((0..=deg).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect());
        let (f, g) = (poly(), poly());
        let (z, w) = (c(0.3, -0.4), c(-1.1, 0.9));
        let k = bezout_kernel(&f, &g, &z, &w);
        prop_assert!(close(k, -bezout_kernel(&g, &f, &z, &w), 1e-12));
        prop_assert!(close(k, bezout_kernel(&f, &g, &w, &z), 1e-12));
    }

    #[test]
    fn spectral_maps_roundtrip(seed in any::<u64>(), n in 1usize..13) {
        let mut r = rng(seed);
        let j = jacobi(&mut r, n);
        prop_assert!(j.max_diff(&measure_to_jacobi(&jacobi_to_measure(&j).unwrap()).unwrap()) < 1e-9);
        let v = verblunsky(&mut r, n);
        prop_assert!(v.max_diff(&measure_to_verblunsky(&cmv_to_measure(&v).unwrap()).unwrap()) < 1e-9);
    }
}
