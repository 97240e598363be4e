//! Orthogonal polynomials on the unit circle.
//!
//! Szegő recursion with `Lambda(alpha, z) = [[z, -conj(alpha)], [-alpha z, 1]]`:
//! `(Phi_n, Phi_n^*)` is the product `Lambda(alpha_{n-1}) ... Lambda(alpha_0)`
//! applied to `(1, 1)`, and `(Psi_n, -Psi_n^*)` the same product applied to
//! `(1, -1)`. Paraorthogonal polynomials close the recursion with the
//! unimodular `beta`:
//!
//! `P_N = z Phi_{N-1} - conj(beta) Phi_{N-1}^*`,
//! `Q_N = z Psi_{N-1} + conj(beta) Psi_{N-1}^*`,
//! `C = (P + Q)/2`, `S = (P - Q)/2`,
//! `F = -Q/P`, `f = -C/(z S)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::params::{CircleDiscreteMeasure, VerblunskyParams};
use crate::poly::{ComplexCoeffPoly, Poly};
use crate::roots::aberth_roots;
use crate::scalar::{Field, Real, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct SzegoPair {
    pub phi: ComplexCoeffPoly,
    pub phi_star: ComplexCoeffPoly,
    pub psi: ComplexCoeffPoly,
    pub psi_star: ComplexCoeffPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParaFamily {
    pub p: ComplexCoeffPoly,
    pub q: ComplexCoeffPoly,
    pub c: ComplexCoeffPoly,
    pub s: ComplexCoeffPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmvMatrix {
    pub entries: Mat<C64>,
}

/// Coefficients of `(Phi_k, Phi_k^*, Psi_k, Psi_k^*)` for `k = 0..=n`.
pub fn szego_coeffs<C: Field>(alpha: &[C], n: usize) -> Vec<[Poly<C>; 4]> {
    let one = Poly::constant(C::one());
    let mut out = vec![[one.clone(), one.clone(), one.clone(), one]];
    for k in 0..n {
        let [phi, phis, psi, psis] = &out[k];
        let a = &alpha[k];
        let ab = a.conj();
        let next = [
            phi.shift().sub(&phis.scaled(&ab)),
            phis.sub(&phi.shift().scaled(a)),
            psi.shift().add(&psis.scaled(&ab)),
            psis.add(&psi.shift().scaled(a)),
        ];
        out.push(next);
    }
    out
}

/// Values `(Phi_k, Phi_k^*, Psi_k, Psi_k^*)(z)` for `k = 0..=n`.
pub fn szego_values<C: Field>(alpha: &[C], z: &C, n: usize) -> Vec<[C; 4]> {
    let mut out = vec![[C::one(), C::one(), C::one(), C::one()]];
    for k in 0..n {
        let [phi, phis, psi, psis] = out[k].clone();
        let a = alpha[k].clone();
        let ab = a.conj();
        out.push([
            z.clone() * phi.clone() - ab.clone() * phis.clone(),
            phis - a.clone() * z.clone() * phi,
            z.clone() * psi.clone() + ab * psis.clone(),
            psis + a * z.clone() * psi,
        ]);
    }
    out
}

/// Values `(P_N(z), Q_N(z))` from `alpha_0..alpha_{N-2}` and `beta`.
pub fn para_values<C: Field>(alpha: &[C], beta: &C, z: &C) -> (C, C) {
    let n = alpha.len();
    let [phi, phis, psi, psis] = szego_values(alpha, z, n).pop().unwrap_or_else(|| [C::one(), C::one(), C::one(), C::one()]);
    let bb = beta.conj();
    (z.clone() * phi - bb.clone() * phis, z.clone() * psi + bb * psis)
}

pub fn szego_polys(v: &VerblunskyParams, n: usize) -> Result<SzegoPair> {
    if n + 1 > v.size() {
        return Err(Error::Argument(format!("degree {n} outside 0..={}", v.size() - 1)));
    }
    let [phi, phi_star, psi, psi_star] = szego_coeffs(v.alpha(), n).pop().unwrap_or_else(unreachable_pair);
    Ok(SzegoPair { phi, phi_star, psi, psi_star })
}

fn unreachable_pair() -> [ComplexCoeffPoly; 4] {
    let one = Poly::constant(C64::one());
    [one.clone(), one.clone(), one.clone(), one]
}

fn para_from_szego<C: Field>(last: &[Poly<C>; 4], beta: &C) -> [Poly<C>; 4] {
    let bb = beta.conj();
    let [phi, phis, psi, psis] = last;
    let p = phi.shift().sub(&phis.scaled(&bb));
    let q = psi.shift().add(&psis.scaled(&bb));
    let half = C::from_f64(0.5);
    let c = p.add(&q).scaled(&half);
    let s = p.sub(&q).scaled(&half);
    [p, q, c, s]
}

pub fn para_family(v: &VerblunskyParams) -> ParaFamily {
    let last = szego_coeffs(v.alpha(), v.size() - 1).pop().unwrap_or_else(unreachable_pair);
    let [p, q, c, s] = para_from_szego(&last, &v.beta());
    ParaFamily { p, q, c, s }
}

/// Coefficient residuals of stripping alpha_0 from the C/S and P/Q families.
#[derive(Clone, Debug, PartialEq)]
pub struct StripReport {
    pub full: ParaFamily,
    pub stripped: ParaFamily,
    /// max residual of `C_n = z C_{n-1} - alpha_0 z S_{n-1}`, `S_n = -conj(alpha_0) C_{n-1} + S_{n-1}`.
    pub cs_residual: f64,
    /// max residual of the same step written with `z(C_{n-1} - alpha_0 z S_{n-1})`.
    pub cs_residual_factored: f64,
    /// max residual of the induced P/Q stripping formulas.
    pub pq_residual: f64,
}

pub fn strip_cs(v: &VerblunskyParams) -> Result<StripReport> {
    let w = v.stripped().filter(|_| v.size() >= 2).ok_or_else(|| Error::Argument("stripping needs N >= 2".into()))?;
    let full = para_family(v);
    let stripped = para_family(&w);
    let a0 = v.alpha()[0];
    let ab = a0.conj();
    let z = Poly::monomial(1);
    let (c1, s1) = (&stripped.c, &stripped.s);
    let c_expect = c1.shift().sub(&s1.shift().scaled(&a0));
    let s_expect = s1.sub(&c1.scaled(&ab));
    let cs_residual = full.c.max_diff(&c_expect).max(full.s.max_diff(&s_expect));
    let c_factored = c1.sub(&s1.shift().scaled(&a0)).shift();
    let cs_residual_factored = full.c.max_diff(&c_factored).max(full.s.max_diff(&s_expect));
    // P_n = 1/2 (z - conj a + 1 - a z) P' + 1/2 (z - conj a - 1 + a z) Q'
    // Q_n = 1/2 (z + conj a + 1 + a z) Q' + 1/2 (z + conj a - 1 - a z) P'
    let one = Poly::constant(C64::one());
    let az = z.scaled(&a0);
    let abp = Poly::constant(ab);
    let half = C64::new(0.5, 0.0);
    let k1 = z.sub(&abp).add(&one).sub(&az).scaled(&half);
    let k2 = z.sub(&abp).sub(&one).add(&az).scaled(&half);
    let k3 = z.add(&abp).add(&one).add(&az).scaled(&half);
    let k4 = z.add(&abp).sub(&one).sub(&az).scaled(&half);
    let p_expect = k1.mul(&stripped.p).add(&k2.mul(&stripped.q));
    let q_expect = k3.mul(&stripped.q).add(&k4.mul(&stripped.p));
    let pq_residual = full.p.max_diff(&p_expect).max(full.q.max_diff(&q_expect));
    Ok(StripReport { full, stripped, cs_residual, cs_residual_factored, pq_residual })
}

/// Zeros of `P_N` and `Q_N` on the circle with the interlacing outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleInterlacing {
    /// Arguments in `(-pi, pi]`, ascending.
    pub p_angles: Vec<f64>,
    pub q_angles: Vec<f64>,
    /// Largest `||z| - 1|` over all zeros.
    pub max_radius_error: f64,
    /// Angles strictly alternate around the circle.
    pub interlaced: bool,
    pub min_separation: f64,
}

/// Zeros of the paraorthogonal `P_N` and `Q_N` alternate around the circle.
/// Angular separations below `resolution` count as ties.
pub fn para_zeros_interlace(v: &VerblunskyParams, resolution: f64) -> Result<CircleInterlacing> {
    let fam = para_family(v);
    let pz = aberth_roots(&fam.p.coeffs, Some(1.0))?;
    let qz = aberth_roots(&fam.q.coeffs, Some(1.0))?;
    let max_radius_error = pz.iter().chain(&qz).map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let angles = |zs: &[C64]| {
        let mut a: Vec<f64> = zs.iter().map(|z| z.arg()).collect();
        a.sort_by(f64::total_cmp);
        a
    };
    let (pa, qa) = (angles(&pz), angles(&qz));
    let mut merged: Vec<(f64, bool)> = pa.iter().map(|&t| (t, true)).chain(qa.iter().map(|&t| (t, false))).collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let m = merged.len();
    let mut ok = pa.len() == qa.len();
    let mut sep = f64::INFINITY;
    for k in 0..m {
        let (t0, f0) = merged[k];
        let (t1, f1) = merged[(k + 1) % m];
        let gap = if k + 1 == m { t1 + 2.0 * core::f64::consts::PI - t0 } else { t1 - t0 };
        sep = sep.min(gap);
        ok &= f0 != f1 && gap > resolution;
    }
    Ok(CircleInterlacing { p_angles: pa, q_angles: qa, max_radius_error, interlaced: ok, min_separation: sep })
}

pub fn caratheodory_f(v: &VerblunskyParams, z: C64) -> Result<C64> {
    let (p, q) = para_values(v.alpha(), &v.beta(), &z);
    if p.norm() < 1e-14 {
        return Err(Error::Pole { at: z });
    }
    Ok(-q / p)
}

pub fn schur_f(v: &VerblunskyParams, z: C64) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(Error::Pole { at: z });
    }
    let (p, q) = para_values(v.alpha(), &v.beta(), &z);
    let c = (p + q) * 0.5;
    let s = (p - q) * 0.5;
    if s.norm() < 1e-14 {
        return Err(Error::Pole { at: z });
    }
    Ok(-c / (z * s))
}

/// `[[conj a, rho], [rho, -a]]`.
fn theta_block<R: Real>(a: &Complex<R>) -> [Complex<R>; 4] {
    let rho = (R::one() - a.re.clone() * a.re.clone() - a.im.clone() * a.im.clone()).sqrt();
    let rho = Complex::new(rho, R::zero());
    [a.conj(), rho.clone(), rho, -a.clone()]
}

fn place_blocks<R: Real>(m: &mut Mat<Complex<R>>, start: usize, coeffs: &[Complex<R>], first: usize) {
    let n = m.n;
    let mut pos = start;
    let mut k = first;
    while pos < n {
        if pos + 1 < n {
            let [t00, t01, t10, t11] = theta_block(&coeffs[k]);
            m.set(pos, pos, t00);
            m.set(pos, pos + 1, t01);
            m.set(pos + 1, pos, t10);
            m.set(pos + 1, pos + 1, t11);
        } else {
            // boundary block: alpha_{N-1} = beta unimodular, rho = 0
            m.set(pos, pos, coeffs[k].conj());
        }
        pos += 2;
        k += 2;
    }
}

/// The `L` and `M` factors of the CMV matrix,
/// `L = Theta_0 + Theta_2 + ...`, `M = 1 + Theta_1 + Theta_3 + ...`.
pub fn cmv_factors<R: Real>(alpha: &[Complex<R>], beta: &Complex<R>) -> (Mat<Complex<R>>, Mat<Complex<R>>) {
    let n = alpha.len() + 1;
    let mut coeffs = alpha.to_vec();
    coeffs.push(beta.clone());
    let mut l = Mat::zeros(n);
    let mut m = Mat::zeros(n);
    place_blocks(&mut l, 0, &coeffs, 0);
    m.set(0, 0, Complex::one());
    if n > 1 {
        place_blocks(&mut m, 1, &coeffs, 1);
    }
    (l, m)
}

pub fn cmv_generic<R: Real>(alpha: &[Complex<R>], beta: &Complex<R>) -> Mat<Complex<R>> {
    let (l, m) = cmv_factors(alpha, beta);
    l.mul(&m)
}

pub fn cmv_matrix(v: &VerblunskyParams) -> CmvMatrix {
    CmvMatrix { entries: cmv_generic(v.alpha(), &v.beta()) }
}

/// Zeros of `P_N` (projected to the circle) and residue weights.
pub fn cmv_to_measure(v: &VerblunskyParams) -> Result<CircleDiscreteMeasure> {
    let fam = para_family(v);
    let roots = aberth_roots(&fam.p.coeffs, Some(1.0))?;
    let dp = fam.p.derivative();
    let mut theta = Vec::with_capacity(roots.len());
    let mut mu = Vec::with_capacity(roots.len());
    for r in roots {
        let z = r / r.norm();
        let w = fam.q.eval(&z) / (z * dp.eval(&z) * 2.0);
        if w.im.abs() > 1e-8 {
            return Err(Error::Consistency(format!("weight {} + {}i is not real", w.re, w.im)));
        }
        theta.push(z.arg());
        mu.push(w.re);
    }
    CircleDiscreteMeasure::new(theta, mu)
}

fn node_polys(nodes: &[C64], mu: &[f64]) -> (ComplexCoeffPoly, ComplexCoeffPoly) {
    let lin = |z: C64| Poly::new(vec![-z, C64::one()]);
    let p = nodes.iter().fold(Poly::constant(C64::one()), |acc, &z| acc.mul(&lin(z)));
    let mut q = Poly::zero();
    for (j, &zj) in nodes.iter().enumerate() {
        let mut term = Poly::new(vec![zj, C64::one()]).scaled(&C64::new(mu[j], 0.0));
        for (l, &zl) in nodes.iter().enumerate() {
            if l != j {
                term = term.mul(&lin(zl));
            }
        }
        q = q.add(&term);
    }
    (p, q)
}

/// `beta = (-1)^{N+1} prod conj(z_j)`.
pub fn beta_from_nodes(nodes: &[C64]) -> C64 {
    let prod = nodes.iter().fold(C64::one(), |acc, z| acc * z.conj());
    if nodes.len() % 2 == 1 {
        prod
    } else {
        -prod
    }
}

/// Schur algorithm on the rational Schur function built from nodes and weights.
pub fn measure_to_verblunsky(m: &CircleDiscreteMeasure) -> Result<VerblunskyParams> {
    let nodes = m.nodes();
    let n = nodes.len();
    let (p, q) = node_polys(&nodes, m.mu());
    let half = C64::new(0.5, 0.0);
    let c = p.add(&q).scaled(&half);
    let s = p.sub(&q).scaled(&half);
    // f = -C/(zS); C(0) vanishes since the weights sum to one
    let mut num: Vec<C64> = c.coeffs[1..].iter().map(|x| -x).collect();
    let mut den: Vec<C64> = s.coeffs[..n].to_vec();
    let mut alpha = Vec::with_capacity(n - 1);
    for j in 0..n {
        let g = num[0] / den[0];
        if j + 1 == n {
            let beta = beta_from_nodes(&nodes);
            if (g - beta).norm() > 1e-6 {
                return Err(Error::Consistency(format!("Schur boundary value {g} disagrees with node product {beta}")));
            }
            return VerblunskyParams::new(alpha, beta);
        }
        if g.norm() >= 1.0 - 1e-13 {
            return Err(Error::IllConditioned(format!("|alpha_{j}| = {} reached the circle", g.norm())));
        }
        alpha.push(g);
        let gb = g.conj();
        let len = num.len();
        let next_num: Vec<C64> = (1..len).map(|k| num[k] - g * den[k]).collect();
        let next_den: Vec<C64> = (0..len - 1).map(|k| den[k] - gb * num[k]).collect();
        let s = next_den.iter().map(|x| x.norm()).fold(0.0, f64::max);
        num = next_num.iter().map(|x| x / s).collect();
        den = next_den.iter().map(|x| x / s).collect();
    }
    Err(Error::Argument("empty measure".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn first_degree_polys() {
        let a0 = c(0.3, -0.2);
        let v = VerblunskyParams::new(vec![a0], c(0.0, 1.0)).unwrap();
        let s = szego_polys(&v, 1).unwrap();
        assert_eq!(s.phi.coeffs, vec![-a0.conj(), C64::one()]);
        assert_eq!(s.psi.coeffs, vec![a0.conj(), C64::one()]);
        let v = VerblunskyParams::new(vec![a0, c(0.0, 0.0)], c(1.0, 0.0)).unwrap();
        let s = szego_polys(&v, 2).unwrap();
        assert!(s.phi.max_diff(&Poly::new(vec![c(0.0, 0.0), -a0.conj(), C64::one()])) < 1e-16);
    }

    #[test]
    fn size_one_family() {
        let beta = C64::from_polar(1.0, 0.7);
        let v = VerblunskyParams::new(vec![], beta).unwrap();
        let f = para_family(&v);
        assert_eq!(f.p.coeffs, vec![-beta.conj(), C64::one()]);
        assert_eq!(f.q.coeffs, vec![beta.conj(), C64::one()]);
        assert_eq!(f.c.coeffs, vec![c(0.0, 0.0), C64::one()]);
        assert_eq!(f.s.coeffs, vec![-beta.conj(), c(0.0, 0.0)]);
        let cm = cmv_matrix(&v);
        assert_eq!(*cm.entries.get(0, 0), beta.conj());
        assert!((schur_f(&v, c(0.2, 0.1)).unwrap() - beta).norm() < 1e-15);
        let m = cmv_to_measure(&v).unwrap();
        assert!((m.theta()[0] + 0.7).abs() < 1e-14);
        let back = measure_to_verblunsky(&m).unwrap();
        assert!((back.beta() - beta).norm() < 1e-14);
    }

    #[test]
    fn free_case_measure() {
        let v = VerblunskyParams::new(vec![c(0.0, 0.0); 3], C64::one()).unwrap();
        let m = cmv_to_measure(&v).unwrap();
        for &w in m.mu() {
            assert!((w - 0.25).abs() < 1e-14);
        }
        let back = measure_to_verblunsky(&m).unwrap();
        assert!(back.alpha().iter().all(|a| a.norm() < 1e-14));
        assert!((back.beta() - C64::one()).norm() < 1e-14);
    }
}
