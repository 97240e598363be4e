//! Orthogonal polynomials on the real line.
//!
//! Monic polynomials follow `P_{j+1} = (x - b_{j+1}) P_j - a_j^2 P_{j-1}`.
//! The second-kind polynomial `Q_n` is `P_{n-1}` of the parameters with the
//! first row and column of the Jacobi matrix removed, and the m-function is
//! `m(z) = -Q_N(z) / P_N(z) = sum_j rho_j / (x_j - z)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, Mat};
use crate::params::{JacobiParams, RealDiscreteMeasure};
use crate::poly::{Poly, RealCoeffPoly};
use crate::scalar::{Field, C64};

/// Every polynomial attached to a Jacobi point.
#[derive(Clone, Debug, PartialEq)]
pub struct OprlFamily {
    pub params: JacobiParams,
    /// `P_0..P_N`.
    pub polys: Vec<RealCoeffPoly>,
    /// `Q_1..Q_N`.
    pub second: Vec<RealCoeffPoly>,
}

/// Coefficients of `P_0..P_n` for parameters in any field.
pub fn monic_coeffs<T: Field>(b: &[T], a: &[T], n: usize) -> Vec<Poly<T>> {
    let mut out: Vec<Poly<T>> = Vec::with_capacity(n + 1);
    out.push(Poly::constant(T::one()));
    for j in 0..n {
        let next = out[j].shift().sub(&out[j].scaled(&b[j]));
        let next = if j == 0 {
            next
        } else {
            let a2 = a[j - 1].clone() * a[j - 1].clone();
            next.sub(&out[j - 1].scaled(&a2))
        };
        out.push(next);
    }
    out
}

/// Values `P_0(z)..P_n(z)`.
pub fn monic_values<T: Field>(b: &[T], a: &[T], z: &T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    for j in 0..n {
        let mut next = (z.clone() - b[j].clone()) * out[j].clone();
        if j > 0 {
            next = next - a[j - 1].clone() * a[j - 1].clone() * out[j - 1].clone();
        }
        out.push(next);
    }
    out
}

/// Values `Q_0(z)..Q_n(z)` with `Q_0 = 0`, `Q_1 = 1`.
pub fn second_kind_values<T: Field>(b: &[T], a: &[T], z: &T, n: usize) -> Vec<T> {
    let mut out = vec![T::zero()];
    if n == 0 {
        return out;
    }
    let inner = monic_values(&b[1..], if a.is_empty() { a } else { &a[1..] }, z, n - 1);
    out.extend(inner);
    out
}

fn range_check(n: usize, lo: usize, big_n: usize) -> Result<()> {
    if n < lo || n > big_n {
        return Err(Error::Argument(format!("degree {n} outside {lo}..={big_n}")));
    }
    Ok(())
}

pub fn monic_oprl(j: &JacobiParams, n: usize) -> Result<RealCoeffPoly> {
    range_check(n, 0, j.size())?;
    Ok(monic_coeffs(j.b(), j.a(), n).pop().unwrap_or_else(|| Poly::constant(1.0)))
}

pub fn second_kind_oprl(j: &JacobiParams, n: usize) -> Result<RealCoeffPoly> {
    range_check(n, 1, j.size())?;
    let a = j.a();
    let tail_a = if a.is_empty() { a } else { &a[1..] };
    Ok(monic_coeffs(&j.b()[1..], tail_a, n - 1).pop().unwrap_or_else(|| Poly::constant(1.0)))
}

pub fn oprl_family(j: &JacobiParams) -> OprlFamily {
    let n = j.size();
    let polys = monic_coeffs(j.b(), j.a(), n);
    let a = j.a();
    let tail_a = if a.is_empty() { a } else { &a[1..] };
    let second = monic_coeffs(&j.b()[1..], tail_a, n - 1);
    OprlFamily { params: j.clone(), polys, second }
}

/// Dense Jacobi matrix over any field.
pub fn jacobi_matrix<T: Field>(b: &[T], a: &[T]) -> Mat<T> {
    let n = b.len();
    let mut m = Mat::zeros(n);
    for i in 0..n {
        m.set(i, i, b[i].clone());
    }
    for i in 0..a.len() {
        m.set(i, i + 1, a[i].clone());
        m.set(i + 1, i, a[i].clone());
    }
    m
}

/// `m(z) = -Q_N(z)/P_N(z)`.
pub fn m_function(j: &JacobiParams, z: C64) -> Result<C64> {
    let (x, _) = tridiagonal_eigen(j.b(), j.a())?;
    if let Some(&xj) = x.iter().find(|&&xj| (z - xj).norm() < 1e-12 * xj.abs().max(1.0)) {
        return Err(Error::Pole { at: C64::new(xj, 0.0) });
    }
    let b: Vec<C64> = j.b().iter().map(|&v| C64::new(v, 0.0)).collect();
    let a: Vec<C64> = j.a().iter().map(|&v| C64::new(v, 0.0)).collect();
    let n = j.size();
    let p = monic_values(&b, &a, &z, n)[n];
    let q = second_kind_values(&b, &a, &z, n)[n];
    Ok(-q / p)
}

/// Eigenvalues of J ascending with weights equal to squared first components.
pub fn jacobi_to_measure(j: &JacobiParams) -> Result<RealDiscreteMeasure> {
    let (x, vecs) = tridiagonal_eigen(j.b(), j.a())?;
    let n = x.len();
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for w in x.windows(2) {
        if w[1] - w[0] < 1e-12 * scale {
            return Err(Error::DegenerateSpectrum { gap: w[1] - w[0] });
        }
    }
    let rho: Vec<f64> = (0..n).map(|k| vecs.get(0, k).powi(2)).collect();
    RealDiscreteMeasure::new(x, rho)
}

/// Zeros of `P_N` and `Q_N` with the outcome of the interlacing check.
#[derive(Clone, Debug, PartialEq)]
pub struct Interlacing {
    pub p_zeros: Vec<f64>,
    pub q_zeros: Vec<f64>,
    /// Certified bound on the error of every computed zero: the largest
    /// eigenpair residual `|J v - x v|` over unit `v`.
    pub root_accuracy: f64,
    /// Every zero of `Q_N` lies strictly between consecutive zeros of `P_N`
    /// by more than `root_accuracy`, and `root_accuracy <= resolution`.
    pub interlaced: bool,
    /// Smallest distance between a zero of `P_N` and one of `Q_N`.
    pub min_separation: f64,
}

fn eigen_with_bound(b: &[f64], a: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (x, v) = tridiagonal_eigen(b, a)?;
    let n = b.len();
    let mut bound = 0.0f64;
    for (k, &xk) in x.iter().enumerate() {
        let col = |i: usize| *v.get(i, k);
        let mut r2 = 0.0;
        for i in 0..n {
            let mut jv = b[i] * col(i);
            if i > 0 {
                jv += a[i - 1] * col(i - 1);
            }
            if i + 1 < n {
                jv += a[i] * col(i + 1);
            }
            r2 += (jv - xk * col(i)).powi(2);
        }
        let norm2: f64 = (0..n).map(|i| col(i).powi(2)).sum();
        bound = bound.max((r2 / norm2).sqrt());
    }
    Ok((x, bound))
}

/// `x_1 < y_1 < x_2 < ... < y_{N-1} < x_N` with `x` the zeros of `P_N` (the
/// spectrum of J) and `y` those of `Q_N` (the spectrum of J with its first
/// row and column removed). A gap counts only when it exceeds the certified
/// root accuracy, which itself must not exceed `resolution`.
pub fn zeros_interlace(j: &JacobiParams, resolution: f64) -> Result<Interlacing> {
    let (x, ex) = eigen_with_bound(j.b(), j.a())?;
    let (y, ey) = match j.stripped() {
        Some(s) => eigen_with_bound(s.b(), s.a())?,
        None => (Vec::new(), 0.0),
    };
    let acc = ex.max(ey);
    let mut ok = acc <= resolution;
    let mut sep = f64::INFINITY;
    for (k, yk) in y.iter().enumerate() {
        let (lo, hi) = (yk - x[k], x[k + 1] - yk);
        sep = sep.min(lo.min(hi));
        ok &= lo > 2.0 * acc && hi > 2.0 * acc;
    }
    Ok(Interlacing { p_zeros: x, q_zeros: y, root_accuracy: acc, interlaced: ok, min_separation: sep })
}

/// Lanczos on `diag(x)` from `sqrt(rho)` with full reorthogonalization.
/// Returns the Jacobi parameters and the Lanczos basis (rows are basis vectors).
pub fn lanczos(m: &RealDiscreteMeasure) -> Result<(JacobiParams, Vec<Vec<f64>>)> {
    let x = m.x();
    let n = x.len();
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut q: Vec<Vec<f64>> = vec![m.rho().iter().map(|r| r.sqrt()).collect()];
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let mut w: Vec<f64> = x.iter().zip(&q[k]).map(|(xi, qi)| xi * qi).collect();
        let bk: f64 = w.iter().zip(&q[k]).map(|(wi, qi)| wi * qi).sum();
        b.push(bk);
        if k + 1 == n {
            break;
        }
        for i in 0..n {
            w[i] -= bk * q[k][i];
            if k > 0 {
                w[i] -= a[k - 1] * q[k - 1][i];
            }
        }
        for _pass in 0..2 {
            for qj in &q {
                let c: f64 = w.iter().zip(qj).map(|(wi, qi)| wi * qi).sum();
                w.iter_mut().zip(qj).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let ak2: f64 = w.iter().map(|v| v * v).sum();
        if ak2 < 1e-14 * scale * scale {
            return Err(Error::IllConditioned(format!("a_{}^2 = {ak2:e} lost positivity", k + 1)));
        }
        let ak = ak2.sqrt();
        a.push(ak);
        q.push(w.iter().map(|v| v / ak).collect());
    }
    Ok((JacobiParams::new(b, a)?, q))
}

pub fn measure_to_jacobi(m: &RealDiscreteMeasure) -> Result<JacobiParams> {
    lanczos(m).map(|(j, _)| j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let j = JacobiParams::new(vec![2.5], vec![]).unwrap();
        assert_eq!(monic_oprl(&j, 1).unwrap().coeffs, vec![-2.5, 1.0]);
        assert_eq!(monic_oprl(&j, 0).unwrap().coeffs, vec![1.0]);
        let j = JacobiParams::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(monic_oprl(&j, 2).unwrap().coeffs, vec![-1.0, 0.0, 1.0]);
        assert!(monic_oprl(&j, 3).is_err());
        assert_eq!(second_kind_oprl(&j, 1).unwrap().coeffs, vec![1.0]);
        let j = JacobiParams::new(vec![0.4, -1.5], vec![0.9]).unwrap();
        assert_eq!(second_kind_oprl(&j, 2).unwrap().coeffs, vec![1.5, 1.0]);
        let j = JacobiParams::new(vec![0.0; 3], vec![1.0, 1.0]).unwrap();
        assert_eq!(second_kind_oprl(&j, 3).unwrap().coeffs, vec![-1.0, 0.0, 1.0]);
        assert!(second_kind_oprl(&j, 0).is_err());
    }

    #[test]
    fn measure_examples() {
        let j = JacobiParams::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let m = jacobi_to_measure(&j).unwrap();
        assert!((m.x()[0] + 1.0).abs() < 1e-15 && (m.x()[1] - 1.0).abs() < 1e-15);
        assert!((m.rho()[0] - 0.5).abs() < 1e-15);
        let back = measure_to_jacobi(&m).unwrap();
        assert!(back.max_diff(&j) < 1e-15);
        let single = RealDiscreteMeasure::new(vec![0.25], vec![1.0]).unwrap();
        assert_eq!(measure_to_jacobi(&single).unwrap().b(), &[0.25]);
    }

    #[test]
    fn m_function_single_node() {
        let j = JacobiParams::new(vec![0.0], vec![]).unwrap();
        let z = C64::new(0.3, 0.8);
        assert!((m_function(&j, z).unwrap() + 1.0 / z).norm() < 1e-15);
        assert!(matches!(m_function(&j, C64::new(0.0, 0.0)), Err(Error::Pole { .. })));
    }
}
