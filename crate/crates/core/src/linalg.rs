//! Small dense linear algebra: symmetric tridiagonal QL, cyclic Jacobi for
//! dense symmetric/Hermitian matrices, LU determinants and inverses, and a
//! square matrix type generic over [`Field`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::{Field, C64};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out: Mat<T> = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.magnitude() == 0.0 && a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let idx = i * n + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * o.data[k * n + j].clone();
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out: Mat<T> = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out: Mat<T> = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// `[I, A, A^2, ..., A^k]`.
    pub fn powers(&self, k: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(Mat::identity(self.n));
        for j in 0..k {
            let next = out[j].mul(self);
            out.push(next);
        }
        out
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` by implicit-shift QL. Returns ascending eigenvalues
/// and the matrix of normalized eigenvectors (column `j` belongs to value `j`,
/// stored row-major).
pub fn tridiagonal_eigen(d: &[f64], e: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = d.len();
    if e.len() + 1 != n && !(n == 0 && e.is_empty()) {
        return Err(Error::Argument("off-diagonal length must be N-1".into()));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(core::iter::once(0.0)).collect();
    let mut z = Mat::<f64>::identity(n);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence("tridiagonal QL".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk1 = z.data[k * n + i + 1];
                    let zk = z.data[k * n + i];
                    z.data[k * n + i + 1] = s * zk + c * zk1;
                    z.data[k * n + i] = c * zk - s * zk1;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let mut vecs = Mat::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs.data[k * n + new] = z.data[k * n + old];
        }
    }
    Ok((vals, vecs))
}

/// Cyclic Jacobi eigen-decomposition of a dense real symmetric matrix.
/// Returns ascending eigenvalues and eigenvectors as columns.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.n;
    let mut a = a.clone();
    let mut v = Mat::<f64>::identity(n);
    let scale = a.data.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.data[i * n + j].powi(2))
            .sum();
        if off.sqrt() <= 1e-15 * scale * (n as f64) {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a.data[i * n + i].total_cmp(&a.data[j * n + j]));
            let vals = order.iter().map(|&i| a.data[i * n + i]).collect();
            let mut vecs = Mat::zeros(n);
            for (new, &old) in order.iter().enumerate() {
                for k in 0..n {
                    vecs.data[k * n + new] = v.data[k * n + old];
                }
            }
            return Ok((vals, vecs));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a.data[p * n + p];
                let aqq = a.data[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.data[k * n + p];
                    let akq = a.data[k * n + q];
                    a.data[k * n + p] = c * akp - s * akq;
                    a.data[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.data[p * n + k];
                    let aqk = a.data[q * n + k];
                    a.data[p * n + k] = c * apk - s * aqk;
                    a.data[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.data[k * n + p];
                    let vkq = v.data[k * n + q];
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::NoConvergence("Jacobi eigenvalue sweeps".into()))
}

/// Eigenvalues and eigenvectors of a Hermitian matrix via the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]`, in which every eigenvalue appears twice.
pub fn hermitian_eigen(h: &Mat<C64>) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = h.n;
    let mut big = Mat::<f64>::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = *h.get(i, j);
            big.set(i, j, z.re);
            big.set(i + n, j + n, z.re);
            big.set(i, j + n, -z.im);
            big.set(i + n, j, z.im);
        }
    }
    let (vals, vecs) = symmetric_eigen(&big)?;
    let mut out_vals = Vec::with_capacity(n);
    let mut out_vecs = Vec::with_capacity(n);
    for k in 0..n {
        let col = 2 * k;
        out_vals.push(0.5 * (vals[col] + vals[col + 1]));
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(*vecs.get(i, col), *vecs.get(i + n, col))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        out_vecs.push(v);
    }
    Ok((out_vals, out_vecs))
}

/// LU factorization with partial pivoting; returns `(lu, perm, sign)`.
fn lu(a: &Mat<f64>) -> Result<(Mat<f64>, Vec<usize>, f64)> {
    let n = a.n;
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, m.data[i * n + k].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        if piv != k {
            for j in 0..n {
                m.data.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let pivot = m.data[k * n + k];
        for i in k + 1..n {
            let f = m.data[i * n + k] / pivot;
            m.data[i * n + k] = f;
            for j in k + 1..n {
                m.data[i * n + j] -= f * m.data[k * n + j];
            }
        }
    }
    Ok((m, perm, sign))
}

pub fn determinant(a: &Mat<f64>) -> f64 {
    match lu(a) {
        Ok((m, _, sign)) => (0..a.n).fold(sign, |acc, i| acc * m.data[i * a.n + i]),
        Err(_) => 0.0,
    }
}

pub fn inverse(a: &Mat<f64>) -> Result<Mat<f64>> {
    let n = a.n;
    let (m, perm, _) = lu(a)?;
    let mut inv = Mat::zeros(n);
    for col in 0..n {
        let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= m.data[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= m.data[i * n + k] * x[k];
            }
            x[i] /= m.data[i * n + i];
        }
        for i in 0..n {
            inv.data[i * n + col] = x[i];
        }
    }
    Ok(inv)
}

/// Determinant of a complex matrix by Gaussian elimination with partial pivoting.
pub fn complex_determinant(a: &Mat<C64>) -> C64 {
    let n = a.n;
    let mut m = a.clone();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m.data[i * n + k].norm().total_cmp(&m.data[j * n + k].norm()))
            .unwrap_or(k);
        if m.data[piv * n + k].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != k {
            for j in 0..n {
                m.data.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = m.data[k * n + k];
        det *= pivot;
        for i in k + 1..n {
            let f = m.data[i * n + k] / pivot;
            for j in k + 1..n {
                let t = m.data[k * n + j];
                m.data[i * n + j] -= f * t;
            }
        }
    }
    det
}
