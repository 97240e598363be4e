//! Dense polynomials with coefficients in ascending degree order.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use crate::scalar::{Field, Real, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    pub coeffs: Vec<T>,
}

pub type RealCoeffPoly = Poly<f64>;
pub type ComplexCoeffPoly = Poly<C64>;

/// Horner evaluation of ascending coefficients at `z`.
pub fn poly_eval<T: Field>(coeffs: &[T], z: &T) -> T {
    let mut acc = T::zero();
    for c in coeffs.iter().rev() {
        acc = acc * z.clone() + c.clone();
    }
    acc
}

impl<T: Field> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Poly { coeffs }
    }

    /// Degree by storage length; `None` for the empty (zero) polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `z^k`, zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, z: &T) -> T {
        poly_eval(&self.coeffs, z)
    }

    /// Drops trailing coefficients with magnitude at most `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.last().is_some_and(|c| c.magnitude() <= tol) {
            self.coeffs.pop();
        }
        self
    }

    pub fn derivative(&self) -> Self {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale(k as f64))
                .collect(),
        }
    }

    /// Multiplication by `z`.
    pub fn shift(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn scaled(&self, s: &T) -> Self {
        Poly { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly { coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly { coeffs: (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly { coeffs }
    }

    /// Conjugate reversal at stated degree `n`: `z^n conj(p(1/conj z))`.
    pub fn star(&self, n: usize) -> Self {
        Poly { coeffs: (0..=n).map(|k| self.coeff(n - k).conj()).collect() }
    }

    /// Coefficient-wise maximum of `|self - other|`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|k| (self.coeff(k) - other.coeff(k)).magnitude()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

impl<R: Real> Poly<R> {
    /// Same polynomial with complex coefficients.
    pub fn complexify(&self) -> Poly<Complex<R>> {
        Poly { coeffs: self.coeffs.iter().map(|c| Complex::new(c.clone(), R::zero())).collect() }
    }
}

impl RealCoeffPoly {
    /// Evaluate a real polynomial at a complex point.
    pub fn eval_complex(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

/// Bezoutian kernel `(f(z)g(w) - f(w)g(z)) / (z - w)`, continued by
/// `f'(z)g(z) - f(z)g'(z)` when `|z - w| < 1e-8 max(1, |z|)`.
pub fn bezout_kernel<T: Field>(f: &Poly<T>, g: &Poly<T>, z: &T, w: &T) -> T {
    let d = z.clone() - w.clone();
    if d.magnitude() < 1e-8 * z.magnitude().max(1.0) {
        let (fp, gp) = (f.derivative(), g.derivative());
        return fp.eval(z) * g.eval(z) - f.eval(z) * gp.eval(z);
    }
    (f.eval(z) * g.eval(w) - f.eval(w) * g.eval(z)) / d
}

/// Bezoutian kernel from point values, for families where only values are at
/// hand. `near` supplies the diagonal continuation `f'(z)g(z) - f(z)g'(z)`.
pub fn bezout_values<T: Field>(fz: &T, gz: &T, fw: &T, gw: &T, z: &T, w: &T, near: impl FnOnce() -> T) -> T {
    let d = z.clone() - w.clone();
    if d.magnitude() < 1e-8 * z.magnitude().max(1.0) {
        return near();
    }
    (fz.clone() * gw.clone() - fw.clone() * gz.clone()) / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn evaluation_examples() {
        let p = RealCoeffPoly::new(vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.eval(&2.0), 3.0);
        assert_eq!(RealCoeffPoly::zero().eval(&5.0), 0.0);
        assert_eq!(RealCoeffPoly::constant(4.5).eval(&-7.0), 4.5);
    }

    #[test]
    fn dual_horner_matches_derivative_polynomial() {
        let p = RealCoeffPoly::new(vec![0.5, -1.0, 2.0, 3.0]);
        let x = Dual::variable(0.7, 0, 1);
        let coeffs: Vec<Dual> = p.coeffs.iter().map(|&c| Dual::constant(c)).collect();
        let v = poly_eval(&coeffs, &x);
        assert!((v.value - p.eval(&0.7)).abs() < 1e-15);
        assert!((v.partial(0) - p.derivative().eval(&0.7)).abs() < 1e-14);
    }

    #[test]
    fn bezoutian_examples() {
        let f = RealCoeffPoly::new(vec![0.0, 1.0]);
        let g = RealCoeffPoly::constant(1.0);
        assert!((bezout_kernel(&f, &g, &2.0, &3.0) - 1.0).abs() < 1e-15);
        let h = RealCoeffPoly::new(vec![1.0, -2.0, 0.5]);
        assert_eq!(bezout_kernel(&h, &h, &0.3, &1.7), 0.0);
        let sq = RealCoeffPoly::new(vec![0.0, 0.0, 1.0]);
        assert!((bezout_kernel(&sq, &f, &1.0, &1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn star_uses_stated_degree() {
        let p = ComplexCoeffPoly::new(vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        let s = p.star(2);
        assert_eq!(s.coeffs, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, -1.0)]);
    }
}
