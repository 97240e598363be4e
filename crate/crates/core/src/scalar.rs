//! Scalar types: `f64`, forward-mode [`Dual`] numbers, and complex numbers over
//! either. All recurrences in the crate are written against [`Field`] (and
//! [`Real`] where square roots or exponentials are needed), so the same code
//! runs on plain floats and on derivative-carrying values.
//!
//! A `Dual` stores its full gradient. Constants carry an empty partials vector,
//! which arithmetic treats as the zero vector of whatever length the other
//! operand has; this keeps literals cheap.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, Num, One, Zero};

pub type C64 = Complex<f64>;

/// Arithmetic scalar with conjugation. Implemented for `f64`, [`Dual`] and
/// `Complex<R>` for any [`Real`] `R`.
pub trait Field: Clone + Debug + Num + Neg<Output = Self> {
    fn from_f64(x: f64) -> Self;
    fn conj(&self) -> Self;
    /// Modulus of the underlying value (derivatives ignored).
    fn magnitude(&self) -> f64;
    fn scale(&self, s: f64) -> Self {
        self.clone() * Self::from_f64(s)
    }
}

/// Real scalar: `f64` or [`Dual`].
pub trait Real: Field + PartialOrd {
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
}

impl Field for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(&self) -> Self {
        *self
    }
    fn magnitude(&self) -> f64 {
        Float::abs(*self)
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }
    fn exp(&self) -> Self {
        Float::exp(*self)
    }
    fn ln(&self) -> Self {
        Float::ln(*self)
    }
    fn sin(&self) -> Self {
        Float::sin(*self)
    }
    fn cos(&self) -> Self {
        Float::cos(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        Float::atan2(*self, *x)
    }
}

impl<R: Real> Field for Complex<R> {
    fn from_f64(x: f64) -> Self {
        Complex::new(R::from_f64(x), R::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn magnitude(&self) -> f64 {
        let (a, b) = (self.re.magnitude(), self.im.magnitude());
        Float::hypot(a, b)
    }
    fn scale(&self, s: f64) -> Self {
        Complex::new(self.re.scale(s), self.im.scale(s))
    }
}

/// Value plus gradient with respect to every active coordinate.
#[derive(Clone, Debug)]
pub struct Dual {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Dual { value, partials: Vec::new() }
    }

    /// Coordinate `index` of a `dim`-dimensional space, seeded with unit derivative.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut partials = vec![0.0; dim];
        partials[index] = 1.0;
        Dual { value, partials }
    }

    /// Seeds every coordinate of `point` as an independent variable.
    pub fn seed(point: &[f64]) -> Vec<Dual> {
        let d = point.len();
        point.iter().enumerate().map(|(i, &v)| Dual::variable(v, i, d)).collect()
    }

    /// Partial derivative `i`, zero when the gradient is implicit.
    pub fn partial(&self, i: usize) -> f64 {
        self.partials.get(i).copied().unwrap_or(0.0)
    }

    /// Gradient padded to length `dim`.
    pub fn gradient(&self, dim: usize) -> Vec<f64> {
        (0..dim).map(|i| self.partial(i)).collect()
    }

    fn chain(&self, value: f64, slope: f64) -> Dual {
        Dual { value, partials: self.partials.iter().map(|d| d * slope).collect() }
    }
}

fn combine(a: &[f64], b: &[f64], fa: f64, fb: f64) -> Vec<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (false, true) => a.iter().map(|x| fa * x).collect(),
        (true, false) => b.iter().map(|y| fb * y).collect(),
        (false, false) => {
            let n = a.len().max(b.len());
            (0..n)
                .map(|i| {
                    fa * a.get(i).copied().unwrap_or(0.0) + fb * b.get(i).copied().unwrap_or(0.0)
                })
                .collect()
        }
    }
}

impl PartialEq for Dual {
    fn eq(&self, other: &Self) -> bool {
        if self.value != other.value {
            return false;
        }
        let n = self.partials.len().max(other.partials.len());
        (0..n).all(|i| self.partial(i) == other.partial(i))
    }
}

impl PartialOrd for Dual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl<'a> Add<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn add(self, o: &Dual) -> Dual {
        Dual { value: self.value + o.value, partials: combine(&self.partials, &o.partials, 1.0, 1.0) }
    }
}
impl<'a> Sub<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn sub(self, o: &Dual) -> Dual {
        Dual { value: self.value - o.value, partials: combine(&self.partials, &o.partials, 1.0, -1.0) }
    }
}
impl<'a> Mul<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn mul(self, o: &Dual) -> Dual {
        Dual {
            value: self.value * o.value,
            partials: combine(&self.partials, &o.partials, o.value, self.value),
        }
    }
}
impl<'a> Div<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn div(self, o: &Dual) -> Dual {
        let q = self.value / o.value;
        Dual { value: q, partials: combine(&self.partials, &o.partials, 1.0 / o.value, -q / o.value) }
    }
}
impl<'a> Rem<&'a Dual> for &'a Dual {
    type Output = Dual;
    fn rem(self, o: &Dual) -> Dual {
        // a mod b = a - trunc(a/b) b, piecewise linear in (a, b)
        let k = Float::trunc(self.value / o.value);
        Dual { value: self.value % o.value, partials: combine(&self.partials, &o.partials, 1.0, -k) }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Dual {
            type Output = Dual;
            fn $m(self, o: Dual) -> Dual { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a Dual> for Dual {
            type Output = Dual;
            fn $m(self, o: &Dual) -> Dual { (&self).$m(o) }
        }
        impl $tr<f64> for Dual {
            type Output = Dual;
            fn $m(self, o: f64) -> Dual { (&self).$m(&Dual::constant(o)) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div, Rem rem);

impl AddAssign for Dual {
    fn add_assign(&mut self, o: Dual) {
        *self = &*self + &o;
    }
}
impl SubAssign for Dual {
    fn sub_assign(&mut self, o: Dual) {
        *self = &*self - &o;
    }
}
impl MulAssign for Dual {
    fn mul_assign(&mut self, o: Dual) {
        *self = &*self * &o;
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { value: -self.value, partials: self.partials.iter().map(|d| -d).collect() }
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.partials.iter().all(|d| *d == 0.0)
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> core::result::Result<Self, Self::FromStrRadixErr> {
        <f64 as Num>::from_str_radix(s, radix).map(Dual::constant)
    }
}

impl Field for Dual {
    fn from_f64(x: f64) -> Self {
        Dual::constant(x)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn magnitude(&self) -> f64 {
        Float::abs(self.value)
    }
    fn scale(&self, s: f64) -> Self {
        self.chain(self.value * s, s)
    }
}

impl Real for Dual {
    fn value(&self) -> f64 {
        self.value
    }
    fn sqrt(&self) -> Self {
        let r = Float::sqrt(self.value);
        self.chain(r, 0.5 / r)
    }
    fn exp(&self) -> Self {
        let e = Float::exp(self.value);
        self.chain(e, e)
    }
    fn ln(&self) -> Self {
        self.chain(Float::ln(self.value), 1.0 / self.value)
    }
    fn sin(&self) -> Self {
        self.chain(Float::sin(self.value), Float::cos(self.value))
    }
    fn cos(&self) -> Self {
        self.chain(Float::cos(self.value), -Float::sin(self.value))
    }
    fn atan2(&self, x: &Self) -> Self {
        let (y0, x0) = (self.value, x.value);
        let r2 = y0 * y0 + x0 * x0;
        Dual {
            value: Float::atan2(y0, x0),
            partials: combine(&self.partials, &x.partials, x0 / r2, -y0 / r2),
        }
    }
}

/// Complex number with real and imaginary parts carrying gradients.
pub type CDual = Complex<Dual>;

/// Lift a real scalar to a complex one with zero imaginary part.
pub fn cplx<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

/// Lift a complex constant into `Complex<R>`.
pub fn lift<R: Real>(z: C64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// Strip derivatives from a complex scalar.
pub fn complex_value<R: Real>(z: &Complex<R>) -> C64 {
    C64::new(z.re.value(), z.im.value())
}

/// `|z|^2` as a real scalar.
pub fn norm_sqr<R: Real>(z: &Complex<R>) -> R {
    z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()
}

/// Gradient of a complex dual value, `d Re + i d Im`, padded to `dim`.
pub fn complex_gradient(z: &CDual, dim: usize) -> Vec<C64> {
    (0..dim).map(|i| C64::new(z.re.partial(i), z.im.partial(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_rule() {
        let x = Dual::variable(1.5, 0, 2);
        let y = Dual::variable(-0.5, 1, 2);
        let f = x.clone() * y.clone();
        assert_eq!(f.partials, vec![-0.5, 1.5]);
        let g = x.clone() / y.clone();
        assert!((g.partial(0) - 1.0 / -0.5).abs() < 1e-15);
        assert!((g.partial(1) + 1.5 / 0.25).abs() < 1e-15);
    }

    #[test]
    fn constants_broadcast() {
        let x = Dual::variable(2.0, 1, 3);
        let c = Dual::constant(3.0);
        let s = c.clone() * x.clone() + c;
        assert_eq!(s.value, 9.0);
        assert_eq!(s.gradient(3), vec![0.0, 3.0, 0.0]);
    }

    #[test]
    fn transcendental_slopes() {
        let x = Dual::variable(0.7, 0, 1);
        assert!((x.sqrt().partial(0) - 0.5 / 0.7f64.sqrt()).abs() < 1e-15);
        assert!((x.exp().partial(0) - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.ln().partial(0) - 1.0 / 0.7).abs() < 1e-15);
        assert!((x.sin().partial(0) - 0.7f64.cos()).abs() < 1e-15);
        let y = Dual::variable(0.3, 0, 1);
        let one = Dual::constant(1.0);
        let a = y.atan2(&one);
        assert!((a.partial(0) - 1.0 / (1.0 + 0.09)).abs() < 1e-15);
    }

    #[test]
    fn complex_dual_arithmetic() {
        let u = Dual::variable(0.3, 0, 2);
        let v = Dual::variable(0.4, 1, 2);
        let a = Complex::new(u, v);
        let p = a.clone() * a.conj();
        assert!((p.re.value - 0.25).abs() < 1e-15);
        assert!((p.re.partial(0) - 0.6).abs() < 1e-15);
        assert!((p.re.partial(1) - 0.8).abs() < 1e-15);
        assert!(p.im.partial(0).abs() < 1e-15);
        let q = Complex::<Dual>::from_f64(1.0) / a;
        let expect = C64::new(1.0, 0.0) / C64::new(0.3, 0.4);
        assert!((complex_value(&q) - expect).norm() < 1e-15);
    }
}
