//! Periodic Jacobi and CMV parameters: transfer matrices, discriminants,
//! Floquet spectra, symmetric-function conversions, density-of-states
//! moments, and the Poisson commutation of discriminants.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;
use num_traits::{One, Zero};
#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Mat};
use crate::params::normalize_angle;
use crate::poisson::{
    evaluate_with_gradients, normalized_residual, Analytic, AnalyticField, Backend, BracketReport, Grid, PoissonTensor,
    SpectralData, SpectralField, Tolerances, Worst, FD_TOL, POLY_TOL,
};
use crate::poly::Poly;
use crate::roots::aberth_roots;
use crate::scalar::{lift, Real, C64};

/// Default tolerance for `{Delta(z), Delta(w)} = 0`.
pub const DISCRIMINANT_TOL: f64 = 1e-7;
/// Default tolerance for monodromy determinants and leading coefficients.
pub const MONODROMY_TOL: f64 = 1e-10;
/// Default tolerance for the theta dependence of symmetric functions.
pub const THETA_LAW_TOL: f64 = 1e-8;
/// Eigenvalue samples closer than this are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-6;
/// Quadrature points for density-of-states moments.
pub const DOS_POINTS: usize = 64;

/// Period-p Jacobi parameters `b_1..b_p`, `a_1..a_p`; `a_p` couples the
/// last site to the first of the next period.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOprl {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl PeriodicOprl {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidParams("periodic OPRL needs p >= 1 values of b and of a".into()));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite b".into()));
        }
        if let Some(j) = a.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidParams(format!("a_{} = {} is not positive", j + 1, a[j])));
        }
        Ok(PeriodicOprl { b, a })
    }
    pub fn period(&self) -> usize {
        self.b.len()
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn prod_a(&self) -> f64 {
        self.a.iter().product()
    }
    /// `(b_1..b_p, a_1..a_p)`.
    pub fn to_point(&self) -> Vec<f64> {
        let mut v = self.b.clone();
        v.extend_from_slice(&self.a);
        v
    }
    pub fn from_point(point: &[f64]) -> Result<Self> {
        if point.is_empty() || !point.len().is_multiple_of(2) {
            return Err(Error::Argument("periodic OPRL point must have length 2p".into()));
        }
        let p = point.len() / 2;
        PeriodicOprl::new(point[..p].to_vec(), point[p..].to_vec())
    }
}

/// Period-p Verblunsky coefficients `alpha_0..alpha_{p-1}`, p even.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOpuc {
    alpha: Vec<C64>,
}

impl PeriodicOpuc {
    pub fn new(alpha: Vec<C64>) -> Result<Self> {
        if alpha.is_empty() || !alpha.len().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("periodic OPUC needs an even period, got {}", alpha.len())));
        }
        if let Some(j) = alpha.iter().position(|z| !(z.norm() < 1.0)) {
            return Err(Error::InvalidParams(format!("|alpha_{j}| = {} is not below 1", alpha[j].norm())));
        }
        Ok(PeriodicOpuc { alpha })
    }
    pub fn period(&self) -> usize {
        self.alpha.len()
    }
    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }
    pub fn rho(&self, j: usize) -> f64 {
        (1.0 - self.alpha[j].norm_sqr()).sqrt()
    }
    pub fn prod_rho(&self) -> f64 {
        (0..self.period()).map(|j| self.rho(j)).product()
    }
    /// `(u_0, v_0, ..., u_{p-1}, v_{p-1})`.
    pub fn to_point(&self) -> Vec<f64> {
        self.alpha.iter().flat_map(|z| [z.re, z.im]).collect()
    }
    pub fn from_point(point: &[f64]) -> Result<Self> {
        if !point.len().is_multiple_of(2) {
            return Err(Error::Argument("periodic OPUC point must have even length".into()));
        }
        PeriodicOpuc::new(point.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PeriodicParams {
    Oprl(PeriodicOprl),
    Opuc(PeriodicOpuc),
}

impl PeriodicParams {
    pub fn period(&self) -> usize {
        match self {
            PeriodicParams::Oprl(p) => p.period(),
            PeriodicParams::Opuc(p) => p.period(),
        }
    }
    pub fn to_point(&self) -> Vec<f64> {
        match self {
            PeriodicParams::Oprl(p) => p.to_point(),
            PeriodicParams::Opuc(p) => p.to_point(),
        }
    }
    pub fn tensor(&self) -> PoissonTensor {
        match self {
            PeriodicParams::Oprl(p) => PoissonTensor::oprl_periodic(p.period()),
            PeriodicParams::Opuc(p) => PoissonTensor::opuc_periodic(p.period()),
        }
    }
    /// `prod a_j` or `prod rho_j`, the inverse leading coefficient of Delta.
    pub fn leading_product(&self) -> f64 {
        match self {
            PeriodicParams::Oprl(p) => p.prod_a(),
            PeriodicParams::Opuc(p) => p.prod_rho(),
        }
    }
    fn prefix(&self) -> &'static str {
        match self {
            PeriodicParams::Oprl(_) => "periodic_oprl",
            PeriodicParams::Opuc(_) => "periodic_opuc",
        }
    }
}

/// Transfer matrix over one period at a fixed `z`, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy {
    pub entries: [[C64; 2]; 2],
}

impl Monodromy {
    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }
    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }
}

type M2<T> = [T; 4];

fn mul2<T: Clone + core::ops::Add<Output = T> + core::ops::Mul<Output = T>>(x: &M2<T>, y: &M2<T>) -> M2<T> {
    let m = |a: &T, b: &T, c: &T, d: &T| a.clone() * b.clone() + c.clone() * d.clone();
    [
        m(&x[0], &y[0], &x[1], &y[2]),
        m(&x[0], &y[1], &x[1], &y[3]),
        m(&x[2], &y[0], &x[3], &y[2]),
        m(&x[2], &y[1], &x[3], &y[3]),
    ]
}

/// OPRL step `(u_j, u_{j-1}) -> (u_{j+1}, u_j)`:
/// `[[(z - b_j)/a_j, -a_{j-1}/a_j], [1, 0]]` with `a_0 = a_p`. Each step has
/// determinant `a_{j-1}/a_j`, so the period product has determinant 1.
fn oprl_transfer<R: Real>(b: &[R], a: &[R], z: &Complex<R>) -> M2<Complex<R>> {
    let p = b.len();
    let mut t = [Complex::one(), Complex::zero(), Complex::zero(), Complex::one()];
    for j in 0..p {
        let inv = R::one() / a[j].clone();
        let prev = a[(j + p - 1) % p].clone();
        let step = [
            (z.clone() - Complex::new(b[j].clone(), R::zero())) * Complex::new(inv.clone(), R::zero()),
            Complex::new(-(prev * inv), R::zero()),
            Complex::one(),
            Complex::zero(),
        ];
        t = mul2(&step, &t);
    }
    t
}

/// OPUC step `rho_j^{-1} [[z, -conj(alpha_j)], [-alpha_j z, 1]]`.
fn opuc_transfer<R: Real>(alpha: &[Complex<R>], z: &Complex<R>) -> M2<Complex<R>> {
    let mut t = [Complex::one(), Complex::zero(), Complex::zero(), Complex::one()];
    for a in alpha {
        let rho = (R::one() - a.re.clone() * a.re.clone() - a.im.clone() * a.im.clone()).sqrt();
        let s = Complex::new(R::one() / rho, R::zero());
        let step = [
            z.clone() * s.clone(),
            -a.conj() * s.clone(),
            -(a.clone() * z.clone()) * s.clone(),
            s,
        ];
        t = mul2(&step, &t);
    }
    t
}

fn split_oprl<R: Clone>(point: &[R]) -> (&[R], &[R]) {
    point.split_at(point.len() / 2)
}

fn alpha_of<R: Real>(point: &[R]) -> Vec<Complex<R>> {
    point.chunks(2).map(|c| Complex::new(c[0].clone(), c[1].clone())).collect()
}

fn power<R: Real>(z: &Complex<R>, k: usize) -> Complex<R> {
    (0..k).fold(Complex::one(), |acc, _| acc * z.clone())
}

pub fn monodromy(params: &PeriodicParams, z: C64) -> Result<Monodromy> {
    let t = match params {
        PeriodicParams::Oprl(p) => oprl_transfer(p.b(), p.a(), &z),
        PeriodicParams::Opuc(p) => {
            if z.norm() == 0.0 {
                return Err(Error::Argument("the OPUC monodromy is taken at z != 0".into()));
            }
            opuc_transfer(p.alpha(), &z)
        }
    };
    Ok(Monodromy { entries: [[t[0], t[1]], [t[2], t[3]]] })
}

/// `Tr T_p(z)` (OPRL) or `z^{-p/2} Tr T_p(z)` (OPUC).
pub fn discriminant(params: &PeriodicParams, z: C64) -> Result<C64> {
    let tr = monodromy(params, z)?.trace();
    Ok(match params {
        PeriodicParams::Oprl(_) => tr,
        PeriodicParams::Opuc(p) => tr / power(&z, p.period() / 2),
    })
}

/// Discriminant values at fixed points as functions of the periodic
/// coordinates.
pub struct DiscriminantField {
    pub opuc: bool,
    pub points: Vec<C64>,
}

impl Analytic for DiscriminantField {
    fn eval<R: Real>(&self, point: &[R]) -> Result<Vec<Complex<R>>> {
        let mut out = Vec::with_capacity(self.points.len());
        for &z0 in &self.points {
            let z: Complex<R> = lift(z0);
            if self.opuc {
                let alpha = alpha_of(point);
                let t = opuc_transfer(&alpha, &z);
                out.push((t[0].clone() + t[3].clone()) / power(&z, alpha.len() / 2));
            } else {
                let (b, a) = split_oprl(point);
                let t = oprl_transfer(b, a, &z);
                out.push(t[0].clone() + t[3].clone());
            }
        }
        Ok(out)
    }
}

/// `Tr T_p` as a polynomial: Delta itself for OPRL, `z^{p/2} Delta` for OPUC.
pub fn trace_polynomial(params: &PeriodicParams) -> Poly<C64> {
    let c = |x: f64| Poly::constant(C64::new(x, 0.0));
    let one = || c(1.0);
    let zero = || Poly::<C64>::zero();
    let pm = |x: &M2<Poly<C64>>, y: &M2<Poly<C64>>| -> M2<Poly<C64>> {
        [
            x[0].mul(&y[0]).add(&x[1].mul(&y[2])),
            x[0].mul(&y[1]).add(&x[1].mul(&y[3])),
            x[2].mul(&y[0]).add(&x[3].mul(&y[2])),
            x[2].mul(&y[1]).add(&x[3].mul(&y[3])),
        ]
    };
    let mut t: M2<Poly<C64>> = [one(), zero(), zero(), one()];
    match params {
        PeriodicParams::Oprl(p) => {
            let n = p.period();
            for j in 0..n {
                let a = p.a()[j];
                let prev = p.a()[(j + n - 1) % n];
                let step = [
                    Poly::new(vec![C64::new(-p.b()[j] / a, 0.0), C64::new(1.0 / a, 0.0)]),
                    c(-prev / a),
                    one(),
                    zero(),
                ];
                t = pm(&step, &t);
            }
        }
        PeriodicParams::Opuc(p) => {
            for (j, a) in p.alpha().iter().enumerate() {
                let s = C64::new(1.0 / p.rho(j), 0.0);
                let step = [
                    Poly::new(vec![C64::zero(), s]),
                    Poly::constant(-a.conj() * s),
                    Poly::new(vec![C64::zero(), -a * s]),
                    Poly::constant(s),
                ];
                t = pm(&step, &t);
            }
        }
    }
    t[0].add(&t[3]).trimmed(0.0)
}

/// Monic polynomial whose roots are the Floquet eigenvalues at `theta`:
/// `prod(a) (Delta(x) - 2 cos theta)` or `prod(rho) (z^{p/2} Delta(z) - 2 cos theta z^{p/2})`.
pub fn floquet_polynomial(params: &PeriodicParams, theta: f64) -> Poly<C64> {
    let tr = trace_polynomial(params);
    let shift = match params {
        PeriodicParams::Oprl(_) => Poly::constant(C64::new(2.0 * theta.cos(), 0.0)),
        PeriodicParams::Opuc(p) => Poly::monomial(p.period() / 2).scaled(&C64::new(2.0 * theta.cos(), 0.0)),
    };
    tr.sub(&shift).scaled(&C64::new(params.leading_product(), 0.0))
}

fn polish(c: &[C64], mut z: C64) -> C64 {
    let d: Vec<C64> = (1..c.len()).map(|k| c[k] * k as f64).collect();
    for _ in 0..3 {
        let f = c.iter().rev().fold(C64::zero(), |acc, &a| acc * z + a);
        let df = d.iter().rev().fold(C64::zero(), |acc, &a| acc * z + a);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > 1e-6 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    z
}

/// The p Floquet eigenvalues at `theta`, from the roots of
/// [`floquet_polynomial`]. OPRL values are real and ascending; OPUC values
/// lie on the unit circle and are ordered by argument.
pub fn floquet_spectrum(params: &PeriodicParams, theta: f64) -> Result<Vec<C64>> {
    if !theta.is_finite() {
        return Err(Error::Argument("theta must be finite".into()));
    }
    let poly = floquet_polynomial(params, theta);
    let roots = aberth_roots(&poly.coeffs, None)?;
    let mut roots: Vec<C64> = roots.into_iter().map(|z| polish(&poly.coeffs, z)).collect();
    match params {
        PeriodicParams::Oprl(_) => {
            roots.iter_mut().for_each(|z| z.im = 0.0);
            roots.sort_by(|x, y| x.re.total_cmp(&y.re));
        }
        PeriodicParams::Opuc(_) => roots.sort_by(|x, y| x.arg().total_cmp(&y.arg())),
    }
    Ok(roots)
}

/// `J(theta)`: the period block with `e^{i theta} a_p` in the upper right
/// corner and its conjugate in the lower left (added to `a_1` when p = 2,
/// to the diagonal when p = 1).
pub fn floquet_matrix_oprl(p: &PeriodicOprl, theta: f64) -> Mat<C64> {
    let n = p.period();
    let mut m = Mat::zeros(n);
    for j in 0..n {
        m.data[j * n + j] += C64::new(p.b()[j], 0.0);
    }
    for j in 0..n - 1 {
        m.data[j * n + j + 1] += C64::new(p.a()[j], 0.0);
        m.data[(j + 1) * n + j] += C64::new(p.a()[j], 0.0);
    }
    let corner = C64::from_polar(p.a()[n - 1], theta);
    m.data[n - 1] += corner;
    m.data[(n - 1) * n] += corner.conj();
    m
}

/// Elementary symmetric functions `s_1..s_k` from power sums `t_1..t_k`:
/// `k s_k = sum_{i=1}^k (-1)^{i-1} s_{k-i} t_i`.
pub fn newton_s_from_t(t: &[C64]) -> Vec<C64> {
    let mut s = vec![C64::one()];
    for k in 1..=t.len() {
        let mut acc = C64::zero();
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += s[k - i] * t[i - 1] * sign;
        }
        s.push(acc / k as f64);
    }
    s.remove(0);
    s
}

/// Inverse of [`newton_s_from_t`].
pub fn newton_t_from_s(s: &[C64]) -> Vec<C64> {
    let mut t: Vec<C64> = Vec::with_capacity(s.len());
    let s_at = |j: usize| if j == 0 { C64::one() } else { s[j - 1] };
    for k in 1..=s.len() {
        let mut acc = s_at(k) * k as f64;
        for i in 1..k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc -= s_at(k - i) * t[i - 1] * sign;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        t.push(acc * sign);
    }
    t
}

/// Power sums `t_1..t_k` of a list of values.
pub fn power_sums(values: &[C64], k: usize) -> Vec<C64> {
    (1..=k).map(|m| values.iter().map(|z| z.powu(m as u32)).sum()).collect()
}

/// Elementary symmetric functions `s_1..s_p` of a list of values.
pub fn elementary_symmetric(values: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::one()];
    for &v in values {
        e.push(C64::zero());
        for k in (1..e.len()).rev() {
            let prev = e[k - 1];
            e[k] += prev * v;
        }
    }
    e.remove(0);
    e
}

/// A density-of-states moment with its trace relation at `theta = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DosMoment {
    pub k: usize,
    /// `int lambda^k d gamma` by the trapezoidal rule in theta.
    pub moment: C64,
    /// `t_k(0)`, the power sum of the theta = 0 Floquet eigenvalues.
    pub trace_at_zero: C64,
    /// `p * moment` plus the correction `2 p prod(a)` at `k = p` (OPRL) or
    /// `p prod(rho)` at `k = p/2` (OPUC).
    pub predicted_trace: C64,
    /// The correction written as `(-1)^{p+1} 2 p prod(a)` resp.
    /// `(-1)^{p/2+1} p prod(rho)`, added to the unscaled moment.
    pub literal_trace: C64,
}

pub fn dos_moments(params: &PeriodicParams, k: usize) -> Result<DosMoment> {
    let p = params.period();
    let mut moment = C64::zero();
    for m in 0..DOS_POINTS {
        let theta = 2.0 * PI * m as f64 / DOS_POINTS as f64;
        let spec = floquet_spectrum(params, theta)?;
        let tk: C64 = spec.iter().map(|z| z.powu(k as u32)).sum();
        moment += tk / p as f64;
    }
    moment /= DOS_POINTS as f64;
    let trace_at_zero: C64 = floquet_spectrum(params, 0.0)?.iter().map(|z| z.powu(k as u32)).sum();
    let prod = params.leading_product();
    let (hit, scale_c, sign_exp) = match params {
        PeriodicParams::Oprl(_) => (k == p, 2.0 * p as f64, p + 1),
        PeriodicParams::Opuc(_) => (k == p / 2, p as f64, p / 2 + 1),
    };
    let corr = if hit { scale_c * prod } else { 0.0 };
    let literal_sign = if sign_exp % 2 == 0 { 1.0 } else { -1.0 };
    Ok(DosMoment {
        k,
        moment,
        trace_at_zero,
        predicted_trace: moment * p as f64 + corr,
        literal_trace: moment + literal_sign * corr,
    })
}

/// `(2m+1)^{-1} Tr(J_m^k)` for the cutoff of the two-sided periodic Jacobi
/// matrix to sites `-m..=m`.
pub fn dos_cutoff_moment(p: &PeriodicOprl, k: usize, m: usize) -> f64 {
    let n = 2 * m + 1;
    let per = p.period() as i64;
    let idx = |site: i64| site.rem_euclid(per) as usize;
    let mut j = Mat::zeros(n);
    for r in 0..n {
        let site = r as i64 - m as i64;
        j.set(r, r, p.b()[idx(site)]);
        if r + 1 < n {
            let a = p.a()[idx(site)];
            j.set(r, r + 1, a);
            j.set(r + 1, r, a);
        }
    }
    j.powers(k)[k].trace() / n as f64
}

/// Fixed sample points for determinant and reconstruction checks.
fn sample_points(opuc: bool) -> Vec<C64> {
    let radii: &[f64] = if opuc { &[0.6, 1.0, 1.4] } else { &[0.5, 1.5, 2.5] };
    let mut v = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        for k in 0..4 {
            v.push(C64::from_polar(r, 0.35 + 1.4 * k as f64 + 0.2 * i as f64));
        }
    }
    v
}

/// Theta values for the theta-independence and law checks.
pub const THETA_SAMPLES: [f64; 5] = [0.4, PI / 3.0, 1.3, 2.2, 2.9];

/// Monodromy determinants, the leading behavior of Delta, Floquet spectra
/// (with the dense `J(theta)` cross-check for OPRL), the theta laws of the
/// symmetric functions, the reconstruction of Delta from the theta = 0 and
/// theta = pi spectra, and the density-of-states trace relation.
pub fn periodic_checks(params: &PeriodicParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let p = params.period();
    let pre = params.prefix();
    let opuc = matches!(params, PeriodicParams::Opuc(_));
    let id = |s: &str| format!("{pre}_{s}");
    let mut out = Vec::new();
    let mut push = |name: &str, residual: f64, default: f64, asserted: bool, grid: &str, notes: String| {
        let i = id(name);
        let tol = tols.get(&i, default);
        out.push(if asserted {
            BracketReport::asserted(&i, p, grid, residual, tol, notes)
        } else {
            BracketReport::reported(&i, p, grid, residual, tol, notes)
        });
    };

    // determinants
    let mut wd = Worst::default();
    for z in sample_points(opuc) {
        let m = monodromy(params, z)?;
        let e = &m.entries;
        // relative to the size of the two products that cancel
        let scale = ((e[0][0] * e[1][1]).norm() + (e[0][1] * e[1][0]).norm()).max(1.0);
        let target = if opuc { z.powu(p as u32) } else { C64::one() };
        wd.push((m.det() - target).norm() / (scale * target.norm().max(if opuc { 0.0 } else { 1.0 })));
    }
    let target = if opuc { "z^p" } else { "1" };
    push("monodromy_det", wd.max, MONODROMY_TOL, true, "sample z", format!("det T_p = {target}, {}", wd.note()));

    // leading coefficients
    let tr = trace_polynomial(params);
    let inv = 1.0 / params.leading_product();
    let lead = (tr.coeff(p) - inv).norm() / inv;
    let (lead, note) = if opuc {
        let low = (tr.coeff(0) - inv).norm() / inv;
        (lead.max(low), format!("z^{{p/2}} and z^{{-p/2}} coefficients vs 1/prod(rho) = {inv:.6e}"))
    } else {
        (lead, format!("x^p coefficient vs 1/prod(a) = {inv:.6e}"))
    };
    push("discriminant_leading", lead, MONODROMY_TOL, true, "polynomial coefficients", note);

    // Floquet spectra against Delta and, for OPRL, against J(theta)
    let mut wroot = Worst::default();
    let mut wmat = Worst::default();
    let mut wcirc = Worst::default();
    let mut wprod = Worst::default();
    let mut phases = Vec::new();
    for &theta in &THETA_SAMPLES {
        let spec = floquet_spectrum(params, theta)?;
        for z in &spec {
            wroot.push(normalized_residual(discriminant(params, *z)?, C64::new(2.0 * theta.cos(), 0.0), &[]));
            if opuc {
                wcirc.push((z.norm() - 1.0).abs());
            }
        }
        if opuc {
            let prod: C64 = spec.iter().product();
            wprod.push((prod.norm() - 1.0).abs());
            phases.push(prod.arg());
        }
        if let PeriodicParams::Oprl(q) = params {
            let (eig, _) = hermitian_eigen(&floquet_matrix_oprl(q, theta))?;
            let mut eig = eig;
            eig.sort_by(f64::total_cmp);
            for (e, z) in eig.iter().zip(&spec) {
                wmat.push((e - z.re).abs() / e.abs().max(1.0));
            }
        }
    }
    push("floquet_roots", wroot.max, THETA_LAW_TOL, true, "theta samples", format!("Delta(lambda) = 2 cos theta, {}", wroot.note()));
    if opuc {
        push("floquet_on_circle", wcirc.max, THETA_LAW_TOL, true, "theta samples", "| |lambda| - 1 |".into());
        let note = format!("phases of prod lambda: {:?}", phases.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>());
        push("floquet_product_modulus", wprod.max, 1e-9, true, "theta samples", note);
    } else {
        push("floquet_matrix", wmat.max, THETA_LAW_TOL, true, "theta samples", "eigenvalues of J(theta) with corner terms".into());
    }

    // theta laws
    let base = floquet_spectrum(params, 0.0)?;
    let s0 = elementary_symmetric(&base);
    let t0 = power_sums(&base, p);
    let prod = params.leading_product();
    let half = p / 2;
    let (mut ws, mut wt, mut wsl, mut wtl, mut wtlit) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for &theta in &THETA_SAMPLES {
        let spec = floquet_spectrum(params, theta)?;
        let s = elementary_symmetric(&spec);
        let t = power_sums(&spec, p);
        let bump = prod * (2.0 - 2.0 * theta.cos());
        let terms = [s0.clone(), s.clone()].concat();
        let scale: Vec<C64> = terms.into_iter().chain(t0.iter().copied()).chain(t.iter().copied()).collect();
        let r = |x: C64, y: C64| normalized_residual(x, y, &scale);
        let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
        if opuc {
            for k in 1..p {
                if k != half {
                    ws.push(r(s[k - 1], s0[k - 1]));
                }
            }
            for k in 1..half {
                wt.push(r(t[k - 1], t0[k - 1]));
            }
            wsl.push(r(s[half - 1], s0[half - 1] + sign(half) * bump));
            wtl.push(r(t[half - 1], t0[half - 1] - half as f64 * bump));
            wtlit.push(r(t[half - 1], t0[half - 1] + sign(half) * half as f64 * bump));
        } else {
            for k in 1..p {
                ws.push(r(s[k - 1], s0[k - 1]));
                wt.push(r(t[k - 1], t0[k - 1]));
            }
            wsl.push(r(s[p - 1], s0[p - 1] + sign(p) * bump));
            wtl.push(r(t[p - 1], t0[p - 1] - p as f64 * bump));
            wtlit.push(r(t[p - 1], t0[p - 1] + sign(p) * p as f64 * bump));
        }
    }
    let g = "theta samples vs theta = 0";
    let (sk, tk) = if opuc { (format!("k = 1..{}, k != {half}", p - 1), format!("k < {half}")) } else { (format!("k < {p}"), format!("k < {p}")) };
    push("s_theta_independent", ws.max, THETA_LAW_TOL, true, g, sk);
    push("t_theta_independent", wt.max, THETA_LAW_TOL, true, g, tk);
    let (ks, law_s, law_t, law_lit) = if opuc {
        (half, "(-1)^{p/2} prod(rho) (2 - 2cos theta)", "-(p/2) prod(rho) (2 - 2cos theta)", "(-1)^{p/2} (p/2) prod(rho) (2 - 2cos theta)")
    } else {
        (p, "(-1)^p prod(a) (2 - 2cos theta)", "-p prod(a) (2 - 2cos theta)", "(-1)^p p prod(a) (2 - 2cos theta)")
    };
    push("s_theta_law", wsl.max, THETA_LAW_TOL, true, g, format!("s_{ks}(theta) - s_{ks}(0) = {law_s}"));
    push("t_theta_law", wtl.max, THETA_LAW_TOL, true, g, format!("t_{ks}(theta) - t_{ks}(0) = {law_t}"));
    push("t_theta_law_literal", wtlit.max, THETA_LAW_TOL, false, g, format!("sign-alternating prefactor {law_lit}"));

    // Delta from the theta = 0 and theta = pi spectra
    let pi_spec = floquet_spectrum(params, PI)?;
    let mut wr = Worst::default();
    for z in sample_points(opuc) {
        let p0: C64 = base.iter().map(|l| z - l).product();
        let ppi: C64 = pi_spec.iter().map(|l| z - l).product();
        let rebuilt = (p0 + ppi) * 2.0 / (ppi - p0);
        let direct = discriminant(params, z)?;
        wr.push(normalized_residual(rebuilt, direct, &[]));
    }
    push("discriminant_reconstruction", wr.max, THETA_LAW_TOL, true, "sample z", "Delta = 2 (P_0 + P_pi)/(P_pi - P_0)".into());

    // density of states
    let kmax = if opuc { half } else { p };
    let (mut wdos, mut wlit) = (Worst::default(), Worst::default());
    for k in 1..=kmax {
        let d = dos_moments(params, k)?;
        wdos.push(normalized_residual(d.trace_at_zero, d.predicted_trace, &[d.moment]));
        wlit.push(normalized_residual(d.trace_at_zero, d.literal_trace, &[d.moment]));
    }
    let g = "64-point trapezoid in theta";
    let note = if opuc { "t_k(0) = p int lambda^k + p prod(rho) delta_{k,p/2}" } else { "t_k(0) = p int lambda^k + 2p prod(a) delta_{kp}" };
    push("dos_trace_relation", wdos.max, THETA_LAW_TOL, true, g, format!("k = 1..{kmax}: {note}"));
    push("dos_trace_relation_literal", wlit.max, THETA_LAW_TOL, false, g, "unscaled moment with sign-alternating correction".into());
    Ok(out)
}

/// Floquet eigenvalues at `theta` as a spectral field of the periodic
/// coordinates. OPRL uses the Hermitian `J(theta)`; OPUC uses polished
/// polynomial roots, represented by their arguments.
fn floquet_field(
    opuc: bool,
    theta: f64,
) -> SpectralField<impl Fn(&[f64]) -> Result<SpectralData>, impl Fn(&SpectralData) -> Vec<C64>> {
    let measure = move |point: &[f64]| -> Result<SpectralData> {
        if opuc {
            let params = PeriodicParams::Opuc(PeriodicOpuc::from_point(point)?);
            let spec = floquet_spectrum(&params, theta)?;
            let nodes: Vec<f64> = spec.iter().map(|z| z.arg()).collect();
            Ok(SpectralData { weights: vec![0.0; nodes.len()], nodes, circle: true })
        } else {
            let q = PeriodicOprl::from_point(point)?;
            let (mut eig, _) = hermitian_eigen(&floquet_matrix_oprl(&q, theta))?;
            eig.sort_by(f64::total_cmp);
            Ok(SpectralData { weights: vec![0.0; eig.len()], nodes: eig, circle: false })
        }
    };
    let select = move |d: &SpectralData| -> Vec<C64> {
        d.nodes.iter().map(|&x| if opuc { C64::from_polar(1.0, x) } else { C64::new(x, 0.0) }).collect()
    };
    SpectralField { measure, select }
}

fn min_gap(values: &[f64], circle: bool) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = if circle { normalize_angle(values[i] - values[j]).abs() } else { (values[i] - values[j]).abs() };
            g = g.min(d);
        }
    }
    g
}

/// Theta values used for eigenvalue brackets; 0 and pi are included and
/// skipped when the spectrum there is degenerate.
pub const BRACKET_THETAS: [f64; 4] = [0.0, 0.7, 1.9, PI];

/// Poisson commutation under the periodic tensor: `{Delta(z), Delta(w)}` on
/// the grid, `{lambda_j(theta), lambda_k(theta')}` over sampled theta pairs,
/// and for OPUC `{prod rho, lambda_j(theta)}` and the rotation identity
/// `{prod rho^2, g} = -prod rho^2 sum_j dg/d theta_j` (`theta_j` the argument
/// of `alpha_j`).
pub fn verify_periodic_brackets(params: &PeriodicParams, grid: &Grid, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let p = params.period();
    let pre = params.prefix();
    let opuc = matches!(params, PeriodicParams::Opuc(_));
    let point = params.to_point();
    let tensor = params.tensor();
    let mut out = Vec::new();

    // discriminants
    let zs: Vec<C64> = grid.z.iter().chain(&grid.w).copied().collect();
    let field = AnalyticField(DiscriminantField { opuc, points: zs });
    let ev = evaluate_with_gradients(&field, &point, Backend::Dual)?;
    let nz = grid.z.len();
    let mut wdd = Worst::default();
    for i in 0..nz {
        for j in 0..grid.w.len() {
            let (v, scale) = tensor.contract_with_scale(&point, &ev.grads[i], &ev.grads[nz + j])?;
            wdd.push(v.norm() / scale.max(1.0));
        }
    }
    let id = format!("{pre}_discriminant_commute");
    out.push(BracketReport::asserted(&id, p, &grid.label, wdd.max, tols.get(&id, DISCRIMINANT_TOL), format!("dual backend, {}", wdd.note())));

    // Floquet eigenvalues
    let mut per_theta: Vec<(f64, Vec<Vec<C64>>)> = Vec::new();
    let mut skipped = 0usize;
    for &theta in &BRACKET_THETAS {
        let f = floquet_field(opuc, theta);
        let data = (f.measure)(&point)?;
        if min_gap(&data.nodes, opuc) < DEGENERATE_GAP {
            skipped += 1;
            continue;
        }
        let ev = evaluate_with_gradients(&f, &point, Backend::Fd)?;
        per_theta.push((theta, ev.grads));
    }
    let mut wll = Worst { skipped, ..Worst::default() };
    for (a, (_, ga)) in per_theta.iter().enumerate() {
        for (_, gb) in per_theta.iter().skip(a) {
            for dfa in ga {
                for dfb in gb {
                    let (v, scale) = tensor.contract_with_scale(&point, dfa, dfb)?;
                    wll.push(v.norm() / scale.max(1.0));
                }
            }
        }
    }
    let id = format!("{pre}_floquet_commute");
    let note = format!("fd backend, theta in {BRACKET_THETAS:?}, {} theta values skipped as degenerate", skipped);
    out.push(BracketReport::asserted(&id, p, "theta pairs", wll.max, tols.get(&id, FD_TOL), note));

    if let PeriodicParams::Opuc(q) = params {
        let prod_field = AnalyticField(RhoProduct { squared: false });
        let dprod = evaluate_with_gradients(&prod_field, &point, Backend::Dual)?.grads.remove(0);
        let mut wp = Worst { skipped, ..Worst::default() };
        for (_, g) in &per_theta {
            for dl in g {
                let (v, scale) = tensor.contract_with_scale(&point, &dprod, dl)?;
                wp.push(v.norm() / scale.max(1.0));
            }
        }
        let id = "periodic_opuc_rho_product_floquet";
        out.push(BracketReport::asserted(id, p, "theta samples", wp.max, tols.get(id, FD_TOL), "{prod rho, lambda_j(theta)}".into()));

        // rotation identity against coordinates and discriminant values
        let sq = AnalyticField(RhoProduct { squared: true });
        let esq = evaluate_with_gradients(&sq, &point, Backend::Dual)?;
        let (f_val, df) = (esq.values[0].re, &esq.grads[0]);
        let mut gs: Vec<Vec<C64>> = (0..point.len()).map(|i| (0..point.len()).map(|k| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
        gs.extend(ev.grads.iter().cloned());
        let mut wrot = Worst::default();
        for dg in &gs {
            let lhs = tensor.contract(&point, df, dg)?;
            let mut rot = C64::zero();
            for j in 0..q.period() {
                let (u, v) = (point[2 * j], point[2 * j + 1]);
                rot += dg[2 * j + 1] * u - dg[2 * j] * v;
            }
            let rhs = -rot * f_val;
            wrot.push(normalized_residual(lhs, rhs, &[]));
        }
        let id = "periodic_opuc_rotation_generator";
        let note = format!("g over coordinates and grid discriminants, {}", wrot.note());
        out.push(BracketReport::asserted(id, p, &grid.label, wrot.max, tols.get(id, POLY_TOL), note));
    }
    Ok(out)
}

/// `prod_j rho_j` or `prod_j rho_j^2` on Verblunsky coordinates.
struct RhoProduct {
    squared: bool,
}

impl Analytic for RhoProduct {
    fn eval<R: Real>(&self, point: &[R]) -> Result<Vec<Complex<R>>> {
        let mut acc = R::one();
        for c in point.chunks(2) {
            let r2 = R::one() - c[0].clone() * c[0].clone() - c[1].clone() * c[1].clone();
            acc = acc * if self.squared { r2 } else { r2.sqrt() };
        }
        Ok(vec![Complex::new(acc, R::zero())])
    }
}

/// Short label used in reports and the CLI.
pub fn describe(params: &PeriodicParams) -> String {
    match params {
        PeriodicParams::Oprl(p) => format!("periodic OPRL, p = {}", p.period()),
        PeriodicParams::Opuc(p) => format!("periodic OPUC, p = {}", p.period()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn single_step_free() {
        let p = PeriodicParams::Oprl(PeriodicOprl::new(vec![0.0], vec![1.0]).unwrap());
        let z = C64::new(0.3, 0.2);
        let m = monodromy(&p, z).unwrap();
        assert!(close(m.entries[0][0], z) && close(m.entries[0][1], -C64::one()));
        assert!(close(m.det(), C64::one()));
    }

    #[test]
    fn free_discriminants() {
        let p = PeriodicParams::Oprl(PeriodicOprl::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let x = C64::new(0.7, 0.0);
        assert!(close(discriminant(&p, x).unwrap(), x * x - 2.0));
        let q = PeriodicParams::Opuc(PeriodicOpuc::new(vec![C64::zero(); 2]).unwrap());
        let z = C64::from_polar(1.2, 0.4);
        assert!(close(discriminant(&q, z).unwrap(), z + 1.0 / z));
    }

    #[test]
    fn newton_small_cases() {
        let t = [C64::new(1.5, 0.2), C64::new(-0.3, 0.7)];
        let s = newton_s_from_t(&t);
        assert!(close(s[0], t[0]));
        assert!(close(s[1], (t[0] * t[0] - t[1]) / 2.0));
        let back = newton_t_from_s(&s);
        assert!(close(back[0], t[0]) && close(back[1], t[1]));
    }

    #[test]
    fn free_dos_second_moment() {
        let p = PeriodicParams::Oprl(PeriodicOprl::new(vec![0.0], vec![1.0]).unwrap());
        assert!((dos_moments(&p, 2).unwrap().moment.re - 2.0).abs() < 1e-12);
        assert!(dos_moments(&p, 1).unwrap().moment.norm() < 1e-12);
    }

    #[test]
    fn checks_pass_on_samples() {
        let oprl = PeriodicParams::Oprl(PeriodicOprl::new(vec![0.3, -0.8, 1.1], vec![0.7, 1.2, 0.9]).unwrap());
        let opuc = PeriodicParams::Opuc(
            PeriodicOpuc::new(vec![C64::new(0.2, 0.3), C64::new(-0.4, 0.1), C64::new(0.1, -0.5), C64::new(0.35, 0.2)]).unwrap(),
        );
        for (params, grid) in [(oprl, Grid::real_line(6)), (opuc, Grid::circle(6))] {
            let mut reps = periodic_checks(&params, &Tolerances::default()).unwrap();
            reps.extend(verify_periodic_brackets(&params, &grid, &Tolerances::default()).unwrap());
            for r in reps {
                assert_ne!(r.pass, Some(false), "{r:?}");
            }
        }
    }
}
