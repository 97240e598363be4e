//! Poisson tensors on the Jacobi and Verblunsky parameter spaces, bracket
//! evaluation through dual numbers or finite differences, and numerical
//! verification suites.
//!
//! Brackets of complex-valued functions use the complex-bilinear extension
//! `{f, g} = sum_{i,j} pi_ij (d_i f)(d_j g)` with `d_i f = d_i Re f + i d_i Im f`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{complex_gradient, complex_value, CDual, Dual, Real, C64};

mod oprl_suite;
mod opuc_suite;
mod spectral;

pub use crate::params::ParamPoint;

pub use oprl_suite::verify_identity_suite_oprl;
pub use opuc_suite::verify_identity_suite_opuc;
pub use spectral::{
    jacobian_oprl, jacobian_opuc, oprl_measure_field, opuc_measure_field, symplectic_check, verify_fundamental_oprl,
    verify_fundamental_opuc, JacobianCheck, JacobianVariant, SpectralData, SpectralField,
};

/// Which Poisson structure a tensor represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TensorKind {
    /// Coordinates `(b_1..b_N, a_1..a_{N-1})`.
    OprlFinite,
    /// Coordinates `(u_0, v_0, .., u_{N-2}, v_{N-2})`, beta frozen.
    OpucFinite,
    /// Coordinates `(b_1..b_p, a_1..a_p)` with the cyclic coupling `b_1 <-> a_p`.
    OprlPeriodic,
    /// Coordinates `(u_0, v_0, .., u_{p-1}, v_{p-1})`.
    OpucPeriodic,
}

/// A Poisson tensor of a given kind and size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoissonTensor {
    pub kind: TensorKind,
    /// N for the finite kinds, the period p for the periodic ones.
    pub size: usize,
}

impl PoissonTensor {
    pub fn oprl_finite(n: usize) -> Self {
        PoissonTensor { kind: TensorKind::OprlFinite, size: n }
    }
    pub fn opuc_finite(n: usize) -> Self {
        PoissonTensor { kind: TensorKind::OpucFinite, size: n }
    }
    pub fn oprl_periodic(p: usize) -> Self {
        PoissonTensor { kind: TensorKind::OprlPeriodic, size: p }
    }
    pub fn opuc_periodic(p: usize) -> Self {
        PoissonTensor { kind: TensorKind::OpucPeriodic, size: p }
    }

    /// Number of real coordinates.
    pub fn dimension(&self) -> usize {
        let n = self.size;
        match self.kind {
            TensorKind::OprlFinite => (2 * n).saturating_sub(1),
            TensorKind::OpucFinite => 2 * n.saturating_sub(1),
            TensorKind::OprlPeriodic | TensorKind::OpucPeriodic => 2 * n,
        }
    }

    fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dimension() {
            return Err(Error::Argument(format!(
                "point has {} coordinates, tensor expects {}",
                point.len(),
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Upper-triangle nonzeros `(i, j, pi_ij)`; `pi_ji = -pi_ij`. Repeated
    /// index pairs add up.
    pub fn nonzeros(&self, point: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
        self.check(point)?;
        let n = self.size;
        let mut out = Vec::new();
        match self.kind {
            TensorKind::OprlFinite | TensorKind::OprlPeriodic => {
                let periodic = self.kind == TensorKind::OprlPeriodic;
                let na = if periodic { n } else { n - 1 };
                for k in 0..na {
                    let a = point[n + k];
                    out.push((k, n + k, -a / 4.0));
                    if k + 1 < n {
                        out.push((k + 1, n + k, a / 4.0));
                    }
                }
                if periodic {
                    out.push((0, 2 * n - 1, point[2 * n - 1] / 4.0));
                }
            }
            TensorKind::OpucFinite | TensorKind::OpucPeriodic => {
                for j in 0..point.len() / 2 {
                    let (u, v) = (point[2 * j], point[2 * j + 1]);
                    out.push((2 * j, 2 * j + 1, (1.0 - u * u - v * v) / 2.0));
                }
            }
        }
        Ok(out)
    }

    pub fn entry(&self, i: usize, j: usize, point: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (p, q, v) in self.nonzeros(point)? {
            if (p, q) == (i, j) {
                s += v;
            } else if (q, p) == (i, j) {
                s -= v;
            }
        }
        Ok(s)
    }

    pub fn matrix(&self, point: &[f64]) -> Result<Mat<f64>> {
        let mut m = Mat::zeros(self.dimension());
        for (i, j, v) in self.nonzeros(point)? {
            m.data[i * m.n + j] += v;
            m.data[j * m.n + i] -= v;
        }
        Ok(m)
    }

    /// `sum pi_ij df_i dg_j` for precomputed gradients.
    pub fn contract(&self, point: &[f64], df: &[C64], dg: &[C64]) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for (i, j, v) in self.nonzeros(point)? {
            s += (df[i] * dg[j] - df[j] * dg[i]) * v;
        }
        Ok(s)
    }

    /// Contraction together with `sum |pi_ij| (|df_i dg_j| + |df_j dg_i|)`,
    /// the natural scale for identities whose right side vanishes.
    pub fn contract_with_scale(&self, point: &[f64], df: &[C64], dg: &[C64]) -> Result<(C64, f64)> {
        let mut s = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for (i, j, v) in self.nonzeros(point)? {
            s += (df[i] * dg[j] - df[j] * dg[i]) * v;
            abs += v.abs() * ((df[i] * dg[j]).norm() + (df[j] * dg[i]).norm());
        }
        Ok((s, abs))
    }
}

/// Bracket in Wirtinger form on a Verblunsky tensor:
/// `{f, g} = sum_j i rho_j^2 (df/d conj(alpha_j) dg/d alpha_j - df/d alpha_j dg/d conj(alpha_j))`.
pub fn bracket_wirtinger(point: &[f64], df: &[C64], dg: &[C64]) -> C64 {
    let i = C64::new(0.0, 1.0);
    let mut s = C64::new(0.0, 0.0);
    for j in 0..point.len() / 2 {
        let rho2 = 1.0 - point[2 * j].powi(2) - point[2 * j + 1].powi(2);
        let d = |g: &[C64]| ((g[2 * j] - i * g[2 * j + 1]) * 0.5, (g[2 * j] + i * g[2 * j + 1]) * 0.5);
        let (fa, fab) = d(df);
        let (ga, gab) = d(dg);
        s += i * rho2 * (fab * ga - fa * gab);
    }
    s
}

/// Gradient engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Backend {
    /// Forward-mode dual numbers; falls back to finite differences for
    /// fields without a dual evaluation.
    Dual,
    /// Central differences with one Richardson extrapolation step.
    Fd,
}

/// Finite-difference evaluator prepared around a base point.
pub struct FdEvaluator<'a> {
    pub eval: Box<dyn Fn(&[f64]) -> Result<Vec<C64>> + 'a>,
    /// Upper bound on the step; spectral fields cap it by a tenth of the node gap.
    pub max_step: f64,
}

/// A batch of complex-valued functions of a parameter point, evaluated
/// together. Single fields are batches of length one.
pub trait ScalarField {
    fn evaluate(&self, point: &[f64]) -> Result<Vec<C64>>;

    /// Forward-mode evaluation; `None` when only values are available.
    fn evaluate_dual(&self, _point: &[Dual]) -> Option<Result<Vec<CDual>>> {
        None
    }

    fn fd_evaluator<'a>(&'a self, _base: &[f64]) -> Result<FdEvaluator<'a>> {
        Ok(FdEvaluator { eval: Box::new(move |p| self.evaluate(p)), max_step: f64::INFINITY })
    }
}

/// Fields written once for every real scalar type.
pub trait Analytic {
    fn eval<R: Real>(&self, point: &[R]) -> Result<Vec<Complex<R>>>;
}

/// Adapter giving an [`Analytic`] both value and dual evaluation.
pub struct AnalyticField<A>(pub A);

impl<A: Analytic> ScalarField for AnalyticField<A> {
    fn evaluate(&self, point: &[f64]) -> Result<Vec<C64>> {
        self.0.eval::<f64>(point)
    }
    fn evaluate_dual(&self, point: &[Dual]) -> Option<Result<Vec<CDual>>> {
        Some(self.0.eval::<Dual>(point))
    }
}

/// Values-only field from a closure; differentiated by finite differences.
pub struct FnField<F>(pub F);

impl<F: Fn(&[f64]) -> Result<Vec<C64>>> ScalarField for FnField<F> {
    fn evaluate(&self, point: &[f64]) -> Result<Vec<C64>> {
        (self.0)(point)
    }
}

/// Values and gradients of a batch at one point.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub values: Vec<C64>,
    pub grads: Vec<Vec<C64>>,
    /// Backend actually used.
    pub backend: Backend,
}

pub fn evaluate_with_gradients(f: &dyn ScalarField, point: &[f64], backend: Backend) -> Result<Evaluated> {
    if backend == Backend::Dual {
        let seeded = Dual::seed(point);
        if let Some(res) = f.evaluate_dual(&seeded) {
            let vals = res?;
            let d = point.len();
            let values: Vec<C64> = vals.iter().map(complex_value).collect();
            finite_check(&values)?;
            let grads = vals.iter().map(|z| complex_gradient(z, d)).collect();
            return Ok(Evaluated { values, grads, backend: Backend::Dual });
        }
    }
    fd_gradients(f, point)
}

fn finite_check(v: &[C64]) -> Result<()> {
    if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Numeric("non-finite field value".into()));
    }
    Ok(())
}

/// Base step `1e-4 max(1, |p_i|)`, capped by the evaluator.
fn fd_gradients(f: &dyn ScalarField, point: &[f64]) -> Result<Evaluated> {
    let ev = f.fd_evaluator(point)?;
    let values = (ev.eval)(point)?;
    finite_check(&values)?;
    let m = values.len();
    let d = point.len();
    let mut grads = vec![vec![C64::new(0.0, 0.0); d]; m];
    let mut p = point.to_vec();
    let central = |i: usize, h: f64, p: &mut Vec<f64>| -> Result<Vec<C64>> {
        p[i] = point[i] + h;
        let fp = (ev.eval)(p)?;
        p[i] = point[i] - h;
        let fm = (ev.eval)(p)?;
        p[i] = point[i];
        if fp.len() != m || fm.len() != m {
            return Err(Error::Numeric("field changed length under perturbation".into()));
        }
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    for i in 0..d {
        let h = (1e-4 * point[i].abs().max(1.0)).min(ev.max_step);
        let coarse = central(i, h, &mut p)?;
        let fine = central(i, h / 2.0, &mut p)?;
        for k in 0..m {
            grads[k][i] = (fine[k] * 4.0 - coarse[k]) / 3.0;
        }
    }
    for g in &grads {
        finite_check(g)?;
    }
    Ok(Evaluated { values, grads, backend: Backend::Fd })
}

/// `{f, g}` for the first component of each batch.
pub fn bracket(f: &dyn ScalarField, g: &dyn ScalarField, point: &[f64], tensor: &PoissonTensor, backend: Backend) -> Result<C64> {
    let ef = evaluate_with_gradients(f, point, backend)?;
    let eg = evaluate_with_gradients(g, point, backend)?;
    let (df, dg) = match (ef.grads.first(), eg.grads.first()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Argument("empty field batch".into())),
    };
    tensor.contract(point, df, dg)
}

/// All pairwise brackets `{f_i, g_j}` of two batches.
pub fn bracket_matrix(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    point: &[f64],
    tensor: &PoissonTensor,
    backend: Backend,
) -> Result<Vec<Vec<C64>>> {
    let ef = evaluate_with_gradients(f, point, backend)?;
    let eg = evaluate_with_gradients(g, point, backend)?;
    ef.grads.iter().map(|df| eg.grads.iter().map(|dg| tensor.contract(point, df, dg)).collect()).collect()
}

/// Outcome of one identity over a grid.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BracketReport {
    pub identity_id: String,
    pub size: usize,
    pub grid: String,
    pub max_residual: f64,
    pub tolerance: f64,
    /// `None` for identities that are only reported.
    pub pass: Option<bool>,
    pub notes: String,
}

impl BracketReport {
    pub fn asserted(id: &str, size: usize, grid: &str, max_residual: f64, tolerance: f64, notes: String) -> Self {
        BracketReport {
            identity_id: id.to_string(),
            size,
            grid: grid.to_string(),
            max_residual,
            tolerance,
            pass: Some(max_residual.is_finite() && max_residual <= tolerance),
            notes,
        }
    }

    pub fn reported(id: &str, size: usize, grid: &str, max_residual: f64, tolerance: f64, notes: String) -> Self {
        BracketReport { pass: None, ..Self::asserted(id, size, grid, max_residual, tolerance, notes) }
    }
}

/// Per-identity tolerances: pinned defaults with optional overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tolerances {
    pub overrides: BTreeMap<String, f64>,
    /// Replaces every default that has no per-identity override.
    pub global: Option<f64>,
}

/// Default for identities among polynomial families.
pub const POLY_TOL: f64 = 1e-8;
/// Default for spectral-side brackets computed by finite differences.
pub const FD_TOL: f64 = 1e-7;
/// Default for the node-weight bracket `{rho_j, rho_k}`.
pub const RHO_RHO_TOL: f64 = 1e-6;

impl Tolerances {
    pub fn get(&self, id: &str, default: f64) -> f64 {
        self.overrides.get(id).copied().or(self.global).unwrap_or(default)
    }
    pub fn with(mut self, id: &str, tol: f64) -> Self {
        self.overrides.insert(id.to_string(), tol);
        self
    }
}

/// `|lhs - rhs| / max(1, largest term)`.
pub fn normalized_residual(lhs: C64, rhs: C64, terms: &[C64]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(lhs.norm().max(rhs.norm()).max(1.0), f64::max);
    (lhs - rhs).norm() / scale
}

/// Running maximum of residuals with skip bookkeeping.
#[derive(Clone, Debug, Default)]
pub(crate) struct Worst {
    pub max: f64,
    pub count: usize,
    pub skipped: usize,
}

impl Worst {
    pub fn push(&mut self, r: f64) {
        self.count += 1;
        if r.is_nan() || r > self.max {
            self.max = if r.is_nan() { f64::INFINITY } else { r };
        }
    }
    pub fn note(&self) -> String {
        if self.skipped > 0 {
            format!("{} samples, {} skipped near poles", self.count, self.skipped)
        } else {
            format!("{} samples", self.count)
        }
    }
}

/// Evaluation grid: two disjoint point sets `z` and `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    pub label: String,
}

impl Grid {
    /// `x_i = -3 + 6 (i + 3/4)/k`, `y_j = -3 + 6 (j + 1/4)/k`.
    pub fn real_line(k: usize) -> Self {
        let pt = |i: usize, off: f64| C64::new(-3.0 + 6.0 * (i as f64 + off) / k as f64, 0.0);
        Grid {
            z: (0..k).map(|i| pt(i, 0.75)).collect(),
            w: (0..k).map(|i| pt(i, 0.25)).collect(),
            label: format!("real {k}x{k} on [-3,3]"),
        }
    }

    /// Points on `|z| = 1.3` with the two sets interleaved.
    pub fn circle(k: usize) -> Self {
        let tau = 2.0 * core::f64::consts::PI;
        let pt = |i: usize, off: f64| C64::from_polar(1.3, tau * (i as f64 + off) / k as f64);
        Grid {
            z: (0..k).map(|i| pt(i, 0.1)).collect(),
            w: (0..k).map(|i| pt(i, 0.6)).collect(),
            label: format!("circle {k}x{k} at radius 1.3"),
        }
    }
}

/// Minimal distance from `z` to any of `poles`.
pub(crate) fn pole_distance(z: C64, poles: &[C64]) -> f64 {
    poles.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
}

pub(crate) const POLE_EXCLUSION: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;

    struct Coord(usize);
    impl Analytic for Coord {
        fn eval<R: Real>(&self, p: &[R]) -> Result<Vec<Complex<R>>> {
            Ok(vec![crate::scalar::cplx(p[self.0].clone())])
        }
    }

    #[test]
    fn coordinate_brackets_reproduce_tensor_entries() {
        let t = PoissonTensor::oprl_finite(3);
        let p = [0.1, -0.4, 0.7, 1.2, 0.8];
        for i in 0..5 {
            for j in 0..5 {
                let v = bracket(&AnalyticField(Coord(i)), &AnalyticField(Coord(j)), &p, &t, Backend::Dual).unwrap();
                assert!((v.re - t.entry(i, j, &p).unwrap()).abs() < 1e-15 && v.im == 0.0);
            }
        }
        assert_eq!(t.entry(0, 3, &p).unwrap(), -1.2 / 4.0);
        assert_eq!(t.entry(1, 3, &p).unwrap(), 1.2 / 4.0);
        assert_eq!(t.entry(4, 2, &p).unwrap(), -0.8 / 4.0);
    }

    #[test]
    fn periodic_corner_and_single_site() {
        let t = PoissonTensor::oprl_periodic(3);
        let p = [0.0, 0.0, 0.0, 1.0, 2.0, 3.0];
        assert_eq!(t.entry(0, 5, &p).unwrap(), 0.75);
        let one = PoissonTensor::oprl_periodic(1);
        assert_eq!(one.entry(0, 1, &[0.3, 1.7]).unwrap(), 0.0);
    }

    #[test]
    fn wirtinger_matches_real_form() {
        let t = PoissonTensor::opuc_finite(3);
        let p = [0.2, -0.3, 0.1, 0.5];
        let df = [C64::new(0.3, 1.0), C64::new(-0.2, 0.4), C64::new(1.1, 0.0), C64::new(0.0, -0.7)];
        let dg = [C64::new(-1.0, 0.2), C64::new(0.5, 0.5), C64::new(0.3, -0.9), C64::new(2.0, 0.1)];
        let a = t.contract(&p, &df, &dg).unwrap();
        let b = bracket_wirtinger(&p, &df, &dg);
        assert!((a - b).norm() < 1e-15);
        // {u_0, v_0} = rho_0^2 / 2
        assert!((t.entry(0, 1, &p).unwrap() - (1.0 - 0.13) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn fd_matches_dual() {
        struct Cubic;
        impl Analytic for Cubic {
            fn eval<R: Real>(&self, p: &[R]) -> Result<Vec<Complex<R>>> {
                let x = p[0].clone();
                let y = p[1].clone();
                Ok(vec![Complex::new(x.clone() * x.clone() * y.clone(), x.exp() * y.sin())])
            }
        }
        struct ValuesOnly;
        impl ScalarField for ValuesOnly {
            fn evaluate(&self, p: &[f64]) -> Result<Vec<C64>> {
                Cubic.eval::<f64>(p)
            }
        }
        let p = [0.7, -1.3];
        let a = evaluate_with_gradients(&AnalyticField(Cubic), &p, Backend::Dual).unwrap();
        let b = evaluate_with_gradients(&ValuesOnly, &p, Backend::Dual).unwrap();
        assert_eq!(b.backend, Backend::Fd);
        for i in 0..2 {
            assert!((a.grads[0][i] - b.grads[0][i]).norm() < 1e-10);
        }
    }
}
