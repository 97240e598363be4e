//! Hamiltonian flows on Jacobi and Verblunsky parameters: vector fields from
//! the bracket, RK4 integration, the exact spectral solutions, and checks of
//! the differential equations they induce on the polynomial families.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use num_traits::{One, Zero};
#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::oprl::{jacobi_matrix, jacobi_to_measure, measure_to_jacobi, monic_coeffs};
use crate::opuc::{cmv_generic, cmv_matrix, cmv_to_measure, measure_to_verblunsky, szego_coeffs};
use crate::params::{CircleDiscreteMeasure, JacobiParams, ParamPoint, RealDiscreteMeasure, VerblunskyParams};
use crate::poisson::{
    evaluate_with_gradients, normalized_residual, Analytic, AnalyticField, Backend, BracketReport, PoissonTensor,
    ScalarField, Tolerances, Worst,
};
use crate::poly::Poly;
use crate::scalar::{cplx, lift, Real, C64};

/// Default tolerance for derivative comparisons along the exact flow.
pub const ODE_TOL: f64 = 1e-5;
/// Time step for finite differences along a flow.
pub const FLOW_FD_STEP: f64 = 1e-5;

/// Flow coefficients. OPRL: `c_j` with `f'(x)/2 = sum c_j x^j`. OPUC: `b_k`
/// for `k >= 0` with `g(theta) = sum_{k in Z} b_k e^{i k theta}` and
/// `b_{-k} = conj(b_k)`; `b_0` must be real.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowCoeffs {
    Oprl(Vec<f64>),
    Opuc(Vec<C64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowKind {
    Oprl,
    Opuc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub coeffs: FlowCoeffs,
    pub t_final: f64,
    pub dt: f64,
}

impl FlowSpec {
    pub fn oprl(c: Vec<f64>, t_final: f64, dt: f64) -> Result<Self> {
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite flow coefficient".into()));
        }
        Self::checked(FlowCoeffs::Oprl(c), t_final, dt)
    }

    pub fn opuc(b: Vec<C64>, t_final: f64, dt: f64) -> Result<Self> {
        if b.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Argument("non-finite flow coefficient".into()));
        }
        if b.first().is_some_and(|b0| b0.im.abs() > 1e-14) {
            return Err(Error::Argument("b_0 must be real so that g is real on the circle".into()));
        }
        Self::checked(FlowCoeffs::Opuc(b), t_final, dt)
    }

    fn checked(coeffs: FlowCoeffs, t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t_final.is_finite() || t_final < 0.0 {
            return Err(Error::Argument(format!("need dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}")));
        }
        Ok(FlowSpec { coeffs, t_final, dt })
    }

    /// Toda: `H = 2 Tr J^2`, `f'(x)/2 = 2x`.
    pub fn toda(t_final: f64, dt: f64) -> Result<Self> {
        Self::oprl(vec![0.0, 2.0], t_final, dt)
    }

    /// Schur: `H = 2 Im Tr C`, `g = 2 cos theta`.
    pub fn schur(t_final: f64, dt: f64) -> Result<Self> {
        Self::opuc(vec![C64::zero(), C64::one()], t_final, dt)
    }

    pub fn kind(&self) -> FlowKind {
        match self.coeffs {
            FlowCoeffs::Oprl(_) => FlowKind::Oprl,
            FlowCoeffs::Opuc(_) => FlowKind::Opuc,
        }
    }

    fn oprl_coeffs(&self) -> Result<&[f64]> {
        match &self.coeffs {
            FlowCoeffs::Oprl(c) => Ok(c),
            FlowCoeffs::Opuc(_) => Err(Error::Argument("expected an OPRL flow".into())),
        }
    }

    fn opuc_coeffs(&self) -> Result<&[C64]> {
        match &self.coeffs {
            FlowCoeffs::Opuc(b) => Ok(b),
            FlowCoeffs::Oprl(_) => Err(Error::Argument("expected an OPUC flow".into())),
        }
    }
}

/// `f'(x)/2`.
fn half_fprime(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj)
}

/// `g(theta)`.
fn circle_g(b: &[C64], theta: f64) -> f64 {
    let mut s = b.first().map_or(0.0, |b0| b0.re);
    for (k, bk) in b.iter().enumerate().skip(1) {
        s += 2.0 * (bk * C64::from_polar(1.0, k as f64 * theta)).re;
    }
    s
}

/// `H = sum_j 2 c_j/(j+1) Tr J^{j+1}` on `(b, a)`.
pub struct OprlHamiltonian {
    pub c: Vec<f64>,
}

impl Analytic for OprlHamiltonian {
    fn eval<R: Real>(&self, point: &[R]) -> Result<Vec<Complex<R>>> {
        if point.len().is_multiple_of(2) {
            return Err(Error::Argument("OPRL point must have odd length".into()));
        }
        let n = point.len().div_ceil(2);
        let j = jacobi_matrix(&point[..n], &point[n..]);
        let pw = j.powers(self.c.len());
        let mut h = R::zero();
        for (k, &ck) in self.c.iter().enumerate() {
            h = h + pw[k + 1].trace() * R::from_f64(2.0 * ck / (k + 1) as f64);
        }
        Ok(vec![cplx(h)])
    }
}

/// `H = sum_{k>=1} (2/k) Im(b_k Tr C^k)` on `(u, v)`, beta frozen.
pub struct OpucHamiltonian {
    pub b: Vec<C64>,
    pub beta: C64,
}

impl Analytic for OpucHamiltonian {
    fn eval<R: Real>(&self, point: &[R]) -> Result<Vec<Complex<R>>> {
        if !point.len().is_multiple_of(2) {
            return Err(Error::Argument("OPUC point must have even length".into()));
        }
        let alpha: Vec<Complex<R>> = point.chunks(2).map(|c| Complex::new(c[0].clone(), c[1].clone())).collect();
        let cm = cmv_generic(&alpha, &lift(self.beta));
        let pw = cm.powers(self.b.len().saturating_sub(1));
        let mut h = R::zero();
        for (k, bk) in self.b.iter().enumerate().skip(1) {
            let t = pw[k].trace() * lift::<R>(*bk);
            h = h + t.im * R::from_f64(2.0 / k as f64);
        }
        Ok(vec![cplx(h)])
    }
}

/// Component `k` is `{H, zeta_k}` (first component of `h`).
pub fn hamiltonian_rhs(h: &dyn ScalarField, point: &[f64], tensor: &PoissonTensor, backend: Backend) -> Result<Vec<f64>> {
    let ev = evaluate_with_gradients(h, point, backend)?;
    let dh = ev.grads.first().ok_or_else(|| Error::Argument("Hamiltonian has no components".into()))?;
    let mut out = vec![0.0; point.len()];
    for (i, j, v) in tensor.nonzeros(point)? {
        out[j] += v * dh[i].re;
        out[i] -= v * dh[j].re;
    }
    Ok(out)
}

fn hamiltonian_for(spec: &FlowSpec, start: &ParamPoint) -> Result<(AnalyticFieldBox, PoissonTensor)> {
    match (start, &spec.coeffs) {
        (ParamPoint::Oprl(j), FlowCoeffs::Oprl(c)) => Ok((
            AnalyticFieldBox::Oprl(AnalyticField(OprlHamiltonian { c: c.clone() })),
            PoissonTensor::oprl_finite(j.size()),
        )),
        (ParamPoint::Opuc(v), FlowCoeffs::Opuc(b)) => Ok((
            AnalyticFieldBox::Opuc(AnalyticField(OpucHamiltonian { b: b.clone(), beta: v.beta() })),
            PoissonTensor::opuc_finite(v.size()),
        )),
        _ => Err(Error::Argument("flow kind does not match the starting point".into())),
    }
}

enum AnalyticFieldBox {
    Oprl(AnalyticField<OprlHamiltonian>),
    Opuc(AnalyticField<OpucHamiltonian>),
}

impl AnalyticFieldBox {
    fn field(&self) -> &dyn ScalarField {
        match self {
            AnalyticFieldBox::Oprl(f) => f,
            AnalyticFieldBox::Opuc(f) => f,
        }
    }
}

/// Monitored quantities: OPRL `Tr J^m`, `m = 1..4`; OPUC real and imaginary
/// parts of `Tr C` and `Tr C^2`.
pub fn monitored(state: &ParamPoint) -> (Vec<String>, Vec<f64>) {
    match state {
        ParamPoint::Oprl(j) => {
            let pw = jacobi_matrix(j.b(), j.a()).powers(4);
            ((1..=4).map(|m| format!("tr_j{m}")).collect(), (1..=4).map(|m| pw[m].trace()).collect())
        }
        ParamPoint::Opuc(v) => {
            let pw = cmv_matrix(v).entries.powers(2);
            let labels = ["re_tr_c", "im_tr_c", "re_tr_c2", "im_tr_c2"].map(String::from).to_vec();
            let (t1, t2) = (pw[1].trace(), pw[2].trace());
            (labels, vec![t1.re, t1.im, t2.re, t2.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ParamPoint>,
    /// One row of monitored values per time.
    pub conserved: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl Trajectory {
    /// CSV header: time, parameter columns, monitored columns.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        match self.states.first() {
            Some(ParamPoint::Oprl(j)) => {
                h.extend((1..=j.size()).map(|k| format!("b{k}")));
                h.extend((1..j.size()).map(|k| format!("a{k}")));
            }
            Some(ParamPoint::Opuc(v)) => {
                for k in 0..v.alpha().len() {
                    h.push(format!("re_alpha{k}"));
                    h.push(format!("im_alpha{k}"));
                }
            }
            None => {}
        }
        h.extend(self.labels.iter().cloned());
        h
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.states)
            .zip(&self.conserved)
            .map(|((t, s), c)| {
                let mut r = vec![*t];
                r.extend(s.to_point());
                r.extend_from_slice(c);
                r
            })
            .collect()
    }

    pub fn last(&self) -> Option<&ParamPoint> {
        self.states.last()
    }

    /// Largest deviation of each monitored quantity from its initial value,
    /// divided by `max(1, |initial|)` like every other residual.
    pub fn max_drift(&self) -> Vec<f64> {
        self.drift(|x0| x0.abs().max(1.0))
    }

    /// The same deviations without normalization.
    pub fn max_absolute_drift(&self) -> Vec<f64> {
        self.drift(|_| 1.0)
    }

    fn drift(&self, scale: impl Fn(f64) -> f64) -> Vec<f64> {
        let Some(first) = self.conserved.first() else { return Vec::new() };
        (0..first.len())
            .map(|k| self.conserved.iter().map(|row| (row[k] - first[k]).abs()).fold(0.0, f64::max) / scale(first[k]))
            .collect()
    }
}

fn state_from(point: &[f64], template: &ParamPoint, time: f64) -> Result<ParamPoint> {
    let res = match template {
        ParamPoint::Oprl(_) => JacobiParams::from_point(point).map(ParamPoint::Oprl),
        ParamPoint::Opuc(v) => VerblunskyParams::from_point(point, v.beta()).map(ParamPoint::Opuc),
    };
    res.map_err(|e| Error::BlowUp { time, reason: e.to_string() })
}

/// Classical fixed-step RK4 on the Hamiltonian vector field of `spec`,
/// recording monitored quantities at every step. The step is shrunk
/// slightly when needed so that the last step lands on `t_final`.
pub fn integrate_flow(spec: &FlowSpec, start: &ParamPoint, tensor: &PoissonTensor, backend: Backend) -> Result<Trajectory> {
    let (h, expected) = hamiltonian_for(spec, start)?;
    if tensor != &expected {
        return Err(Error::Argument("flows run on the finite tensor of the starting family".into()));
    }
    let field = h.field();
    let steps = ((spec.t_final / spec.dt) - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { spec.t_final / steps as f64 };
    let (labels, m0) = monitored(start);
    let mut traj = Trajectory { times: vec![0.0], states: vec![start.clone()], conserved: vec![m0], labels };
    let mut y = start.to_point();
    let rhs = |p: &[f64], t: f64| -> Result<Vec<f64>> {
        let d = hamiltonian_rhs(field, p, tensor, backend).map_err(|e| Error::BlowUp { time: t, reason: e.to_string() })?;
        if d.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp { time: t, reason: "non-finite vector field".into() });
        }
        Ok(d)
    };
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for step in 0..steps {
        let t = step as f64 * dt;
        let k1 = rhs(&y, t)?;
        let k2 = rhs(&axpy(&y, &k1, dt / 2.0), t + dt / 2.0)?;
        let k3 = rhs(&axpy(&y, &k2, dt / 2.0), t + dt / 2.0)?;
        let k4 = rhs(&axpy(&y, &k3, dt), t + dt)?;
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t1 = (step + 1) as f64 * dt;
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp { time: t1, reason: "non-finite state".into() });
        }
        let s = state_from(&y, start, t1)?;
        traj.conserved.push(monitored(&s).1);
        traj.times.push(t1);
        traj.states.push(s);
    }
    Ok(traj)
}

/// Weights `w_j e^{e_j}` renormalized through log-sum-exp.
fn tilt(weights: &[f64], exponents: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = weights.iter().zip(exponents).map(|(w, e)| w.ln() + e).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / s).collect()
}

/// Nodes fixed, `rho_j(t) proportional to e^{t f'(x_j)/2} rho_j(0)`.
pub fn exact_flow_oprl(start: &JacobiParams, spec: &FlowSpec, t: f64) -> Result<JacobiParams> {
    let c = spec.oprl_coeffs()?;
    let m = jacobi_to_measure(start)?;
    let e: Vec<f64> = m.x().iter().map(|&x| t * half_fprime(c, x)).collect();
    measure_to_jacobi(&RealDiscreteMeasure::new(m.x().to_vec(), tilt(m.rho(), &e))?)
}

/// Nodes and beta fixed, `mu_j(t) proportional to e^{t g(theta_j)} mu_j(0)`.
pub fn exact_flow_opuc(start: &VerblunskyParams, spec: &FlowSpec, t: f64) -> Result<VerblunskyParams> {
    let b = spec.opuc_coeffs()?;
    let m = cmv_to_measure(start)?;
    let e: Vec<f64> = m.theta().iter().map(|&th| t * circle_g(b, th)).collect();
    let evolved = measure_to_verblunsky(&CircleDiscreteMeasure::new(m.theta().to_vec(), tilt(m.mu(), &e))?)?;
    VerblunskyParams::new(evolved.alpha().to_vec(), start.beta())
}

/// Derivative at `t = 0` by central differences with one Richardson step.
fn time_derivative<F>(f: F, h: f64) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Result<Vec<C64>>,
{
    let central = |s: f64| -> Result<Vec<C64>> {
        let (p, m) = (f(s)?, f(-s)?);
        Ok(p.iter().zip(&m).map(|(x, y)| (x - y) / (2.0 * s)).collect())
    };
    let (d1, d2) = (central(h)?, central(h / 2.0)?);
    Ok(d1.iter().zip(&d2).map(|(a, b)| (b * 4.0 - a) / 3.0).collect())
}

fn coeff_vec(p: &Poly<C64>, len: usize) -> Vec<C64> {
    (0..len).map(|k| if k < p.coeffs.len() { p.coeffs[k] } else { C64::zero() }).collect()
}

fn real_poly(p: &Poly<f64>) -> Poly<C64> {
    Poly::new(p.coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
}

/// Worst normalized coefficient residual; the scale is the largest term.
fn coeff_residual(lhs: &[C64], rhs: &[C64], terms: &[Vec<C64>]) -> f64 {
    let mut scale = 1.0f64;
    for v in core::iter::once(lhs).chain(core::iter::once(rhs)).chain(terms.iter().map(|t| t.as_slice())) {
        scale = v.iter().map(|z| z.norm()).fold(scale, f64::max);
    }
    lhs.iter().zip(rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

/// `M = sum_j c_j J^j` at the start.
fn oprl_generator(j: &JacobiParams, c: &[f64]) -> Mat<f64> {
    let n = j.size();
    let pw = jacobi_matrix(j.b(), j.a()).powers(c.len().saturating_sub(1));
    let mut m = Mat::zeros(n);
    for (k, &ck) in c.iter().enumerate() {
        for (d, s) in m.data.iter_mut().zip(&pw[k].data) {
            *d += ck * s;
        }
    }
    m
}

fn prod(a: &[f64]) -> f64 {
    a.iter().product()
}

/// Compares the induced equations for `P_n`, `log ||P_n||` and the
/// orthonormal `p_n`, `n = 1..N-1`, with derivatives taken along the exact
/// flow of `spec`. Also checks the linear and quadratic special forms, each
/// with its own flow (`f'/2 = x` and `f'/2 = x^2`).
pub fn oprl_ode_check(j: &JacobiParams, spec: &FlowSpec, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let c = spec.oprl_coeffs()?;
    let n_size = j.size();
    if n_size < 2 {
        return Err(Error::Argument("induced equations need N >= 2".into()));
    }
    let grid = "monic coefficients, fd along exact flow";
    let mut out = Vec::new();
    let polys_at = |spec: &FlowSpec, t: f64| -> Result<Vec<Poly<f64>>> {
        let jt = exact_flow_oprl(j, spec, t)?;
        Ok(monic_coeffs(jt.b(), jt.a(), n_size))
    };
    let flat = |ps: &[Poly<f64>]| -> Vec<C64> {
        ps[1..n_size].iter().flat_map(|p| coeff_vec(&real_poly(p), n_size)).collect()
    };
    let p0 = monic_coeffs(j.b(), j.a(), n_size);
    let a = j.a();
    let m = oprl_generator(j, c);

    let dp = time_derivative(|t| Ok(flat(&polys_at(spec, t)?)), FLOW_FD_STEP)?;
    let dlog = time_derivative(
        |t| {
            let jt = exact_flow_oprl(j, spec, t)?;
            Ok((1..n_size).map(|n| C64::new(prod(&jt.a()[..n]).ln(), 0.0)).collect())
        },
        FLOW_FD_STEP,
    )?;
    let ortho_flat = |jt: &JacobiParams| -> Vec<C64> {
        let ps = monic_coeffs(jt.b(), jt.a(), n_size);
        (1..n_size)
            .flat_map(|n| coeff_vec(&real_poly(&ps[n].scaled(&(1.0 / prod(&jt.a()[..n])))), n_size))
            .collect()
    };
    let dortho = time_derivative(|t| Ok(ortho_flat(&exact_flow_oprl(j, spec, t)?)), FLOW_FD_STEP)?;

    let (mut wm, mut wl, mut wo) = (Worst::default(), Worst::default(), Worst::default());
    for n in 1..n_size {
        let sl = (n - 1) * n_size..n * n_size;
        let mut rhs = Poly::zero();
        let mut ortho = Poly::zero();
        for l in 1..=n {
            let coef = *m.get(n, n - l);
            rhs = rhs.sub(&p0[n - l].scaled(&(coef * prod(&a[n - l..n]))));
            ortho = ortho.sub(&p0[n - l].scaled(&(coef / prod(&a[..n - l]))));
        }
        let rhs_v = coeff_vec(&real_poly(&rhs), n_size);
        wm.push(coeff_residual(&dp[sl.clone()], &rhs_v, &[]));

        let log_rate = 0.5 * (m.get(n, n) - m.get(0, 0));
        wl.push(normalized_residual(dlog[n - 1], C64::new(log_rate, 0.0), &[]));

        let pn = p0[n].scaled(&(1.0 / prod(&a[..n])));
        let ortho = ortho.sub(&pn.scaled(&log_rate));
        wo.push(coeff_residual(&dortho[sl], &coeff_vec(&real_poly(&ortho), n_size), &[]));
    }
    let size = n_size;
    let id = "oprl_ode_monic";
    out.push(BracketReport::asserted(id, size, grid, wm.max, tols.get(id, ODE_TOL), format!("n = 1..{}, c = {c:?}", n_size - 1)));
    let id = "oprl_ode_norm_log";
    out.push(BracketReport::asserted(id, size, grid, wl.max, tols.get(id, ODE_TOL), format!("d/dt log(a_1...a_n), {}", wl.note())));
    let id = "oprl_ode_orthonormal";
    out.push(BracketReport::asserted(id, size, grid, wo.max, tols.get(id, ODE_TOL), format!("{} degrees", wo.count)));

    // special forms, each along its own flow
    let b = j.b();
    let linear = FlowSpec::oprl(vec![0.0, 1.0], 1.0, 1.0)?;
    let quad = FlowSpec::oprl(vec![0.0, 0.0, 1.0], 1.0, 1.0)?;
    let dl = time_derivative(|t| Ok(flat(&polys_at(&linear, t)?)), FLOW_FD_STEP)?;
    let dq = time_derivative(|t| Ok(flat(&polys_at(&quad, t)?)), FLOW_FD_STEP)?;
    let (mut w1, mut w2) = (Worst::default(), Worst::default());
    for n in 1..n_size {
        let sl = (n - 1) * n_size..n * n_size;
        let an2 = a[n - 1] * a[n - 1];
        let lin = p0[n - 1].scaled(&(-an2));
        w1.push(coeff_residual(&dl[sl.clone()], &coeff_vec(&real_poly(&lin), n_size), &[]));
        let mut q = p0[n - 1].scaled(&(-an2 * (b[n] + b[n - 1])));
        if n >= 2 {
            q = q.sub(&p0[n - 2].scaled(&(an2 * a[n - 2] * a[n - 2])));
        }
        w2.push(coeff_residual(&dq[sl], &coeff_vec(&real_poly(&q), n_size), &[]));
    }
    let id = "oprl_ode_linear_special";
    out.push(BracketReport::asserted(id, size, grid, w1.max, tols.get(id, ODE_TOL), "f'/2 = x: dP_n/dt = -a_n^2 P_{n-1}".into()));
    let id = "oprl_ode_quadratic_special";
    out.push(BracketReport::asserted(
        id,
        size,
        grid,
        w2.max,
        tols.get(id, ODE_TOL),
        "f'/2 = x^2: dP_n/dt = -a_n^2 (b_{n+1} + b_n) P_{n-1} - a_n^2 a_{n-1}^2 P_{n-2}".into(),
    ));
    Ok(out)
}

/// Laurent polynomial as coefficients of `z^{-offset}..`.
#[derive(Clone, Debug)]
struct Laurent {
    coeffs: Vec<C64>,
}

impl Laurent {
    /// `z^{-k} p` placed on the window of powers `-n..=n`.
    fn from_shifted(p: &Poly<C64>, k: usize, n: usize) -> Self {
        let mut coeffs = vec![C64::zero(); 2 * n + 1];
        for (d, c) in p.coeffs.iter().enumerate() {
            coeffs[n + d - k] += c;
        }
        Laurent { coeffs }
    }
}

/// CMV bases: `Y` is built from `Phi*_{2k}` and `Phi_{2k+1}`, `X` from
/// `Phi_{2k}` and `Phi*_{2k-1}`; both unnormalized and multiplied by the
/// right power of z to be Laurent polynomials.
fn cmv_bases(alpha: &[C64], count: usize) -> (Vec<Laurent>, Vec<Laurent>) {
    let sz = szego_coeffs(alpha, count.saturating_sub(1));
    let w = count;
    let mut y = Vec::with_capacity(count);
    let mut x = Vec::with_capacity(count);
    for n in 0..count {
        let [phi, phis, _, _] = &sz[n];
        if n % 2 == 0 {
            y.push(Laurent::from_shifted(phis, n / 2, w));
            x.push(Laurent::from_shifted(phi, n / 2, w));
        } else {
            y.push(Laurent::from_shifted(phi, n / 2, w));
            x.push(Laurent::from_shifted(phis, n.div_ceil(2), w));
        }
    }
    (y, x)
}

/// `sum_k b_k C^k` over `k in Z`.
fn opuc_generator(v: &VerblunskyParams, b: &[C64]) -> Mat<C64> {
    let c = cmv_matrix(v).entries;
    let k_max = b.len().saturating_sub(1);
    let pos = c.powers(k_max);
    let neg = c.adjoint().powers(k_max);
    let n = c.n;
    let mut m = Mat::zeros(n);
    for (k, bk) in b.iter().enumerate() {
        for i in 0..n * n {
            if k == 0 {
                m.data[i] += bk * pos[0].data[i];
            } else {
                m.data[i] += bk * pos[k].data[i] + bk.conj() * neg[k].data[i];
            }
        }
    }
    m
}

fn ismail_rhs(sz: &[[Poly<C64>; 4]], ab: &[C64], n: usize) -> Poly<C64> {
    let z = Poly::monomial(1);
    let rho2 = 1.0 - ab[n - 1].norm_sqr();
    let lin = z.add(&Poly::constant(ab[n].conj() * ab[n - 1]));
    sz[n + 1][0].sub(&lin.mul(&sz[n][0])).sub(&sz[n - 1][0].scaled(&C64::new(rho2, 0.0)))
}

/// Induced equations for the CMV bases `Y_n` and `X_n`, `n = 1..N-1`, along
/// the exact flow of `spec`. For the Schur flow it also checks Ismail's
/// equation for `Phi_n` and its reduction to degree `n - 1`.
pub fn opuc_ode_check(v: &VerblunskyParams, spec: &FlowSpec, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let b = spec.opuc_coeffs()?;
    let n_size = v.size();
    if n_size < 2 {
        return Err(Error::Argument("induced equations need N >= 2".into()));
    }
    let grid = "Laurent coefficients, fd along exact flow";
    let count = n_size;
    let flat = |ls: &[Laurent]| -> Vec<C64> { ls.iter().flat_map(|l| l.coeffs.iter().copied()).collect() };
    let width = 2 * count + 1;
    let bases_at = |t: f64| -> Result<(Vec<Laurent>, Vec<Laurent>)> {
        let vt = exact_flow_opuc(v, spec, t)?;
        Ok(cmv_bases(vt.alpha(), count))
    };
    let dy = time_derivative(|t| Ok(flat(&bases_at(t)?.0)), FLOW_FD_STEP)?;
    let dx = time_derivative(|t| Ok(flat(&bases_at(t)?.1)), FLOW_FD_STEP)?;
    let (y0, x0) = cmv_bases(v.alpha(), count);
    let m = opuc_generator(v, b);
    let rho: Vec<f64> = (0..n_size - 1).map(|j| v.rho(j)).collect();

    let (mut wy, mut wx) = (Worst::default(), Worst::default());
    for n in 1..count {
        let sl = n * width..(n + 1) * width;
        let mut ry = vec![C64::zero(); width];
        let mut rx = vec![C64::zero(); width];
        for mm in 0..n {
            let pr = prod(&rho[mm..n]);
            let cy = *m.get(mm, n) * pr;
            let cx = *m.get(n, mm) * pr;
            for k in 0..width {
                ry[k] -= cy * y0[mm].coeffs[k];
                rx[k] -= cx * x0[mm].coeffs[k];
            }
        }
        wy.push(coeff_residual(&dy[sl.clone()], &ry, &[]));
        wx.push(coeff_residual(&dx[sl], &rx, &[]));
    }
    let mut out = Vec::new();
    let id = "opuc_ode_cmv_y";
    out.push(BracketReport::asserted(id, n_size, grid, wy.max, tols.get(id, ODE_TOL), format!("n = 1..{}, b = {b:?}", count - 1)));
    let id = "opuc_ode_cmv_x";
    out.push(BracketReport::asserted(id, n_size, grid, wx.max, tols.get(id, ODE_TOL), format!("{} degrees", wx.count)));

    let is_schur = b.len() >= 2 && b[0].norm() == 0.0 && (b[1] - C64::one()).norm() == 0.0 && b[2..].iter().all(|z| z.norm() == 0.0);
    if is_schur {
        out.extend(ismail_checks(v, spec, tols)?);
    }
    Ok(out)
}

fn ismail_checks(v: &VerblunskyParams, spec: &FlowSpec, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n_size = v.size();
    let grid = "Szego coefficients, fd along exact flow";
    let ab = v.with_boundary();
    let sz = szego_coeffs(&ab, n_size);
    let width = n_size + 1;
    let dphi = time_derivative(
        |t| {
            let vt = exact_flow_opuc(v, spec, t)?;
            let s = szego_coeffs(vt.alpha(), n_size - 1);
            Ok((1..n_size).flat_map(|n| coeff_vec(&s[n][0], width)).collect())
        },
        FLOW_FD_STEP,
    )?;
    let (mut we, mut wr, mut wd) = (Worst::default(), Worst::default(), Worst::default());
    for n in 1..n_size {
        let sl = (n - 1) * width..n * width;
        let rhs = ismail_rhs(&sz, &ab, n);
        let rhs_v = coeff_vec(&rhs, width);
        we.push(coeff_residual(&dphi[sl], &rhs_v, &[]));
        let rho2 = C64::new(1.0 - ab[n - 1].norm_sqr(), 0.0);
        let reduced = sz[n - 1][1].scaled(&(-ab[n].conj() * rho2)).sub(&sz[n - 1][0].scaled(&rho2));
        wr.push(coeff_residual(&rhs_v, &coeff_vec(&reduced, width), &[]));
        wd.push(rhs_v[n..].iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let mut out = Vec::new();
    let id = "opuc_ode_ismail";
    out.push(BracketReport::asserted(
        id,
        n_size,
        grid,
        we.max,
        tols.get(id, ODE_TOL),
        format!("n = 1..{}, alpha_{{N-1}} = beta", n_size - 1),
    ));
    let id = "opuc_ode_ismail_reduced";
    out.push(BracketReport::asserted(id, n_size, grid, wr.max, tols.get(id, 1e-10), "closed degree n-1 form".into()));
    let id = "opuc_ode_ismail_degree";
    out.push(BracketReport::asserted(id, n_size, grid, wd.max, tols.get(id, 1e-10), "coefficients of degree >= n".into()));
    Ok(out)
}

/// Vector fields of the Toda and Schur Hamiltonians against their closed
/// forms, both from the bracket and from the exact flow.
pub fn vector_field_checks(point: &ParamPoint, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let mut out = Vec::new();
    match point {
        ParamPoint::Oprl(j) => {
            let n = j.size();
            let (b, a) = (j.b(), j.a());
            let mut expect = vec![0.0; 2 * n - 1];
            for k in 0..n {
                let up = if k + 1 < n { a[k] * a[k] } else { 0.0 };
                let down = if k > 0 { a[k - 1] * a[k - 1] } else { 0.0 };
                expect[k] = 2.0 * (up - down);
            }
            for k in 0..n - 1 {
                expect[n + k] = a[k] * (b[k + 1] - b[k]);
            }
            let tensor = PoissonTensor::oprl_finite(n);
            let h = AnalyticField(OprlHamiltonian { c: vec![0.0, 2.0] });
            let got = hamiltonian_rhs(&h, &j.to_point(), &tensor, Backend::Dual)?;
            let id = "oprl_toda_vector_field";
            out.push(BracketReport::asserted(id, n, "parameter point", vec_residual(&got, &expect), tols.get(id, 1e-12), "H = 2 Tr J^2".into()));

            let toda = FlowSpec::toda(1.0, 1.0)?;
            let d = time_derivative(|t| Ok(real_c(&exact_flow_oprl(j, &toda, t)?.to_point())), FLOW_FD_STEP)?;
            let got: Vec<f64> = d.iter().map(|z| z.re).collect();
            let id = "oprl_toda_exact_derivative";
            out.push(BracketReport::asserted(id, n, "fd along exact flow", vec_residual(&got, &expect), tols.get(id, ODE_TOL), "f'/2 = 2x".into()));

            let casimir = AnalyticField(OprlHamiltonian { c: vec![1.0] });
            let got = hamiltonian_rhs(&casimir, &j.to_point(), &tensor, Backend::Dual)?;
            let id = "oprl_casimir_flow";
            let zero = vec![0.0; got.len()];
            out.push(BracketReport::asserted(id, n, "parameter point", vec_residual(&got, &zero), tols.get(id, 1e-12), "H = 2 Tr J".into()));
        }
        ParamPoint::Opuc(v) => {
            let n = v.size();
            let ab = v.with_boundary();
            let mut expect = Vec::with_capacity(2 * (n - 1));
            for jj in 0..n - 1 {
                let prev = if jj == 0 { -C64::one() } else { ab[jj - 1] };
                let r = v.rho(jj);
                let d = (ab[jj + 1] - prev) * (r * r);
                expect.push(d.re);
                expect.push(d.im);
            }
            let tensor = PoissonTensor::opuc_finite(n);
            let h = AnalyticField(OpucHamiltonian { b: vec![C64::zero(), C64::one()], beta: v.beta() });
            let got = hamiltonian_rhs(&h, &v.to_point(), &tensor, Backend::Dual)?;
            let id = "opuc_schur_vector_field";
            let note = "H = 2 Im Tr C, alpha_{-1} = -1, alpha_{N-1} = beta";
            out.push(BracketReport::asserted(id, n, "parameter point", vec_residual(&got, &expect), tols.get(id, 1e-12), note.into()));

            let schur = FlowSpec::schur(1.0, 1.0)?;
            let d = time_derivative(|t| Ok(real_c(&exact_flow_opuc(v, &schur, t)?.to_point())), FLOW_FD_STEP)?;
            let got: Vec<f64> = d.iter().map(|z| z.re).collect();
            let id = "opuc_schur_exact_derivative";
            out.push(BracketReport::asserted(id, n, "fd along exact flow", vec_residual(&got, &expect), tols.get(id, ODE_TOL), "g = 2 cos theta".into()));
        }
    }
    Ok(out)
}

fn real_c(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&r| C64::new(r, 0.0)).collect()
}

fn vec_residual(got: &[f64], expect: &[f64]) -> f64 {
    let scale = got.iter().chain(expect).map(|x| x.abs()).fold(1.0, f64::max);
    got.iter().zip(expect).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jac() -> JacobiParams {
        JacobiParams::new(vec![0.3, -0.5, 0.8, 0.1], vec![0.9, 1.3, 0.6]).unwrap()
    }

    fn verb() -> VerblunskyParams {
        let alpha = vec![C64::new(0.2, -0.3), C64::new(-0.4, 0.1), C64::new(0.15, 0.35)];
        VerblunskyParams::new(alpha, C64::from_polar(1.0, 0.7)).unwrap()
    }

    #[test]
    fn exact_flow_at_zero_is_identity() {
        let toda = FlowSpec::toda(1.0, 1e-2).unwrap();
        assert!(exact_flow_oprl(&jac(), &toda, 0.0).unwrap().max_diff(&jac()) < 1e-10);
        let schur = FlowSpec::schur(1.0, 1e-2).unwrap();
        assert!(exact_flow_opuc(&verb(), &schur, 0.0).unwrap().max_diff(&verb()) < 1e-10);
    }

    #[test]
    fn toda_field_formula() {
        let r = vector_field_checks(&ParamPoint::Oprl(jac()), &Tolerances::default()).unwrap();
        for rep in r {
            assert_eq!(rep.pass, Some(true), "{rep:?}");
        }
    }

    #[test]
    fn schur_field_formula() {
        let r = vector_field_checks(&ParamPoint::Opuc(verb()), &Tolerances::default()).unwrap();
        for rep in r {
            assert_eq!(rep.pass, Some(true), "{rep:?}");
        }
    }

    #[test]
    fn rk4_short_run_matches_exact() {
        let toda = FlowSpec::toda(0.2, 1e-2).unwrap();
        let start = ParamPoint::Oprl(jac());
        let tr = integrate_flow(&toda, &start, &PoissonTensor::oprl_finite(4), Backend::Dual).unwrap();
        let ParamPoint::Oprl(end) = tr.last().unwrap() else { panic!() };
        assert!(end.max_diff(&exact_flow_oprl(&jac(), &toda, 0.2).unwrap()) < 1e-7);
        assert_eq!(tr.header().len(), tr.rows()[0].len());
    }

    #[test]
    fn induced_equations() {
        let c = FlowSpec::oprl(vec![0.2, -0.4, 0.3, 0.1], 1.0, 1.0).unwrap();
        for rep in oprl_ode_check(&jac(), &c, &Tolerances::default()).unwrap() {
            assert_eq!(rep.pass, Some(true), "{rep:?}");
        }
        let s = FlowSpec::schur(1.0, 1.0).unwrap();
        for rep in opuc_ode_check(&verb(), &s, &Tolerances::default()).unwrap() {
            assert_eq!(rep.pass, Some(true), "{rep:?}");
        }
    }
}
