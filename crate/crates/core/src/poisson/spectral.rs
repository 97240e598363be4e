//! Brackets and Jacobians of spectral data. Nodes and weights come from
//! iterative solvers, so these fields are differentiated by finite
//! differences with nodes matched across perturbations.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use super::{
    evaluate_with_gradients, normalized_residual, Backend, BracketReport, FdEvaluator, PoissonTensor, ScalarField,
    Tolerances, Worst, FD_TOL, POLY_TOL, RHO_RHO_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{determinant, inverse, Mat};
use crate::oprl::jacobi_to_measure;
use crate::opuc::cmv_to_measure;
use crate::params::{normalize_angle, JacobiParams, ParamPoint, VerblunskyParams};
use crate::scalar::C64;

/// Nodes (real points or angles) with their weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Nodes are angles; distances wrap through `pi`.
    pub circle: bool,
}

impl SpectralData {
    fn distance(&self, a: f64, b: f64) -> f64 {
        if self.circle {
            normalize_angle(a - b).abs()
        } else {
            (a - b).abs()
        }
    }

    fn min_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                g = g.min(self.distance(self.nodes[i], self.nodes[j]));
            }
        }
        g
    }

    /// Reorders `self` to follow `base` node by node, unwrapping angles
    /// onto the branch of the matching base node.
    fn matched_to(&self, base: &SpectralData) -> Result<SpectralData> {
        let n = base.nodes.len();
        if self.nodes.len() != n {
            return Err(Error::Numeric("node count changed under perturbation".into()));
        }
        let mut used = vec![false; n];
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &b in &base.nodes {
            let k = (0..n)
                .filter(|&k| !used[k])
                .min_by(|&p, &q| self.distance(self.nodes[p], b).total_cmp(&self.distance(self.nodes[q], b)))
                .ok_or_else(|| Error::Numeric("node matching failed".into()))?;
            used[k] = true;
            nodes.push(if self.circle { b + normalize_angle(self.nodes[k] - b) } else { self.nodes[k] });
            weights.push(self.weights.get(k).copied().unwrap_or(0.0));
        }
        Ok(SpectralData { nodes, weights, circle: self.circle })
    }
}

/// Field obtained from spectral data: `select` maps nodes and weights to
/// the batch of values.
pub struct SpectralField<M, S> {
    pub measure: M,
    pub select: S,
}

impl<M, S> ScalarField for SpectralField<M, S>
where
    M: Fn(&[f64]) -> Result<SpectralData>,
    S: Fn(&SpectralData) -> Vec<C64>,
{
    fn evaluate(&self, point: &[f64]) -> Result<Vec<C64>> {
        Ok((self.select)(&(self.measure)(point)?))
    }

    fn fd_evaluator<'a>(&'a self, base: &[f64]) -> Result<FdEvaluator<'a>> {
        let reference = (self.measure)(base)?;
        let max_step = reference.min_gap() / 10.0;
        Ok(FdEvaluator {
            eval: Box::new(move |p| {
                let d = (self.measure)(p)?.matched_to(&reference)?;
                Ok((self.select)(&d))
            }),
            max_step,
        })
    }
}

fn oprl_data(point: &[f64]) -> Result<SpectralData> {
    let m = jacobi_to_measure(&JacobiParams::from_point(point)?)?;
    Ok(SpectralData { nodes: m.x().to_vec(), weights: m.rho().to_vec(), circle: false })
}

/// Spectral field on Jacobi coordinates `(b, a)`.
pub fn oprl_measure_field<S>(select: S) -> SpectralField<fn(&[f64]) -> Result<SpectralData>, S> {
    SpectralField { measure: oprl_data, select }
}

/// Spectral field on Verblunsky coordinates `(u, v)` with beta frozen; with
/// `free_beta` the point carries a trailing `psi`, `beta = e^{i psi}`.
pub fn opuc_measure_field<S>(beta: C64, free_beta: bool, select: S) -> SpectralField<impl Fn(&[f64]) -> Result<SpectralData>, S> {
    let measure = move |point: &[f64]| -> Result<SpectralData> {
        let (coords, b) = if free_beta {
            let (psi, rest) = point.split_last().ok_or_else(|| Error::Argument("missing psi".into()))?;
            (rest, C64::from_polar(1.0, *psi))
        } else {
            (point, beta)
        };
        let m = cmv_to_measure(&VerblunskyParams::from_point(coords, b)?)?;
        Ok(SpectralData { nodes: m.theta().to_vec(), weights: m.mu().to_vec(), circle: true })
    };
    SpectralField { measure, select }
}

fn all_data(d: &SpectralData) -> Vec<C64> {
    d.nodes.iter().chain(&d.weights).map(|&v| C64::new(v, 0.0)).collect()
}

/// Nodes, weights and their gradients in the ambient coordinates.
struct SpectralGrads {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dnodes: Vec<Vec<C64>>,
    dweights: Vec<Vec<C64>>,
}

fn spectral_grads(field: &dyn ScalarField, point: &[f64], n: usize) -> Result<SpectralGrads> {
    let ev = evaluate_with_gradients(field, point, Backend::Fd)?;
    Ok(SpectralGrads {
        nodes: ev.values[..n].iter().map(|z| z.re).collect(),
        weights: ev.values[n..].iter().map(|z| z.re).collect(),
        dnodes: ev.grads[..n].to_vec(),
        dweights: ev.grads[n..].to_vec(),
    })
}

fn rho_rho_formula(x: &[f64], r: &[f64], j: usize, k: usize) -> f64 {
    let n = x.len();
    let mut s = r[j] * r[k] / (x[j] - x[k]);
    for m in 0..n {
        if m != j {
            s -= r[j] * r[k] * r[m] / (x[j] - x[m]);
        }
        if m != k {
            s += r[j] * r[k] * r[m] / (x[k] - x[m]);
        }
    }
    s
}

/// `{x_j, x_k} = 0`, `{x_j, rho_k} = (delta_jk rho_j - rho_j rho_k)/2`, and
/// the weight-weight bracket
/// `{rho_j, rho_k} = rho_j rho_k/(x_j - x_k) - sum_{m != j} rho_j rho_k rho_m/(x_j - x_m) + sum_{m != k} rho_j rho_k rho_m/(x_k - x_m)`.
pub fn verify_fundamental_oprl(j: &JacobiParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = j.size();
    if n < 2 {
        return Err(Error::Argument("fundamental brackets need N >= 2".into()));
    }
    let point = j.to_point();
    let tensor = PoissonTensor::oprl_finite(n);
    let g = spectral_grads(&oprl_measure_field(all_data), &point, n)?;
    let (x, r) = (&g.nodes, &g.weights);
    let mut wx = Worst::default();
    let mut wr = Worst::default();
    let mut wsum = Worst::default();
    for a in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for b in 0..n {
            let xx = tensor.contract(&point, &g.dnodes[a], &g.dnodes[b])?;
            wx.push(normalized_residual(xx, C64::new(0.0, 0.0), &[]));
            let xr = tensor.contract(&point, &g.dnodes[a], &g.dweights[b])?;
            row += xr;
            let delta = if a == b { r[a] } else { 0.0 };
            wx.push(normalized_residual(xr, C64::new(0.5 * (delta - r[a] * r[b]), 0.0), &[]));
            if a != b {
                let rr = tensor.contract(&point, &g.dweights[a], &g.dweights[b])?;
                let f = rho_rho_formula(x, r, a, b);
                wr.push(normalized_residual(rr, C64::new(f, 0.0), &[]));
            }
        }
        wsum.push(row.norm());
    }
    let notes = format!("{}, fd backend; sum_k {{x_j, rho_k}} max {:.2e}", wx.note(), wsum.max);
    Ok(vec![
        BracketReport::asserted("oprl_fundamental_nodes_weights", n, "all index pairs", wx.max, tols.get("oprl_fundamental_nodes_weights", FD_TOL), notes),
        BracketReport::asserted(
            "oprl_fundamental_weight_weight",
            n,
            "all index pairs j != k",
            wr.max,
            tols.get("oprl_fundamental_weight_weight", RHO_RHO_TOL),
            format!("{}, fd backend", wr.note()),
        ),
    ])
}

/// `{theta_j, theta_k} = 0` and `{theta_j, mu_k} = mu_j delta_jk - mu_j mu_k`, beta frozen.
pub fn verify_fundamental_opuc(v: &VerblunskyParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = v.size();
    if n < 2 {
        return Err(Error::Argument("fundamental brackets need N >= 2".into()));
    }
    let point = v.to_point();
    let tensor = PoissonTensor::opuc_finite(n);
    let g = spectral_grads(&opuc_measure_field(v.beta(), false, all_data), &point, n)?;
    let mu = &g.weights;
    let mut w = Worst::default();
    let mut wsum = Worst::default();
    let zero = C64::new(0.0, 0.0);
    for k in 0..n {
        let mut col = zero;
        for a in 0..n {
            let tt = tensor.contract(&point, &g.dnodes[a], &g.dnodes[k])?;
            w.push(normalized_residual(tt, zero, &[]));
            let tm = tensor.contract(&point, &g.dnodes[a], &g.dweights[k])?;
            col += tm;
            let delta = if a == k { mu[a] } else { 0.0 };
            w.push(normalized_residual(tm, C64::new(delta - mu[a] * mu[k], 0.0), &[]));
        }
        wsum.push(col.norm());
    }
    let notes = format!("{}, fd backend; sum_j {{theta_j, mu_k}} max {:.2e}", w.note(), wsum.max);
    Ok(vec![BracketReport::asserted(
        "opuc_fundamental_angles_weights",
        n,
        "all index pairs",
        w.max,
        tols.get("opuc_fundamental_angles_weights", FD_TOL),
        notes,
    )])
}

fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    a.data.iter().zip(&b.data).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn block(u: &Mat<f64>, w: &Mat<f64>) -> Mat<f64> {
    // [[U, W], [-W^T, 0]]
    let l = u.n;
    let mut m = Mat::zeros(2 * l);
    for i in 0..l {
        for j in 0..l {
            m.set(i, j, *u.get(i, j));
            m.set(i, l + j, *w.get(i, j));
            m.set(l + j, i, -*w.get(i, j));
        }
    }
    m
}

/// Symplectic-form checks. OPRL uses the fixed-trace coordinates
/// `zeta = (a_1..a_{N-1}, b_1..b_{N-1})` with `omega = sum W_ij da_i ^ db_j`;
/// OPUC uses `(u_j, v_j)` pairs. Conventions: the reconstructed `W`
/// satisfies `{a_i, b_j} = (W^{-1})_{ji}` and brackets are
/// `{zeta_j, zeta_k} = (Omega^{-1})_{kj}`; the opposite-sign convention is
/// reported alongside.
pub fn symplectic_check(p: &ParamPoint, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    match p {
        ParamPoint::Oprl(j) => symplectic_oprl(j, tols),
        ParamPoint::Opuc(v) => symplectic_opuc(v, tols),
    }
}

fn symplectic_oprl(j: &JacobiParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = j.size();
    if n < 2 {
        return Err(Error::Argument("symplectic check needs N >= 2".into()));
    }
    let l = n - 1;
    let point = j.to_point();
    let tensor = PoissonTensor::oprl_finite(n);
    let a = j.a();
    // zeta index -> ambient index
    let amb = |z: usize| if z < l { n + z } else { z - l };
    let mut pi = Mat::zeros(2 * l);
    for r in 0..2 * l {
        for c in 0..2 * l {
            pi.set(r, c, tensor.entry(amb(r), amb(c), &point)?);
        }
    }
    let mut bmat = Mat::zeros(l);
    for r in 0..l {
        for c in 0..l {
            bmat.set(r, c, *pi.get(r, l + c));
        }
    }
    // W = (B^T)^{-1}
    let w = inverse(&bmat.transpose()).map_err(|_| Error::Singular("fixed-trace bracket block is singular".into()))?;
    let mut w_rows = Mat::zeros(l);
    let mut w_cols = Mat::zeros(l);
    for r in 0..l {
        for c in 0..=r {
            w_rows.set(r, c, 4.0 / a[r]);
            w_cols.set(r, c, 4.0 / a[c]);
        }
    }
    let scale = w.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let grid = "fixed-trace coordinates (a, b)";
    let mut out = vec![
        BracketReport::asserted(
            "oprl_symplectic_w_lower_triangular",
            n,
            grid,
            max_abs_diff(&w, &w_rows) / scale,
            tols.get("oprl_symplectic_w_lower_triangular", POLY_TOL),
            "W_ij = 4/a_i for j <= i".into(),
        ),
        BracketReport::reported(
            "oprl_symplectic_w_column_scaled",
            n,
            grid,
            max_abs_diff(&w, &w_cols) / scale,
            tols.get("oprl_symplectic_w_column_scaled", POLY_TOL),
            "W_ij = 4/a_j for j <= i, agrees only when N = 2".into(),
        ),
    ];

    let omega = block(&Mat::zeros(l), &w);
    let oinv = inverse(&omega).map_err(|_| Error::Singular("Omega is singular".into()))?;
    let mut conv = 0.0f64;
    let mut lit = 0.0f64;
    for r in 0..2 * l {
        for c in 0..2 * l {
            conv = conv.max((pi.get(r, c) - oinv.get(c, r)).abs());
            lit = lit.max((pi.get(r, c) + oinv.get(c, r)).abs());
        }
    }
    out.push(BracketReport::asserted(
        "oprl_symplectic_inverse",
        n,
        grid,
        conv,
        tols.get("oprl_symplectic_inverse", POLY_TOL),
        "{zeta_j, zeta_k} = (Omega^{-1})_{kj}, includes {a,a} = {b,b} = 0".into(),
    ));
    out.push(BracketReport::reported(
        "oprl_symplectic_inverse_opposite_sign",
        n,
        grid,
        lit,
        tols.get("oprl_symplectic_inverse_opposite_sign", POLY_TOL),
        "{zeta_j, zeta_k} = -(Omega^{-1})_{kj}".into(),
    ));

    // block inverse [[0, -W^{-T}], [W^{-1}, W^{-1} U W^{-T}]] with a nonzero antisymmetric U
    let mut u = Mat::zeros(l);
    for r in 0..l {
        for c in r + 1..l {
            let v = 0.3 * (r as f64 + 1.0) - 0.7 * a[c];
            u.set(r, c, v);
            u.set(c, r, -v);
        }
    }
    let om = block(&u, &w);
    let direct = inverse(&om)?;
    let wi = inverse(&w)?;
    let wit = wi.transpose();
    let corner = wi.mul(&u).mul(&wit);
    let mut formula = Mat::zeros(2 * l);
    for r in 0..l {
        for c in 0..l {
            formula.set(r, l + c, -*wit.get(r, c));
            formula.set(l + r, c, *wi.get(r, c));
            formula.set(l + r, l + c, *corner.get(r, c));
        }
    }
    let dscale = direct.data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    out.push(BracketReport::asserted(
        "symplectic_block_inverse",
        n,
        "LU inverse of [[U, W], [-W^T, 0]]",
        max_abs_diff(&direct, &formula) / dscale,
        tols.get("symplectic_block_inverse", POLY_TOL),
        String::from("block formula against direct inversion"),
    ));

    // spectral side: {x_j, log(rho_k/rho_N)} = delta/2, {x_j, x_k} = 0
    let g = spectral_grads(&oprl_measure_field(all_data), &point, n)?;
    let mut wsp = Worst::default();
    let r = &g.weights;
    for jj in 0..l {
        for kk in 0..l {
            let xx = tensor.contract(&point, &g.dnodes[jj], &g.dnodes[kk])?;
            wsp.push(xx.norm());
            let dy: Vec<C64> = (0..point.len()).map(|i| g.dweights[kk][i] / r[kk] - g.dweights[n - 1][i] / r[n - 1]).collect();
            let xy = tensor.contract(&point, &g.dnodes[jj], &dy)?;
            let want = if jj == kk { 0.5 } else { 0.0 };
            wsp.push(normalized_residual(xy, C64::new(want, 0.0), &[]));
        }
    }
    out.push(BracketReport::asserted(
        "oprl_symplectic_spectral_coordinates",
        n,
        "x_j, y_k = log(rho_k/rho_N), j,k < N",
        wsp.max,
        tols.get("oprl_symplectic_spectral_coordinates", FD_TOL),
        format!("{}, fd backend", wsp.note()),
    ));
    Ok(out)
}


fn symplectic_opuc(v: &VerblunskyParams, tols: &Tolerances) -> Result<Vec<BracketReport>> {
    let n = v.size();
    if n < 2 {
        return Err(Error::Argument("symplectic check needs N >= 2".into()));
    }
    let point = v.to_point();
    let tensor = PoissonTensor::opuc_finite(n);
    let pi = tensor.matrix(&point)?;
    let d = point.len();
    // Omega = block diag [[0, 2/rho^2], [-2/rho^2, 0]]
    let mut omega = Mat::zeros(d);
    for j in 0..n - 1 {
        let w = 2.0 / (1.0 - point[2 * j].powi(2) - point[2 * j + 1].powi(2));
        omega.set(2 * j, 2 * j + 1, w);
        omega.set(2 * j + 1, 2 * j, -w);
    }
    let oinv = inverse(&omega).map_err(|_| Error::Singular("Omega is singular".into()))?;
    let mut conv = 0.0f64;
    let mut lit = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            conv = conv.max((pi.get(r, c) - oinv.get(c, r)).abs());
            lit = lit.max((pi.get(r, c) + oinv.get(c, r)).abs());
        }
    }
    let grid = "coordinates (u_j, v_j)";
    let mut out = vec![
        BracketReport::asserted(
            "opuc_symplectic_blocks",
            n,
            grid,
            conv,
            tols.get("opuc_symplectic_blocks", POLY_TOL),
            "Omega = diag(2/rho_j^2) blocks; {zeta_j, zeta_k} = (Omega^{-1})_{kj}".into(),
        ),
        BracketReport::reported(
            "opuc_symplectic_blocks_opposite_sign",
            n,
            grid,
            lit,
            tols.get("opuc_symplectic_blocks_opposite_sign", POLY_TOL),
            "{zeta_j, zeta_k} = -(Omega^{-1})_{kj}".into(),
        ),
    ];
    // {theta_j, log(mu_k/mu_N)} = delta_jk, {theta_j, theta_k} = 0
    let g = spectral_grads(&opuc_measure_field(v.beta(), false, all_data), &point, n)?;
    let mu = &g.weights;
    let mut wsp = Worst::default();
    for jj in 0..n - 1 {
        for kk in 0..n - 1 {
            wsp.push(tensor.contract(&point, &g.dnodes[jj], &g.dnodes[kk])?.norm());
            let dy: Vec<C64> = (0..d).map(|i| g.dweights[kk][i] / mu[kk] - g.dweights[n - 1][i] / mu[n - 1]).collect();
            let ty = tensor.contract(&point, &g.dnodes[jj], &dy)?;
            let want = if jj == kk { 1.0 } else { 0.0 };
            wsp.push(normalized_residual(ty, C64::new(want, 0.0), &[]));
        }
    }
    out.push(BracketReport::asserted(
        "opuc_symplectic_spectral_coordinates",
        n,
        "theta_j, log(mu_k/mu_N), j,k < N",
        wsp.max,
        tols.get("opuc_symplectic_spectral_coordinates", FD_TOL),
        format!("{}, fd backend", wsp.note()),
    ));
    Ok(out)
}

/// Coordinates used for a Jacobian determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum JacobianVariant {
    /// OPRL: `(a, b_1..b_{N-1})` with `b_N` fixed by the trace, to `(x_1..x_{N-1}, rho_1..rho_{N-1})`.
    FixedTrace,
    /// OPRL: `(a, b_1..b_N)` to `(x_1..x_N, rho_1..rho_{N-1})`.
    Full,
    /// OPUC: `(u, v)` to `(theta_1..theta_{N-1}, mu_1..mu_{N-1})`.
    FixedBeta,
    /// OPUC: `(u, v, psi)`, `beta = e^{i psi}`, to `(theta_1..theta_N, mu_1..mu_{N-1})`.
    FreeBeta,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JacobianCheck {
    pub variant: JacobianVariant,
    pub size: usize,
    /// `|det d(params)/d(spectral)|`, the reciprocal of the differentiated map's determinant.
    pub numeric_det: f64,
    pub formula_det: f64,
    pub relative_error: f64,
}

fn finish(variant: JacobianVariant, size: usize, jac: Mat<f64>, formula: f64) -> Result<JacobianCheck> {
    let det = determinant(&jac);
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::Numeric("spectral map Jacobian is singular".into()));
    }
    let numeric = 1.0 / det.abs();
    Ok(JacobianCheck { variant, size, numeric_det: numeric, formula_det: formula, relative_error: (numeric - formula).abs() / formula.abs() })
}

/// Checks `|d(a,b)/d(x,rho)| = 2^{-(N-1)} prod a_j / prod rho_j`.
pub fn jacobian_oprl(j: &JacobiParams, variant: JacobianVariant) -> Result<JacobianCheck> {
    let n = j.size();
    if n < 2 {
        return Err(Error::Argument("Jacobian needs N >= 2".into()));
    }
    let point = j.to_point();
    let g = spectral_grads(&oprl_measure_field(all_data), &point, n)?;
    // input columns in ambient indices; fixed trace moves b_k together with -b_N
    let (inputs, outputs): (Vec<Vec<(usize, f64)>>, Vec<&Vec<C64>>) = match variant {
        JacobianVariant::FixedTrace => (
            (0..n - 1).map(|k| vec![(n + k, 1.0)]).chain((0..n - 1).map(|k| vec![(k, 1.0), (n - 1, -1.0)])).collect(),
            g.dnodes[..n - 1].iter().chain(&g.dweights[..n - 1]).collect(),
        ),
        JacobianVariant::Full => (
            (0..n - 1).map(|k| vec![(n + k, 1.0)]).chain((0..n).map(|k| vec![(k, 1.0)])).collect(),
            g.dnodes.iter().chain(&g.dweights[..n - 1]).collect(),
        ),
        _ => return Err(Error::Argument("OPUC variant passed to an OPRL Jacobian".into())),
    };
    let dim = inputs.len();
    let mut jac = Mat::zeros(dim);
    for (r, out) in outputs.iter().enumerate() {
        for (c, inp) in inputs.iter().enumerate() {
            jac.set(r, c, inp.iter().map(|&(i, s)| s * out[i].re).sum());
        }
    }
    let formula = 0.5f64.powi(n as i32 - 1) * j.a().iter().product::<f64>() / g.weights.iter().product::<f64>();
    finish(variant, n, jac, formula)
}

/// Checks `2^{-(N-1)} prod_{j<N-1} rho_j^2 / prod mu_j` for the Verblunsky-to-spectral map.
pub fn jacobian_opuc(v: &VerblunskyParams, variant: JacobianVariant) -> Result<JacobianCheck> {
    let n = v.size();
    if n < 2 {
        return Err(Error::Argument("Jacobian needs N >= 2".into()));
    }
    let free = match variant {
        JacobianVariant::FixedBeta => false,
        JacobianVariant::FreeBeta => true,
        _ => return Err(Error::Argument("OPRL variant passed to an OPUC Jacobian".into())),
    };
    let mut point = v.to_point();
    if free {
        point.push(v.beta().arg());
    }
    let g = spectral_grads(&opuc_measure_field(v.beta(), free, all_data), &point, n)?;
    let outputs: Vec<&Vec<C64>> = if free {
        g.dnodes.iter().chain(&g.dweights[..n - 1]).collect()
    } else {
        g.dnodes[..n - 1].iter().chain(&g.dweights[..n - 1]).collect()
    };
    let dim = outputs.len();
    let mut jac = Mat::zeros(dim);
    for (r, out) in outputs.iter().enumerate() {
        for c in 0..dim {
            jac.set(r, c, out[c].re);
        }
    }
    let rho2: f64 = (0..n - 1).map(|k| v.rho(k).powi(2)).product();
    let formula = 0.5f64.powi(n as i32 - 1) * rho2 / g.weights.iter().product::<f64>();
    finish(variant, n, jac, formula)
}
