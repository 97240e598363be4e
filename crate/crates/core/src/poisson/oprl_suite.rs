//! Bracket identities among `P_n`, `Q_n` and `m_n = -Q_n/P_n` on the
//! Jacobi tensor, checked on a grid of real points.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use super::{
    evaluate_with_gradients, normalized_residual, pole_distance, Analytic, AnalyticField, Backend, BracketReport, Grid,
    PoissonTensor, Tolerances, Worst, POLE_EXCLUSION, POLY_TOL,
};
use crate::error::Result;
use crate::linalg::tridiagonal_eigen;
use crate::oprl::{monic_values, second_kind_values};
use crate::params::JacobiParams;
use crate::scalar::{cplx, lift, Real, C64};

/// All grid values: for each point, `P_0..P_N`, `Q_0..Q_N`, `m_0..m_N`
/// (`m_0 = 0`) and `P^{(2)}_0..P^{(2)}_{N-1}`, the monic polynomials with two
/// leading rows removed.
struct GridValues<'a> {
    n: usize,
    pts: &'a [C64],
}

impl GridValues<'_> {
    fn block(&self) -> usize {
        3 * (self.n + 1) + self.n
    }
}

impl Analytic for GridValues<'_> {
    fn eval<R: Real>(&self, p: &[R]) -> Result<Vec<Complex<R>>> {
        let n = self.n;
        let b: Vec<Complex<R>> = p[..n].iter().cloned().map(cplx).collect();
        let a: Vec<Complex<R>> = p[n..].iter().cloned().map(cplx).collect();
        let zero = Complex::new(R::zero(), R::zero());
        let mut out = Vec::with_capacity(self.pts.len() * self.block());
        for &z in self.pts {
            let z: Complex<R> = lift(z);
            let pv = monic_values(&b, &a, &z, n);
            let qv = second_kind_values(&b, &a, &z, n);
            out.extend(pv.iter().cloned());
            out.extend(qv.iter().cloned());
            out.push(zero.clone());
            for k in 1..=n {
                out.push(-qv[k].clone() / pv[k].clone());
            }
            let mut p2 = if n >= 2 {
                monic_values(&b[2..], a.get(2..).unwrap_or(&[]), &z, n - 2)
            } else {
                Vec::new()
            };
            p2.resize(n, zero.clone());
            out.extend(p2);
        }
        Ok(out)
    }
}

/// Which family a grid value belongs to.
#[derive(Clone, Copy)]
enum Fam {
    P,
    Q,
    M,
    P2,
}

struct Table {
    values: Vec<C64>,
    grads: Vec<Vec<C64>>,
    n: usize,
    block: usize,
    /// Number of `z` points; `w` points follow.
    nz: usize,
}

impl Table {
    fn index(&self, side: usize, i: usize, fam: Fam, k: usize) -> usize {
        let pt = if side == 0 { i } else { self.nz + i };
        let off = match fam {
            Fam::P => 0,
            Fam::Q => self.n + 1,
            Fam::M => 2 * (self.n + 1),
            Fam::P2 => 3 * (self.n + 1),
        };
        pt * self.block + off + k
    }
}

struct Ctx {
    t: Table,
    nonzeros: Vec<(usize, usize, f64)>,
}

impl Ctx {
    fn val(&self, side: usize, i: usize, fam: Fam, k: usize) -> C64 {
        self.t.values[self.t.index(side, i, fam, k)]
    }
    /// `{f, g}` and the absolute size of its terms, for normalization.
    fn br(&self, f: usize, g: usize) -> (C64, f64) {
        let (df, dg) = (&self.t.grads[f], &self.t.grads[g]);
        let mut s = C64::new(0.0, 0.0);
        let mut abs = 0.0;
        for &(i, j, v) in &self.nonzeros {
            s += (df[i] * dg[j] - df[j] * dg[i]) * v;
            abs += v.abs() * ((df[i] * dg[j]).norm() + (df[j] * dg[i]).norm());
        }
        (s, abs)
    }
    fn pb(&self, f: (usize, usize, Fam, usize), g: (usize, usize, Fam, usize)) -> (C64, f64) {
        self.br(self.t.index(f.0, f.1, f.2, f.3), self.t.index(g.0, g.1, g.2, g.3))
    }
}

fn bez(fx: C64, gx: C64, fy: C64, gy: C64, x: C64, y: C64) -> C64 {
    (fx * gy - fy * gx) / (x - y)
}

/// Runs every OPRL identity on `grid` for the point `j`. Report ids are
/// stable and descriptive; see the crate README for their statements.
pub fn verify_identity_suite_oprl(j: &JacobiParams, grid: &Grid, tols: &Tolerances, backend: Backend) -> Result<Vec<BracketReport>> {
    let n = j.size();
    let point = j.to_point();
    let tensor = PoissonTensor::oprl_finite(n);
    let mut pts = grid.z.clone();
    pts.extend(grid.w.iter().copied());
    let field = AnalyticField(GridValues { n, pts: &pts });
    let block = field.0.block();
    let ev = evaluate_with_gradients(&field, &point, backend)?;
    let used = ev.backend;
    let ctx = Ctx {
        t: Table { values: ev.values, grads: ev.grads, n, block, nz: grid.z.len() },
        nonzeros: tensor.nonzeros(&point)?,
    };

    // zeros of P_k for the pole exclusion of m_k
    let mut zeros: Vec<Vec<C64>> = vec![Vec::new()];
    for k in 1..=n {
        let (x, _) = tridiagonal_eigen(&j.b()[..k], &j.a()[..k - 1])?;
        zeros.push(x.into_iter().map(|v| C64::new(v, 0.0)).collect());
    }

    let names = [
        "oprl_p_p_commute",
        "oprl_q_q_commute",
        "oprl_p_consecutive_bezoutian",
        "oprl_p_q_bezoutian",
        "oprl_p_q_swap_symmetry",
        "oprl_p_m_bracket",
        "oprl_q_m_bracket",
        "oprl_m_m_bracket",
        "oprl_step_term",
        "oprl_step_term_literal",
        "oprl_casimir_trace",
        "oprl_prod_a_finite_tensor",
    ];
    let mut w: Vec<Worst> = names.iter().map(|_| Worst::default()).collect();
    let mut mixed: Vec<(String, Worst)> = Vec::new();
    const MIXED_FACTORS: [f64; 6] = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5];
    for reading in ["q_unstripped", "q_stripped"] {
        for f in MIXED_FACTORS {
            mixed.push((format!("{reading}_x{f}"), Worst::default()));
        }
    }

    let a = j.a();
    let b = j.b();
    let prod_a: f64 = a.iter().product();
    let (nz, nw) = (grid.z.len(), grid.w.len());
    for k in 1..=n {
        for i in 0..nz {
            for l in 0..nw {
                let (x, y) = (grid.z[i], grid.w[l]);
                let v = |side: usize, fam: Fam, d: usize| ctx.val(side, if side == 0 { i } else { l }, fam, d);
                let (px, py) = (v(0, Fam::P, k), v(1, Fam::P, k));
                let (p1x, p1y) = (v(0, Fam::P, k - 1), v(1, Fam::P, k - 1));
                let (qx, qy) = (v(0, Fam::Q, k), v(1, Fam::Q, k));
                let (mx, my) = (v(0, Fam::M, k), v(1, Fam::M, k));
                let z = C64::new(0.0, 0.0);

                // vanishing brackets
                let (lhs, s) = ctx.pb((0, i, Fam::P, k), (1, l, Fam::P, k));
                w[0].push(normalized_residual(lhs, z, &[C64::new(s, 0.0)]));
                let (lhs, s) = ctx.pb((0, i, Fam::Q, k), (1, l, Fam::Q, k));
                w[1].push(normalized_residual(lhs, z, &[C64::new(s, 0.0)]));

                // 2{P_k(x), P_{k-1}(y)} = B(P_k, P_{k-1}) - P_{k-1}(x) P_{k-1}(y)
                let (lhs, s) = ctx.pb((0, i, Fam::P, k), (1, l, Fam::P, k - 1));
                let bz = bez(px, p1x, py, p1y, x, y);
                let rhs = bz - p1x * p1y;
                w[2].push(normalized_residual(lhs * 2.0, rhs, &[C64::new(2.0 * s, 0.0), bz, p1x * p1y]));

                // 2{P_k(x), Q_k(y)} = -B(P_k, Q_k) + Q_k(x) Q_k(y)
                let (pq, s) = ctx.pb((0, i, Fam::P, k), (1, l, Fam::Q, k));
                let bpq = bez(px, qx, py, qy, x, y);
                w[3].push(normalized_residual(pq * 2.0, -bpq + qx * qy, &[C64::new(2.0 * s, 0.0), bpq, qx * qy]));
                let (qp, s2) = ctx.pb((1, l, Fam::P, k), (0, i, Fam::Q, k));
                w[4].push(normalized_residual(pq, qp, &[C64::new(s.max(s2), 0.0)]));

                // m-function brackets, away from zeros of P_k
                let near_x = pole_distance(x, &zeros[k]) < POLE_EXCLUSION;
                let near_y = pole_distance(y, &zeros[k]) < POLE_EXCLUSION;
                if near_y {
                    w[5].skipped += 1;
                    w[6].skipped += 1;
                } else {
                    let (lhs, s) = ctx.pb((0, i, Fam::P, k), (1, l, Fam::M, k));
                    let t1 = qx * my;
                    let t2 = (px * my + qx) / (x - y);
                    w[5].push(normalized_residual(lhs, (t1 - t2) * 0.5, &[C64::new(s, 0.0), t1, t2]));
                    let (lhs, s) = ctx.pb((0, i, Fam::Q, k), (1, l, Fam::M, k));
                    let t1 = -qx * my * my;
                    let t2 = my * (px * my + qx) / (x - y);
                    w[6].push(normalized_residual(lhs, (t1 + t2) * 0.5, &[C64::new(s, 0.0), t1, t2]));
                }
                if near_x || near_y {
                    w[7].skipped += 1;
                } else {
                    let (lhs, s) = ctx.pb((0, i, Fam::M, k), (1, l, Fam::M, k));
                    let d = mx - my;
                    let t1 = -d * d / (x - y);
                    let t2 = d * mx * my;
                    w[7].push(normalized_residual(lhs, (t1 + t2) * 0.5, &[C64::new(s, 0.0), t1, t2]));
                }

                // induction cross term:
                // 2[(x - b_{k+1}) a_k^2 {P_k(x), P_{k-1}(y)} - (y - b_{k+1}) a_k^2 {P_k(y), P_{k-1}(x)}]
                //   = (x - y) a_k^2 [B(P_k, P_{k-1}) - P_{k-1}(x) P_{k-1}(y)]
                if k < n {
                    let a2 = a[k - 1] * a[k - 1];
                    let bk = b[k];
                    let (f1, s1) = ctx.pb((0, i, Fam::P, k), (1, l, Fam::P, k - 1));
                    let (f2, s2) = ctx.pb((1, l, Fam::P, k), (0, i, Fam::P, k - 1));
                    let lhs = ((x - bk) * f1 - (y - bk) * f2) * a2 * 2.0;
                    let sc = C64::new(2.0 * a2 * ((x - bk).norm() * s1 + (y - bk).norm() * s2), 0.0);
                    let rhs = (x - y) * a2 * (bz - p1x * p1y);
                    w[8].push(normalized_residual(lhs, rhs, &[sc, (x - y) * a2 * bz]));
                    let lit = C64::new(a2, 0.0) * (px - p1y - py * p1x - p1x * p1y * (x - y));
                    w[9].push(normalized_residual(lhs, lit, &[sc, lit]));
                }

                // sum b is a Casimir: {sum b, P_k(x)} = 0
                let g = &ctx.t.grads[ctx.t.index(0, i, Fam::P, k)];
                let mut cas = C64::new(0.0, 0.0);
                let mut cas_abs = 0.0;
                let mut pa = C64::new(0.0, 0.0);
                let mut pa_abs = 0.0;
                for &(r, c, val) in &ctx.nonzeros {
                    // (r, c) always pairs a b-coordinate r with an a-coordinate c
                    cas += g[c] * val;
                    cas_abs += (g[c] * val).norm();
                    let dpa = prod_a / a[c - n];
                    pa -= g[r] * val * dpa;
                    pa_abs += (g[r] * val * dpa).norm();
                }
                w[10].push(normalized_residual(cas, z, &[C64::new(cas_abs, 0.0)]));
                w[11].push(normalized_residual(pa, z, &[C64::new(pa_abs, 0.0)]));

                // mixed degree: {Q_{k-1}(x), P_k(y)} against
                // 2 P_{k-1}(x) - 2 Q_{k-1}(x) - b_1 a_1^{-2} (B(P_k, P_{k-1}) - P_{k-1}(x) P_{k-1}(y))
                if k >= 2 {
                    let a1 = a[0] * a[0];
                    for (reading, fam, deg) in [(0usize, Fam::Q, k - 1), (1, Fam::P2, k - 2)] {
                        let (lhs, s) = ctx.pb((0, i, fam, deg), (1, l, Fam::P, k));
                        let qv = v(0, fam, deg);
                        let rhs = p1x * 2.0 - qv * 2.0 - (bz - p1x * p1y) * (b[0] / a1);
                        for (si, f) in MIXED_FACTORS.into_iter().enumerate() {
                            let idx = MIXED_FACTORS.len() * reading + si;
                            mixed[idx].1.push(normalized_residual(lhs * f, rhs, &[C64::new(s * f.abs(), 0.0), rhs]));
                        }
                    }
                }
            }
        }
    }

    let gl = &grid.label;
    let mut out = Vec::new();
    let lit_notes = [
        (9, "literal numerator P_n(x) - P_{n-1}(y) - P_n(y)P_{n-1}(x); the corrected form is oprl_step_term"),
        (11, "prod a is not a Casimir of the finite tensor: {b_1, prod a} = -prod(a)/4"),
    ];
    for (idx, name) in names.iter().enumerate() {
        let tol = tols.get(name, POLY_TOL);
        let mut note = format!("{}, backend {:?}", w[idx].note(), used);
        if let Some((_, extra)) = lit_notes.iter().find(|(i, _)| *i == idx) {
            note = format!("{note}; {extra}");
            out.push(BracketReport::reported(name, n, gl, w[idx].max, tol, note));
        } else {
            out.push(BracketReport::asserted(name, n, gl, w[idx].max, tol, note));
        }
    }
    if n >= 2 {
        let best = mixed.iter().min_by(|p, q| p.1.max.total_cmp(&q.1.max)).map(|(s, w)| (s.clone(), w.max));
        let detail: Vec<String> = mixed.iter().map(|(s, w)| format!("{s}={:.3e}", w.max)).collect();
        let (bname, bmax) = best.unwrap_or_default();
        out.push(BracketReport::reported(
            "oprl_mixed_degree_q_p",
            n,
            gl,
            bmax,
            tols.get("oprl_mixed_degree_q_p", POLY_TOL),
            format!("best variant {bname}; variants {}", detail.join(", ")),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let j = JacobiParams::new(vec![0.3, -0.5, 1.1, 0.2], vec![0.9, 1.4, 0.6]).unwrap();
        let reps = verify_identity_suite_oprl(&j, &Grid::real_line(4), &Tolerances::default(), Backend::Dual).unwrap();
        for r in &reps {
            if r.pass.is_some() {
                assert_eq!(r.pass, Some(true), "{r:?}");
            }
        }
    }
}
