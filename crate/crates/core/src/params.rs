//! Parameter points and discrete spectral measures.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::C64;

/// Band in which measure weights are accepted and renormalized.
pub const WEIGHT_SUM_BAND: f64 = 1e-9;
/// Accepted deviation of `|beta|` from one before renormalization.
pub const BETA_MODULUS_BAND: f64 = 1e-8;

/// Jacobi parameters `(b_1..b_N, a_1..a_{N-1})`, all `a_j > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiParams {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl JacobiParams {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if a.len() + 1 != b.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} off-diagonal entries, got {}",
                b.len() - 1,
                a.len()
            )));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite b".into()));
        }
        if let Some(j) = a.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidParams(format!("a_{} = {} is not positive", j + 1, a[j])));
        }
        Ok(JacobiParams { b, a })
    }

    pub fn size(&self) -> usize {
        self.b.len()
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Flat coordinates `(b_1..b_N, a_1..a_{N-1})`.
    pub fn to_point(&self) -> Vec<f64> {
        let mut p = self.b.clone();
        p.extend_from_slice(&self.a);
        p
    }

    pub fn from_point(point: &[f64]) -> Result<Self> {
        if point.len().is_multiple_of(2) {
            return Err(Error::Argument("OPRL point must have odd length 2N-1".into()));
        }
        let n = point.len().div_ceil(2);
        JacobiParams::new(point[..n].to_vec(), point[n..].to_vec())
    }

    /// Parameters with the first row and column removed; `None` when N = 1.
    pub fn stripped(&self) -> Option<Self> {
        if self.size() < 2 {
            return None;
        }
        Some(JacobiParams { b: self.b[1..].to_vec(), a: self.a[1..].to_vec() })
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let db = self.b.iter().zip(&other.b).map(|(x, y)| (x - y).abs());
        let da = self.a.iter().zip(&other.a).map(|(x, y)| (x - y).abs());
        db.chain(da).fold(0.0, f64::max)
    }
}

/// Verblunsky coefficients `alpha_0..alpha_{N-2}` in the open disk and a
/// unimodular boundary value `beta = alpha_{N-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerblunskyParams {
    alpha: Vec<C64>,
    beta: C64,
}

impl VerblunskyParams {
    pub fn new(alpha: Vec<C64>, beta: C64) -> Result<Self> {
        if let Some(j) = alpha.iter().position(|z| !(z.norm() < 1.0) || !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams(format!("|alpha_{}| = {} is not < 1", j, alpha[j].norm())));
        }
        let m = beta.norm();
        if !m.is_finite() || (m - 1.0).abs() > BETA_MODULUS_BAND {
            return Err(Error::InvalidParams(format!("|beta| = {m} is not 1")));
        }
        Ok(VerblunskyParams { alpha, beta: beta / m })
    }

    /// Size N (number of nodes of the associated measure).
    pub fn size(&self) -> usize {
        self.alpha.len() + 1
    }
    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }
    pub fn beta(&self) -> C64 {
        self.beta
    }
    /// `rho_j = sqrt(1 - |alpha_j|^2)`.
    pub fn rho(&self, j: usize) -> f64 {
        (1.0 - self.alpha[j].norm_sqr()).sqrt()
    }

    /// Full coefficient list with `beta` appended.
    pub fn with_boundary(&self) -> Vec<C64> {
        let mut v = self.alpha.clone();
        v.push(self.beta);
        v
    }

    /// Flat real coordinates `(u_0, v_0, ..., u_{N-2}, v_{N-2})`; beta is not included.
    pub fn to_point(&self) -> Vec<f64> {
        self.alpha.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_point(point: &[f64], beta: C64) -> Result<Self> {
        if !point.len().is_multiple_of(2) {
            return Err(Error::Argument("OPUC point must have even length".into()));
        }
        let alpha = point.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        VerblunskyParams::new(alpha, beta)
    }

    /// Coefficients with alpha_0 removed; `None` when N = 1.
    pub fn stripped(&self) -> Option<Self> {
        if self.alpha.is_empty() {
            return None;
        }
        Some(VerblunskyParams { alpha: self.alpha[1..].to_vec(), beta: self.beta })
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.alpha
            .iter()
            .zip(&other.alpha)
            .map(|(x, y)| (x - y).norm())
            .fold((self.beta - other.beta).norm(), f64::max)
    }
}

/// A parameter point of either family.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamPoint {
    Oprl(JacobiParams),
    Opuc(VerblunskyParams),
}

impl ParamPoint {
    pub fn size(&self) -> usize {
        match self {
            ParamPoint::Oprl(j) => j.size(),
            ParamPoint::Opuc(v) => v.size(),
        }
    }
    /// Flat real coordinates; beta is not included.
    pub fn to_point(&self) -> Vec<f64> {
        match self {
            ParamPoint::Oprl(j) => j.to_point(),
            ParamPoint::Opuc(v) => v.to_point(),
        }
    }
}

/// Reduce an angle to `(-pi, pi]`; `-pi` maps to `+pi`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta - two_pi * Float::round(theta / two_pi);
    if t <= -PI {
        t += two_pi;
    }
    if t > PI {
        t -= two_pi;
    }
    t
}

fn check_weights(w: &mut [f64], name: &str) -> Result<()> {
    if let Some(j) = w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParams(format!("{name}_{} = {} is not positive", j + 1, w[j])));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_BAND {
        return Err(Error::InvalidParams(format!("{name} weights sum to {s}, not 1")));
    }
    w.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// `sum rho_j delta_{x_j}` with strictly ascending nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RealDiscreteMeasure {
    x: Vec<f64>,
    rho: Vec<f64>,
}

impl RealDiscreteMeasure {
    pub fn new(x: Vec<f64>, mut rho: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != rho.len() {
            return Err(Error::InvalidParams("nodes and weights must be nonempty and equal length".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite node".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("nodes must be strictly ascending".into()));
        }
        check_weights(&mut rho, "rho")?;
        Ok(RealDiscreteMeasure { x, rho })
    }

    /// Sorts `(x, rho)` pairs before validating.
    pub fn from_unsorted(x: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if x.len() != rho.len() {
            return Err(Error::InvalidParams("nodes and weights must have equal length".into()));
        }
        let mut pairs: Vec<(f64, f64)> = x.into_iter().zip(rho).collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (x, rho) = pairs.into_iter().unzip();
        RealDiscreteMeasure::new(x, rho)
    }

    pub fn size(&self) -> usize {
        self.x.len()
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn min_gap(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let dx = self.x.iter().zip(&other.x).map(|(p, q)| (p - q).abs());
        let dr = self.rho.iter().zip(&other.rho).map(|(p, q)| (p - q).abs());
        dx.chain(dr).fold(0.0, f64::max)
    }
}

/// `sum mu_j delta_{e^{i theta_j}}` with angles in `(-pi, pi]`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleDiscreteMeasure {
    theta: Vec<f64>,
    mu: Vec<f64>,
}

impl CircleDiscreteMeasure {
    /// Normalizes and sorts the angles, then validates distinctness and weights.
    pub fn new(theta: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if theta.is_empty() || theta.len() != mu.len() {
            return Err(Error::InvalidParams("nodes and weights must be nonempty and equal length".into()));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite angle".into()));
        }
        let mut pairs: Vec<(f64, f64)> = theta.into_iter().map(normalize_angle).zip(mu).collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (theta, mut mu): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if theta.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("nodes must be distinct".into()));
        }
        check_weights(&mut mu, "mu")?;
        Ok(CircleDiscreteMeasure { theta, mu })
    }

    pub fn size(&self) -> usize {
        self.theta.len()
    }
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
    pub fn nodes(&self) -> Vec<C64> {
        self.theta.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }

    /// Smallest angular separation, including the wrap through `pi`.
    pub fn min_gap(&self) -> f64 {
        let n = self.theta.len();
        if n < 2 {
            return 2.0 * PI;
        }
        let inner = self.theta.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        inner.min(self.theta[0] + 2.0 * PI - self.theta[n - 1])
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let dt = self.theta.iter().zip(&other.theta).map(|(p, q)| normalize_angle(p - q).abs());
        let dm = self.mu.iter().zip(&other.mu).map(|(p, q)| (p - q).abs());
        dt.chain(dm).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn angle_ties_map_to_plus_pi() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn weights_renormalize_inside_band_and_reject_outside() {
        let m = RealDiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((m.rho().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(RealDiscreteMeasure::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(CircleDiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn jacobi_rejects_nonpositive_a() {
        assert!(JacobiParams::new(vec![0.0, 0.0], vec![0.0]).is_err());
        assert!(JacobiParams::new(vec![0.0, 0.0], vec![]).is_err());
        assert!(JacobiParams::new(vec![1.0], vec![]).is_ok());
    }

    #[test]
    fn beta_is_renormalized() {
        let v = VerblunskyParams::new(vec![], C64::new(1.0 + 1e-12, 0.0)).unwrap();
        assert_eq!(v.beta(), C64::new(1.0, 0.0));
        assert!(VerblunskyParams::new(vec![], C64::new(1.1, 0.0)).is_err());
        assert!(VerblunskyParams::new(vec![C64::new(1.0, 0.0)], C64::new(1.0, 0.0)).is_err());
    }
}
