//! Aberth–Ehrlich simultaneous root finding for complex polynomials.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math methods when built without std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::C64;

const MAX_ITER: usize = 500;

fn eval_with_derivative(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All roots of the polynomial with ascending coefficients `c` (leading
/// coefficient nonzero). `radius` seeds the initial circle; pass `None` to use
/// the geometric mean of the root moduli, `|c_0 / c_n|^{1/n}`.
pub fn aberth_roots(c: &[C64], radius: Option<f64>) -> Result<Vec<C64>> {
    let n = c.len().checked_sub(1).ok_or_else(|| Error::Argument("empty polynomial".into()))?;
    let lead = c[n];
    if lead.norm() == 0.0 {
        return Err(Error::Argument("leading coefficient is zero".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(alloc::vec![-c[0] / lead]);
    }
    let monic: Vec<C64> = c.iter().map(|a| a / lead).collect();
    let r = radius.unwrap_or_else(|| {
        let g = monic[0].norm().powf(1.0 / n as f64);
        if g > 0.0 && g.is_finite() {
            g
        } else {
            1.0
        }
    });
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(r, 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let scale = monic.iter().map(|a| a.norm()).fold(1.0, f64::max);
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(&monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    sum += C64::new(1.0, 0.0) / (z[k] - z[j]);
                }
            }
            let step = ratio / (C64::new(1.0, 0.0) - ratio * sum);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(Error::NoConvergence("Aberth step is not finite".into()));
            }
            z[k] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
        }
        if max_step < 4.0 * f64::EPSILON {
            polish(&monic, &mut z);
            return Ok(z);
        }
    }
    // Accept if residuals are already at roundoff level.
    let worst = z
        .iter()
        .map(|&x| eval_with_derivative(&monic, x).0.norm() / (scale * (1.0 + x.norm()).powi(n as i32)))
        .fold(0.0, f64::max);
    if worst < 1e-12 {
        polish(&monic, &mut z);
        return Ok(z);
    }
    Err(Error::NoConvergence(format!("Aberth iteration, residual {worst:e}")))
}

fn polish(c: &[C64], z: &mut [C64]) {
    for x in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = eval_with_derivative(c, *x);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 1e-8 * (1.0 + x.norm()) {
                break;
            }
            *x -= step;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn roots_of_unity() {
        let c = vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let r = aberth_roots(&c, Some(1.0)).unwrap();
        for z in r {
            assert!((z.powu(3) - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn real_roots() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let c = vec![C64::new(6.0, 0.0), C64::new(-7.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let mut r: Vec<f64> = aberth_roots(&c, None).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 3.0).abs() < 1e-13 && (r[1] - 1.0).abs() < 1e-13 && (r[2] - 2.0).abs() < 1e-13);
    }
}
