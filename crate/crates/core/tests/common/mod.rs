#![allow(dead_code)]

use orthobracket_core::periodic::{PeriodicOprl, PeriodicOpuc};
use orthobracket_core::{JacobiParams, VerblunskyParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alpha(r: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * r.gen::<f64>().sqrt(), r.gen_range(-3.14..3.14))
}

pub fn jacobi(r: &mut ChaCha8Rng, n: usize) -> JacobiParams {
    let b = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    let a = (0..n - 1).map(|_| r.gen_range(0.2..2.0)).collect();
    JacobiParams::new(b, a).unwrap()
}

pub fn verblunsky(r: &mut ChaCha8Rng, n: usize) -> VerblunskyParams {
    let al = (0..n - 1).map(|_| alpha(r, 0.8)).collect();
    let beta = C64::from_polar(1.0, r.gen_range(-3.14..3.14));
    VerblunskyParams::new(al, beta).unwrap()
}

pub fn periodic_oprl(r: &mut ChaCha8Rng, p: usize) -> PeriodicOprl {
    let b = (0..p).map(|_| r.gen_range(-2.0..2.0)).collect();
    let a = (0..p).map(|_| r.gen_range(0.2..2.0)).collect();
    PeriodicOprl::new(b, a).unwrap()
}

pub fn periodic_opuc(r: &mut ChaCha8Rng, p: usize) -> PeriodicOpuc {
    PeriodicOpuc::new((0..p).map(|_| alpha(r, 0.8)).collect()).unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
