//! Seeded random instances.
//!
//! `b ~ U[-2, 2]`, `a ~ U[0.2, 2]`, `alpha` uniform on the disk of radius
//! 0.8, `beta` uniform on the unit circle. Each (seed, size) pair gets its
//! own ChaCha stream, so adding sizes to a run does not change the
//! instances drawn for the others.

use std::f64::consts::PI;

use orthobracket_core::periodic::{PeriodicOprl, PeriodicOpuc};
use orthobracket_core::{JacobiParams, VerblunskyParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHA_RADIUS: f64 = 0.8;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    fn b(&mut self) -> f64 {
        self.rng.gen_range(-2.0..=2.0)
    }
    fn a(&mut self) -> f64 {
        self.rng.gen_range(0.2..=2.0)
    }
    fn alpha(&mut self) -> C64 {
        let r = ALPHA_RADIUS * self.rng.gen::<f64>().sqrt();
        C64::from_polar(r, self.rng.gen_range(-PI..PI))
    }
    fn unimodular(&mut self) -> C64 {
        C64::from_polar(1.0, self.rng.gen_range(-PI..PI))
    }

    pub fn jacobi(&mut self, n: usize) -> JacobiParams {
        let b = (0..n).map(|_| self.b()).collect();
        let a = (0..n.saturating_sub(1)).map(|_| self.a()).collect();
        JacobiParams::new(b, a).expect("sampled Jacobi parameters are valid")
    }

    pub fn verblunsky(&mut self, n: usize) -> VerblunskyParams {
        let alpha = (0..n.saturating_sub(1)).map(|_| self.alpha()).collect();
        let beta = self.unimodular();
        VerblunskyParams::new(alpha, beta).expect("sampled Verblunsky parameters are valid")
    }

    pub fn periodic_oprl(&mut self, p: usize) -> PeriodicOprl {
        let b = (0..p).map(|_| self.b()).collect();
        let a = (0..p).map(|_| self.a()).collect();
        PeriodicOprl::new(b, a).expect("sampled periodic parameters are valid")
    }

    pub fn periodic_opuc(&mut self, p: usize) -> PeriodicOpuc {
        PeriodicOpuc::new((0..p).map(|_| self.alpha()).collect()).expect("sampled periodic parameters are valid")
    }

    /// Uniform real in `[lo, hi]`, for flow coefficients and the like.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }
}
