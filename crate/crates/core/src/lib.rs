//! Orthogonal polynomials on the real line and on the unit circle, the Poisson
//! structures on their parameter spaces, Hamiltonian flows, and periodic
//! discriminants.
//!
//! The crate is `no_std` with `alloc`. Transcendental functions come from
//! `libm` through `num-traits`/`num-complex`; enabling the `std` feature
//! switches those to the platform implementations.
//!
//! Layout:
//! - [`scalar`], [`poly`], [`params`], [`linalg`], [`roots`]: numeric substrate
//! - [`oprl`], [`opuc`]: polynomial families and the spectral transforms
//! - [`poisson`]: tensors, bracket evaluation and verification suites
//! - [`flows`]: Hamiltonian flows, exact solutions, induced ODE checks
//! - [`periodic`]: monodromy, discriminants, Floquet spectra

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod error;
pub mod flows;
pub mod linalg;
pub mod oprl;
pub mod opuc;
pub mod params;
pub mod periodic;
pub mod poisson;
pub mod poly;
pub mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use params::{CircleDiscreteMeasure, JacobiParams, RealDiscreteMeasure, VerblunskyParams};
pub use poly::{ComplexCoeffPoly, Poly, RealCoeffPoly};
pub use scalar::{Dual, Field, Real, C64};
