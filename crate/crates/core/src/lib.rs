//! Almost-periodic trigonometric polynomials on the Bohr compactification of
//! the real line: exact frequency arithmetic, a sparse Fourier algebra, Haar
//! integration by reduction to finite tori, generalized Riesz products built
//! from rank-one parameters, and numerical singularity and flatness checks.

pub mod appoly;
pub mod bohrint;
pub mod coeff;
pub mod criteria;
pub mod error;
pub mod flatness;
pub mod freqspace;
pub mod riesz;
pub mod stats;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use appoly::{APPoly, ExactPoly};
pub use coeff::{Coefficient, ExactComplex};
pub use error::{Error, Result};
pub use freqspace::{Frequency, Rational, Symbol, SymbolBasis, TorusReduction};
