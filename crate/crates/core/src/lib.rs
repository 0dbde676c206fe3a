//! Linear-response functions of one-particle Hamiltonians truncated to a
//! finite box, together with the machinery needed to measure how the
//! truncation and the spectral smoothing distort them: eigensolvers and
//! shifted solves for symmetric tridiagonal operators, time- and
//! frequency-domain response evaluation by two independent routes, a
//! closed-form infinite-lattice reference for the impurity chain, smoothing
//! kernels of prescribed moment order, unitary time propagation under a weak
//! drive, and a reproducible experiment harness with CSV output.

// `!(x > 0.0)` style guards are used on purpose: the negation also rejects
// NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod harness;
pub mod model;
pub mod response;
pub mod smoothing;
pub mod spectral;
mod tridiag;

pub use error::{Error, Result};
pub use model::{HamiltonianKind, ModelSpec, PotentialPreset, TruncatedHamiltonian};
pub use response::{ObservablePair, ResponseSample, SpectralWeights, TimeSample};
pub use smoothing::{KernelFamily, KernelSpec};
pub use spectral::{EigenDecomposition, GroundState};

pub use num_complex::Complex64;
