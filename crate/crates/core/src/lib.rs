//! Amplitude-exact simulation of discrete-time coined quantum walks on 1D and
//! 2D lattices with position-dependent phase defects.
//!
//! * [`statespace`]: lattice bookkeeping, basis packing and walker states.
//! * [`coins`]: 2×2 and 4×4 coin operators, fractional swap, SU(4) composition.
//! * [`evolution`]: single and multi-step evolution, dense step matrices.
//! * [`isomorphism`]: two coin-sharing 1D walkers versus one 2D walker.
//! * [`analysis`]: distributions, marginals, variances, 1-norm distance.

pub mod analysis;
pub mod coins;
pub mod error;
pub mod evolution;
pub mod isomorphism;
pub mod statespace;

pub use error::{QwalkError, Result};
pub use num_complex::Complex64;
