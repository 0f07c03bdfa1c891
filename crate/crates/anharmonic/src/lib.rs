//! Numerics for non-self-adjoint anharmonic oscillators `-d²/dx² + V(x)`:
//! gauge products and their partial fractions, Hermite discretizations,
//! biorthogonal spectra and projection norms, pseudospectra, and WKB
//! pseudomodes that certify resolvent lower bounds.

pub mod discretize;
pub mod gauge;
pub mod linalg;
pub mod model;
pub mod pseudomode;
mod special;
pub mod spectra;

pub use num_complex::Complex64 as C64;
pub use special::{ln_beta, ln_gamma, scaled_power_tail};
