//! Numerical laboratory for the NLS/mKdV hierarchy on a periodic grid.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: grids, fields, Fourier multipliers, Sobolev norms, cutoffs.
//! * [`lax`]: diagonal Green's functions (oracle, series, fixed point) and the
//!   perturbation determinant.
//! * [`hierarchy`]: Hamiltonians, densities, currents, Poisson brackets.
//! * [`flows`]: time integrators for the full, regularized, difference and
//!   generating-function flows.
//! * [`diagnostics`]: measurements on trajectories.

pub mod diagnostics;
pub mod error;
pub mod flows;
pub mod hierarchy;
pub mod lax;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
