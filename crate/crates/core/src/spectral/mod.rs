//! Grids, fields, Fourier multipliers, Sobolev norms and cutoff families.

mod cutoff;
mod field;
mod grid;
pub mod ops;
pub mod snapshot;

pub use cutoff::{h_lattice, partition_constant, Cutoff, CutoffFamily, DEFAULT_CUTOFF_SCALE};
pub use field::{Bump, Field, Sign, DECAY_RATIO, EDGE_FRACTION};
pub use grid::{
    minus_power_symbol, plus_power_symbol, principal_power, signed_index, Grid, GridSpec,
};

use crate::{Result, C64};

/// Fourier multiplier application on a grid function.
pub fn apply_multiplier<F>(grid: &Grid, f: &[C64], m: F) -> Result<Vec<C64>>
where
    F: Fn(f64) -> C64,
{
    grid.apply(f, m)
}

/// `||f||_{H^sigma_kappa}` for a field.
pub fn sobolev_norm(f: &Field, sigma: f64, kappa: f64) -> Result<f64> {
    f.sobolev_norm(sigma, kappa)
}
