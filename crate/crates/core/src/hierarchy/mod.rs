//! Hamiltonians, the large-`kappa` expansion of `A`, densities and currents,
//! and the Poisson bracket.
//!
//! Functional derivatives treat `q` and `r` as independent variables, so that
//! `dM/dq = r`, `dA/dq = g21` and `dA/dr = -g12`. Hamiltonian flows read
//! `i q_t = dH/dr`.

pub mod currents;
pub mod hamiltonians;

pub use currents::{
    a_flow_current, coercive_coefficient, current, density, g12_expansion_terms, mkdv_current, nls_current,
    quadratic_current_integral, quadratic_density, telescoping_sides, DensityCurrent, Flavor, Triples, POLE_GUARD,
};
pub use hamiltonians::{
    a_expansion, a_expansion_error, a_expansion_error_terms, hamiltonian_gradients, hamiltonians,
    hamiltonians_complex, HamiltonianValue,
};

use crate::lax::GreensTriple;
use crate::spectral::Grid;
use crate::{Error, Result, C64};

/// A gradient `(dF/dq, dF/dr)` sampled on the grid.
pub type Gradient<'a> = (&'a [C64], &'a [C64]);

/// `{F, G} = (1/i) int dF/dq dG/dr - dF/dr dG/dq`.
pub fn poisson_bracket(grid: &Grid, grad_f: Gradient<'_>, grad_g: Gradient<'_>) -> Result<C64> {
    for v in [grad_f.0, grad_f.1, grad_g.0, grad_g.1] {
        if v.len() != grid.points() {
            return Err(Error::LengthMismatch { expected: grid.points(), got: v.len() });
        }
    }
    let integrand: Vec<C64> = (0..grid.points())
        .map(|j| grad_f.0[j] * grad_g.1[j] - grad_f.1[j] * grad_g.0[j])
        .collect();
    Ok(grid.integrate(&integrand) * C64::new(0.0, -1.0))
}

/// `(dA/dq, dA/dr) = (g21, -g12)`.
pub fn a_gradient(triple: &GreensTriple) -> (Vec<C64>, Vec<C64>) {
    (triple.g21.clone(), triple.g12.iter().map(|z| -z).collect())
}
