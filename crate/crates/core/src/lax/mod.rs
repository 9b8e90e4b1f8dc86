//! Diagonal Green's functions of the Lax operator and the perturbation determinant.
//!
//! Three routes to `(g12, g21, gamma)`:
//! [`oracle::greens_oracle`] (dense linear algebra), [`series::g_series`]
//! (explicit paraproducts) and [`fixed_point::g_fixed_point`] (iteration of
//! the defining identities). `A(kappa)` is available through
//! [`determinant::a_trace`] and [`determinant::a_integral`].

pub mod determinant;
pub mod fixed_point;
pub mod oracle;
pub mod series;
mod triple;

pub use determinant::{a_integral, a_trace, alpha, density, OperatorPair, TraceValue};
pub use fixed_point::{g_fixed_point, FixedPointOptions};
pub use oracle::greens_oracle;
pub use series::g_series;
pub use triple::{check_kappa, GreensTriple, IdentityResiduals, Method};
