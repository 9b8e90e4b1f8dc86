//! Time integration of NLS, mKdV, the `A(kappa)` flow, the regularized
//! `kappa` flows and the difference flows.
//!
//! Every flow is written as `q_t = m(d) q + N(q)` with a Fourier multiplier
//! `m` that is integrated exactly. Green's functions inside `N` come from the
//! fixed point, warm-started across the stages of a step, and only the part
//! beyond the linear term is used (`g12 - g12^[1] = -(2k - d)^{-1}[gamma q]`)
//! so that no cancellation against `m` occurs.

pub mod rescale;
pub mod spec;
pub mod stepper;
pub mod trajectory;

pub use rescale::{band_limit, original_time, rescale, rescale_onto};
pub use spec::{FlowKind, FlowSpec, Scheme, DEFAULT_FIXED_POINT_TOL};
pub use stepper::{StepCounters, Stepper};
pub use trajectory::{evolve, evolve_with, ConservedRow, Trajectory, TrajectoryStats};

use crate::spectral::Field;
use crate::{Error, Result, C64};

fn single_step(q: &Field, spec: &FlowSpec) -> Result<Field> {
    spec.validate(q.grid())?;
    let mut stepper = Stepper::new(spec, q.grid(), q.sign(), spec.dt)?;
    stepper.step(q).map_err(|e| match e {
        Error::NonFinite { .. } => Error::NonFinite { time: spec.dt, last_valid: 0.0 },
        other => other,
    })
}

fn mismatch(kind: FlowKind, op: &str) -> Error {
    Error::FlavorMismatch { flavor: kind.name().into(), flow: op.into() }
}

/// One step of NLS or mKdV with `scheme`.
pub fn step_full(q: &Field, kind: FlowKind, dt: f64, scheme: Scheme) -> Result<Field> {
    if !matches!(kind, FlowKind::Nls | FlowKind::Mkdv) {
        return Err(mismatch(kind, "step_full"));
    }
    single_step(q, &FlowSpec::new(kind, dt, dt).with_scheme(scheme))
}

/// One classical RK4 step of `i q_t = -g12(kappa)`, `i r_t = -g21(kappa)`;
/// the result is a paired field.
pub fn step_a_flow(q: &Field, kappa: f64, dt: f64) -> Result<Field> {
    single_step(q, &FlowSpec::new(FlowKind::AFlow { kappa }, dt, dt))
}

/// One integrating-factor RK4 step of a regularized flow.
pub fn step_regularized(q: &Field, kind: FlowKind, dt: f64) -> Result<Field> {
    if !matches!(kind, FlowKind::NlsKappa { .. } | FlowKind::MkdvKappa { .. }) {
        return Err(mismatch(kind, "step_regularized"));
    }
    single_step(q, &FlowSpec::new(kind, dt, dt))
}

/// One integrating-factor RK4 step of a difference flow.
pub fn step_difference(q: &Field, kind: FlowKind, dt: f64) -> Result<Field> {
    if !matches!(kind, FlowKind::NlsDiff { .. } | FlowKind::MkdvDiff { .. }) {
        return Err(mismatch(kind, "step_difference"));
    }
    single_step(q, &FlowSpec::new(kind, dt, dt))
}

/// `q(x - shift)` by a Fourier phase. The transport part `4 k^2 q'` of the
/// regularized mKdV flow is undone by `translate(q, -4 k^2 t)`.
pub fn translate(q: &Field, shift: f64) -> Result<Field> {
    let v = q.grid().apply(q.values(), |xi| C64::from_polar(1.0, -xi * shift))?;
    q.with_values(v)
}

/// Plane wave `a e^{i xi0 x}` after time `t` of NLS: phase `xi0^2 + 2 sign |a|^2`.
pub fn nls_plane_wave(q0: &Field, amplitude: C64, xi0: f64, t: f64) -> Result<Field> {
    let omega = xi0 * xi0 + 2.0 * q0.sign().value() * amplitude.norm_sqr();
    Ok(Field::from_fn(q0.grid().clone(), q0.sign(), |x| amplitude * C64::from_polar(1.0, xi0 * x - omega * t)))
}

/// Plane wave `a e^{i xi0 x}` after time `t` of mKdV: `omega = -xi0^3 - 6 sign |a|^2 xi0`.
pub fn mkdv_plane_wave(q0: &Field, amplitude: C64, xi0: f64, t: f64) -> Result<Field> {
    let omega = -xi0.powi(3) - 6.0 * q0.sign().value() * amplitude.norm_sqr() * xi0;
    Ok(Field::from_fn(q0.grid().clone(), q0.sign(), |x| amplitude * C64::from_polar(1.0, xi0 * x - omega * t)))
}
