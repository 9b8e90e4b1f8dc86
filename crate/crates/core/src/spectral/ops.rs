//! Small pointwise helpers on grid functions.

use crate::C64;

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn scale_real(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`.
pub fn axpy(a: &[C64], s: C64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn conj(a: &[C64]) -> Vec<C64> {
    a.iter().map(|x| x.conj()).collect()
}

pub fn shift(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x + s).collect()
}

pub fn zeros(n: usize) -> Vec<C64> {
    vec![C64::new(0.0, 0.0); n]
}

/// Discrete `l^2` norm of the difference scaled by `sqrt(dx)`.
pub fn l2_diff(a: &[C64], b: &[C64], dx: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

pub fn l2(a: &[C64], dx: f64) -> f64 {
    (a.iter().map(|x| x.norm_sqr()).sum::<f64>() * dx).sqrt()
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
