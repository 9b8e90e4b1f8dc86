use serde::{Deserialize, Serialize};

use crate::lax::{check_kappa, determinant};
use crate::spectral::Field;
use crate::{Error, Result, C64};

/// The four basic conserved quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianValue {
    pub mass: f64,
    pub momentum: f64,
    pub h_nls: f64,
    pub h_mkdv: f64,
    /// Largest `|Im| / max(|value|, tiny)` over the four integrals.
    pub imaginary_leakage: f64,
}

impl HamiltonianValue {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mass, self.momentum, self.h_nls, self.h_mkdv]
    }
}

/// Complex values of `M = int q r`, `P = (1/i) int q r'`,
/// `H_NLS = int q' r' + q^2 r^2`, `H_mKdV = (1/i) int q' r'' + 3 q^2 r r'`.
pub fn hamiltonians_complex(q: &Field) -> [C64; 4] {
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let q1 = grid.derivative(qv, 1);
    let r1 = grid.derivative(&r, 1);
    let r2 = grid.derivative(&r, 2);
    let n = qv.len();
    let minus_i = C64::new(0.0, -1.0);
    let mut m = C64::new(0.0, 0.0);
    let mut p = C64::new(0.0, 0.0);
    let mut h3 = C64::new(0.0, 0.0);
    let mut h4 = C64::new(0.0, 0.0);
    for j in 0..n {
        let qr = qv[j] * r[j];
        m += qr;
        p += qv[j] * r1[j];
        h3 += q1[j] * r1[j] + qr * qr;
        h4 += q1[j] * r2[j] + 3.0 * qv[j] * qr * r1[j];
    }
    let dx = grid.dx();
    [m * dx, minus_i * p * dx, h3 * dx, minus_i * h4 * dx]
}

pub fn hamiltonians(q: &Field) -> HamiltonianValue {
    let c = hamiltonians_complex(q);
    let scale = c.iter().map(|z| z.re.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let leakage = c.iter().map(|z| z.im.abs() / scale).fold(0.0, f64::max);
    HamiltonianValue { mass: c[0].re, momentum: c[1].re, h_nls: c[2].re, h_mkdv: c[3].re, imaginary_leakage: leakage }
}

/// `M/(2k) - i P/(2k)^2 - H_NLS/(2k)^3 + i H_mKdV/(2k)^4`, truncated to the
/// first `terms` contributions.
pub fn a_expansion(q: &Field, kappa: f64, terms: usize) -> C64 {
    let h = hamiltonians_complex(q);
    let mut coef = C64::new(1.0, 0.0);
    let mut out = C64::new(0.0, 0.0);
    let mut power = 1.0;
    for hk in h.iter().take(terms.min(4)) {
        power *= 2.0 * kappa;
        out += coef * hk / power;
        coef *= C64::new(0.0, -1.0);
    }
    out
}

/// `|A(kappa) - four-term expansion|`, with `A` from the fixed point.
pub fn a_expansion_error(q: &Field, kappa: f64) -> Result<f64> {
    a_expansion_error_terms(q, kappa, 4)
}

pub fn a_expansion_error_terms(q: &Field, kappa: f64, terms: usize) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa < 4.0 {
        return Err(Error::InvalidArgument(format!("expansion check needs kappa >= 4, got {kappa}")));
    }
    let a = determinant::a_value(q, kappa)?;
    Ok((a - a_expansion(q, kappa, terms)).norm())
}

/// Gradients `(dF/dq, dF/dr)` of `M`, `P`, `H_NLS`, `H_mKdV`.
pub fn hamiltonian_gradients(q: &Field) -> [(Vec<C64>, Vec<C64>); 4] {
    let grid = q.grid();
    let qv = q.values().to_vec();
    let r = q.r();
    let q1 = grid.derivative(&qv, 1);
    let q2 = grid.derivative(&qv, 2);
    let q3 = grid.derivative(&qv, 3);
    let r1 = grid.derivative(&r, 1);
    let r2 = grid.derivative(&r, 2);
    let r3 = grid.derivative(&r, 3);
    let i = C64::new(0.0, 1.0);
    let n = qv.len();
    let m = (r.clone(), qv.clone());
    let p = (r1.iter().map(|z| -i * z).collect(), q1.iter().map(|z| i * z).collect());
    let h3 = (
        (0..n).map(|j| -r2[j] + 2.0 * qv[j] * r[j] * r[j]).collect(),
        (0..n).map(|j| -q2[j] + 2.0 * qv[j] * qv[j] * r[j]).collect(),
    );
    // H_mKdV = (1/i) int q' r'' + 3 q^2 r r'
    let h4 = (
        (0..n).map(|j| -i * (-r3[j] + 6.0 * qv[j] * r[j] * r1[j])).collect(),
        (0..n).map(|j| -i * (q3[j] - 6.0 * qv[j] * r[j] * q1[j])).collect(),
    );
    [m, p, h3, h4]
}
