use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lax::{determinant, GreensTriple};
use crate::spectral::Field;
use crate::{Error, Result, C64};

/// Relative distance below which `kappa` and `varkappa` count as coincident.
pub const POLE_GUARD: f64 = 1e-6;

/// Which conservation law a density/current pair belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "snake_case")]
pub enum Flavor {
    /// Current of `rho(varkappa)` under the `A(kappa)` flow.
    AFlow { kappa: f64 },
    Nls,
    Mkdv,
    NlsDiff { kappa: f64 },
    MkdvDiff { kappa: f64 },
    /// `qr - 2 varkappa rho` under mKdV.
    TildeMkdv,
}

impl Flavor {
    /// The `kappa` whose triples (at `kappa`, and `-kappa` for the difference
    /// flavors) the current needs.
    pub fn kappa(&self) -> Option<f64> {
        match *self {
            Flavor::AFlow { kappa } | Flavor::NlsDiff { kappa } | Flavor::MkdvDiff { kappa } => Some(kappa),
            _ => None,
        }
    }

    pub fn needs_minus_kappa(&self) -> bool {
        matches!(self, Flavor::NlsDiff { .. } | Flavor::MkdvDiff { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Flavor::AFlow { .. } => "a_flow",
            Flavor::Nls => "nls",
            Flavor::Mkdv => "mkdv",
            Flavor::NlsDiff { .. } => "nls_diff",
            Flavor::MkdvDiff { .. } => "mkdv_diff",
            Flavor::TildeMkdv => "tilde_mkdv",
        }
    }
}

/// Triples needed by [`current`].
#[derive(Clone, Copy, Debug)]
pub struct Triples<'a> {
    /// At the density parameter `varkappa`.
    pub at_varkappa: &'a GreensTriple,
    pub at_kappa: Option<&'a GreensTriple>,
    pub at_minus_kappa: Option<&'a GreensTriple>,
}

impl<'a> Triples<'a> {
    pub fn single(at_varkappa: &'a GreensTriple) -> Self {
        Self { at_varkappa, at_kappa: None, at_minus_kappa: None }
    }
}

/// A density together with its current.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityCurrent {
    pub flavor: Flavor,
    pub varkappa: f64,
    pub density: Vec<C64>,
    pub current: Vec<C64>,
}

impl DensityCurrent {
    pub fn evaluate(q: &Field, triples: Triples<'_>, flavor: Flavor) -> Result<Self> {
        Ok(Self {
            flavor,
            varkappa: triples.at_varkappa.kappa,
            density: density(q, triples.at_varkappa, flavor)?,
            current: current(q, triples, flavor)?,
        })
    }

    /// Writes `x, Re rho, Im rho, Re j, Im j` rows.
    pub fn write_csv(&self, q: &Field, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,density_re,density_im,current_re,current_im")?;
        for (j, x) in q.grid().nodes().iter().enumerate() {
            let (d, c) = (self.density[j], self.current[j]);
            writeln!(out, "{x:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", d.re, d.im, c.re, c.im)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `rho(varkappa)`, or `qr - 2 varkappa rho` for [`Flavor::TildeMkdv`].
pub fn density(q: &Field, triple: &GreensTriple, flavor: Flavor) -> Result<Vec<C64>> {
    let rho = determinant::density(q, triple)?;
    if flavor != Flavor::TildeMkdv {
        return Ok(rho);
    }
    let qv = q.values();
    let r = q.r();
    let vk = triple.kappa;
    Ok((0..qv.len()).map(|j| qv[j] * r[j] - 2.0 * vk * rho[j]).collect())
}

fn guard(triple: &GreensTriple) -> Result<()> {
    let min = triple.gamma.iter().map(|g| (g + 2.0).norm()).fold(f64::INFINITY, f64::min);
    if min < 0.5 {
        return Err(Error::DenominatorGuard { min });
    }
    Ok(())
}

fn require<'a>(t: Option<&'a GreensTriple>, what: &str) -> Result<&'a GreensTriple> {
    t.ok_or_else(|| Error::InvalidArgument(format!("current needs the triple at {what}")))
}

fn check_parameter(t: &GreensTriple, expected: f64, what: &str) -> Result<()> {
    if (t.kappa - expected).abs() > 1e-12 * expected.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!("triple at {} supplied for {what} = {expected}", t.kappa)));
    }
    Ok(())
}

/// Current of the flavor, evaluated verbatim from its closed form.
pub fn current(q: &Field, triples: Triples<'_>, flavor: Flavor) -> Result<Vec<C64>> {
    let tv = triples.at_varkappa;
    match flavor {
        Flavor::AFlow { kappa } => {
            let tk = require(triples.at_kappa, "kappa")?;
            check_parameter(tk, kappa, "kappa")?;
            a_flow_current(tv, tk)
        }
        Flavor::Nls => nls_current(q, tv),
        Flavor::Mkdv => mkdv_current(q, tv),
        Flavor::NlsDiff { kappa } | Flavor::MkdvDiff { kappa } => {
            let tk = require(triples.at_kappa, "kappa")?;
            let tm = require(triples.at_minus_kappa, "-kappa")?;
            check_parameter(tk, kappa, "kappa")?;
            check_parameter(tm, -kappa, "-kappa")?;
            let jp = a_flow_current(tv, tk)?;
            let jm = a_flow_current(tv, tm)?;
            if matches!(flavor, Flavor::NlsDiff { .. }) {
                let base = nls_current(q, tv)?;
                let c = 4.0 * kappa.powi(3);
                Ok((0..base.len()).map(|j| base[j] + c * (jp[j] - jm[j])).collect())
            } else {
                let base = mkdv_current(q, tv)?;
                let rho = determinant::density(q, tv)?;
                let c = C64::new(0.0, 8.0 * kappa.powi(4));
                let k2 = 4.0 * kappa * kappa;
                Ok((0..base.len()).map(|j| base[j] + c * (jp[j] + jm[j]) + k2 * rho[j]).collect())
            }
        }
        Flavor::TildeMkdv => {
            let grid = q.grid();
            let qv = q.values();
            let r = q.r();
            let qr: Vec<C64> = (0..qv.len()).map(|j| qv[j] * r[j]).collect();
            let qr2 = grid.derivative(&qr, 2);
            let q1 = grid.derivative(qv, 1);
            let r1 = grid.derivative(&r, 1);
            let jm = mkdv_current(q, tv)?;
            let vk = tv.kappa;
            Ok((0..qv.len())
                .map(|j| qr2[j] - 3.0 * (q1[j] * r1[j] + qr[j] * qr[j]) - 2.0 * vk * jm[j])
                .collect())
        }
    }
}

/// `j_NLS(vk) = -i ((q' g21 + r' g12)/(2 + gamma) - qr + 2 vk rho)`.
pub fn nls_current(q: &Field, tv: &GreensTriple) -> Result<Vec<C64>> {
    let rho = determinant::density(q, tv)?;
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let q1 = grid.derivative(qv, 1);
    let r1 = grid.derivative(&r, 1);
    let vk = tv.kappa;
    let mi = C64::new(0.0, -1.0);
    Ok((0..qv.len())
        .map(|j| {
            let frac = (q1[j] * tv.g21[j] + r1[j] * tv.g12[j]) / (tv.gamma[j] + 2.0);
            mi * (frac - qv[j] * r[j] + 2.0 * vk * rho[j])
        })
        .collect())
}

/// `j_mKdV(vk) = ((q'' - 2q^2 r) g21 - (r'' - 2r^2 q) g12)/(2 + gamma) - q'r + qr' + 2i vk j_NLS`.
pub fn mkdv_current(q: &Field, tv: &GreensTriple) -> Result<Vec<C64>> {
    let jn = nls_current(q, tv)?;
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let q1 = grid.derivative(qv, 1);
    let r1 = grid.derivative(&r, 1);
    let q2 = grid.derivative(qv, 2);
    let r2 = grid.derivative(&r, 2);
    let c = C64::new(0.0, 2.0 * tv.kappa);
    Ok((0..qv.len())
        .map(|j| {
            let (qj, rj) = (qv[j], r[j]);
            let num = (q2[j] - 2.0 * qj * qj * rj) * tv.g21[j] - (r2[j] - 2.0 * rj * rj * qj) * tv.g12[j];
            num / (tv.gamma[j] + 2.0) - q1[j] * rj + qj * r1[j] + c * jn[j]
        })
        .collect())
}

/// Current of `rho(vk)` under the `A(kappa)` flow:
/// `-i (g12(k) g21(vk) + g21(k) g12(vk)) / (2 (k - vk)(2 + gamma(vk))) + i gamma(k) / (4 (k - vk))`.
pub fn a_flow_current(tv: &GreensTriple, tk: &GreensTriple) -> Result<Vec<C64>> {
    let (vk, k) = (tv.kappa, tk.kappa);
    if tv.g12.len() != tk.g12.len() {
        return Err(Error::LengthMismatch { expected: tv.g12.len(), got: tk.g12.len() });
    }
    if (k - vk).abs() < POLE_GUARD * k.abs().max(vk.abs()) {
        return Err(Error::CurrentPole { kappa: k, varkappa: vk });
    }
    guard(tv)?;
    let d = k - vk;
    let i = C64::new(0.0, 1.0);
    Ok((0..tv.g12.len())
        .map(|j| {
            let num = tk.g12[j] * tv.g21[j] + tk.g21[j] * tv.g12[j];
            -i * num / (2.0 * d * (tv.gamma[j] + 2.0)) + i * tk.gamma[j] / (4.0 * d)
        })
        .collect())
}

/// Quadratic part `(q r/(2vk + d) + q/(2vk - d) r) / 2` of `rho(vk)`.
pub fn quadratic_density(q: &Field, varkappa: f64) -> Result<Vec<C64>> {
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let a = grid.resolve_minus(qv, 2.0 * varkappa)?;
    let b = grid.resolve_plus(&r, 2.0 * varkappa)?;
    Ok((0..qv.len()).map(|j| 0.5 * (qv[j] * b[j] + a[j] * r[j])).collect())
}

/// `int j^[2](vk, k) dx` from its Fourier representation
/// `int (2i vk - xi) / (2k - i xi)^2 * q^(xi) r^(-xi) / (4 vk^2 + xi^2) dxi`.
pub fn quadratic_current_integral(q: &Field, varkappa: f64, kappa: f64) -> C64 {
    let grid = q.grid();
    let n = grid.points();
    let qh = grid.transform(q.values());
    let rh = grid.transform(&q.r());
    let xi = grid.wavenumbers();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        let x = xi[k];
        let neg = (n - k) % n;
        let num = C64::new(-x, 2.0 * varkappa);
        let den = C64::new(2.0 * kappa, -x).powi(2) * (4.0 * varkappa * varkappa + x * x);
        acc += num / den * qh[k] * rh[neg];
    }
    acc * grid.dxi()
}

/// `C_l = int 2 xi^{2l} |q^|^2 / (4 vk^2 + xi^2) dxi`.
pub fn coercive_coefficient(q: &Field, varkappa: f64, l: u32) -> f64 {
    let grid = q.grid();
    let qh = grid.transform(q.values());
    let s: f64 = grid
        .wavenumbers()
        .iter()
        .zip(&qh)
        .map(|(&x, z)| 2.0 * x.powi(2 * l as i32) * z.norm_sqr() / (4.0 * varkappa * varkappa + x * x))
        .sum();
    s * grid.dxi()
}

/// Both sides of `2(k - vk)[g12(k) g21(vk) - g21(k) g12(vk)]
/// = d/dx {g12(k) g21(vk) + g21(k) g12(vk) - (gamma(k) + 1)(gamma(vk) + 1)/2}`.
pub fn telescoping_sides(q: &Field, tk: &GreensTriple, tv: &GreensTriple) -> (Vec<C64>, Vec<C64>) {
    let n = tk.g12.len();
    let d = tk.kappa - tv.kappa;
    let lhs = (0..n).map(|j| 2.0 * d * (tk.g12[j] * tv.g21[j] - tk.g21[j] * tv.g12[j])).collect();
    let inner: Vec<C64> = (0..n)
        .map(|j| {
            tk.g12[j] * tv.g21[j] + tk.g21[j] * tv.g12[j] - 0.5 * (tk.gamma[j] + 1.0) * (tv.gamma[j] + 1.0)
        })
        .collect();
    (lhs, q.grid().derivative(&inner, 1))
}

/// Terms of the large-`kappa` expansion of `-g12`:
/// `q/(2k)`, `q'/(2k)^2`, `(q'' - 2q^2 r)/(2k)^3`, `(q''' - 6 q q' r)/(2k)^4`.
pub fn g12_expansion_terms(q: &Field, kappa: f64) -> [Vec<C64>; 4] {
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let q1 = grid.derivative(qv, 1);
    let q2 = grid.derivative(qv, 2);
    let q3 = grid.derivative(qv, 3);
    let k2 = 2.0 * kappa;
    let n = qv.len();
    [
        (0..n).map(|j| qv[j] / k2).collect(),
        (0..n).map(|j| q1[j] / k2.powi(2)).collect(),
        (0..n).map(|j| (q2[j] - 2.0 * qv[j] * qv[j] * r[j]) / k2.powi(3)).collect(),
        (0..n).map(|j| (q3[j] - 6.0 * qv[j] * q1[j] * r[j]) / k2.powi(4)).collect(),
    ]
}
