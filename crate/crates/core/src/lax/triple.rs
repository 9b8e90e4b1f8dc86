use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::spectral::{ops, snapshot, Field, Grid};
use crate::{Error, Result, C64};

/// How a triple was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Oracle { condition: f64, renormalized: bool },
    Series { order: u32 },
    FixedPoint { tol: f64, iterations: usize, residual: f64 },
}

/// Diagonal Green's function values `(g12, g21, gamma)` at one spectral parameter.
#[derive(Clone, Debug)]
pub struct GreensTriple {
    pub kappa: f64,
    pub g12: Vec<C64>,
    pub g21: Vec<C64>,
    pub gamma: Vec<C64>,
    pub method: Method,
}

/// Residuals of the pointwise identities satisfied by a triple.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `|| gamma + gamma^2/2 - 2 g12 g21 ||`
    pub quadratic: f64,
    /// `|| gamma' - 2 (q g21 + r g12) ||`
    pub gamma_derivative: f64,
    /// `|| g12' - 2 kappa g12 - q (gamma + 1) ||`
    pub g12_derivative: f64,
    /// `|| g21' + 2 kappa g21 - r (gamma + 1) ||`
    pub g21_derivative: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.quadratic
            .max(self.gamma_derivative)
            .max(self.g12_derivative)
            .max(self.g21_derivative)
    }
}

#[derive(Serialize)]
struct ExportMeta<'a> {
    kappa: f64,
    method: &'a Method,
    residuals: IdentityResiduals,
}

impl GreensTriple {
    pub fn zeros(kappa: f64, n: usize, method: Method) -> Self {
        Self { kappa, g12: ops::zeros(n), g21: ops::zeros(n), gamma: ops::zeros(n), method }
    }

    /// `|| gamma + gamma^2/2 - 2 g12 g21 ||_{L^2}`.
    pub fn quadratic_residual(&self, grid: &Grid) -> f64 {
        let r: Vec<C64> = self
            .gamma
            .iter()
            .zip(self.g12.iter().zip(&self.g21))
            .map(|(g, (a, b))| g + 0.5 * g * g - 2.0 * a * b)
            .collect();
        ops::l2(&r, grid.dx())
    }

    pub fn residuals(&self, q: &Field) -> IdentityResiduals {
        let grid = q.grid();
        let qv = q.values();
        let r = q.r();
        let dx = grid.dx();
        let k = self.kappa;
        let dgamma = grid.derivative(&self.gamma, 1);
        let d12 = grid.derivative(&self.g12, 1);
        let d21 = grid.derivative(&self.g21, 1);
        let n = qv.len();
        let mut rg = ops::zeros(n);
        let mut r12 = ops::zeros(n);
        let mut r21 = ops::zeros(n);
        for j in 0..n {
            let one = self.gamma[j] + 1.0;
            rg[j] = dgamma[j] - 2.0 * (qv[j] * self.g21[j] + r[j] * self.g12[j]);
            r12[j] = d12[j] - 2.0 * k * self.g12[j] - qv[j] * one;
            r21[j] = d21[j] + 2.0 * k * self.g21[j] - r[j] * one;
        }
        IdentityResiduals {
            quadratic: self.quadratic_residual(grid),
            gamma_derivative: ops::l2(&rg, dx),
            g12_derivative: ops::l2(&r12, dx),
            g21_derivative: ops::l2(&r21, dx),
        }
    }

    /// Largest deviation from `gamma(k) = conj gamma(-k)` and
    /// `g12(k) = sign * conj g21(-k)` against a triple at `-kappa`.
    pub fn symmetry_residual(&self, mirror: &GreensTriple, q: &Field) -> f64 {
        let s = q.sign().value();
        let dx = q.grid().dx();
        let dg: Vec<C64> = self.gamma.iter().zip(&mirror.gamma).map(|(a, b)| a - b.conj()).collect();
        let d12: Vec<C64> = self.g12.iter().zip(&mirror.g21).map(|(a, b)| a - s * b.conj()).collect();
        let d21: Vec<C64> = self.g21.iter().zip(&mirror.g12).map(|(a, b)| a - s * b.conj()).collect();
        ops::l2(&dg, dx).max(ops::l2(&d12, dx)).max(ops::l2(&d21, dx))
    }

    /// Triple at `-kappa` obtained from the conjugation symmetry.
    pub fn mirrored(&self, q: &Field) -> GreensTriple {
        let s = q.sign().value();
        GreensTriple {
            kappa: -self.kappa,
            g12: self.g21.iter().map(|z| z.conj() * s).collect(),
            g21: self.g12.iter().map(|z| z.conj() * s).collect(),
            gamma: ops::conj(&self.gamma),
            method: self.method.clone(),
        }
    }

    /// Largest relative `L^2` deviation of the three components.
    pub fn relative_distance(&self, other: &GreensTriple, grid: &Grid) -> f64 {
        let dx = grid.dx();
        let rel = |a: &[C64], b: &[C64]| {
            let nb = ops::l2(b, dx);
            let d = ops::l2_diff(a, b, dx);
            if nb == 0.0 {
                d
            } else {
                d / nb
            }
        };
        rel(&self.g12, &other.g12).max(rel(&self.g21, &other.g21)).max(rel(&self.gamma, &other.gamma))
    }

    /// Writes three snapshots and a JSON sidecar describing the triple.
    pub fn export(&self, dir: &Path, stem: &str, q: &Field) -> Result<()> {
        let grid = q.grid();
        let label = |c: &str| format!("{c} kappa={}", self.kappa);
        snapshot::write_values(dir, &format!("{stem}_g12"), grid, q.sign(), &self.g12, 0.0, &label("g12"))?;
        snapshot::write_values(dir, &format!("{stem}_g21"), grid, q.sign(), &self.g21, 0.0, &label("g21"))?;
        snapshot::write_values(dir, &format!("{stem}_gamma"), grid, q.sign(), &self.gamma, 0.0, &label("gamma"))?;
        let meta = ExportMeta { kappa: self.kappa, method: &self.method, residuals: self.residuals(q) };
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

/// Rejects `kappa` outside `|kappa| >= 1`.
pub fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa.abs() < 1.0 {
        return Err(Error::KappaRange(kappa));
    }
    Ok(())
}
