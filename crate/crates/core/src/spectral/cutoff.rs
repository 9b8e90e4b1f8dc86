use serde::{Deserialize, Serialize};

use super::Grid;
use crate::{Error, Result};

pub const DEFAULT_CUTOFF_SCALE: f64 = 99.0;

/// The family `psi(x) = sech(x / scale)` and its translates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub scale: f64,
}

impl Default for CutoffFamily {
    fn default() -> Self {
        Self { scale: DEFAULT_CUTOFF_SCALE }
    }
}

/// Samples of `psi_h^p` on a grid, optionally with `phi_h`.
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub center: f64,
    pub power: u32,
    pub samples: Vec<f64>,
    pub antiderivative: Option<Vec<f64>>,
}

impl CutoffFamily {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!("cutoff scale must be positive, got {scale}")));
        }
        Ok(Self { scale })
    }

    pub fn psi(&self, x: f64) -> f64 {
        1.0 / (x / self.scale).cosh()
    }

    /// `phi_h(x) = int_{-inf}^x psi_h^12`, in closed form through
    /// `int sech^12 = int (1 - t^2)^5 dt` with `t = tanh`.
    pub fn phi(&self, x: f64, h: f64) -> f64 {
        let y = (x - h) / self.scale;
        let tail = self.scale * sech12_tail(y.abs());
        if y < 0.0 {
            tail
        } else {
            self.scale * 2.0 * sech12_primitive(1.0) - tail
        }
    }

    pub fn sample(&self, grid: &Grid, h: f64, power: u32) -> Result<Cutoff> {
        if !(1..=12).contains(&power) {
            return Err(Error::InvalidArgument(format!("cutoff power must lie in 1..=12, got {power}")));
        }
        let samples = grid.nodes().iter().map(|&x| self.psi(x - h).powi(power as i32)).collect();
        Ok(Cutoff { center: h, power, samples, antiderivative: None })
    }

    pub fn sample_with_antiderivative(&self, grid: &Grid, h: f64, power: u32) -> Result<Cutoff> {
        let mut c = self.sample(grid, h, power)?;
        c.antiderivative = Some(grid.nodes().iter().map(|&x| self.phi(x, h)).collect());
        Ok(c)
    }

    /// Numerical `int_R psi^p dx` (trapezoid rule, exponentially accurate here).
    pub fn integral_of_power(&self, power: u32) -> f64 {
        let half = 60.0 * self.scale / power.max(1) as f64 + 40.0 * self.scale;
        let step = self.scale / 128.0;
        let n = (2.0 * half / step).ceil() as usize;
        let step = 2.0 * half / n as f64;
        (0..=n)
            .map(|i| {
                let x = -half + i as f64 * step;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * self.psi(x).powi(power as i32)
            })
            .sum::<f64>()
            * step
    }

    /// `int psi^12`, the continuum partition-of-unity constant.
    pub fn partition_constant(&self) -> f64 {
        self.integral_of_power(12)
    }
}

/// Partition constant for the default cutoff scale.
pub fn partition_constant() -> f64 {
    CutoffFamily::default().partition_constant()
}

/// `int_a^inf sech^12 = int_0^e u^5 (2 - u)^5 du` with `e = 1 - tanh a`.
fn sech12_tail(a: f64) -> f64 {
    let e = 2.0 / ((2.0 * a).exp() + 1.0);
    const BINOM: [f64; 6] = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
    (0..6)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * BINOM[k] * 2f64.powi(5 - k as i32) * e.powi(6 + k as i32) / (6 + k) as f64
        })
        .sum()
}

fn sech12_primitive(t: f64) -> f64 {
    let t2 = t * t;
    t * (1.0 + t2 * (-5.0 / 3.0 + t2 * (2.0 + t2 * (-10.0 / 7.0 + t2 * (5.0 / 9.0 - t2 / 11.0)))))
}

/// `count` translates uniformly spanning `[-L/4, L/4]`.
pub fn h_lattice(grid: &Grid, count: usize) -> Vec<f64> {
    let a = grid.length() / 4.0;
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| -a + 2.0 * a * i as f64 / (count - 1) as f64).collect(),
    }
}
