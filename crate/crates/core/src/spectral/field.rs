use serde::{Deserialize, Serialize};

use super::Grid;
use crate::{Error, Result, C64};

/// Default ratio for the boundary decay check.
pub const DECAY_RATIO: f64 = 1e-10;

/// Fraction of nodes (split between both ends) inspected by the decay check.
pub const EDGE_FRACTION: f64 = 0.05;

/// Choice of `r = sign * conj(q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// Upper sign, `r = +conj(q)`.
    Defocusing,
    /// Lower sign, `r = -conj(q)`.
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Defocusing),
            -1 => Ok(Sign::Focusing),
            _ => Err(Error::InvalidArgument(format!("sign must be +1 or -1, got {v}"))),
        }
    }
}

/// `amplitude * exp(-((x - center) / width)^2 + i frequency x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: C64,
    pub frequency: f64,
}

impl Bump {
    pub fn eval(&self, x: f64) -> C64 {
        let y = (x - self.center) / self.width;
        self.amplitude * C64::from_polar((-y * y).exp(), self.frequency * x)
    }
}

/// Complex grid function `q` together with the sign fixing `r`.
///
/// A paired field carries its own `r`, as needed by flows that leave the
/// constraint `r = sign * conj(q)`. Only [`Field::r`] and the partner accessors
/// see the stored `r`; every other operation treats the field as constrained.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Vec<C64>,
    sign: Sign,
    partner: Option<Vec<C64>>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<C64>, sign: Sign) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(j) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite sample at node {j}")));
        }
        Ok(Self { grid, values, sign, partner: None })
    }

    /// A field with an independent `r`.
    pub fn paired(grid: Grid, values: Vec<C64>, partner: Vec<C64>, sign: Sign) -> Result<Self> {
        grid.check_len(partner.len())?;
        if partner.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite partner sample".into()));
        }
        let mut f = Self::new(grid, values, sign)?;
        f.partner = Some(partner);
        Ok(f)
    }

    pub fn partner(&self) -> Option<&[C64]> {
        self.partner.as_deref()
    }

    pub fn is_paired(&self) -> bool {
        self.partner.is_some()
    }

    /// `||r - sign * conj(q)||_{L^2}`; zero for constrained fields.
    pub fn constraint_drift(&self) -> f64 {
        match &self.partner {
            None => 0.0,
            Some(r) => {
                let s = self.sign.value();
                let d: Vec<C64> = self.values.iter().zip(r).map(|(q, r)| r - s * q.conj()).collect();
                self.grid.l2_norm(&d)
            }
        }
    }

    /// The same field with `r` stored explicitly.
    pub fn to_paired(&self) -> Self {
        let mut f = self.clone();
        f.partner = Some(self.r());
        f
    }

    pub fn zeros(grid: Grid, sign: Sign) -> Self {
        let n = grid.points();
        Self { grid, values: vec![C64::new(0.0, 0.0); n], sign, partner: None }
    }

    pub fn from_fn<F>(grid: Grid, sign: Sign, f: F) -> Self
    where
        F: Fn(f64) -> C64,
    {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values, sign, partner: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// A field on the same grid with the same sign.
    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.sign)
    }

    /// The stored partner, or `sign * conj(q)`.
    pub fn r(&self) -> Vec<C64> {
        if let Some(r) = &self.partner {
            return r.clone();
        }
        let s = self.sign.value();
        self.values.iter().map(|z| z.conj() * s).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.l2_norm(&self.values)
    }

    pub fn sobolev_norm(&self, sigma: f64, kappa: f64) -> Result<f64> {
        self.grid.sobolev_norm(&self.values, sigma, kappa)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Largest modulus over the outer 5% of nodes.
    pub fn edge_max(&self) -> f64 {
        let n = self.values.len();
        let m = ((EDGE_FRACTION * n as f64 / 2.0).ceil() as usize).max(1);
        self.values[..m]
            .iter()
            .chain(&self.values[n - m..])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Errors unless the field decays to `ratio * max|q|` near the boundary.
    pub fn check_decay_ratio(&self, ratio: f64) -> Result<()> {
        let max = self.max_abs();
        let edge = self.edge_max();
        if edge > ratio * max {
            return Err(Error::BoundaryDecay { edge, max, ratio });
        }
        Ok(())
    }

    pub fn check_decay(&self) -> Result<()> {
        self.check_decay_ratio(DECAY_RATIO)
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
            sign: self.sign,
            partner: None,
        }
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * a).collect(),
            sign: self.sign,
            partner: None,
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C64, other: &Field) -> Result<Self> {
        self.grid.check_len(other.values.len())?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Self { grid: self.grid.clone(), values, sign: self.sign, partner: None })
    }

    /// Sum of modulated Gaussians.
    pub fn from_bumps(grid: Grid, sign: Sign, bumps: &[Bump]) -> Self {
        Self::from_fn(grid, sign, |x| bumps.iter().map(|b| b.eval(x)).sum())
    }

    /// Rescales so that `||q||_{H^sigma_kappa} = target`; the zero field is returned unchanged.
    pub fn normalized(&self, sigma: f64, kappa: f64, target: f64) -> Result<Self> {
        let n = self.sobolev_norm(sigma, kappa)?;
        if n == 0.0 {
            return Ok(self.clone());
        }
        Ok(self.scaled(C64::new(target / n, 0.0)))
    }

    /// `L^2` distance to another field on the same grid.
    pub fn distance(&self, other: &Field) -> f64 {
        let d: Vec<C64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        self.grid.l2_norm(&d)
    }
}
