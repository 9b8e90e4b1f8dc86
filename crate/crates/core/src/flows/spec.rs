use serde::{Deserialize, Serialize};

use crate::spectral::Grid;
use crate::{Error, Result, C64};

/// The seven evolutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowKind {
    /// `i q_t = -q'' + 2 q^2 r`
    Nls,
    /// `q_t = -q''' + 6 q r q'`
    Mkdv,
    /// `i q_t = -g12(kappa)`
    AFlow { kappa: f64 },
    /// `i q_t = 4 k^3 (g12(k) - g12(-k)) + 4 k^2 q`
    NlsKappa { kappa: f64 },
    /// `q_t = 8 k^4 (g12(k) + g12(-k)) + 4 k^2 q'`
    MkdvKappa { kappa: f64 },
    /// `Nls` minus `NlsKappa`.
    NlsDiff { kappa: f64 },
    /// `Mkdv` minus `MkdvKappa`.
    MkdvDiff { kappa: f64 },
}

impl FlowKind {
    pub fn name(&self) -> &'static str {
        match self {
            FlowKind::Nls => "nls",
            FlowKind::Mkdv => "mkdv",
            FlowKind::AFlow { .. } => "a_flow",
            FlowKind::NlsKappa { .. } => "nls_kappa",
            FlowKind::MkdvKappa { .. } => "mkdv_kappa",
            FlowKind::NlsDiff { .. } => "nls_diff",
            FlowKind::MkdvDiff { .. } => "mkdv_diff",
        }
    }

    /// Parses `nls`, `mkdv`, or one of the parametrized names with `kappa`.
    pub fn parse(name: &str, kappa: Option<f64>) -> Result<Self> {
        let need = || kappa.ok_or_else(|| Error::InvalidArgument(format!("flow {name} needs kappa")));
        Ok(match name {
            "nls" => FlowKind::Nls,
            "mkdv" => FlowKind::Mkdv,
            "a_flow" => FlowKind::AFlow { kappa: need()? },
            "nls_kappa" => FlowKind::NlsKappa { kappa: need()? },
            "mkdv_kappa" => FlowKind::MkdvKappa { kappa: need()? },
            "nls_diff" => FlowKind::NlsDiff { kappa: need()? },
            "mkdv_diff" => FlowKind::MkdvDiff { kappa: need()? },
            _ => return Err(Error::InvalidArgument(format!("unknown flow {name}"))),
        })
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            FlowKind::Nls | FlowKind::Mkdv => None,
            FlowKind::AFlow { kappa }
            | FlowKind::NlsKappa { kappa }
            | FlowKind::MkdvKappa { kappa }
            | FlowKind::NlsDiff { kappa }
            | FlowKind::MkdvDiff { kappa } => Some(kappa),
        }
    }

    /// Highest power of `xi` in the dispersion relation.
    pub fn dispersion_order(&self) -> u32 {
        match self {
            FlowKind::Nls | FlowKind::NlsKappa { .. } | FlowKind::NlsDiff { .. } => 2,
            FlowKind::Mkdv | FlowKind::MkdvKappa { .. } | FlowKind::MkdvDiff { .. } => 3,
            FlowKind::AFlow { .. } => 0,
        }
    }

    /// Whether the vector field involves Green's functions.
    pub fn uses_greens(&self) -> bool {
        self.kappa().is_some()
    }

    /// Symbol `m(xi)` of the linear part, `q_t = m(d) q + N(q)`.
    pub fn linear_symbol(&self, xi: f64) -> C64 {
        let i = C64::new(0.0, 1.0);
        let x2 = xi * xi;
        match *self {
            FlowKind::Nls => -i * x2,
            FlowKind::Mkdv => i * xi * x2,
            FlowKind::AFlow { kappa } => -i / C64::new(2.0 * kappa, -xi),
            FlowKind::NlsKappa { kappa } => {
                let k2 = 4.0 * kappa * kappa;
                -i * k2 * x2 / (k2 + x2)
            }
            FlowKind::MkdvKappa { kappa } => {
                let k2 = 4.0 * kappa * kappa;
                i * xi * k2 * x2 / (k2 + x2)
            }
            FlowKind::NlsDiff { kappa } => -i * x2 * x2 / (4.0 * kappa * kappa + x2),
            FlowKind::MkdvDiff { kappa } => i * xi * x2 * x2 / (4.0 * kappa * kappa + x2),
        }
    }
}

/// Time integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Triple-jump composition of Strang steps with the exact linear propagator.
    Splitting4,
    /// Exponential time differencing RK4 with contour-integral coefficients.
    Etd4,
    /// Integrating-factor RK4.
    Rk4Spectral,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Splitting4 => "splitting4",
            Scheme::Etd4 => "etd4",
            Scheme::Rk4Spectral => "rk4_spectral",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "splitting4" => Ok(Scheme::Splitting4),
            "etd4" => Ok(Scheme::Etd4),
            "rk4_spectral" => Ok(Scheme::Rk4Spectral),
            _ => Err(Error::InvalidArgument(format!("unknown scheme {name}"))),
        }
    }

    /// Default bound on `dt * max|xi|^order`.
    pub fn stability_bound(&self) -> f64 {
        match self {
            Scheme::Splitting4 | Scheme::Rk4Spectral | Scheme::Etd4 => 2.0e3,
        }
    }
}

pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-13;

/// A complete description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Keep every `stride`-th step (the initial and final states are always kept).
    pub stride: usize,
    /// Overrides [`Scheme::stability_bound`].
    #[serde(default)]
    pub stability_bound: Option<f64>,
    #[serde(default = "default_tol")]
    pub fixed_point_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_FIXED_POINT_TOL
}

impl FlowSpec {
    /// Splitting for `nls`/`mkdv`, integrating-factor RK4 for the Green's-function flows.
    pub fn new(kind: FlowKind, dt: f64, t_final: f64) -> Self {
        let scheme = if kind.uses_greens() { Scheme::Rk4Spectral } else { Scheme::Splitting4 };
        Self { kind, dt, t_final, scheme, stride: 1, stability_bound: None, fixed_point_tol: DEFAULT_FIXED_POINT_TOL }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// Number of steps and the step actually taken (`t_final / steps`).
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    /// Checks parameters and the stability gate on `grid`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        if let Some(k) = self.kind.kappa() {
            crate::lax::check_kappa(k)?;
        }
        let order = self.kind.dispersion_order();
        let value = self.dt * grid.max_wavenumber().powi(order as i32);
        let bound = self.stability_bound.unwrap_or_else(|| self.scheme.stability_bound());
        if value > bound {
            return Err(Error::Unstable { value, bound, order });
        }
        Ok(())
    }
}
