use super::{check_kappa, GreensTriple, Method};
use crate::spectral::{ops, Field};
use crate::{Error, Result, C64};

/// Default smallness gate on `||q||_{H^{-1/4}}`.
pub const DEFAULT_GATE: f64 = 0.25;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Controls for [`solve`].
#[derive(Clone, Debug)]
pub struct FixedPointOptions {
    /// Stop once successive `gamma` iterates differ by less than this in `L^2`.
    pub tol: f64,
    pub max_iter: usize,
    /// Upper bound for `||q||_{H^{-1/4}}`; `None` skips the check.
    pub gate: Option<f64>,
    /// Initial `gamma` (zero when absent).
    pub warm_start: Option<Vec<C64>>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, gate: Some(DEFAULT_GATE), warm_start: None }
    }
}

/// Fixed-point solve with the default gate and a cold start.
pub fn g_fixed_point(q: &Field, kappa: f64, tol: f64, max_iter: usize) -> Result<GreensTriple> {
    solve(q, kappa, &FixedPointOptions { tol, max_iter, ..Default::default() })
}

/// Iterates `g12 = -(2k - d)^{-1}[q (1 + gamma)]`, `g21 = (2k + d)^{-1}[r (1 + gamma)]`,
/// `gamma = 2 g12 g21 - gamma^2 / 2`.
pub fn solve(q: &Field, kappa: f64, opts: &FixedPointOptions) -> Result<GreensTriple> {
    check_kappa(kappa)?;
    let grid = q.grid();
    if let Some(gate) = opts.gate {
        let norm = q.sobolev_norm(-0.25, 1.0)?;
        if norm > gate {
            return Err(Error::DataTooLarge { norm, gate });
        }
    }
    let n = grid.points();
    let dx = grid.dx();
    let qv = q.values();
    let r = q.r();
    let k2 = 2.0 * kappa;
    let minus = grid.symbol(|xi| C64::new(k2, -xi).inv())?;
    let plus = grid.symbol(|xi| C64::new(k2, xi).inv())?;

    let mut gamma = match &opts.warm_start {
        Some(g) => {
            grid.check_len(g.len())?;
            g.clone()
        }
        None => ops::zeros(n),
    };
    let eval = |gamma: &[C64]| {
        let one = ops::shift(gamma, C64::new(1.0, 0.0));
        let g12 = ops::scale_real(&grid.apply_values(&grid.product(&[qv, &one]), &minus), -1.0);
        let g21 = grid.apply_values(&grid.product(&[&r, &one]), &plus);
        let prod = grid.product(&[&g12, &g21]);
        let sq = grid.product(&[gamma, gamma]);
        let next: Vec<C64> = prod.iter().zip(&sq).map(|(p, s)| 2.0 * p - 0.5 * s).collect();
        (g12, g21, next)
    };

    let mut damped = false;
    let mut growth = 0usize;
    let mut last = f64::INFINITY;
    let mut before_last = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let (_, _, next) = eval(&gamma);
        let residual = ops::l2_diff(&next, &gamma, dx);
        let floor = 64.0 * f64::EPSILON * (ops::l2(&next, dx) + ops::l2(qv, dx));
        if damped {
            gamma.iter_mut().zip(&next).for_each(|(g, x)| *g = 0.5 * (*g + x));
        } else {
            gamma = next;
        }
        if residual <= opts.tol.max(floor) {
            let (g12, g21, _) = eval(&gamma);
            return Ok(GreensTriple {
                kappa,
                g12,
                g21,
                gamma,
                method: Method::FixedPoint { tol: opts.tol, iterations: iter, residual },
            });
        }
        if residual > last {
            growth += 1;
            if growth >= 3 {
                return Err(Error::NotContracting { streak: growth, residual });
            }
            if !damped && last < before_last {
                damped = true;
            }
        } else {
            growth = 0;
        }
        before_last = last;
        last = residual;
    }
    Err(Error::MaxIterations { max_iter: opts.max_iter, residual: last })
}
