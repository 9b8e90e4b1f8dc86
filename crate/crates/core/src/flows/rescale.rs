use crate::spectral::{Field, Grid};
use crate::{Error, Result, C64};

/// Relative Fourier magnitude below which a mode counts as empty.
pub const BAND_TOL: f64 = 1e-13;

/// `q_lambda(x) = lambda q(lambda x)` on the grid of length `L / lambda` with
/// the same number of points. Exact: the node values are multiplied by `lambda`.
/// `m` is the time exponent of the scaling (`2` for NLS, `3` for mKdV) and only
/// validated here; use [`original_time`] to map times.
pub fn rescale(q: &Field, lambda: f64, m: u32) -> Result<Field> {
    check(lambda, m)?;
    let g = q.grid();
    let grid = Grid::new(g.length() / lambda, g.points())?;
    let values = q.values().iter().map(|z| z * lambda).collect();
    Field::new(grid, values, q.sign())
}

/// `q_lambda` resampled onto `target` by trigonometric interpolation of `q`.
/// Points with `|lambda x| > L/2` are set to zero, so `q` should decay.
pub fn rescale_onto(q: &Field, lambda: f64, m: u32, target: &Grid) -> Result<Field> {
    check(lambda, m)?;
    let g = q.grid();
    let band = band_limit(q);
    if lambda * band > target.max_wavenumber() * (1.0 + 1e-12) {
        return Err(Error::BandLimit(format!(
            "lambda * band limit = {} exceeds the target max wavenumber {}",
            lambda * band,
            target.max_wavenumber()
        )));
    }
    let n = g.points();
    let coeffs = g.dft(q.values());
    let xi = g.wavenumbers();
    let half = g.length() / 2.0;
    let values = target
        .nodes()
        .iter()
        .map(|&x| {
            let y = lambda * x;
            if y.abs() > half {
                return C64::new(0.0, 0.0);
            }
            let s = y + half;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                if 2 * k == n {
                    acc += coeffs[k] * (xi[k] * s).cos();
                } else {
                    acc += coeffs[k] * C64::from_polar(1.0, xi[k] * s);
                }
            }
            acc * lambda / n as f64
        })
        .collect();
    Field::new(target.clone(), values, q.sign())
}

/// Time of the original solution matching time `t` of the rescaled one.
pub fn original_time(t: f64, lambda: f64, m: u32) -> f64 {
    lambda.powi(m as i32) * t
}

/// Largest `|xi|` carrying a Fourier coefficient above [`BAND_TOL`] relative to the maximum.
pub fn band_limit(q: &Field) -> f64 {
    let g = q.grid();
    let s = g.dft(q.values());
    let max = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    s.iter()
        .zip(g.wavenumbers())
        .filter(|(z, _)| z.norm() > BAND_TOL * max)
        .map(|(_, xi)| xi.abs())
        .fold(0.0, f64::max)
}

fn check(lambda: f64, m: u32) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("time exponent m must be positive".into()));
    }
    Ok(())
}
