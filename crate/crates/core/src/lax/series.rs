use super::{check_kappa, GreensTriple, Method};
use crate::spectral::{ops, Field};
use crate::{Error, Result, C64};

/// Individual paraproduct terms of the series for `g12`, `g21`, `gamma`.
#[derive(Clone, Debug)]
pub struct SeriesTerms {
    pub g12_1: Vec<C64>,
    pub g12_3: Vec<C64>,
    pub g21_1: Vec<C64>,
    pub g21_3: Vec<C64>,
    pub gamma_2: Vec<C64>,
    pub gamma_4: Vec<C64>,
}

/// Evaluates the first and third order terms of `g12`, `g21` and the
/// second and fourth order terms of `gamma`.
pub fn series_terms(q: &Field, kappa: f64) -> Result<SeriesTerms> {
    check_kappa(kappa)?;
    let grid = q.grid();
    let qv = q.values();
    let r = q.r();
    let k2 = 2.0 * kappa;
    // a = q / (2k - d), b = r / (2k + d)
    let a = grid.resolve_minus(qv, k2)?;
    let b = grid.resolve_plus(&r, k2)?;
    let qba = grid.product(&[qv, &b, &a]);
    let rab = grid.product(&[&r, &a, &b]);
    let lq = grid.resolve_minus(&qba, k2)?;
    let lr = grid.resolve_plus(&rab, k2)?;
    let ab = grid.product(&[&a, &b]);
    let g12_1 = ops::scale_real(&a, -1.0);
    let g12_3 = ops::scale_real(&lq, 2.0);
    let g21_1 = b.clone();
    let g21_3 = ops::scale_real(&lr, -2.0);
    let gamma_2 = ops::scale_real(&ab, -2.0);
    let t1 = grid.product(&[&a, &lr]);
    let t2 = grid.product(&[&lq, &b]);
    let t3 = grid.product(&[&ab, &ab]);
    let gamma_4 = t1
        .iter()
        .zip(&t2)
        .zip(&t3)
        .map(|((x, y), z)| 4.0 * x + 4.0 * y - 2.0 * z)
        .collect();
    Ok(SeriesTerms { g12_1, g12_3, g21_1, g21_3, gamma_2, gamma_4 })
}

/// Truncated series. `order` 1 keeps `g^[1]`, `gamma^[2]`; order 3 also adds
/// `g^[3]`, `gamma^[4]`.
pub fn g_series(q: &Field, kappa: f64, order: u32) -> Result<GreensTriple> {
    if order != 1 && order != 3 {
        return Err(Error::InvalidArgument(format!("series order must be 1 or 3, got {order}")));
    }
    let t = series_terms(q, kappa)?;
    let method = Method::Series { order };
    if order == 1 {
        return Ok(GreensTriple { kappa, g12: t.g12_1, g21: t.g21_1, gamma: t.gamma_2, method });
    }
    Ok(GreensTriple {
        kappa,
        g12: ops::add(&t.g12_1, &t.g12_3),
        g21: ops::add(&t.g21_1, &t.g21_3),
        gamma: ops::add(&t.gamma_2, &t.gamma_4),
        method,
    })
}
