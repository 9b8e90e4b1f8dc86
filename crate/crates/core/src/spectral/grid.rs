use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Serializable description of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded: Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>,
}

/// Uniform periodic grid on `[-L/2, L/2)` with `N` nodes.
///
/// Frequencies are stored in FFT order: index `k` holds `xi_k = 2 pi k / L`
/// for `k < N/2` and `2 pi (k - N) / L` otherwise.
#[derive(Clone)]
pub struct Grid {
    length: f64,
    points: usize,
    wavenumbers: Arc<[f64]>,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.length)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.points == other.points
    }
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 4, got {points}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let dxi = 2.0 * PI / length;
        let wavenumbers: Arc<[f64]> = (0..points)
            .map(|k| signed_index(k, points) as f64 * dxi)
            .collect();
        Ok(Self {
            length,
            points,
            wavenumbers,
            plans: Arc::new(Plans { forward, inverse, padded: Mutex::new(HashMap::new()) }),
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.length, spec.points)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { length: self.length, points: self.points }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Largest |xi| on the lattice (the Nyquist frequency).
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Storage index of the signed mode `k` in `[-N/2, N/2)`.
    pub fn mode_index(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.points {
            return Err(Error::LengthMismatch { expected: self.points, got: len });
        }
        Ok(())
    }

    /// Unnormalized forward DFT (FFT order).
    pub fn dft(&self, f: &[C64]) -> Vec<C64> {
        let mut buf = f.to_vec();
        self.plans.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`Grid::dft`].
    pub fn idft(&self, s: &[C64]) -> Vec<C64> {
        let mut buf = s.to_vec();
        self.plans.inverse.process(&mut buf);
        let scale = 1.0 / self.points as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Continuum-normalized transform
    /// `q_hat(xi_k) = dx / sqrt(2 pi) * sum_j q(x_j) exp(-i xi_k x_j)`, FFT order.
    pub fn transform(&self, f: &[C64]) -> Vec<C64> {
        let c = self.dx() / (2.0 * PI).sqrt();
        let mut s = self.dft(f);
        for (k, z) in s.iter_mut().enumerate() {
            // exp(-i xi_k x_0) = (-1)^k since x_0 = -L/2
            let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
            *z *= c * parity;
        }
        s
    }

    /// Inverse of [`Grid::transform`].
    pub fn inverse_transform(&self, fhat: &[C64]) -> Vec<C64> {
        let c = (2.0 * PI).sqrt() / self.dx();
        let s: Vec<C64> = fhat
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                z * (c * parity)
            })
            .collect();
        self.idft(&s)
    }

    /// Evaluates a symbol on the frequency lattice, rejecting non-finite values.
    pub fn symbol<F>(&self, m: F) -> Result<Vec<C64>>
    where
        F: Fn(f64) -> C64,
    {
        self.wavenumbers
            .iter()
            .map(|&xi| {
                let v = m(xi);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SingularSymbol { xi })
                }
            })
            .collect()
    }

    /// Applies precomputed symbol values (FFT order).
    pub fn apply_values(&self, f: &[C64], values: &[C64]) -> Vec<C64> {
        let mut s = self.dft(f);
        for (z, m) in s.iter_mut().zip(values) {
            *z *= m;
        }
        self.idft(&s)
    }

    /// Fourier multiplier `f -> F^{-1}[m(xi) F f]`.
    pub fn apply<F>(&self, f: &[C64], m: F) -> Result<Vec<C64>>
    where
        F: Fn(f64) -> C64,
    {
        self.check_len(f.len())?;
        let values = self.symbol(m)?;
        Ok(self.apply_values(f, &values))
    }

    /// `(a - d/dx)^{-1} f`, symbol `1 / (a - i xi)`.
    pub fn resolve_minus(&self, f: &[C64], a: f64) -> Result<Vec<C64>> {
        self.apply(f, |xi| C64::new(a, -xi).inv())
    }

    /// `(a + d/dx)^{-1} f`, symbol `1 / (a + i xi)`.
    pub fn resolve_plus(&self, f: &[C64], a: f64) -> Result<Vec<C64>> {
        self.apply(f, |xi| C64::new(a, xi).inv())
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, f: &[C64], order: u32) -> Vec<C64> {
        if order == 0 {
            return f.to_vec();
        }
        let values: Vec<C64> = self
            .wavenumbers
            .iter()
            .map(|&xi| C64::new(0.0, xi).powu(order))
            .collect();
        self.apply_values(f, &values)
    }

    /// Trapezoid (spectrally accurate) integral over the period.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        f.iter().sum::<C64>() * self.dx()
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx()
    }

    /// `<f, g> = int conj(f) g`.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<C64>() * self.dx()
    }

    pub fn l2_norm(&self, f: &[C64]) -> f64 {
        (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    /// `L^2` norm computed on the frequency side.
    pub fn l2_norm_spectral(&self, f: &[C64]) -> f64 {
        let fhat = self.transform(f);
        (fhat.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dxi()).sqrt()
    }

    /// Squared `H^sigma_kappa` norm,
    /// `dxi * sum_k (4 kappa^2 + xi_k^2)^sigma |q_hat(xi_k)|^2`.
    pub fn sobolev_norm_sq(&self, f: &[C64], sigma: f64, kappa: f64) -> Result<f64> {
        self.check_len(f.len())?;
        check_sobolev_args(sigma, kappa)?;
        let fhat = self.transform(f);
        let k2 = 4.0 * kappa * kappa;
        let sum: f64 = fhat
            .iter()
            .zip(self.wavenumbers.iter())
            .map(|(z, xi)| (k2 + xi * xi).powf(sigma) * z.norm_sqr())
            .sum();
        Ok(sum * self.dxi())
    }

    pub fn sobolev_norm(&self, f: &[C64], sigma: f64, kappa: f64) -> Result<f64> {
        Ok(self.sobolev_norm_sq(f, sigma, kappa)?.sqrt())
    }

    /// Projects onto modes with `|k| < cutoff * N / 2`.
    pub fn low_pass(&self, f: &[C64], fraction: f64) -> Vec<C64> {
        let mut s = self.dft(f);
        let kmax = fraction * self.points as f64 / 2.0;
        for (k, z) in s.iter_mut().enumerate() {
            if (signed_index(k, self.points).abs() as f64) >= kmax {
                *z = C64::new(0.0, 0.0);
            }
        }
        self.idft(&s)
    }

    fn padded_plans(&self, m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut cache = self.plans.padded.lock().expect("plan cache poisoned");
        cache
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
            })
            .clone()
    }

    /// Alias-free pointwise product of band-limited factors, projected back
    /// onto the grid's modes (zero padding to `(k + 1) N / 2` points).
    pub fn product(&self, factors: &[&[C64]]) -> Vec<C64> {
        let n = self.points;
        match factors.len() {
            0 => return vec![C64::new(1.0, 0.0); n],
            1 => return factors[0].to_vec(),
            _ => {}
        }
        let m = ((factors.len() + 1) * n).div_ceil(2);
        let (fwd, inv) = self.padded_plans(m);
        let mut acc = vec![C64::new(1.0, 0.0); m];
        for f in factors {
            let s = self.dft(f);
            let mut pad = vec![C64::new(0.0, 0.0); m];
            for (k, z) in s.iter().enumerate() {
                let sk = signed_index(k, n);
                if sk == -(n as i64) / 2 {
                    // split the Nyquist mode symmetrically
                    pad[(m as i64 + sk) as usize] += 0.5 * z;
                    pad[(-sk) as usize] += 0.5 * z;
                } else {
                    pad[sk.rem_euclid(m as i64) as usize] = *z;
                }
            }
            inv.process(&mut pad);
            let scale = 1.0 / n as f64;
            for (a, b) in acc.iter_mut().zip(&pad) {
                *a *= b * scale;
            }
        }
        fwd.process(&mut acc);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, z) in out.iter_mut().enumerate() {
            let sk = signed_index(k, n);
            *z = acc[sk.rem_euclid(m as i64) as usize];
        }
        let scale = n as f64 / m as f64;
        let mut res = self.idft(&out);
        res.iter_mut().for_each(|z| *z *= scale);
        res
    }
}

/// Signed mode number of FFT index `k` for length `n`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn check_sobolev_args(sigma: f64, kappa: f64) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma must be finite, got {sigma}")));
    }
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::KappaRange(kappa));
    }
    Ok(())
}

/// `z^{-sigma} = |z|^{-sigma} exp(-i sigma arg z)` with `arg z` in `(-pi, pi]`.
pub fn principal_power(z: C64, sigma: f64) -> C64 {
    let r = z.norm();
    let mut theta = z.im.atan2(z.re);
    if theta <= -PI {
        theta += 2.0 * PI;
    }
    C64::from_polar(r.powf(-sigma), -sigma * theta)
}

/// Symbol of `(kappa - d/dx)^{-sigma}`.
pub fn minus_power_symbol(kappa: f64, sigma: f64) -> impl Fn(f64) -> C64 {
    move |xi| principal_power(C64::new(kappa, -xi), sigma)
}

/// Symbol of `(kappa + d/dx)^{-sigma}`.
pub fn plus_power_symbol(kappa: f64, sigma: f64) -> impl Fn(f64) -> C64 {
    move |xi| principal_power(C64::new(kappa, xi), sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(10.0, 100).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        assert!(Grid::new(10.0, 64).is_ok());
    }

    #[test]
    fn transform_of_mode_is_concentrated() {
        let g = Grid::new(2.0 * PI * 4.0, 64).unwrap();
        let f: Vec<C64> = g.nodes().iter().map(|&x| C64::new(0.0, 2.0 * x).exp()).collect();
        let fhat = g.transform(&f);
        let idx = g.mode_index(8);
        for (k, z) in fhat.iter().enumerate() {
            if k != idx {
                assert!(z.norm() < 1e-12);
            }
        }
        // continuum value: L / sqrt(2 pi)
        assert!((fhat[idx].norm() - g.length() / (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn round_trip() {
        let g = Grid::new(20.0, 128).unwrap();
        let f: Vec<C64> = g.nodes().iter().map(|&x| C64::new((-x * x).exp(), x.sin() * 0.1)).collect();
        let back = g.inverse_transform(&g.transform(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!(close(*a, *b, 1e-13));
        }
    }

    #[test]
    fn padded_product_is_exact_for_modes() {
        let g = Grid::new(2.0 * PI, 32).unwrap();
        let x = g.nodes();
        let a: Vec<C64> = x.iter().map(|&x| C64::new(0.0, 7.0 * x).exp()).collect();
        let b: Vec<C64> = x.iter().map(|&x| C64::new(0.0, 5.0 * x).exp()).collect();
        // 7 + 5 = 12 < 16 survives, 7 + 7 + 5 = 19 is dropped rather than aliased
        let p = g.product(&[&a, &b]);
        for (j, z) in p.iter().enumerate() {
            assert!(close(*z, C64::new(0.0, 12.0 * x[j]).exp(), 1e-12));
        }
        let p3 = g.product(&[&a, &a, &b]);
        assert!(p3.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn principal_branch() {
        let z = principal_power(C64::new(-4.0, 0.0), 0.5);
        // (-4)^{-1/2} = 1/2 * exp(-i pi/2)
        assert!(close(z, C64::new(0.0, -0.5), 1e-14));
    }
}
