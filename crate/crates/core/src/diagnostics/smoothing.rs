use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::LongTable;
use crate::flows::Trajectory;
use crate::spectral::{h_lattice, CutoffFamily, Field, Grid};
use crate::{Error, Result, C64};

/// Default number of cutoff centres for `sup_h`.
pub const DEFAULT_SMOOTHING_LATTICE: usize = 33;

/// Local smoothing norms of one trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub sigma: f64,
    pub kappa: f64,
    /// Length of the time window actually covered.
    pub window: f64,
    pub lattice: usize,
    /// `sup_h int ||psi_h^6 q||^2_{H^sigma} dt`
    pub x_norm_sq: f64,
    pub x_argmax_h: f64,
    /// `sup_h int ||psi_h^6 q / sqrt(4 kappa^2 - d^2)||^2_{H^{sigma+1}} dt`
    pub x_kappa_norm_sq: f64,
    pub x_kappa_argmax_h: f64,
}

impl SmoothingReport {
    pub fn x_norm(&self) -> f64 {
        self.x_norm_sq.sqrt()
    }

    pub fn x_kappa_norm(&self) -> f64 {
        self.x_kappa_norm_sq.sqrt()
    }

    pub fn table(&self) -> LongTable {
        let mut t = LongTable::new(&["sigma", "kappa", "window", "lattice"]);
        let p = [self.sigma.to_string(), self.kappa.to_string(), self.window.to_string(), self.lattice.to_string()];
        t.push(&p, "x_norm_sq", self.x_norm_sq);
        t.push(&p, "x_argmax_h", self.x_argmax_h);
        t.push(&p, "x_kappa_norm_sq", self.x_kappa_norm_sq);
        t.push(&p, "x_kappa_argmax_h", self.x_kappa_argmax_h);
        t
    }
}

fn localized_norms(grid: &Grid, q: &[C64], cutoff: &[f64], sigma: f64, kappa: f64) -> (f64, f64) {
    let v: Vec<C64> = q.iter().zip(cutoff).map(|(z, c)| z * c).collect();
    let vhat = grid.transform(&v);
    let k2 = 4.0 * kappa * kappa;
    let (mut a, mut b) = (0.0, 0.0);
    for (z, xi) in vhat.iter().zip(grid.wavenumbers()) {
        let w = 4.0 + xi * xi;
        let p = z.norm_sqr();
        a += w.powf(sigma) * p;
        b += w.powf(sigma + 1.0) / (k2 + xi * xi) * p;
    }
    (a * grid.dxi(), b * grid.dxi())
}

fn trapezoid(times: &[f64], f: &[f64]) -> f64 {
    times.windows(2).zip(f.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Both local smoothing norms on the default lattice and cutoff.
pub fn local_smoothing_norm(traj: &Trajectory, sigma: f64, kappa: f64) -> Result<SmoothingReport> {
    local_smoothing_norm_with(traj, sigma, kappa, DEFAULT_SMOOTHING_LATTICE, CutoffFamily::default())
}

pub fn local_smoothing_norm_with(
    traj: &Trajectory,
    sigma: f64,
    kappa: f64,
    lattice: usize,
    family: CutoffFamily,
) -> Result<SmoothingReport> {
    if !sigma.is_finite() || !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::InvalidArgument(format!("need finite sigma and kappa >= 1, got {sigma}, {kappa}")));
    }
    if lattice == 0 {
        return Err(Error::InvalidArgument("lattice must hold at least one centre".into()));
    }
    let grid = traj.samples[0].1.grid().clone();
    let times = traj.times();
    let hs = h_lattice(&grid, lattice);
    let per_h: Vec<(f64, f64)> = hs
        .par_iter()
        .map(|&h| {
            let c = family.sample(&grid, h, 6)?;
            let (a, b): (Vec<f64>, Vec<f64>) =
                traj.samples.iter().map(|(_, q)| localized_norms(&grid, q.values(), &c.samples, sigma, kappa)).unzip();
            Ok((trapezoid(&times, &a), trapezoid(&times, &b)))
        })
        .collect::<Result<_>>()?;
    let argmax = |f: &dyn Fn(&(f64, f64)) -> f64| {
        per_h.iter().zip(&hs).fold((0.0, hs[0]), |best, (v, &h)| if f(v) > best.0 { (f(v), h) } else { best })
    };
    let (x, xh) = argmax(&|v| v.0);
    let (xk, xkh) = argmax(&|v| v.1);
    Ok(SmoothingReport {
        sigma,
        kappa,
        window: times[times.len() - 1] - times[0],
        lattice,
        x_norm_sq: x,
        x_argmax_h: xh,
        x_kappa_norm_sq: xk,
        x_kappa_argmax_h: xkh,
    })
}

/// `||q||_{H^s_kappa}` for `s < 0`.
pub fn equicontinuity_tail(q: &Field, kappa: f64, s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidArgument(format!("equicontinuity tail needs s < 0, got {s}")));
    }
    q.sobolev_norm(s, kappa)
}

/// `(kappa, sup over the family of the tail)`.
pub fn equicontinuity_family(family: &[Field], kappas: &[f64], s: f64) -> Result<Vec<(f64, f64)>> {
    kappas
        .iter()
        .map(|&k| {
            let sup = family.iter().map(|q| equicontinuity_tail(q, k, s)).collect::<Result<Vec<_>>>()?;
            Ok((k, sup.into_iter().fold(0.0, f64::max)))
        })
        .collect()
}

/// `(t, tail)` along a trajectory.
pub fn equicontinuity_sweep(traj: &Trajectory, kappa: f64, s: f64) -> Result<Vec<(f64, f64)>> {
    traj.samples.iter().map(|(t, q)| Ok((*t, equicontinuity_tail(q, kappa, s)?))).collect()
}

fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

const BUMP_PANELS: usize = 400;

/// `phi(x) = int_0^|x| chi(y - 2) dy` with `chi` the unit-mass bump on `[-1, 1]`:
/// zero on `|x| <= 1` and one on `|x| >= 3`.
pub fn tightness_profile(x: f64) -> f64 {
    let mass = simpson(bump, -1.0, 1.0, BUMP_PANELS);
    let u = (x.abs() - 2.0).clamp(-1.0, 1.0);
    simpson(bump, -1.0, u, BUMP_PANELS) / mass
}

/// `||phi_R q||_{H^s}` with `phi_R(x) = phi(x / R)`.
pub fn tightness_metric(q: &Field, radius: f64, s: f64) -> Result<f64> {
    let half = q.grid().length() / 2.0;
    if !(radius.is_finite() && radius > 0.0) || radius > half {
        return Err(Error::InvalidArgument(format!("radius must lie in (0, L/2 = {half}], got {radius}")));
    }
    let v: Vec<C64> =
        q.grid().nodes().iter().zip(q.values()).map(|(&x, z)| z * tightness_profile(x / radius)).collect();
    q.grid().sobolev_norm(&v, s, 1.0)
}

/// `(t, metric)` along a trajectory.
pub fn tightness_sweep(traj: &Trajectory, radius: f64, s: f64) -> Result<Vec<(f64, f64)>> {
    traj.samples.iter().map(|(t, q)| Ok((*t, tightness_metric(q, radius, s)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        assert_eq!(tightness_profile(0.5), 0.0);
        assert_eq!(tightness_profile(-1.0), 0.0);
        assert!((tightness_profile(3.0) - 1.0).abs() < 1e-14);
        assert!((tightness_profile(-10.0) - 1.0).abs() < 1e-14);
        assert!((tightness_profile(2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn profile_is_monotone() {
        let v: Vec<f64> = (0..400).map(|i| tightness_profile(i as f64 * 0.01)).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }
}
