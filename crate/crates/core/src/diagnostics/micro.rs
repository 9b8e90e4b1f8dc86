use serde::{Deserialize, Serialize};

use super::report::LongTable;
use crate::flows::{evolve, FlowKind, FlowSpec, Trajectory};
use crate::hierarchy::{self, DensityCurrent, Flavor, Triples};
use crate::lax::{fixed_point, GreensTriple};
use crate::spectral::{h_lattice, CutoffFamily, Field};
use crate::{Error, Result, C64};

/// Default number of cutoff centres for the integrated check.
pub const DEFAULT_INTEGRATED_LATTICE: usize = 9;

/// Two sides of the integrated conservation law at one centre `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratedCheck {
    pub h: f64,
    /// `int_0^T int j psi_h^12 dx dt`
    pub current_side: C64,
    /// `int (rho(T) - rho(0)) phi_h dx`
    pub density_side: C64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub flavor: Flavor,
    pub varkappa: f64,
    pub dt: f64,
    /// Midpoint times `t_{n+1/2}`.
    pub times: Vec<f64>,
    /// `|| d_t rho + d_x j ||_{L^2_x}` at each midpoint.
    pub residual_l2: Vec<f64>,
    /// `|| d_t rho + d_x j ||_{L^1([0,T] x grid)}`.
    pub l1: f64,
    /// `|| d_t rho ||_{L^1([0,T] x grid)}`, for scale.
    pub rate_l1: f64,
    pub integrated: Vec<IntegratedCheck>,
    /// `log2` of the residual ratio under dt halving, when measured.
    pub refinement_slope: Option<f64>,
}

impl ResidualReport {
    pub fn max_integrated_relative(&self) -> f64 {
        self.integrated.iter().map(|c| c.relative).fold(0.0, f64::max)
    }

    pub fn table(&self) -> LongTable {
        let mut t = LongTable::new(&["flavor", "varkappa", "dt", "time"]);
        let f = self.flavor.name();
        for (tm, r) in self.times.iter().zip(&self.residual_l2) {
            t.push(&[f.to_string(), self.varkappa.to_string(), self.dt.to_string(), tm.to_string()], "residual_l2", *r);
        }
        let base = [f.to_string(), self.varkappa.to_string(), self.dt.to_string(), String::new()];
        t.push(&base, "residual_l1", self.l1);
        t.push(&base, "rate_l1", self.rate_l1);
        for c in &self.integrated {
            let p = [f.to_string(), self.varkappa.to_string(), self.dt.to_string(), format!("h={}", c.h)];
            t.push(&p, "current_side_re", c.current_side.re);
            t.push(&p, "current_side_im", c.current_side.im);
            t.push(&p, "density_side_re", c.density_side.re);
            t.push(&p, "density_side_im", c.density_side.im);
            t.push(&p, "relative", c.relative);
        }
        if let Some(s) = self.refinement_slope {
            t.push(&base, "refinement_slope", s);
        }
        t
    }
}

/// Errors unless `flavor` is the conservation law of `kind`.
pub fn check_flavor(kind: FlowKind, flavor: Flavor) -> Result<()> {
    let ok = match (kind, flavor) {
        (FlowKind::Nls, Flavor::Nls) => true,
        (FlowKind::Mkdv, Flavor::Mkdv | Flavor::TildeMkdv) => true,
        (FlowKind::AFlow { kappa: a }, Flavor::AFlow { kappa: b })
        | (FlowKind::NlsDiff { kappa: a }, Flavor::NlsDiff { kappa: b })
        | (FlowKind::MkdvDiff { kappa: a }, Flavor::MkdvDiff { kappa: b }) => a == b,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::FlavorMismatch { flavor: flavor.name().into(), flow: kind.name().into() })
    }
}

fn triple(q: &Field, kappa: f64, warm: &mut Option<Vec<C64>>) -> Result<GreensTriple> {
    let opts = fixed_point::FixedPointOptions { tol: 1e-14, warm_start: warm.take(), ..Default::default() };
    let t = fixed_point::solve(q, kappa, &opts)?;
    *warm = Some(t.gamma.clone());
    Ok(t)
}

/// Density and current at every sample.
pub fn densities_and_currents(traj: &Trajectory, varkappa: f64, flavor: Flavor) -> Result<Vec<DensityCurrent>> {
    let (mut wv, mut wk, mut wm) = (None, None, None);
    let mut out = Vec::with_capacity(traj.samples.len());
    for (_, q) in &traj.samples {
        let tv = triple(q, varkappa, &mut wv)?;
        let tk = match flavor.kappa() {
            Some(k) => Some(triple(q, k, &mut wk)?),
            None => None,
        };
        let tm = match flavor.kappa() {
            Some(k) if flavor.needs_minus_kappa() => Some(triple(q, -k, &mut wm)?),
            _ => None,
        };
        let triples = Triples { at_varkappa: &tv, at_kappa: tk.as_ref(), at_minus_kappa: tm.as_ref() };
        out.push(DensityCurrent::evaluate(q, triples, flavor)?);
    }
    Ok(out)
}

/// Fourth-order rule on uniformly spaced samples (Simpson, with a 3/8 tail).
pub fn integrate_uniform(f: &[C64], dt: f64) -> C64 {
    let k = f.len().saturating_sub(1);
    match k {
        0 => C64::new(0.0, 0.0),
        1 => 0.5 * dt * (f[0] + f[1]),
        2 => dt / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        3 => 3.0 * dt / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ => {
            let simpson_end = if k % 2 == 0 { k } else { k - 3 };
            let mut s = f[0] + f[simpson_end];
            for (i, v) in f.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = dt / 3.0 * s;
            if simpson_end < k {
                let j = simpson_end;
                total += 3.0 * dt / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
            }
            total
        }
    }
}

/// Pointwise and integrated residuals of `d_t rho + d_x j = 0` along a trajectory
/// sampled at every step.
pub fn micro_residual(traj: &Trajectory, varkappa: f64, flavor: Flavor) -> Result<ResidualReport> {
    micro_residual_with(traj, varkappa, flavor, DEFAULT_INTEGRATED_LATTICE, CutoffFamily::default())
}

pub fn micro_residual_with(
    traj: &Trajectory,
    varkappa: f64,
    flavor: Flavor,
    lattice: usize,
    family: CutoffFamily,
) -> Result<ResidualReport> {
    check_flavor(traj.spec.kind, flavor)?;
    let times = traj.times();
    if times.len() < 4 {
        return Err(Error::InvalidArgument("micro residual needs at least four samples".into()));
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidArgument("micro residual needs a trajectory sampled at every step".into()));
    }
    let dc = densities_and_currents(traj, varkappa, flavor)?;
    let grid = traj.samples[0].1.grid().clone();
    let n = grid.points();
    let dx = grid.dx();

    let mut mid_times = Vec::new();
    let mut residual_l2 = Vec::new();
    let (mut l1, mut rate_l1) = (0.0, 0.0);
    for k in 1..dc.len() - 2 {
        let (rm, r0, r1, r2) = (&dc[k - 1].density, &dc[k].density, &dc[k + 1].density, &dc[k + 2].density);
        let (jm, j0, j1, j2) = (&dc[k - 1].current, &dc[k].current, &dc[k + 1].current, &dc[k + 2].current);
        let jmid: Vec<C64> = (0..n).map(|i| (-jm[i] + 9.0 * j0[i] + 9.0 * j1[i] - j2[i]) / 16.0).collect();
        let djdx = grid.derivative(&jmid, 1);
        let mut sq = 0.0;
        for i in 0..n {
            let rt = (27.0 * (r1[i] - r0[i]) - (r2[i] - rm[i])) / (24.0 * dt);
            let res = rt + djdx[i];
            sq += res.norm_sqr();
            l1 += res.norm() * dx * dt;
            rate_l1 += rt.norm() * dx * dt;
        }
        mid_times.push(0.5 * (times[k] + times[k + 1]));
        residual_l2.push((sq * dx).sqrt());
    }

    let first = &dc[0].density;
    let last = &dc[dc.len() - 1].density;
    let mut integrated = Vec::new();
    for h in h_lattice(&grid, lattice) {
        let c = family.sample_with_antiderivative(&grid, h, 12)?;
        let phi = c.antiderivative.as_ref().expect("antiderivative requested");
        let per_time: Vec<C64> = dc
            .iter()
            .map(|d| d.current.iter().zip(&c.samples).map(|(j, p)| j * p).sum::<C64>() * dx)
            .collect();
        let current_side = integrate_uniform(&per_time, dt);
        let density_side = (0..n).map(|i| (last[i] - first[i]) * phi[i]).sum::<C64>() * dx;
        let scale = current_side.norm().max(density_side.norm());
        let relative = if scale == 0.0 { 0.0 } else { (current_side - density_side).norm() / scale };
        integrated.push(IntegratedCheck { h, current_side, density_side, relative });
    }

    Ok(ResidualReport {
        flavor,
        varkappa,
        dt,
        times: mid_times,
        residual_l2,
        l1,
        rate_l1,
        integrated,
        refinement_slope: None,
    })
}

/// Runs `spec` at `dt` and `dt/2` from `q0` and reports both residuals; the
/// coarse report carries `log2(l1(dt) / l1(dt/2))` as its refinement slope.
pub fn micro_refinement(
    q0: &Field,
    spec: &FlowSpec,
    varkappa: f64,
    flavor: Flavor,
) -> Result<(ResidualReport, ResidualReport)> {
    let coarse_spec = FlowSpec { stride: 1, ..spec.clone() };
    let fine_spec = FlowSpec { stride: 1, dt: spec.dt / 2.0, ..spec.clone() };
    let coarse_traj = evolve(q0, &coarse_spec)?;
    let fine_traj = evolve(q0, &fine_spec)?;
    let mut coarse = micro_residual(&coarse_traj, varkappa, flavor)?;
    let fine = micro_residual(&fine_traj, varkappa, flavor)?;
    if coarse.l1 > 0.0 && fine.l1 > 0.0 {
        coarse.refinement_slope = Some((coarse.l1 / fine.l1).log2());
    }
    Ok((coarse, fine))
}

/// Density of `flavor` at `varkappa` for a single field (fixed point triple).
pub fn density_of(q: &Field, varkappa: f64, flavor: Flavor) -> Result<Vec<C64>> {
    let t = fixed_point::solve(q, varkappa, &fixed_point::FixedPointOptions::default())?;
    hierarchy::density(q, &t, flavor)
}
