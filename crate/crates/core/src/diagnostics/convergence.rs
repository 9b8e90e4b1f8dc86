use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::LongTable;
use super::smoothing::DEFAULT_SMOOTHING_LATTICE;
use crate::flows::{evolve_with, FlowKind, FlowSpec};
use crate::lax::fixed_point::{self, FixedPointOptions};
use crate::spectral::{h_lattice, CutoffFamily, Field};
use crate::{Error, Result, C64};

/// Controls for [`kappa_convergence_study_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub dt: f64,
    /// Regularity `s`; the defect is measured in `H^{s+1}`.
    pub s: f64,
    pub lattice: usize,
    /// Evaluate the defect every `stride` steps (and at the end).
    pub stride: usize,
    pub cutoff_scale: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            s: -0.25,
            lattice: DEFAULT_SMOOTHING_LATTICE,
            stride: 10,
            cutoff_scale: crate::spectral::DEFAULT_CUTOFF_SCALE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub kappa: f64,
    /// `max_t sup_h ||psi_h^12 [g12(varkappa; q(t)) - g12(varkappa; q0)]||_{H^{s+1}}`
    pub defect: f64,
    pub steps: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub flow: String,
    pub varkappa: f64,
    pub t_final: f64,
    pub s: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// True when every defect is below its predecessor by more than `noise`
    /// (relative).
    pub fn is_monotone_decreasing(&self, noise: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].defect <= w[0].defect * (1.0 + noise))
    }

    /// `defect(kappa_{i+1}) / defect(kappa_i)`.
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].defect / w[0].defect).collect()
    }

    pub fn table(&self) -> LongTable {
        let mut t = LongTable::new(&["flow", "varkappa", "t_final", "s", "kappa"]);
        for r in &self.rows {
            let p = [
                self.flow.clone(),
                self.varkappa.to_string(),
                self.t_final.to_string(),
                self.s.to_string(),
                r.kappa.to_string(),
            ];
            t.push(&p, "defect", r.defect);
            t.push(&p, "steps", r.steps as f64);
        }
        t
    }
}

pub fn kappa_convergence_study(
    q0: &Field,
    flow: FlowKind,
    varkappa: f64,
    kappas: &[f64],
    t_final: f64,
) -> Result<ConvergenceTable> {
    kappa_convergence_study_with(q0, flow, varkappa, kappas, t_final, &ConvergenceOptions::default())
}

/// Evolves `q0` under the difference flow of `flow` (`nls` or `mkdv`) for every
/// `kappa` and measures how far `g12(varkappa)` moves.
pub fn kappa_convergence_study_with(
    q0: &Field,
    flow: FlowKind,
    varkappa: f64,
    kappas: &[f64],
    t_final: f64,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceTable> {
    if varkappa < 4.0 {
        return Err(Error::InvalidArgument(format!("the convergence study needs varkappa >= 4, got {varkappa}")));
    }
    if let Some(&k) = kappas.iter().find(|&&k| k < 2.0 * varkappa) {
        return Err(Error::InvalidArgument(format!("the convergence study needs kappa >= 2 varkappa, got {k}")));
    }
    let family = CutoffFamily::new(opts.cutoff_scale)?;
    let grid = q0.grid().clone();
    let cutoffs: Vec<Vec<f64>> = h_lattice(&grid, opts.lattice)
        .into_iter()
        .map(|h| family.sample(&grid, h, 12).map(|c| c.samples))
        .collect::<Result<_>>()?;
    let tol = FixedPointOptions { tol: 1e-14, ..Default::default() };
    let g0 = fixed_point::solve(q0, varkappa, &tol)?;
    let s = opts.s;

    let rows = kappas
        .par_iter()
        .map(|&kappa| {
            let kind = match flow {
                FlowKind::Nls => FlowKind::NlsDiff { kappa },
                FlowKind::Mkdv => FlowKind::MkdvDiff { kappa },
                other => {
                    return Err(Error::FlavorMismatch { flavor: other.name().into(), flow: "kappa_convergence_study".into() })
                }
            };
            let spec = FlowSpec::new(kind, opts.dt, t_final).with_stride(usize::MAX);
            let (steps, _) = spec.steps();
            let mut warm: Option<Vec<C64>> = Some(g0.gamma.clone());
            let mut defect: f64 = 0.0;
            let mut k = 0usize;
            let traj = evolve_with(q0, &spec, |_, q| {
                let due = k % opts.stride.max(1) == 0 || k == steps;
                k += 1;
                if !due {
                    return Ok(());
                }
                let fp = FixedPointOptions { tol: 1e-14, warm_start: warm.take(), ..Default::default() };
                let g = fixed_point::solve(q, varkappa, &fp)?;
                let diff: Vec<C64> = g.g12.iter().zip(&g0.g12).map(|(a, b)| a - b).collect();
                for c in &cutoffs {
                    let v: Vec<C64> = diff.iter().zip(c).map(|(z, w)| z * w).collect();
                    defect = defect.max(grid.sobolev_norm(&v, s + 1.0, 1.0)?);
                }
                warm = Some(g.gamma);
                Ok(())
            })?;
            Ok(ConvergenceRow { kappa, defect, steps, wall_time_s: traj.stats.wall_time_s })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { flow: flow.name().into(), varkappa, t_final, s, rows })
}
