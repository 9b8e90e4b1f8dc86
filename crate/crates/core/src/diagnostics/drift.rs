use serde::{Deserialize, Serialize};

use super::report::LongTable;
use crate::flows::{ConservedRow, Trajectory};

/// Drift of the conserved quantities along a trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftReport {
    pub rows: Vec<ConservedRow>,
    /// `max_t |Q(t) - Q(0)| / |Q(0)|`, absolute when `|Q(0)| <= ZERO_LEVEL`.
    pub mass: f64,
    pub momentum: f64,
    pub h_nls: f64,
    pub h_mkdv: f64,
    /// `(varkappa, drift)`; `None` when `alpha` was unavailable at some sample.
    pub alpha: Vec<(f64, Option<f64>)>,
    pub max_constraint_drift: f64,
}

/// Initial values at or below this count as zero (momentum and `H_mkdv` of real data).
pub const ZERO_LEVEL: f64 = 1e-14;

fn relative(v: f64, v0: f64) -> f64 {
    if v0.abs() <= ZERO_LEVEL {
        (v - v0).abs()
    } else {
        (v - v0).abs() / v0.abs()
    }
}

pub fn drift_report(traj: &Trajectory, varkappas: &[f64]) -> DriftReport {
    let rows = traj.conserved_table(varkappas);
    let h0 = rows[0].hamiltonians;
    let max_of = |f: &dyn Fn(&ConservedRow) -> f64, v0: f64| rows.iter().map(|r| relative(f(r), v0)).fold(0.0, f64::max);
    let alpha = varkappas
        .iter()
        .enumerate()
        .map(|(k, &vk)| {
            let values: Option<Vec<f64>> = rows.iter().map(|r| r.alpha[k].1).collect();
            (vk, values.map(|v| v.iter().map(|x| relative(*x, v[0])).fold(0.0, f64::max)))
        })
        .collect();
    DriftReport {
        mass: max_of(&|r| r.hamiltonians.mass, h0.mass),
        momentum: max_of(&|r| r.hamiltonians.momentum, h0.momentum),
        h_nls: max_of(&|r| r.hamiltonians.h_nls, h0.h_nls),
        h_mkdv: max_of(&|r| r.hamiltonians.h_mkdv, h0.h_mkdv),
        alpha,
        max_constraint_drift: rows.iter().map(|r| r.constraint_drift).fold(0.0, f64::max),
        rows,
    }
}

impl DriftReport {
    /// Long table with columns `time, quantity, value`.
    pub fn table(&self) -> LongTable {
        let mut t = LongTable::new(&["time"]);
        for r in &self.rows {
            let p = [r.time];
            t.push(&p, "mass", r.hamiltonians.mass);
            t.push(&p, "momentum", r.hamiltonians.momentum);
            t.push(&p, "h_nls", r.hamiltonians.h_nls);
            t.push(&p, "h_mkdv", r.hamiltonians.h_mkdv);
            for (vk, a) in &r.alpha {
                t.push(&p, &format!("alpha_{vk}"), a.unwrap_or(f64::NAN));
            }
            t.push(&p, "constraint_drift", r.constraint_drift);
        }
        t
    }
}
