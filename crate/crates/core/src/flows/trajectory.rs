use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::FlowSpec;
use super::stepper::{StepCounters, Stepper};
use crate::hierarchy::{hamiltonians, HamiltonianValue};
use crate::lax::determinant;
use crate::spectral::{snapshot, Field};
use crate::{Error, Result};

/// Integrator bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub steps: usize,
    /// Always zero: steps are never rejected.
    pub rejected_steps: usize,
    pub wall_time_s: f64,
    /// Step size actually used (`t_final / steps`).
    pub dt_used: f64,
    pub counters: StepCounters,
}

/// Sampled solution of one flow.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub spec: FlowSpec,
    pub samples: Vec<(f64, Field)>,
    pub stats: TrajectoryStats,
}

/// One row of the conserved-quantity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedRow {
    pub time: f64,
    pub hamiltonians: HamiltonianValue,
    /// `(varkappa, alpha)`; `None` when the fixed point failed.
    pub alpha: Vec<(f64, Option<f64>)>,
    /// `||r - sign * conj(q)||`, nonzero only along the `A(kappa)` flow.
    pub constraint_drift: f64,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    spec: FlowSpec,
    stats: TrajectoryStats,
    snapshots: Vec<SnapshotEntry>,
    conserved: Vec<ConservedRow>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotEntry {
    time: f64,
    file: String,
}

/// Integrates `q0` according to `spec`.
pub fn evolve(q0: &Field, spec: &FlowSpec) -> Result<Trajectory> {
    evolve_with(q0, spec, |_, _| Ok(()))
}

/// Like [`evolve`], calling `observer(t, q)` after every step and at `t = 0`.
pub fn evolve_with<F>(q0: &Field, spec: &FlowSpec, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(f64, &Field) -> Result<()>,
{
    spec.validate(q0.grid())?;
    let start = Instant::now();
    let (steps, dt) = spec.steps();
    let mut stepper = Stepper::new(spec, q0.grid(), q0.sign(), dt)?;
    let mut samples = vec![(0.0, q0.clone())];
    observer(0.0, q0)?;
    let mut current = q0.clone();
    for k in 1..=steps {
        let t = k as f64 * dt;
        let last_valid = (k - 1) as f64 * dt;
        current = stepper.step(&current).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { time: t, last_valid },
            other => other,
        })?;
        observer(t, &current)?;
        if k % spec.stride == 0 || k == steps {
            samples.push((t, current.clone()));
        }
    }
    Ok(Trajectory {
        spec: spec.clone(),
        samples,
        stats: TrajectoryStats {
            steps,
            rejected_steps: 0,
            wall_time_s: start.elapsed().as_secs_f64(),
            dt_used: dt,
            counters: stepper.counters(),
        },
    })
}

impl Trajectory {
    pub fn final_state(&self) -> &Field {
        &self.samples.last().expect("a trajectory holds at least the initial state").1
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|(t, _)| *t).collect()
    }

    /// Hamiltonians and `alpha(varkappa)` at every sample.
    pub fn conserved_table(&self, varkappas: &[f64]) -> Vec<ConservedRow> {
        self.samples
            .iter()
            .map(|(t, q)| ConservedRow {
                time: *t,
                hamiltonians: hamiltonians(q),
                alpha: varkappas.iter().map(|&vk| (vk, determinant::alpha(q, vk).ok())).collect(),
                constraint_drift: q.constraint_drift(),
            })
            .collect()
    }

    /// Writes one snapshot per sample plus `manifest.json`.
    pub fn save(&self, dir: &Path, varkappas: &[f64]) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let mut snapshots = Vec::with_capacity(self.samples.len());
        for (k, (t, q)) in self.samples.iter().enumerate() {
            let stem = format!("q_{k:05}");
            snapshot::write_snapshot(dir, &stem, q, *t, self.spec.kind.name())?;
            snapshots.push(SnapshotEntry { time: *t, file: format!("{stem}.bin") });
        }
        let manifest = Manifest {
            spec: self.spec.clone(),
            stats: self.stats,
            snapshots,
            conserved: self.conserved_table(varkappas),
        };
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }

    /// Reads a directory written by [`Trajectory::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let mut samples = Vec::with_capacity(manifest.snapshots.len());
        for entry in &manifest.snapshots {
            let (field, _) = snapshot::read_snapshot(&dir.join(&entry.file))?;
            samples.push((entry.time, field));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument(format!("{} holds no snapshots", dir.display())));
        }
        Ok(Self { spec: manifest.spec, samples, stats: manifest.stats })
    }
}
