use std::fs;
use std::path::{Path, PathBuf};

use akns_lab::diagnostics::{self, ConvergenceOptions, LongTable};
use akns_lab::flows::{evolve, FlowKind, FlowSpec};
use akns_lab::hierarchy::{self, Flavor};
use akns_lab::lax::{self, determinant, fixed_point, GreensTriple};
use akns_lab::spectral::{CutoffFamily, Field};
use serde::Serialize;

use crate::config::{ExperimentConfig, FORMAT};
use crate::error::{CliError, Context};

/// Result of one subcommand: console lines and whether all checks passed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl Outcome {
    fn ok(lines: Vec<String>) -> Self {
        Self { lines, passed: true }
    }
}

/// Output directory holding the resolved config.
pub struct Output {
    pub dir: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

impl Output {
    pub fn create(dir: &Path, cfg: &ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("config.toml");
        fs::write(&path, cfg.to_toml()).map_err(io_err(&path))?;
        let tag = dir.join("FORMAT");
        fs::write(&tag, format!("{FORMAT}\n")).map_err(io_err(&tag))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn csv(&self, name: &str, table: &LongTable) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, table.to_csv_string()).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        diagnostics::write_json(&path, value).context(&format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::create_dir_all(&path).map_err(io_err(&path))?;
        Ok(path)
    }
}

fn triple_for(cfg: &ExperimentConfig, q: &Field, kappa: f64) -> Result<GreensTriple, CliError> {
    let what = format!("{} at kappa = {kappa}", cfg.green.method);
    match cfg.green.method.as_str() {
        "oracle" => lax::greens_oracle(q, kappa).context(&what),
        "series" => lax::g_series(q, kappa, cfg.green.series_order).context(&what),
        _ => fixed_point::g_fixed_point(q, kappa, 1e-14, fixed_point::DEFAULT_MAX_ITER).context(&what),
    }
}

/// Green's function exports and identity residuals.
pub fn green(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let dir = out.subdir("green")?;
    let mut table = LongTable::new(&["kappa"]);
    let mut lines = Vec::new();
    for &kappa in &cfg.green.kappas {
        let t = triple_for(cfg, &q, kappa)?;
        let mirror = triple_for(cfg, &q, -kappa)?;
        t.export(&dir, &format!("kappa_{kappa}"), &q).context("exporting triple")?;
        let r = t.residuals(&q);
        let p = [kappa];
        table.push(&p, "quadratic", r.quadratic);
        table.push(&p, "gamma_derivative", r.gamma_derivative);
        table.push(&p, "g12_derivative", r.g12_derivative);
        table.push(&p, "g21_derivative", r.g21_derivative);
        table.push(&p, "conjugation_symmetry", t.symmetry_residual(&mirror, &q));
        table.push(&p, "g12_l2", determinant::l2(&q, &t.g12));
        table.push(&p, "gamma_l2", determinant::l2(&q, &t.gamma));
        lines.push(format!("kappa {kappa}: max identity residual {:.3e}", r.max()));
    }
    out.csv("green.csv", &table)?;
    Ok(Outcome::ok(lines))
}

/// Hamiltonians, `A`, `alpha` and the expansion error.
pub fn conserved(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let h = hierarchy::hamiltonians(&q);
    let mut table = LongTable::new(&["kappa"]);
    let none = [""];
    table.push(&none, "mass", h.mass);
    table.push(&none, "momentum", h.momentum);
    table.push(&none, "h_nls", h.h_nls);
    table.push(&none, "h_mkdv", h.h_mkdv);
    table.push(&none, "imaginary_leakage", h.imaginary_leakage);
    let mut lines = vec![format!("M = {:.6e}, P = {:.6e}, H_NLS = {:.6e}, H_mKdV = {:.6e}", h.mass, h.momentum, h.h_nls, h.h_mkdv)];
    let mut previous: Option<f64> = None;
    for &kappa in &cfg.conserved.kappas {
        let p = [kappa.to_string()];
        let a = determinant::a_value(&q, kappa).context(&format!("A at kappa = {kappa}"))?;
        table.push(&p, "a_re", a.re);
        table.push(&p, "a_im", a.im);
        table.push(&p, "alpha", q.sign().value() * a.re);
        if cfg.conserved.trace {
            let tr = determinant::a_trace(&q, kappa, cfg.conserved.trace_terms).context("trace route")?;
            table.push(&p, "a_trace_re", tr.value.re);
            table.push(&p, "a_trace_im", tr.value.im);
        }
        if kappa >= 4.0 {
            let e = hierarchy::a_expansion_error(&q, kappa).context("expansion error")?;
            table.push(&p, "expansion_error", e);
            if let Some(prev) = previous {
                table.push(&p, "expansion_error_ratio", prev / e);
                lines.push(format!("kappa {kappa}: expansion error {e:.3e}, ratio {:.2}", prev / e));
            } else {
                lines.push(format!("kappa {kappa}: expansion error {e:.3e}"));
            }
            previous = Some(e);
        }
    }
    for &vk in &cfg.conserved.varkappas {
        table.push(&[vk.to_string()], "alpha_varkappa", determinant::alpha(&q, vk).context("alpha")?);
    }
    out.csv("conserved.csv", &table)?;
    Ok(Outcome::ok(lines))
}

/// Trajectory directory and drift table.
pub fn evolve_cmd(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let spec = cfg.flow_spec();
    let traj = evolve(&q, &spec).context(&format!("evolving {}", spec.kind.name()))?;
    traj.save(&out.dir.join("trajectory"), &cfg.conserved.varkappas).context("saving trajectory")?;
    let drift = diagnostics::drift_report(&traj, &cfg.conserved.varkappas);
    out.csv("drift.csv", &drift.table())?;
    out.json("stats.json", &traj.stats)?;
    let mut lines = vec![format!(
        "{} steps of {}: drift M {:.3e}, P {:.3e}, H_NLS {:.3e}, H_mKdV {:.3e}",
        traj.stats.steps,
        spec.kind.name(),
        drift.mass,
        drift.momentum,
        drift.h_nls,
        drift.h_mkdv
    )];
    for (vk, d) in &drift.alpha {
        lines.push(match d {
            Some(d) => format!("alpha({vk}) drift {d:.3e}"),
            None => format!("alpha({vk}) unavailable"),
        });
    }
    Ok(Outcome::ok(lines))
}

/// Local smoothing, tightness and equicontinuity tables.
pub fn smoothing(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let spec = cfg.flow_spec();
    let traj = evolve(&q, &spec).context("evolving")?;
    let c = &cfg.smoothing;
    let mut table = LongTable::new(&["sigma", "kappa", "window", "lattice"]);
    let mut lines = Vec::new();
    for &kappa in &c.kappas {
        let r = diagnostics::local_smoothing_norm_with(&traj, c.sigma, kappa, c.lattice, CutoffFamily::default())
            .context("local smoothing")?;
        lines.push(format!(
            "kappa {kappa}: X norm^2 {:.6e}, X_kappa norm^2 {:.6e} over window {}",
            r.x_norm_sq, r.x_kappa_norm_sq, r.window
        ));
        table.rows.extend(r.table().rows);
    }
    out.csv("smoothing.csv", &table)?;
    let mut sweep = LongTable::new(&["metric", "parameter", "time"]);
    for &radius in &c.radii {
        for (t, v) in diagnostics::tightness_sweep(&traj, radius, c.s).context("tightness")? {
            sweep.push(&["tightness".to_string(), radius.to_string(), t.to_string()], "value", v);
        }
    }
    for &kappa in &c.kappas {
        for (t, v) in diagnostics::equicontinuity_sweep(&traj, kappa, c.s).context("equicontinuity")? {
            sweep.push(&["equicontinuity".to_string(), kappa.to_string(), t.to_string()], "value", v);
        }
    }
    out.csv("tightness_equicontinuity.csv", &sweep)?;
    Ok(Outcome::ok(lines))
}

/// Flavor named in `[micro]`, or the one belonging to the flow.
pub fn flavor_for(cfg: &ExperimentConfig) -> Result<Flavor, CliError> {
    let kind = cfg.flow_kind();
    let name = match &cfg.micro.flavor {
        Some(n) => n.as_str(),
        None => kind.name(),
    };
    let kappa = kind.kappa();
    let need = || {
        kappa.ok_or_else(|| CliError::Config { field: "micro.flavor".into(), message: format!("{name} needs flow.kappa") })
    };
    Ok(match name {
        "nls" => Flavor::Nls,
        "mkdv" => Flavor::Mkdv,
        "tilde_mkdv" => Flavor::TildeMkdv,
        "a_flow" => Flavor::AFlow { kappa: need()? },
        "nls_diff" => Flavor::NlsDiff { kappa: need()? },
        "mkdv_diff" => Flavor::MkdvDiff { kappa: need()? },
        other => {
            return Err(CliError::Config {
                field: "micro.flavor".into(),
                message: format!("no microscopic conservation law for {other}"),
            })
        }
    })
}

/// Microscopic residual reports.
pub fn micro(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let flavor = flavor_for(cfg)?;
    let spec = FlowSpec { stride: 1, ..cfg.flow_spec() };
    diagnostics::micro::check_flavor(spec.kind, flavor)
        .map_err(|e| CliError::Config { field: "micro.flavor".into(), message: e.to_string() })?;
    let vk = cfg.micro.varkappa;
    let family = CutoffFamily::default();
    let run = |spec: &FlowSpec| -> Result<diagnostics::ResidualReport, CliError> {
        let traj = evolve(&q, spec).context("evolving")?;
        diagnostics::micro_residual_with(&traj, vk, flavor, cfg.micro.lattice, family).context("micro residual")
    };
    let mut coarse = run(&spec)?;
    let mut reports = Vec::new();
    if cfg.micro.refine {
        let fine = run(&FlowSpec { dt: spec.dt / 2.0, ..spec.clone() })?;
        if coarse.l1 > 0.0 && fine.l1 > 0.0 {
            coarse.refinement_slope = Some((coarse.l1 / fine.l1).log2());
        }
        reports.push(coarse);
        reports.push(fine);
    } else {
        reports.push(coarse);
    }
    let mut table = reports[0].table();
    for r in &reports[1..] {
        table.rows.extend(r.table().rows);
    }
    out.csv("micro.csv", &table)?;
    out.json("micro.json", &reports)?;
    let lines = reports
        .iter()
        .map(|r| {
            format!(
                "{} dt {}: L1 residual {:.3e}, integrated max relative {:.3e}{}",
                r.flavor.name(),
                r.dt,
                r.l1,
                r.max_integrated_relative(),
                r.refinement_slope.map(|s| format!(", slope {s:.2}")).unwrap_or_default()
            )
        })
        .collect();
    Ok(Outcome::ok(lines))
}

/// Norm inflation report.
pub fn inflate(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let r = diagnostics::norm_inflation_experiment(&cfg.inflation).context("norm inflation")?;
    out.csv("inflation.csv", &r.table())?;
    out.json("inflation.json", &r)?;
    let mut lines = vec![
        match r.t1 {
            Some(t) => format!("t1 = {t}"),
            None => format!("flag: {}", r.flag.clone().unwrap_or_default()),
        },
        format!(
            "mean production rate: predicted {:.6e}, measured {:.6e}, sign agrees {}",
            r.mean_production.predicted, r.mean_production.measured, r.mean_production.sign_agrees
        ),
        format!("growth ratio {:.6}, initial band ratio {:.4}", r.growth_ratio(), r.initial_band_ratio),
    ];
    if let Some(f) = r.post_t1_fit {
        lines.push(format!("post-t1 log-lambda fit: slope {:.4e}, residual {:.3e}", f.slope, f.residual));
    }
    if let Some(mb) = &r.multi_bump {
        lines.push(format!("{} bumps: superposition error {:.3e}", mb.bumps, mb.superposition_error));
    }
    Ok(Outcome::ok(lines))
}

/// `kappa` convergence table of a difference flow.
pub fn sweep(cfg: &ExperimentConfig, out: &Output) -> Result<Outcome, CliError> {
    let q = cfg.initial_data()?;
    let s = &cfg.sweep;
    let flow = FlowKind::parse(&s.flow, None).context("sweep.flow")?;
    let opts = ConvergenceOptions {
        dt: s.dt,
        s: s.s,
        lattice: s.lattice,
        stride: s.stride,
        ..ConvergenceOptions::default()
    };
    let t = diagnostics::kappa_convergence_study_with(&q, flow, s.varkappa, &s.kappas, s.t_final, &opts)
        .context("kappa convergence")?;
    out.csv("sweep.csv", &t.table())?;
    out.json("sweep.json", &t)?;
    let mut lines: Vec<String> = t.rows.iter().map(|r| format!("kappa {}: defect {:.6e}", r.kappa, r.defect)).collect();
    lines.push(format!("monotone decreasing: {}", t.is_monotone_decreasing(0.0)));
    Ok(Outcome::ok(lines))
}
