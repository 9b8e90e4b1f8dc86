use std::path::{Path, PathBuf};

use akns_lab::diagnostics::{InflationConfig, Parity};
use akns_lab::flows::{FlowKind, FlowSpec, Scheme};
use akns_lab::spectral::{snapshot, Field, Grid, GridSpec, Sign};
use akns_lab::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Versioned format tag written into every resolved config.
pub const FORMAT: &str = "akns-lab-config/1";

/// Prefix of environment overrides (`AKNS_LAB_GRID__N=512` sets `grid.N`).
pub const ENV_PREFIX: &str = "AKNS_LAB_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format: String,
    pub seed: u64,
    pub output: PathBuf,
    pub threads: usize,
    pub grid: GridSpec,
    pub data: DataConfig,
    pub flow: FlowConfig,
    pub green: GreenConfig,
    pub conserved: ConservedConfig,
    pub smoothing: SmoothingConfig,
    pub micro: MicroConfig,
    pub sweep: SweepConfig,
    pub inflation: InflationConfig,
    pub selftest: SelftestConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Gaussian,
    Mode,
    InflationEven,
    InflationOdd,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub profile: Profile,
    pub amplitude: f64,
    pub xi0: f64,
    pub width: f64,
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub kappas: Vec<f64>,
    pub method: String,
    pub series_order: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConservedConfig {
    pub kappas: Vec<f64>,
    pub varkappas: Vec<f64>,
    pub trace: bool,
    pub trace_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingConfig {
    pub sigma: f64,
    pub s: f64,
    pub kappas: Vec<f64>,
    pub radii: Vec<f64>,
    pub lattice: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroConfig {
    pub varkappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flavor: Option<String>,
    pub lattice: usize,
    pub refine: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub flow: String,
    pub varkappa: f64,
    pub kappas: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    pub s: f64,
    pub lattice: usize,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    pub fields: usize,
    pub points: usize,
    pub max_norm: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            format: FORMAT.into(),
            seed: 0,
            output: PathBuf::from("out"),
            threads: 0,
            grid: GridSpec { length: 40.0, points: 256 },
            data: DataConfig {
                profile: Profile::Gaussian,
                amplitude: 0.1,
                xi0: 0.0,
                width: 1.0,
                sign: Sign::Defocusing,
                file: None,
            },
            flow: FlowConfig {
                kind: "nls".into(),
                kappa: None,
                dt: 1e-3,
                t_final: 1.0,
                scheme: None,
                stride: 10,
                stability_bound: None,
            },
            green: GreenConfig { kappas: vec![1.0, 2.0, 4.0, 8.0], method: "fixed_point".into(), series_order: 3 },
            conserved: ConservedConfig {
                kappas: vec![8.0, 16.0, 32.0],
                varkappas: vec![1.0, 2.0, 4.0],
                trace: false,
                trace_terms: 12,
            },
            smoothing: SmoothingConfig {
                sigma: 0.25,
                s: -0.25,
                kappas: vec![1.0, 4.0, 16.0],
                radii: vec![5.0],
                lattice: 33,
            },
            micro: MicroConfig { varkappa: 2.0, flavor: None, lattice: 9, refine: true },
            sweep: SweepConfig {
                flow: "nls".into(),
                varkappa: 4.0,
                kappas: vec![8.0, 16.0, 32.0],
                t_final: 0.1,
                dt: 1e-3,
                s: -0.25,
                lattice: 33,
                stride: 10,
            },
            inflation: InflationConfig::default(),
            selftest: SelftestConfig { fields: 3, points: 256, max_norm: 0.2 },
        }
    }
}

/// `(dotted key, description with units)` for the generated reference.
const DOCS: &[(&str, &str)] = &[
    ("format", "format tag; must match this build"),
    ("seed", "seed for the randomized property suites"),
    ("output", "output directory (overridden by --out)"),
    ("threads", "worker threads, 0 = all cores (overridden by --threads)"),
    ("grid.L", "domain length, spatial units; the grid is [-L/2, L/2)"),
    ("grid.N", "number of grid points, a power of two"),
    ("data.profile", "gaussian | mode | inflation_even | inflation_odd | file"),
    ("data.amplitude", "amplitude a, dimensionless"),
    ("data.xi0", "carrier wavenumber, 1/spatial units (mode: must be 2 pi k / L)"),
    ("data.width", "gaussian width w in a exp(-(x/w)^2), spatial units"),
    ("data.sign", "defocusing (r = +conj q) | focusing (r = -conj q)"),
    ("data.file", "snapshot .bin read when profile = file"),
    ("flow.kind", "nls | mkdv | a_flow | nls_kappa | mkdv_kappa | nls_diff | mkdv_diff"),
    ("flow.kappa", "spectral parameter of the parametrized flows, >= 1"),
    ("flow.dt", "time step, time units"),
    ("flow.t_final", "final time, time units"),
    ("flow.scheme", "splitting4 | etd4 | rk4_spectral; default depends on the flow"),
    ("flow.stride", "keep every stride-th step"),
    ("flow.stability_bound", "override of the dt * xi_max^order gate"),
    ("green.kappas", "spectral parameters for the green subcommand"),
    ("green.method", "fixed_point | oracle | series"),
    ("green.series_order", "1 or 3, for method = series"),
    ("conserved.kappas", "kappa values for A, alpha and the expansion error (>= 4 for the error)"),
    ("conserved.varkappas", "varkappa values for alpha along trajectories"),
    ("conserved.trace", "also evaluate A through the dense trace series"),
    ("conserved.trace_terms", "number of trace terms"),
    ("smoothing.sigma", "regularity sigma of the local smoothing norm"),
    ("smoothing.s", "regularity s of the equicontinuity and tightness metrics, < 0"),
    ("smoothing.kappas", "kappa values of the X^sigma_kappa norm and the tail"),
    ("smoothing.radii", "tightness radii R, spatial units, <= L/2"),
    ("smoothing.lattice", "number of cutoff centres h in [-L/4, L/4]"),
    ("micro.varkappa", "spectral parameter of the density"),
    ("micro.flavor", "nls | mkdv | tilde_mkdv | a_flow | nls_diff | mkdv_diff; default follows flow.kind"),
    ("micro.lattice", "number of centres h for the integrated check"),
    ("micro.refine", "also run at dt/2 and report the refinement slope"),
    ("sweep.flow", "nls | mkdv"),
    ("sweep.varkappa", "spectral parameter of g12, >= 4"),
    ("sweep.kappas", "regularization parameters, each >= 2 varkappa"),
    ("sweep.t_final", "time of each difference-flow run, time units"),
    ("sweep.dt", "time step, time units"),
    ("sweep.s", "defect is measured in H^{s+1}"),
    ("sweep.lattice", "number of cutoff centres h"),
    ("sweep.stride", "defect evaluated every stride steps"),
    ("inflation.parity", "even (NLS) | odd (mKdV)"),
    ("inflation.amplitude", "amplitude a of the mean-zero profile"),
    ("inflation.lambdas", "scaling parameters lambda >= 1"),
    ("inflation.sigma", "Sobolev exponent, <= -1/2"),
    ("inflation.bumps", "number of translated copies"),
    ("inflation.separation", "distance between copies, spatial units of u"),
    ("inflation.dt", "time step, time units of u"),
    ("inflation.window", "search window [0, window] for t1, time units of u"),
    ("inflation.threshold", "t1 is the first time with |int u| > threshold * ||u0||_{L^1}"),
    ("inflation.stride", "norm series sampled every stride steps"),
    ("inflation.sign", "defocusing | focusing"),
    ("inflation.grid.L", "domain length for u, spatial units"),
    ("inflation.grid.N", "grid points for u"),
    ("selftest.fields", "random fields per property"),
    ("selftest.points", "grid points of the selftest grid (L = 40)"),
    ("selftest.max_norm", "largest H^{-1/4} norm of the random fields"),
];

/// Annotated TOML of the defaults.
pub fn reference() -> String {
    let body = toml::to_string(&ExperimentConfig::default()).expect("defaults serialize");
    let mut out = String::from("# akns-lab configuration reference (generated; every value is the default)\n\n");
    let mut section = String::new();
    let mut seen = Vec::new();
    for line in body.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').to_string();
        } else if let Some((key, _)) = trimmed.split_once(" = ") {
            let dotted = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            if let Some((_, doc)) = DOCS.iter().find(|(k, _)| *k == dotted) {
                out.push_str(&format!("# {doc}\n"));
            }
            seen.push(dotted);
        }
        out.push_str(line);
        out.push('\n');
    }
    let optional: Vec<_> = DOCS.iter().filter(|(k, _)| !seen.iter().any(|s| s == k)).collect();
    if !optional.is_empty() {
        out.push_str("\n# Optional keys, unset by default:\n");
        for (key, doc) in optional {
            out.push_str(&format!("#   {key}: {doc}\n"));
        }
    }
    out
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Sets `section.key = raw`, matching existing keys case-insensitively.
pub fn set_dotted(table: &mut toml::Table, dotted: &str, raw: &str) -> Result<(), CliError> {
    let parts: Vec<&str> = dotted.split('.').filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err(CliError::Config { field: dotted.into(), message: "empty key".into() });
    }
    let mut cur = table;
    for (i, part) in parts.iter().enumerate() {
        let key = cur.keys().find(|k| k.eq_ignore_ascii_case(part)).cloned().unwrap_or_else(|| part.to_string());
        if i + 1 == parts.len() {
            cur.insert(key, parse_value(raw));
            return Ok(());
        }
        let next = cur.entry(key).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match next {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::Config { field: dotted.into(), message: format!("{part} is not a section") }),
        };
    }
    Ok(())
}

/// Overrides from `AKNS_LAB_<SECTION>__<KEY>` variables, sorted by name.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            if !rest.contains("__") {
                return None;
            }
            Some((rest.split("__").map(|p| p.to_ascii_lowercase()).collect::<Vec<_>>().join("."), v))
        })
        .collect();
    out.sort();
    out
}

impl ExperimentConfig {
    /// Defaults, then `file`, then `overrides` (`dotted.key`, raw TOML value).
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = toml::Table::try_from(ExperimentConfig::default()).expect("defaults serialize");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let user: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config {
                field: path.display().to_string(),
                message: e.to_string(),
            })?;
            merge(&mut table, user);
        }
        for (k, v) in overrides {
            set_dotted(&mut table, k, v)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config { field: "config".into(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config { field: "config".into(), message: e.to_string() })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| Err(CliError::Config { field: field.into(), message });
        if self.format != FORMAT {
            return bad("format", format!("expected {FORMAT}, got {}", self.format));
        }
        if let Err(e) = Grid::from_spec(self.grid) {
            return bad("grid", e.to_string());
        }
        if !self.data.amplitude.is_finite() {
            return bad("data.amplitude", "must be finite".into());
        }
        if !(self.data.width.is_finite() && self.data.width > 0.0) {
            return bad("data.width", "must be positive".into());
        }
        if self.data.profile == Profile::File && self.data.file.is_none() {
            return bad("data.file", "required when data.profile = file".into());
        }
        if let Err(e) = FlowKind::parse(&self.flow.kind, self.flow.kappa) {
            return bad("flow.kind", e.to_string());
        }
        if let Some(s) = &self.flow.scheme {
            if let Err(e) = Scheme::parse(s) {
                return bad("flow.scheme", e.to_string());
            }
        }
        if !(self.flow.dt > 0.0) {
            return bad("flow.dt", "must be positive".into());
        }
        if !(self.flow.t_final >= 0.0) {
            return bad("flow.t_final", "must be non-negative".into());
        }
        if self.flow.stride == 0 {
            return bad("flow.stride", "must be at least 1".into());
        }
        if !["fixed_point", "oracle", "series"].contains(&self.green.method.as_str()) {
            return bad("green.method", format!("unknown method {}", self.green.method));
        }
        if !matches!(self.green.series_order, 1 | 3) {
            return bad("green.series_order", "must be 1 or 3".into());
        }
        if self.smoothing.s >= 0.0 {
            return bad("smoothing.s", "must be negative".into());
        }
        if self.smoothing.lattice == 0 {
            return bad("smoothing.lattice", "must be at least 1".into());
        }
        let half = self.grid.length / 2.0;
        if let Some(r) = self.smoothing.radii.iter().find(|&&r| !(r > 0.0 && r <= half)) {
            return bad("smoothing.radii", format!("radius {r} outside (0, L/2]"));
        }
        if !["nls", "mkdv"].contains(&self.sweep.flow.as_str()) {
            return bad("sweep.flow", format!("must be nls or mkdv, got {}", self.sweep.flow));
        }
        if self.sweep.varkappa < 4.0 {
            return bad("sweep.varkappa", "must be at least 4".into());
        }
        if let Some(k) = self.sweep.kappas.iter().find(|&&k| k < 2.0 * self.sweep.varkappa) {
            return bad("sweep.kappas", format!("{k} is below 2 * varkappa"));
        }
        if self.inflation.sigma > -0.5 {
            return bad("inflation.sigma", "must be <= -1/2".into());
        }
        if self.inflation.bumps == 0 {
            return bad("inflation.bumps", "must be at least 1".into());
        }
        if let Err(e) = Grid::from_spec(self.inflation.grid) {
            return bad("inflation.grid", e.to_string());
        }
        if self.selftest.fields == 0 {
            return bad("selftest.fields", "must be at least 1".into());
        }
        if Grid::new(40.0, self.selftest.points).is_err() {
            return bad("selftest.points", "must be a power of two >= 4".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::from_spec(self.grid).expect("validated grid")
    }

    pub fn flow_kind(&self) -> FlowKind {
        FlowKind::parse(&self.flow.kind, self.flow.kappa).expect("validated flow")
    }

    pub fn flow_spec(&self) -> FlowSpec {
        let mut spec = FlowSpec::new(self.flow_kind(), self.flow.dt, self.flow.t_final).with_stride(self.flow.stride);
        if let Some(s) = &self.flow.scheme {
            spec = spec.with_scheme(Scheme::parse(s).expect("validated scheme"));
        }
        spec.stability_bound = self.flow.stability_bound;
        spec
    }

    /// Initial data described by `[data]`.
    pub fn initial_data(&self) -> Result<Field, CliError> {
        let grid = self.grid();
        let d = &self.data;
        let a = d.amplitude;
        Ok(match d.profile {
            Profile::Gaussian => Field::from_fn(grid, d.sign, |x| {
                let y = x / d.width;
                C64::from_polar(a * (-y * y).exp(), d.xi0 * x)
            }),
            Profile::Mode => {
                let k = d.xi0 * grid.length() / (2.0 * std::f64::consts::PI);
                if (k - k.round()).abs() > 1e-9 {
                    return Err(CliError::Config {
                        field: "data.xi0".into(),
                        message: format!("{} is not a grid wavenumber 2 pi k / L", d.xi0),
                    });
                }
                Field::from_fn(grid, d.sign, |x| C64::from_polar(a, d.xi0 * x))
            }
            Profile::InflationEven => akns_lab::diagnostics::inflation_data(&grid, Parity::Even, a, d.sign)?,
            Profile::InflationOdd => akns_lab::diagnostics::inflation_data(&grid, Parity::Odd, a, d.sign)?,
            Profile::File => {
                let path = d.file.as_ref().expect("validated file");
                let (field, _) = snapshot::read_snapshot(path)?;
                if field.grid().spec() != self.grid {
                    return Err(CliError::Config {
                        field: "data.file".into(),
                        message: format!("snapshot grid {:?} differs from [grid] {:?}", field.grid().spec(), self.grid),
                    });
                }
                field
            }
        })
    }
}
