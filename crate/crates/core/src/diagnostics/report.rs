use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Result;

/// Long-format CSV: one row per `(parameters..., quantity, value)`.
#[derive(Clone, Debug, Default)]
pub struct LongTable {
    pub parameter_names: Vec<String>,
    pub rows: Vec<(Vec<String>, String, f64)>,
}

impl LongTable {
    pub fn new<S: AsRef<str>>(parameter_names: &[S]) -> Self {
        Self { parameter_names: parameter_names.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<S: ToString>(&mut self, params: &[S], quantity: &str, value: f64) {
        self.rows.push((params.iter().map(|p| p.to_string()).collect(), quantity.to_string(), value));
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for name in &self.parameter_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("quantity,value\n");
        for (params, q, v) in &self.rows {
            for p in params {
                out.push_str(p);
                out.push(',');
            }
            out.push_str(&format!("{q},{v:.17e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Pretty JSON summary.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
