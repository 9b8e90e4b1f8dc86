use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Field, Grid, Sign};
use crate::{Error, Result, C64};

/// JSON sidecar written next to each raw snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub sign: i64,
    pub time: f64,
    pub label: String,
}

/// Little-endian `f64` pairs `(re, im)`, `2N` numbers in total.
pub fn encode_values(values: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_values(bytes: &[u8]) -> Result<Vec<C64>> {
    if bytes.len() % 16 != 0 {
        return Err(Error::InvalidArgument(format!(
            "snapshot byte length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect())
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`, plus `<stem>_r.bin` for a
/// paired field; returns the binary path.
pub fn write_snapshot(dir: &Path, stem: &str, field: &Field, time: f64, label: &str) -> Result<PathBuf> {
    let bin = write_values(dir, stem, field.grid(), field.sign(), field.values(), time, label)?;
    if let Some(r) = field.partner() {
        fs::write(partner_path(&bin), encode_values(r))?;
    }
    Ok(bin)
}

fn partner_path(bin: &Path) -> PathBuf {
    let stem = bin.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    bin.with_file_name(format!("{stem}_r.bin"))
}

/// Same as [`write_snapshot`] for an arbitrary grid function.
pub fn write_values(
    dir: &Path,
    stem: &str,
    grid: &Grid,
    sign: Sign,
    values: &[C64],
    time: f64,
    label: &str,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    fs::write(&bin, encode_values(values))?;
    let meta = SnapshotMeta {
        length: grid.length(),
        points: grid.points(),
        sign: sign.value() as i64,
        time,
        label: label.to_string(),
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(bin)
}

/// Reads a snapshot given the path of its `.bin` file.
pub fn read_snapshot(bin: &Path) -> Result<(Field, SnapshotMeta)> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(bin.with_extension("json"))?)?;
    let values = decode_values(&fs::read(bin)?)?;
    let grid = Grid::new(meta.length, meta.points)?;
    let sign = Sign::from_value(meta.sign)?;
    let partner = partner_path(bin);
    let field = if partner.exists() {
        Field::paired(grid, values, decode_values(&fs::read(partner)?)?, sign)?
    } else {
        Field::new(grid, values, sign)?
    };
    Ok((field, meta))
}
