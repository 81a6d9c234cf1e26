//! Stiffness maps on disk: `x1,x2,stiffness` CSV in SI units with a JSON
//! sidecar `<path>.meta.json` carrying the metadata.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forward::{MapMetadata, MapPoint, StiffnessMap};

pub const HEADER: [&str; 3] = ["x1", "x2", "stiffness"];

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Seventeen significant digits: every f64 survives the round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: path.display().to_string(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Writes the CSV and, when the map has metadata, its sidecar. A stale
/// sidecar from an earlier save is removed otherwise.
pub fn save_map(map: &StiffnessMap, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(64 * (map.len() + 1));
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for p in &map.points {
        out.push_str(&format!("{},{},{}\n", fmt_f64(p.x1), fmt_f64(p.x2), fmt_f64(p.s)));
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))?;
    let side = sidecar_path(path);
    match &map.meta {
        Some(meta) => write_json(&side, meta),
        None if side.exists() => fs::remove_file(&side).map_err(|e| io_err(&side, e)),
        None => Ok(()),
    }
}

/// Reads a map; `meta` is `None` when the sidecar is absent.
pub fn load_map(path: &Path) -> Result<StiffnessMap> {
    let name = path.display().to_string();
    let malformed = |line: u64, message: String| Error::Malformed { path: name.clone(), line, message };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let header = rdr.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    for (k, want) in HEADER.iter().enumerate() {
        match header.get(k) {
            Some(got) if got == *want => {}
            Some(got) => return Err(malformed(1, format!("column {} is `{got}`, expected `{want}`", k + 1))),
            None => return Err(malformed(1, format!("missing column `{want}`"))),
        }
    }
    if let Some(extra) = header.get(HEADER.len()) {
        return Err(malformed(1, format!("unexpected column `{extra}`")));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != HEADER.len() {
            return Err(malformed(line, format!("expected {} fields, found {}", HEADER.len(), rec.len())));
        }
        let mut v = [0.0; 3];
        for k in 0..3 {
            let x: f64 = rec[k]
                .parse()
                .map_err(|_| malformed(line, format!("`{}` is not a number in column `{}`", &rec[k], HEADER[k])))?;
            if !x.is_finite() {
                return Err(malformed(line, format!("non-finite value in column `{}`", HEADER[k])));
            }
            v[k] = x;
        }
        points.push(MapPoint { x1: v[0], x2: v[1], s: v[2] });
    }
    let side = sidecar_path(path);
    let meta: Option<MapMetadata> = if side.exists() { Some(read_json(&side)?) } else { None };
    Ok(StiffnessMap { points, meta })
}
