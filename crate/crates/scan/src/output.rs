//! Persistence: CSV tables, JSON sidecars and optional SVG files.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::ScanConfig;
use crate::experiments::Report;
use crate::{ScanError, VERSION};

fn write(path: &Path, contents: &str) -> Result<(), ScanError> {
    std::fs::write(path, contents).map_err(|source| ScanError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Resolved configuration as a JSON object of strings.
pub fn config_json(cfg: &ScanConfig) -> Value {
    let map: Map<String, Value> = cfg
        .resolved()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    Value::Object(map)
}

/// Common sidecar envelope: config, units, version, timings.
pub fn envelope(cfg: &ScanConfig, report: &Report) -> Value {
    json!({
        "experiment": report.experiment.name(),
        "config": config_json(cfg),
        "units": { "freq": "MHz (f)", "time": "ns" },
        "version": VERSION,
        "timings": {
            "wall_s": report.elapsed_s,
            "compute_s": report.compute_s,
            "points": report.points,
            "workers": report.workers,
        },
        "warnings": report.warnings,
    })
}

/// Writes every table as `<name>.csv` plus `<name>.json`, every document as
/// `<name>.json`, and with `svg` every plot as `<name>.svg`. Returns the
/// written paths in order.
pub fn write_report(report: &Report, cfg: &ScanConfig, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, ScanError> {
    std::fs::create_dir_all(dir).map_err(|source| ScanError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let base = envelope(cfg, report);
    let mut written = Vec::new();
    for art in &report.tables {
        let csv = dir.join(format!("{}.csv", art.name));
        write(&csv, &art.table.to_csv())?;
        let mut side = base.clone();
        side["file"] = json!(format!("{}.csv", art.name));
        side["columns"] = json!(art.table.header());
        side["rows"] = json!(art.table.len());
        side["metadata"] = art.metadata.clone();
        let json_path = dir.join(format!("{}.json", art.name));
        write(&json_path, &pretty(&side))?;
        written.push(csv);
        written.push(json_path);
    }
    for (name, doc) in &report.documents {
        let mut side = base.clone();
        side["report"] = doc.clone();
        let path = dir.join(format!("{name}.json"));
        write(&path, &pretty(&side))?;
        written.push(path);
    }
    if svg {
        for (name, plot) in &report.plots {
            let path = dir.join(format!("{name}.svg"));
            write(&path, plot)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
