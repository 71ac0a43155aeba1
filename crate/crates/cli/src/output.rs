//! Artifact writing. Every file carries the effective config and tool version.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use tmfusion::BinaryDataset;

use crate::config::RunConfig;

pub fn provenance(command: &str, cfg: &RunConfig, options: Value) -> Value {
    json!({
        "tool": "tmfusion",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "options": options,
    })
}

/// `<path>.meta.json`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    tmfusion::io::write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

/// A report document: provenance plus the command's result.
pub fn write_report(path: &Path, provenance: Value, report: &impl Serialize) -> Result<()> {
    write_json(path, &json!({ "provenance": provenance, "report": report }))
}

/// Dataset CSV plus a metadata sidecar.
pub fn write_dataset(path: &Path, data: &BinaryDataset, provenance: Value, extra: Value) -> Result<()> {
    data.save(path).with_context(|| format!("writing {}", path.display()))?;
    let meta = json!({
        "provenance": provenance,
        "rows": data.len(),
        "features": data.num_features(),
        "class_counts": data.class_counts(),
        "details": extra,
    });
    write_json(&meta_path(path), &meta)
}

pub fn load_dataset(path: &Path) -> Result<BinaryDataset> {
    BinaryDataset::load(path).with_context(|| format!("reading dataset {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<tmfusion::TsetlinMachine> {
    let (tm, _) = tmfusion::tm::persist::load(path).with_context(|| format!("reading model {}", path.display()))?;
    Ok(tm)
}
