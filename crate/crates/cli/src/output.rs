//! CSV and JSON writers. Every row carries the seed, build tag and config
//! hash; JSON adds the table metadata.

use std::io::Write;

use coopsense::table::{ResultTable, Value};
use serde_json::{json, Map};

use crate::config::Format;
use crate::run::Status;

/// `git describe` of the build, or the package version when unavailable.
pub const BUILD_TAG: &str = env!("COOPSENSE_BUILD_TAG");

/// Provenance attached to every row.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub status: Status,
}

fn columns(table: &ResultTable) -> Vec<&str> {
    let mut c: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    c.extend(["status", "seed", "build", "config_hash"]);
    c
}

fn extra(p: &Provenance) -> [Value; 4] {
    [
        p.status.label().into(),
        p.seed.into(),
        BUILD_TAG.into(),
        p.config_hash.clone().into(),
    ]
}

pub fn write_csv<W: Write>(out: W, table: &ResultTable, p: &Provenance) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(table))?;
    let tail = extra(p);
    for row in &table.rows {
        w.write_record(row.iter().chain(&tail).map(Value::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, table: &ResultTable, p: &Provenance) -> std::io::Result<()> {
    let mut meta = Map::new();
    for (k, v) in &table.meta {
        meta.insert(k.clone(), json!(v));
    }
    let tail = extra(p);
    let rows: Vec<Vec<&Value>> = table.rows.iter().map(|r| r.iter().chain(&tail).collect()).collect();
    let doc = json!({
        "build": BUILD_TAG,
        "seed": p.seed,
        "config_hash": p.config_hash,
        "status": p.status.label(),
        "meta": meta,
        "columns": columns(table),
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")
}

pub fn write<W: Write>(out: W, format: Format, table: &ResultTable, p: &Provenance) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(out, table, p).map_err(std::io::Error::other),
        Format::Json => write_json(out, table, p),
    }
}
