//! Report assembly and serialization.
//!
//! The JSON report is deterministic: identical scenario bytes, flags and
//! seed produce byte-identical output except for the timestamp, which sits
//! on its own line inside the `header` object so downstream tooling can
//! strip or ignore it. Every floating-point number is serialized with 17
//! significant digits, enough to round-trip `f64` exactly. Convergence
//! tables go to separate CSV files with columns `grid, area_estimate,
//! delta`, one row per refinement level.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use kappaloop::orbit::ConvergenceRow;
use kappaloop::{Numerics, Scheme, SIGN_CONVENTION};

use crate::tasks::TaskOutcome;

/// Hex SHA-256 of the scenario file's raw bytes, identifying the inputs in
/// the report.
pub fn scenario_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Formats one float with 17 significant digits (exact `f64` round-trip).
fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Deterministic pretty printer: two-space indent, keys in sorted order,
/// floats through [`format_float`].
fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    let pad_in = "  ".repeat(indent + 1);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().expect("JSON number fits f64")));
            }
        }
        Value::String(_) => out.push_str(&value.to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad_in);
                write_value(out, item, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad_in);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push('}');
        }
    }
}

/// Renders a complete JSON document with a trailing newline.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::GaussFourth => "gauss-fourth",
        Scheme::Midpoint => "midpoint",
    }
}

fn numerics_value(num: &Numerics) -> Value {
    json!({
        "lax_steps": num.lax_steps,
        "cap_grid": [num.cap_grid.0, num.cap_grid.1],
        "quad_tol": num.quad_tol,
        "max_refine": num.max_refine,
        "seed": num.seed,
        "scheme": scheme_name(num.scheme),
        "independence_points": num.independence_points,
        "independence_tol": num.independence_tol,
        "closure_probes": num.closure_probes,
        "cap_attempts": num.cap_attempts,
    })
}

/// One convergence table as CSV text.
fn render_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("grid,area_estimate,delta\n");
    for row in rows {
        let delta = row.delta.map(format_float).unwrap_or_default();
        out.push_str(&format!(
            "{}x{},{},{}\n",
            row.grid.0,
            row.grid.1,
            format_float(row.estimate),
            delta
        ));
    }
    out
}

/// Paths produced by one report emission.
#[derive(Debug)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
}

/// Writes `report.json` and one CSV per convergence-producing task into
/// `out_dir`, which is created if missing. The CSV file names are recorded
/// in the owning task's diagnostics before the JSON is rendered.
pub fn write_outputs(
    out_dir: &Path,
    scenario_digest: &str,
    num: &Numerics,
    outcomes: &[TaskOutcome],
    timestamp: &str,
) -> io::Result<ReportFiles> {
    fs::create_dir_all(out_dir)?;

    let mut tables = Vec::new();
    let mut per_task = Vec::with_capacity(outcomes.len());
    let mut table_count = 0usize;
    for outcome in outcomes {
        let mut values = outcome.values.clone();
        if let Some(rows) = &outcome.convergence {
            table_count += 1;
            let file_name = if table_count == 1 {
                "convergence.csv".to_string()
            } else {
                format!("convergence-{table_count}.csv")
            };
            let path = out_dir.join(&file_name);
            fs::write(&path, render_csv(rows))?;
            if let Some(diag) = values
                .get_mut("diagnostics")
                .and_then(|d| d.as_object_mut())
            {
                diag.insert("csv_file".to_string(), Value::String(file_name));
            }
            tables.push(path);
        }
        per_task.push(json!({
            "name": outcome.name,
            "status": outcome.status.as_str(),
            "values": values,
        }));
    }

    let document = json!({
        "header": {
            "timestamp": timestamp,
            "tool": "kappaloop",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "scenario_hash": scenario_digest,
        "sign_convention": SIGN_CONVENTION,
        "resolved_numerics": numerics_value(num),
        "per_task": per_task,
    });

    let report = out_dir.join("report.json");
    fs::write(&report, render_json(&document))?;
    Ok(ReportFiles { report, tables })
}
