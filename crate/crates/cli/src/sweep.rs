//! Cartesian parameter sweeps over a base configuration.
//!
//! A ranges file holds one `[ranges]` table whose keys are dotted config
//! paths. Each value is either an array of values or an inline table
//! `{ start, stop, count }` of evenly spaced floats:
//!
//! ```toml
//! [ranges]
//! "kick.theta" = [6.283185307179586, 2.0, 1.0, 0.5]
//! steps = { start = 10.0, stop = 30.0, count = 3 }
//! ```

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qzd_core::output::fmt17;
use rayon::prelude::*;
use serde::Deserialize;
use toml::Value;

use crate::config::{linspace, RunConfig};
use crate::error::{io_err, CliError, Result};
use crate::runner::{run_config, RunTarget, Summary};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranges {
    #[serde(default)]
    pub ranges: BTreeMap<String, Value>,
}

/// One sweep point: the overrides applied and the outcome.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub index: usize,
    pub assignments: Vec<(String, Value)>,
    pub result: std::result::Result<Summary, String>,
}

impl Ranges {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let r: Ranges = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        r.axes()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Values of every axis, in key order.
    pub fn axes(&self) -> Result<Vec<(String, Vec<Value>)>> {
        let mut errs = Vec::new();
        let mut axes = Vec::new();
        for (key, v) in &self.ranges {
            let values = match v {
                Value::Array(a) => a.clone(),
                Value::Table(t) => {
                    let num = |k: &str| t.get(k).and_then(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)));
                    match (num("start"), num("stop"), t.get("count").and_then(Value::as_integer)) {
                        (Some(a), Some(b), Some(n)) if n >= 1 && t.len() == 3 => {
                            linspace(a, b, n as usize).into_iter().map(Value::Float).collect()
                        }
                        _ => {
                            errs.push(format!("range '{key}' must be an array or {{ start, stop, count >= 1 }}"));
                            continue;
                        }
                    }
                }
                _ => {
                    errs.push(format!("range '{key}' must be an array or {{ start, stop, count >= 1 }}"));
                    continue;
                }
            };
            if values.is_empty() {
                errs.push(format!("range '{key}' is empty"));
            }
            if values.iter().any(|x| matches!(x, Value::Float(f) if !f.is_finite())) {
                errs.push(format!("range '{key}' contains a non-finite value"));
            }
            axes.push((key.clone(), values));
        }
        if errs.is_empty() {
            Ok(axes)
        } else {
            Err(CliError::Config(errs))
        }
    }

    /// Every combination of axis values; the last key varies fastest.
    pub fn points(&self) -> Result<Vec<Vec<(String, Value)>>> {
        let mut points = vec![Vec::new()];
        for (key, values) in self.axes()? {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for v in &values {
                    let mut q = p.clone();
                    q.push((key.clone(), v.clone()));
                    next.push(q);
                }
            }
            points = next;
        }
        Ok(points)
    }
}

/// Sets a dotted key in a TOML table, creating intermediate tables.
pub fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Table(table) = node else {
            return Err(CliError::Config(vec![format!("cannot set '{key}': '{part}' is inside a non-table value")]));
        };
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table.entry(part.to_string()).or_insert_with(|| Value::Table(Default::default()));
    }
    Ok(())
}

fn render(v: &Value) -> String {
    match v {
        Value::Float(f) => fmt17(*f),
        Value::Integer(i) => i.to_string(),
        Value::String(s) => s.clone(),
        Value::Boolean(b) => b.to_string(),
        Value::Array(a) => format!("[{}]", a.iter().map(render).collect::<Vec<_>>().join(";")),
        other => other.to_string().replace(',', ";"),
    }
}

/// Runs every point of `ranges` applied to `base` in parallel. Failures are
/// recorded per row. `dim`, when set, overrides every point's dimension.
pub fn sweep(base: &Value, ranges: &Ranges, dim: Option<usize>) -> Result<Vec<SweepRow>> {
    let points = ranges.points()?;
    let rows = points
        .into_par_iter()
        .enumerate()
        .map(|(index, assignments)| {
            let result = point_config(base, &assignments, dim)
                .and_then(|cfg| run_config(&cfg, &RunTarget { out: None, quiet: true }))
                .map_err(|e| e.to_string());
            SweepRow {
                index,
                assignments,
                result,
            }
        })
        .collect();
    Ok(rows)
}

fn point_config(base: &Value, assignments: &[(String, Value)], dim: Option<usize>) -> Result<RunConfig> {
    let mut v = base.clone();
    for (k, x) in assignments {
        set_dotted(&mut v, k, x.clone())?;
    }
    let mut cfg: RunConfig = v.try_into().map_err(|e: toml::de::Error| CliError::Parse {
        path: "sweep point".into(),
        message: e.to_string(),
    })?;
    if dim.is_some() {
        cfg.dim = dim;
    }
    Ok(cfg)
}

/// Writes one CSV row per point: the swept values, then fidelity, final
/// energy, top-level population and error.
pub fn write_table<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    let keys: Vec<&str> = rows
        .first()
        .map(|r| r.assignments.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    let mut header = vec!["index".to_string()];
    header.extend(keys.iter().map(|k| k.to_string()));
    header.extend(["fidelity", "final_energy", "top_population", "error"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let mut cells = vec![r.index.to_string()];
        cells.extend(r.assignments.iter().map(|(_, v)| render(v)));
        match &r.result {
            Ok(s) => {
                cells.push(s.fidelity.map(fmt17).unwrap_or_default());
                cells.push(fmt17(s.final_energy));
                cells.push(fmt17(s.truncation.max_top_population));
                cells.push(String::new());
            }
            Err(e) => {
                cells.extend([String::new(), String::new(), String::new()]);
                cells.push(format!("\"{}\"", e.replace('"', "'").replace('\n', " ")));
            }
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
