use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use super::run::{run_scenario, Mode, RunError};
use super::{preset_document, scenario_from_value, ScenarioError};
use crate::analysis::RegimeKind;
use crate::integrator::Outcome;

fn one_or_many_paths<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Paths {
        One(String),
        Many(Vec<String>),
    }
    Ok(match Paths::deserialize(d)? {
        Paths::One(p) => vec![p],
        Paths::Many(v) => v,
    })
}

/// One sweep dimension. Several paths move together, e.g. `a1` and `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    #[serde(rename = "path", deserialize_with = "one_or_many_paths")]
    pub paths: Vec<String>,
    pub values: Vec<f64>,
}

impl SweepAxis {
    fn label(&self) -> String {
        self.paths.join("+")
    }
}

fn default_max_points() -> usize {
    1000
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Scenario document every point starts from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Value>,
    /// Alternatively, the name of a preset to start from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    /// Worker threads; defaults to the number of cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "yes")]
    pub simulate: bool,
}

impl SweepSpec {
    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    fn base_document(&self) -> Result<Value, ScenarioError> {
        match (&self.base, &self.preset) {
            (Some(b), None) => Ok(b.clone()),
            (None, Some(name)) => preset_document(name).ok_or_else(|| {
                ScenarioError::invalid("preset", format!("unknown preset `{name}`"))
            }),
            _ => Err(ScenarioError::invalid(
                "base",
                "give exactly one of `base` and `preset`",
            )),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        scenario_from_value(self.base_document()?)
            .map_err(|e| ScenarioError::invalid(format!("base.{}", e.path()), e.to_string()))?;
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.paths.is_empty() || axis.paths.iter().any(|p| p.is_empty()) {
                return Err(ScenarioError::invalid(
                    format!("axes[{i}].path"),
                    "empty path",
                ));
            }
            if axis.values.is_empty() {
                return Err(ScenarioError::invalid(
                    format!("axes[{i}].values"),
                    "no values",
                ));
            }
        }
        if self.point_count() > self.max_points {
            return Err(ScenarioError::invalid(
                "axes",
                format!(
                    "{} points exceed max_points = {}",
                    self.point_count(),
                    self.max_points
                ),
            ));
        }
        if self.workers == Some(0) {
            return Err(ScenarioError::invalid("workers", "must be at least 1"));
        }
        Ok(())
    }

    /// Axis values of every point, last axis varying fastest.
    fn points(&self) -> Vec<Vec<f64>> {
        let mut pts = vec![Vec::new()];
        for axis in &self.axes {
            pts = pts
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        pts
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec, ScenarioError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: String::new(),
        reason: e.to_string(),
    })?;
    let spec: SweepSpec =
        serde_path_to_error::deserialize(doc).map_err(|e| ScenarioError::Parse {
            path: e.path().to_string(),
            reason: e.into_inner().to_string(),
        })?;
    spec.validate()?;
    Ok(spec)
}

fn set_path(doc: &mut Value, path: &str, x: f64) -> Result<(), String> {
    let mut node = doc;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("`{path}`: `{key}` is not inside an object"))?;
        if keys.peek().is_none() {
            let value = if x.fract() == 0.0 && x.abs() < 9e15 {
                if x >= 0.0 {
                    Value::from(x as u64)
                } else {
                    Value::from(x as i64)
                }
            } else {
                Value::from(x)
            };
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(key)
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(format!("empty path `{path}`"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub regime: Option<RegimeKind>,
    /// `(section.condition_id, margin)` pairs.
    pub margins: Vec<(String, f64)>,
    pub hypotheses_passed: Option<bool>,
    pub outcome: Option<Outcome>,
    /// Largest L∞ distance to the reference equilibrium at the end.
    pub final_linf_dist: Option<f64>,
    pub exit_code: i32,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn margin(&self, id: &str) -> Option<f64> {
        self.margins.iter().find(|(k, _)| k == id).map(|m| m.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axes: Vec<String>,
    pub margin_ids: Vec<String>,
    pub rows: Vec<SweepRow>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn snake<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut header = vec!["index".to_string()];
        header.extend(self.axes.iter().map(|a| csv_field(a)));
        header.push("regime".into());
        header.extend(self.margin_ids.iter().map(|m| format!("margin:{m}")));
        header.extend(
            [
                "hypotheses_passed",
                "outcome",
                "final_linf_dist",
                "exit_code",
                "error",
            ]
            .map(String::from),
        );
        let num = |x: Option<f64>| x.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut out = header.join(",") + "\n";
        for r in &self.rows {
            let mut cells = vec![r.index.to_string()];
            cells.extend(r.values.iter().map(|&x| num(Some(x))));
            cells.push(r.regime.as_ref().map(snake).unwrap_or_default());
            cells.extend(self.margin_ids.iter().map(|id| num(r.margin(id))));
            cells.push(
                r.hypotheses_passed
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            );
            cells.push(r.outcome.as_ref().map(snake).unwrap_or_default());
            cells.push(num(r.final_linf_dist));
            cells.push(r.exit_code.to_string());
            cells.push(csv_field(r.error.as_deref().unwrap_or("")));
            out += &(cells.join(",") + "\n");
        }
        out
    }
}

fn run_point(spec: &SweepSpec, base: &Value, index: usize, values: Vec<f64>) -> SweepRow {
    let mut row = SweepRow {
        index,
        values: values.clone(),
        regime: None,
        margins: Vec::new(),
        hypotheses_passed: None,
        outcome: None,
        final_linf_dist: None,
        exit_code: super::ExitStatus::Validation.code(),
        error: None,
    };
    let mut doc = base.clone();
    for (axis, &x) in spec.axes.iter().zip(&values) {
        for path in &axis.paths {
            if let Err(e) = set_path(&mut doc, path, x) {
                row.error = Some(e);
                return row;
            }
        }
    }
    let scenario = match scenario_from_value(doc) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let mode = if spec.simulate {
        Mode::Simulate
    } else {
        Mode::Analyze
    };
    let report = run_scenario(&scenario, mode, None).expect("no output directory, no I/O");
    row.regime = report.regime.map(|r| r.kind);
    if let Some(b) = &report.boundedness {
        row.margins.extend(
            b.conditions
                .iter()
                .map(|c| (format!("boundedness.{}", c.id), c.margin)),
        );
    }
    if let Some(st) = &report.stability {
        row.margins.extend(
            st.report
                .conditions
                .iter()
                .map(|c| (format!("stability.{}", c.id), c.margin)),
        );
    }
    row.hypotheses_passed = Some(report.hypotheses_passed);
    if let Some(sim) = &report.simulation {
        row.outcome = Some(sim.outcome);
        row.final_linf_dist = sim.final_linf_dist.map(|d| d[0].max(d[1]).max(d[2]));
    }
    row.exit_code = report.exit_code;
    row.error = report.stability_error;
    row
}

/// Runs every point of the sweep; rows come back in point order regardless
/// of scheduling. With `out` set, also writes `sweep.csv`.
pub fn run_sweep(spec: &SweepSpec, out: Option<&Path>) -> Result<SweepTable, RunError> {
    let base = spec.base_document().expect("validated sweep");
    let points: Vec<(usize, Vec<f64>)> = spec.points().into_iter().enumerate().collect();
    let work = || {
        points
            .par_iter()
            .map(|(i, vals)| run_point(spec, &base, *i, vals.clone()))
            .collect::<Vec<_>>()
    };
    let rows = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };

    let mut margin_ids: Vec<String> = Vec::new();
    for (id, _) in rows.iter().flat_map(|r| &r.margins) {
        if !margin_ids.contains(id) {
            margin_ids.push(id.clone());
        }
    }
    let table = SweepTable {
        axes: spec.axes.iter().map(SweepAxis::label).collect(),
        margin_ids,
        rows,
    };
    if let Some(dir) = out {
        let io = |path: std::path::PathBuf, r: std::io::Result<()>| {
            r.map_err(|source| RunError::Io { path, source })
        };
        io(dir.to_path_buf(), fs::create_dir_all(dir))?;
        let path = dir.join("sweep.csv");
        io(path.clone(), fs::write(&path, table.to_csv()))?;
    }
    Ok(table)
}
