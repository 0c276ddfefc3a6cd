//! On-disk formats: complex JSON, headerless CSV matrices, edge-index lists,
//! dataset bundles, and learn results.
//!
//! Every parser takes text and an origin label used in error messages, and
//! never panics on malformed input.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::error::{Result, SclError};
use crate::eval::EvalReport;
use crate::greedy::{LearnState, PhaseTimings};
use crate::synth::InstanceParams;
use crate::topology::{ComplexSkeleton, Selection, MAX_NODES};

pub const COMPLEX_FILE: &str = "complex.json";
pub const X0_FILE: &str = "x0.csv";
pub const X1_OBS_FILE: &str = "x1_obs.csv";
pub const OBSERVED_FILE: &str = "observed_edges.csv";
pub const META_FILE: &str = "meta.json";

/// `{"n_nodes": N, "edges": [[i, j], ...], "triangles": [[i, j, k], ...]}`,
/// active simplices only, lexicographically sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub n_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl ComplexJson {
    pub fn from_selection(skeleton: &ComplexSkeleton, sel: &Selection) -> Self {
        ComplexJson {
            n_nodes: skeleton.n_nodes(),
            edges: sel.active_edges().into_iter().map(|l| skeleton.edges()[l]).collect(),
            triangles: sel.active_triangles().into_iter().map(|t| skeleton.triangles()[t]).collect(),
        }
    }

    /// Checks ordering, ranges and closure.
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.validate_shape()?;
        for (pos, &[i, j, k]) in self.triangles.iter().enumerate() {
            for e in [[i, j], [i, k], [j, k]] {
                if self.edges.binary_search(&e).is_err() {
                    return Err(format!("triangle #{pos} [{i}, {j}, {k}] has missing edge {e:?}"));
                }
            }
        }
        Ok(())
    }

    /// Checks ordering and ranges only.
    pub fn validate_shape(&self) -> std::result::Result<(), String> {
        if self.n_nodes < 2 || self.n_nodes > MAX_NODES {
            return Err(format!("n_nodes must lie in [2, {MAX_NODES}], got {}", self.n_nodes));
        }
        let n = self.n_nodes;
        for (pos, e) in self.edges.iter().enumerate() {
            if !(e[0] < e[1] && e[1] < n) {
                return Err(format!("edge #{pos} {e:?} must satisfy i < j < {n}"));
            }
        }
        if let Some(pos) = self.edges.windows(2).position(|w| w[0] >= w[1]) {
            return Err(format!("edges are not strictly increasing at #{}", pos + 1));
        }
        for (pos, t) in self.triangles.iter().enumerate() {
            if !(t[0] < t[1] && t[1] < t[2] && t[2] < n) {
                return Err(format!("triangle #{pos} {t:?} must satisfy i < j < k < {n}"));
            }
        }
        if let Some(pos) = self.triangles.windows(2).position(|w| w[0] >= w[1]) {
            return Err(format!("triangles are not strictly increasing at #{}", pos + 1));
        }
        Ok(())
    }

    /// Selection over `skeleton`, whose node count must match.
    pub fn to_selection(&self, skeleton: &ComplexSkeleton) -> Result<Selection> {
        if skeleton.n_nodes() != self.n_nodes {
            return Err(SclError::invalid(format!(
                "complex has {} nodes, skeleton has {}",
                self.n_nodes,
                skeleton.n_nodes()
            )));
        }
        let mut sel = Selection::empty(skeleton);
        for &[i, j] in &self.edges {
            sel.w1[skeleton.edge_index(i, j)?] = true;
        }
        for &[i, j, k] in &self.triangles {
            sel.w2[skeleton.triangle_index(i, j, k)?] = true;
        }
        Ok(sel)
    }
}

fn json_error(origin: &str, err: serde_json::Error) -> SclError {
    SclError::parse(origin, err.line(), err.to_string())
}

pub fn parse_complex_json(text: &str, origin: &str) -> Result<ComplexJson> {
    let complex: ComplexJson = serde_json::from_str(text).map_err(|e| json_error(origin, e))?;
    complex.validate().map_err(|m| SclError::parse(origin, 0, m))?;
    Ok(complex)
}

pub fn complex_to_json(complex: &ComplexJson) -> String {
    let mut s = serde_json::to_string_pretty(complex).expect("complex serializes");
    s.push('\n');
    s
}

/// Formats a value with 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_float(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Headerless comma-separated matrix, one row per line. Every row must have
/// the same number of finite values; an empty input is rejected.
pub fn parse_matrix_csv(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            SclError::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match n_cols {
            None => n_cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(SclError::parse(
                    origin,
                    line,
                    format!("expected {c} columns, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| SclError::parse(origin, line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(SclError::parse(origin, line, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        n_rows += 1;
    }
    let n_cols = n_cols.ok_or_else(|| SclError::parse(origin, 0, "empty matrix"))?;
    Ok(DMatrix::from_row_slice(n_rows, n_cols, &values))
}

pub fn index_list_to_csv(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("{i}\n")).collect()
}

/// One nonnegative integer per line; blank lines are skipped.
pub fn parse_index_list(text: &str, origin: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line
            .parse::<usize>()
            .map_err(|_| SclError::parse(origin, no + 1, format!("not an edge index: {line:?}")))?;
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMeta {
    pub seed: u64,
    pub instance: InstanceParams,
}

pub fn parse_meta_json(text: &str, origin: &str) -> Result<BundleMeta> {
    serde_json::from_str(text).map_err(|e| json_error(origin, e))
}

/// A dataset directory's contents.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub n_nodes: usize,
    /// Ground truth, when `complex.json` is present.
    pub truth: Option<ComplexJson>,
    pub x0: DMatrix<f64>,
    pub x1_obs: DMatrix<f64>,
    pub observed_edges: Vec<usize>,
    pub meta: Option<BundleMeta>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SclError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| SclError::io(path, e))
}

impl Bundle {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| SclError::io(dir, e))?;
        if let Some(truth) = &self.truth {
            write_text(&dir.join(COMPLEX_FILE), &complex_to_json(truth))?;
        }
        write_text(&dir.join(X0_FILE), &matrix_to_csv(&self.x0))?;
        write_text(&dir.join(X1_OBS_FILE), &matrix_to_csv(&self.x1_obs))?;
        write_text(&dir.join(OBSERVED_FILE), &index_list_to_csv(&self.observed_edges))?;
        if let Some(meta) = &self.meta {
            let mut s = serde_json::to_string_pretty(meta).expect("meta serializes");
            s.push('\n');
            write_text(&dir.join(META_FILE), &s)?;
        }
        Ok(())
    }

    /// Reads a bundle; `complex.json` and `meta.json` are optional, the three
    /// signal files are required.
    pub fn read(dir: &Path) -> Result<Self> {
        let path = |name: &str| -> PathBuf { dir.join(name) };
        let origin = |name: &str| path(name).display().to_string();

        let x0 = parse_matrix_csv(&read_text(&path(X0_FILE))?, &origin(X0_FILE))?;
        let x1_obs = parse_matrix_csv(&read_text(&path(X1_OBS_FILE))?, &origin(X1_OBS_FILE))?;
        let observed_edges = parse_index_list(&read_text(&path(OBSERVED_FILE))?, &origin(OBSERVED_FILE))?;
        let truth = match path(COMPLEX_FILE).exists() {
            true => Some(parse_complex_json(&read_text(&path(COMPLEX_FILE))?, &origin(COMPLEX_FILE))?),
            false => None,
        };
        let meta = match path(META_FILE).exists() {
            true => Some(parse_meta_json(&read_text(&path(META_FILE))?, &origin(META_FILE))?),
            false => None,
        };
        let n_nodes = x0.nrows();
        if let Some(t) = &truth {
            if t.n_nodes != n_nodes {
                return Err(SclError::parse(
                    origin(COMPLEX_FILE),
                    0,
                    format!("complex has {} nodes but x0 has {n_nodes} rows", t.n_nodes),
                ));
            }
        }
        if x1_obs.nrows() != observed_edges.len() {
            return Err(SclError::parse(
                origin(X1_OBS_FILE),
                0,
                format!(
                    "{} rows for {} observed edges",
                    x1_obs.nrows(),
                    observed_edges.len()
                ),
            ));
        }
        Ok(Bundle { n_nodes, truth, x0, x1_obs, observed_edges, meta })
    }
}

/// Serialized outcome of one learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnResult {
    pub method: Method,
    pub complex: ComplexJson,
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub closure_violations: usize,
    pub closure_violations_before_prune: usize,
    pub phase_seconds: PhaseTimings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
}

impl LearnResult {
    pub fn new(method: Method, skeleton: &ComplexSkeleton, state: &LearnState) -> Self {
        LearnResult {
            method,
            complex: ComplexJson::from_selection(skeleton, &state.selection),
            objective_trace: state.objective_trace.clone(),
            iterations_run: state.iterations_run,
            converged: state.converged,
            closure_violations: state.closure.count,
            closure_violations_before_prune: state.violations_before_prune,
            phase_seconds: state.timings,
            eval: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }
}

/// Parses a learn result, requiring its complex to be sorted and in range.
/// Closure is not required since pruning can be switched off.
pub fn parse_learn_result(text: &str, origin: &str) -> Result<LearnResult> {
    let result: LearnResult = serde_json::from_str(text).map_err(|e| json_error(origin, e))?;
    result.complex.validate_shape().map_err(|m| SclError::parse(origin, 0, m))?;
    Ok(result)
}
