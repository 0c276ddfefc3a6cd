//! Parameter sweeps over synthetic instances.
//!
//! Trial `t` at every grid point uses seed `base_seed + t`, so methods and
//! grid points are compared on paired instances.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{run_method, Method};
use crate::config::SweepSpec;
use crate::error::{Result, SclError};
use crate::eval::{evaluate, EvalReport};
use crate::greedy::Problem;
use crate::io::format_float;
use crate::synth::generate_instance;
use crate::topology::ComplexSkeleton;

pub const CSV_HEADER: &str =
    "sweep_value,trial,method,nerr_l0,nerr_lu,edge_f1,triangle_f1,closure_violations,seconds,error";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub trial: usize,
    pub method: Method,
    /// Evaluation and wall-clock seconds, or the failure message.
    pub outcome: std::result::Result<(EvalReport, f64), String>,
}

/// Runs every method on trial `trial` at grid value `value`.
pub fn run_trial(spec: &SweepSpec, skeleton: &ComplexSkeleton, value: f64, trial: usize) -> Vec<SweepRow> {
    let instance = spec.variable.apply(&spec.instance, value);
    let seed = spec.base_seed.wrapping_add(trial as u64);
    let row = |method, outcome| SweepRow { sweep_value: value, trial, method, outcome };
    let (truth, signals) = match generate_instance(skeleton, &instance, seed) {
        Ok(pair) => pair,
        Err(e) => return spec.methods.iter().map(|&m| row(m, Err(e.to_string()))).collect(),
    };
    let params = spec
        .params
        .resolve(truth.selection.n_active_edges(), truth.selection.n_active_triangles());
    let problem = Problem {
        skeleton,
        x0: &signals.x0,
        x1_obs: &signals.x1_obs,
        observed_edges: &signals.observed_edges,
    };
    spec.methods
        .iter()
        .map(|&method| {
            let config = spec.baseline.to_config(method, &params);
            let started = Instant::now();
            let outcome = run_method(method, &problem, &params, &config)
                .and_then(|state| evaluate(skeleton, &state.selection, &truth.selection))
                .map(|report| (report, started.elapsed().as_secs_f64()))
                .map_err(|e| e.to_string());
            row(method, outcome)
        })
        .collect()
}

/// Runs the whole sweep on `jobs` worker threads. Rows come back in
/// (grid, trial, method) order whatever the completion order.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let skeleton = ComplexSkeleton::new(spec.instance.n_nodes)?;
    let tasks: Vec<(f64, usize)> = spec
        .grid
        .iter()
        .flat_map(|&v| (0..spec.n_trials).map(move |t| (v, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SclError::invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(v, t)| run_trial(spec, &skeleton, v, t))
            .collect::<Vec<_>>()
    });
    Ok(rows.into_iter().flatten().collect())
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    let flat = s.replace(['\n', '\r'], " ");
    if flat.contains([',', '"']) {
        format!("\"{}\"", flat.replace('"', "\"\""))
    } else {
        flat
    }
}

/// Per-trial CSV. With `timing` off the seconds column is written as 0 so
/// the file is byte-reproducible.
pub fn rows_to_csv(rows: &[SweepRow], timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let prefix = format!("{},{},{}", format_float(r.sweep_value), r.trial, r.method);
        let line = match &r.outcome {
            Ok((e, secs)) => format!(
                "{prefix},{},{},{},{},{},{},",
                opt_float(e.nerr_l0),
                opt_float(e.nerr_lu),
                format_float(e.edge_f1),
                format_float(e.triangle_f1),
                e.closure_violations,
                format_float(if timing { *secs } else { 0.0 }),
            ),
            Err(msg) => format!("{prefix},,,,,,,{}", csv_escape(msg)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Mean and standard error of the mean; stderr is 0 for a single sample.
pub fn mean_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub method: Method,
    pub n_ok: usize,
    pub n_failed: usize,
    pub nerr_l0: Option<(f64, f64)>,
    pub nerr_lu: Option<(f64, f64)>,
    pub edge_f1: Option<(f64, f64)>,
    pub triangle_f1: Option<(f64, f64)>,
}

fn collect(rows: &[&SweepRow], f: impl Fn(&EvalReport) -> Option<f64>) -> Vec<f64> {
    rows.iter()
        .filter_map(|r| r.outcome.as_ref().ok().and_then(|(e, _)| f(e)))
        .collect()
}

/// Per (grid value, method) aggregates, in sweep order.
pub fn summarize(rows: &[SweepRow], methods: &[Method]) -> Vec<SummaryRow> {
    let mut values: Vec<f64> = Vec::new();
    for r in rows {
        if !values.contains(&r.sweep_value) {
            values.push(r.sweep_value);
        }
    }
    let mut out = Vec::new();
    for &v in &values {
        for &m in methods {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.sweep_value == v && r.method == m).collect();
            let n_ok = group.iter().filter(|r| r.outcome.is_ok()).count();
            out.push(SummaryRow {
                sweep_value: v,
                method: m,
                n_ok,
                n_failed: group.len() - n_ok,
                nerr_l0: mean_stderr(&collect(&group, |e| e.nerr_l0)),
                nerr_lu: mean_stderr(&collect(&group, |e| e.nerr_lu)),
                edge_f1: mean_stderr(&collect(&group, |e| Some(e.edge_f1))),
                triangle_f1: mean_stderr(&collect(&group, |e| Some(e.triangle_f1))),
            });
        }
    }
    out
}

pub const SUMMARY_HEADER: &str = "sweep_value,method,n_ok,n_failed,nerr_l0_mean,nerr_l0_stderr,\
nerr_lu_mean,nerr_lu_stderr,edge_f1_mean,edge_f1_stderr,triangle_f1_mean,triangle_f1_stderr";

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let pair = |p: Option<(f64, f64)>| match p {
        Some((m, s)) => format!("{},{}", format_float(m), format_float(s)),
        None => ",".to_string(),
    };
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_float(s.sweep_value),
            s.method,
            s.n_ok,
            s.n_failed,
            pair(s.nerr_l0),
            pair(s.nerr_lu),
            pair(s.edge_f1),
            pair(s.triangle_f1),
        ));
    }
    out
}
