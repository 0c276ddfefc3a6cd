//! Comparison methods: SepSCL (edges and triangles estimated independently)
//! and RC (correlation graph plus clique filling).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SclError};
use crate::greedy::{
    edge_scores, objective_value, run_greedy_scl, select_edges, select_triangles, triangle_scores, HyperParams,
    LearnState, PhaseTimings, Problem,
};
use crate::topology::{ComplexSkeleton, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GreedySCL")]
    GreedyScl,
    #[serde(rename = "SepSCL")]
    SepScl,
    #[serde(rename = "RC")]
    Rc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::GreedyScl, Method::SepScl, Method::Rc];

    pub fn name(self) -> &'static str {
        match self {
            Method::GreedyScl => "GreedySCL",
            Method::SepScl => "SepSCL",
            Method::Rc => "RC",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SclError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SclError::invalid(format!("unknown method {s:?} (expected GreedySCL, SepSCL or RC)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RcThresholdMode {
    /// Keep the `e_min` most correlated pairs and at most `t_min` cliques.
    #[default]
    Budget,
    /// Keep pairs with `|corr| > rc_abs_threshold` and every clique.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub method: Method,
    pub e_min: usize,
    pub t_min: usize,
    pub rc_threshold_mode: RcThresholdMode,
    pub rc_abs_threshold: f64,
    /// Let SepSCL force the observed edges into its edge set. Off by default,
    /// so SepSCL's graph depends on the node signals alone.
    pub sep_force_observed: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            method: Method::SepScl,
            e_min: 1,
            t_min: 0,
            rc_threshold_mode: RcThresholdMode::Budget,
            rc_abs_threshold: 0.5,
            sep_force_observed: false,
        }
    }
}

/// Separate estimation: greedy edges from node smoothness only, observed
/// flows zero-filled, then greedy triangles by curl among the triangles the
/// chosen edges support. One pass, no closure coupling.
pub fn run_sep_scl(problem: &Problem<'_>, params: &HyperParams, force_observed: bool) -> Result<LearnState> {
    let skeleton = problem.skeleton;
    let forced: &[usize] = if force_observed { problem.observed_edges } else { &[] };
    params.validate(skeleton, forced.len())?;
    let started = Instant::now();
    let decoupled = HyperParams { gamma: 0.0, ..params.clone() };

    let clock = Instant::now();
    let no_triangles = vec![false; skeleton.n_triangles()];
    let s1 = edge_scores(skeleton, problem.x0, &no_triangles, forced, &decoupled)?;
    let w1 = select_edges(&s1, forced, params.e_min, params.strict_lemma_mode);
    let t_edge = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let x1 = zero_filled_flows(skeleton.n_edges(), problem.observed_edges, problem.x1_obs);
    let t_interp = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut s2 = triangle_scores(skeleton, &x1, &w1, &decoupled)?;
    for (t, s) in s2.iter_mut().enumerate() {
        if skeleton.missing_edges(t, &w1) > 0 {
            *s = f64::INFINITY;
        }
    }
    let mut sel = Selection { w1, w2: select_triangles(&s2, params.t_min) };
    let violations_before_prune = skeleton.closure_violations(&sel.w1, &sel.w2)?.count;
    let pruned_triangles = sel.prune_unsupported_triangles(skeleton);
    let t_tri = clock.elapsed().as_secs_f64();

    let objective = objective_value(problem, &sel, &x1, params)?;
    let closure = skeleton.closure_violations(&sel.w1, &sel.w2)?;
    Ok(LearnState {
        selection: sel,
        x1_est: x1,
        objective_trace: vec![objective],
        iterations_run: 1,
        converged: true,
        violations_before_prune,
        pruned_triangles,
        closure,
        timings: PhaseTimings {
            triangles: t_tri,
            edges: t_edge,
            interpolation: t_interp,
            total: started.elapsed().as_secs_f64(),
        },
    })
}

fn zero_filled_flows(n_edges: usize, observed: &[usize], x1_obs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n_edges, x1_obs.ncols());
    for (r, &l) in observed.iter().enumerate() {
        x.set_row(l, &x1_obs.row(r));
    }
    x
}

/// Pearson correlation between node rows of `x0`; zero-variance nodes correlate 0 with everything.
pub fn node_correlation(x0: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x0.nrows();
    let p = x0.ncols() as f64;
    let centered: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row = x0.row(i);
            let mean = row.sum() / p;
            row.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            0.0
        } else if i == j {
            1.0
        } else {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            dot / (norms[i] * norms[j])
        }
    })
}

/// Correlation baseline: threshold the node-correlation graph and fill its 3-cliques.
pub fn run_rc(skeleton: &ComplexSkeleton, x0: &DMatrix<f64>, config: &BaselineConfig) -> Result<Selection> {
    if x0.nrows() != skeleton.n_nodes() {
        return Err(SclError::invalid("node signals do not match the skeleton"));
    }
    if x0.ncols() < 2 {
        return Err(SclError::invalid("RC needs at least two node-signal samples"));
    }
    if config.e_min > skeleton.n_edges() || config.t_min > skeleton.n_triangles() {
        return Err(SclError::invalid("RC budgets exceed the candidate simplices"));
    }
    let corr = node_correlation(x0);
    let strength: Vec<f64> = skeleton.edges().iter().map(|&[i, j]| corr[(i, j)].abs()).collect();

    let mut w1 = vec![false; skeleton.n_edges()];
    match config.rc_threshold_mode {
        RcThresholdMode::Budget => {
            let mut order: Vec<usize> = (0..strength.len()).collect();
            order.sort_by(|&a, &b| strength[b].total_cmp(&strength[a]));
            for l in order.into_iter().take(config.e_min) {
                w1[l] = true;
            }
        }
        RcThresholdMode::Absolute => {
            for (w, &s) in w1.iter_mut().zip(&strength) {
                *w = s > config.rc_abs_threshold;
            }
        }
    }

    let cliques: Vec<usize> = (0..skeleton.n_triangles())
        .filter(|&t| skeleton.missing_edges(t, &w1) == 0)
        .collect();
    let mut w2 = vec![false; skeleton.n_triangles()];
    let keep: Vec<usize> = if config.rc_threshold_mode == RcThresholdMode::Budget && config.t_min < cliques.len() {
        let weakest = |t: usize| {
            skeleton
                .triangle_edges(t)
                .iter()
                .map(|&e| strength[e])
                .fold(f64::INFINITY, f64::min)
        };
        let mut ranked = cliques;
        ranked.sort_by(|&a, &b| weakest(b).total_cmp(&weakest(a)));
        ranked.truncate(config.t_min);
        ranked
    } else {
        cliques
    };
    for t in keep {
        w2[t] = true;
    }
    Ok(Selection { w1, w2 })
}

/// Runs `method` on `problem`. RC reports the objective of its selection
/// with zero-filled flows and no iterations.
pub fn run_method(
    method: Method,
    problem: &Problem<'_>,
    params: &HyperParams,
    config: &BaselineConfig,
) -> Result<LearnState> {
    match method {
        Method::GreedyScl => run_greedy_scl(problem, params),
        Method::SepScl => run_sep_scl(problem, params, config.sep_force_observed),
        Method::Rc => {
            let started = Instant::now();
            let rc_config = BaselineConfig {
                method: Method::Rc,
                e_min: params.e_min,
                t_min: params.t_min,
                ..config.clone()
            };
            let sel = run_rc(problem.skeleton, problem.x0, &rc_config)?;
            let x1 = zero_filled_flows(problem.skeleton.n_edges(), problem.observed_edges, problem.x1_obs);
            let objective = objective_value(problem, &sel, &x1, params)?;
            let closure = problem.skeleton.closure_violations(&sel.w1, &sel.w2)?;
            Ok(LearnState {
                selection: sel,
                x1_est: x1,
                objective_trace: vec![objective],
                iterations_run: 0,
                converged: true,
                violations_before_prune: closure.count,
                pruned_triangles: 0,
                closure,
                timings: PhaseTimings { total: started.elapsed().as_secs_f64(), ..Default::default() },
            })
        }
    }
}
