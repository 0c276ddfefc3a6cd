//! Greedy block-coordinate learning of an order-2 simplicial complex.
//!
//! The objective over edge selection `w1`, triangle selection `w2` and the
//! full edge-flow estimate `X` is
//!
//! ```text
//! α1‖w1‖₀ + α2‖w2‖₀ + β1 tr(X0 X0ᵀ B1 diag(w1) B1ᵀ) + β2 tr(X Xᵀ B2 diag(w2) B2ᵀ)
//!   + η ‖Θ X − X1ᴼ‖²_F + γ (1 − w1)ᵀ B2⁺ w2
//! ```
//!
//! subject to observed edges being active, `‖w1‖₀ ≥ e_min` and `‖w2‖₀ ≥ t_min`.
//! Each block (triangles, edges, flows) is solved exactly with the other two
//! fixed, so the objective never increases across iterations.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SclError};
use crate::linalg::sym_psd_pinv_solve_scaled;
use crate::topology::{ClosureReport, ComplexSkeleton, Selection, TRIANGLE_SIGNS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub eta: f64,
    pub e_min: usize,
    pub t_min: usize,
    pub max_iters: usize,
    /// Eigenvalues of the interpolation system below `pinv_tol * λ_max` are dropped.
    pub pinv_tol: f64,
    /// Select exactly `e_min` edges, as the greedy lemma is stated, instead of
    /// also taking every edge with a negative score.
    pub strict_lemma_mode: bool,
    /// Remove filled triangles with a missing edge once the loop stops.
    pub prune_closure: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha1: 1e-3,
            alpha2: 1e-3,
            beta1: 1.0,
            beta2: 1.0,
            gamma: 10.0,
            eta: 10.0,
            e_min: 1,
            t_min: 0,
            max_iters: 50,
            pinv_tol: 1e-10,
            strict_lemma_mode: false,
            prune_closure: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self, skeleton: &ComplexSkeleton, n_observed: usize) -> Result<()> {
        for (name, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SclError::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(SclError::invalid(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.pinv_tol >= 0.0 && self.pinv_tol < 1.0) {
            return Err(SclError::invalid(format!("pinv_tol must lie in [0, 1), got {}", self.pinv_tol)));
        }
        if self.max_iters < 1 {
            return Err(SclError::invalid("max_iters must be at least 1"));
        }
        if self.e_min < 1 || self.e_min > skeleton.n_edges() {
            return Err(SclError::invalid(format!(
                "e_min = {} must lie in [1, {}]",
                self.e_min,
                skeleton.n_edges()
            )));
        }
        if self.e_min < n_observed {
            return Err(SclError::invalid(format!(
                "e_min = {} is below the number of observed edges ({n_observed})",
                self.e_min
            )));
        }
        if self.t_min > skeleton.n_triangles() {
            return Err(SclError::invalid(format!(
                "t_min = {} exceeds the {} candidate triangles",
                self.t_min,
                skeleton.n_triangles()
            )));
        }
        Ok(())
    }
}

/// Inputs shared by every learner: the candidate complex, node signals, and observed edge flows.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub skeleton: &'a ComplexSkeleton,
    /// `N x P0`.
    pub x0: &'a DMatrix<f64>,
    /// `|observed| x P1`, row `r` belongs to edge `observed_edges[r]`.
    pub x1_obs: &'a DMatrix<f64>,
    /// Strictly increasing candidate-edge indices.
    pub observed_edges: &'a [usize],
}

impl<'a> Problem<'a> {
    pub fn new(
        skeleton: &'a ComplexSkeleton,
        x0: &'a DMatrix<f64>,
        x1_obs: &'a DMatrix<f64>,
        observed_edges: &'a [usize],
    ) -> Result<Self> {
        if x0.nrows() != skeleton.n_nodes() {
            return Err(SclError::invalid(format!(
                "node signals have {} rows, expected {}",
                x0.nrows(),
                skeleton.n_nodes()
            )));
        }
        check_observed(skeleton, observed_edges, x1_obs)?;
        Ok(Problem { skeleton, x0, x1_obs, observed_edges })
    }
}

fn check_observed(skeleton: &ComplexSkeleton, observed: &[usize], x1_obs: &DMatrix<f64>) -> Result<()> {
    if observed.is_empty() {
        return Err(SclError::invalid("at least one observed edge is required"));
    }
    if !observed.windows(2).all(|w| w[0] < w[1]) {
        return Err(SclError::invalid("observed edge indices must be strictly increasing"));
    }
    if let Some(&last) = observed.last() {
        if last >= skeleton.n_edges() {
            return Err(SclError::invalid(format!(
                "observed edge index {last} out of range (have {} candidate edges)",
                skeleton.n_edges()
            )));
        }
    }
    if x1_obs.nrows() != observed.len() {
        return Err(SclError::invalid(format!(
            "observed edge signals have {} rows for {} observed edges",
            x1_obs.nrows(),
            observed.len()
        )));
    }
    Ok(())
}

/// Per-triangle curl energy `[B2ᵀ X Xᵀ B2]_tt`, the squared row norms of `B2ᵀ X`.
pub fn triangle_curl_energy(skeleton: &ComplexSkeleton, x1: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x1.nrows() != skeleton.n_edges() {
        return Err(SclError::invalid(format!(
            "edge signals have {} rows, expected {}",
            x1.nrows(),
            skeleton.n_edges()
        )));
    }
    let mut energy = vec![0.0; skeleton.n_triangles()];
    for col in x1.column_iter() {
        for (t, e) in energy.iter_mut().enumerate() {
            let es = skeleton.triangle_edges(t);
            let c: f64 = (0..3).map(|a| TRIANGLE_SIGNS[a] as f64 * col[es[a]]).sum();
            *e += c * c;
        }
    }
    Ok(energy)
}

/// Per-edge variation `[B1ᵀ X0 X0ᵀ B1]_ll`, the squared row norms of `B1ᵀ X0`.
pub fn edge_variation(skeleton: &ComplexSkeleton, x0: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x0.nrows() != skeleton.n_nodes() {
        return Err(SclError::invalid(format!(
            "node signals have {} rows, expected {}",
            x0.nrows(),
            skeleton.n_nodes()
        )));
    }
    let mut var = vec![0.0; skeleton.n_edges()];
    for col in x0.column_iter() {
        for (v, &[i, j]) in var.iter_mut().zip(skeleton.edges()) {
            let d = col[j] - col[i];
            *v += d * d;
        }
    }
    Ok(var)
}

/// Triangle scores `α2 + β2 [B2ᵀ X Xᵀ B2]_tt + γ [B2⁺ᵀ (1 − w1)]_t`.
pub fn triangle_scores(
    skeleton: &ComplexSkeleton,
    x1_est: &DMatrix<f64>,
    w1: &[bool],
    params: &HyperParams,
) -> Result<Vec<f64>> {
    if w1.len() != skeleton.n_edges() {
        return Err(SclError::invalid("edge selection length does not match the skeleton"));
    }
    let curl = triangle_curl_energy(skeleton, x1_est)?;
    Ok(triangle_scores_from_energy(skeleton, &curl, w1, params))
}

fn triangle_scores_from_energy(
    skeleton: &ComplexSkeleton,
    curl: &[f64],
    w1: &[bool],
    params: &HyperParams,
) -> Vec<f64> {
    curl.iter()
        .enumerate()
        .map(|(t, &c)| {
            params.alpha2 + params.beta2 * c + params.gamma * skeleton.missing_edges(t, w1) as f64
        })
        .collect()
}

/// Indices sorted by ascending score; ties keep the lower index first.
fn ascending_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Activates the `t_min` lowest-scoring triangles.
pub fn select_triangles(scores: &[f64], t_min: usize) -> Vec<bool> {
    let mut w2 = vec![false; scores.len()];
    for t in ascending_order(scores).into_iter().take(t_min) {
        w2[t] = true;
    }
    w2
}

/// Edge scores: `0` on observed edges, otherwise `α1 + β1 [B1ᵀ X0 X0ᵀ B1]_ll − γ [B2⁺ w2]_l`.
pub fn edge_scores(
    skeleton: &ComplexSkeleton,
    x0: &DMatrix<f64>,
    w2: &[bool],
    observed_edges: &[usize],
    params: &HyperParams,
) -> Result<Vec<f64>> {
    if w2.len() != skeleton.n_triangles() {
        return Err(SclError::invalid("triangle selection length does not match the skeleton"));
    }
    if observed_edges.iter().any(|&l| l >= skeleton.n_edges()) {
        return Err(SclError::invalid("observed edge index out of range"));
    }
    let var = edge_variation(skeleton, x0)?;
    Ok(edge_scores_from_variation(skeleton, &var, w2, observed_edges, params))
}

fn edge_scores_from_variation(
    skeleton: &ComplexSkeleton,
    var: &[f64],
    w2: &[bool],
    observed_edges: &[usize],
    params: &HyperParams,
) -> Vec<f64> {
    let mut scores: Vec<f64> = var
        .iter()
        .enumerate()
        .map(|(l, &v)| {
            let covering = skeleton.edge_triangles(l).iter().filter(|&&t| w2[t]).count();
            params.alpha1 + params.beta1 * v - params.gamma * covering as f64
        })
        .collect();
    for &l in observed_edges {
        scores[l] = 0.0;
    }
    scores
}

/// Edge selection given scores.
///
/// Observed edges are always active. In strict mode the remaining
/// `e_min − |observed|` slots go to the lowest scores. Otherwise every edge
/// with a negative score is also taken, which is the exact minimizer of the
/// edge subproblem, and low scores fill up to `e_min`.
pub fn select_edges(scores: &[f64], observed_edges: &[usize], e_min: usize, strict_lemma_mode: bool) -> Vec<bool> {
    let mut w1 = vec![false; scores.len()];
    for &l in observed_edges {
        w1[l] = true;
    }
    let mut count = observed_edges.len();
    for l in ascending_order(scores) {
        if w1[l] {
            continue;
        }
        let take = count < e_min || (!strict_lemma_mode && scores[l] < 0.0);
        if !take {
            break;
        }
        w1[l] = true;
        count += 1;
    }
    w1
}

/// Closed-form flow interpolation
/// `X = (β2 B2 diag(w2) B2ᵀ + η ΘᵀΘ)† η Θᵀ X1ᴼ`.
///
/// The system is block diagonal: edges on active triangles form one coupled
/// block solved by eigendecomposition, observed edges off every active
/// triangle have the diagonal entry `η` and are copied through, and all other
/// rows are structurally zero.
pub fn interpolate_edge_signals(
    skeleton: &ComplexSkeleton,
    w2: &[bool],
    observed_edges: &[usize],
    x1_obs: &DMatrix<f64>,
    params: &HyperParams,
) -> Result<DMatrix<f64>> {
    if w2.len() != skeleton.n_triangles() {
        return Err(SclError::invalid("triangle selection length does not match the skeleton"));
    }
    check_observed(skeleton, observed_edges, x1_obs)?;
    let n_edges = skeleton.n_edges();
    let p1 = x1_obs.ncols();

    let mut obs_row = vec![usize::MAX; n_edges];
    for (r, &l) in observed_edges.iter().enumerate() {
        obs_row[l] = r;
    }

    // Edges coupled through active triangles (empty when β2 = 0: the curl term vanishes).
    let mut in_block = vec![false; n_edges];
    if params.beta2 > 0.0 {
        for (t, &active) in w2.iter().enumerate() {
            if active {
                for e in skeleton.triangle_edges(t) {
                    in_block[e] = true;
                }
            }
        }
    }
    let block: Vec<usize> = (0..n_edges).filter(|&l| in_block[l]).collect();

    let mut x = DMatrix::zeros(n_edges, p1);
    let mut isolated_observed = false;
    for (r, &l) in observed_edges.iter().enumerate() {
        if !in_block[l] {
            x.set_row(l, &x1_obs.row(r));
            isolated_observed = true;
        }
    }
    if block.is_empty() {
        return Ok(x);
    }

    let mut pos = vec![usize::MAX; n_edges];
    for (b, &l) in block.iter().enumerate() {
        pos[l] = b;
    }
    let nb = block.len();
    let mut system = DMatrix::zeros(nb, nb);
    for (t, &active) in w2.iter().enumerate() {
        if active {
            let es = skeleton.triangle_edges(t);
            for a in 0..3 {
                for b in 0..3 {
                    let s = (TRIANGLE_SIGNS[a] * TRIANGLE_SIGNS[b]) as f64;
                    system[(pos[es[a]], pos[es[b]])] += params.beta2 * s;
                }
            }
        }
    }
    let mut rhs = DMatrix::zeros(nb, p1);
    for (b, &l) in block.iter().enumerate() {
        if obs_row[l] != usize::MAX {
            system[(b, b)] += params.eta;
            let src = x1_obs.row(obs_row[l]) * params.eta;
            rhs.set_row(b, &src);
        }
    }
    // The cutoff is relative to the largest eigenvalue of the whole system,
    // which includes η on the copied-through rows.
    let floor = if isolated_observed { params.eta } else { 0.0 };
    let solved = sym_psd_pinv_solve_scaled(&system, &rhs, params.pinv_tol, floor);
    for (b, &l) in block.iter().enumerate() {
        x.set_row(l, &solved.row(b));
    }
    Ok(x)
}

/// Individual terms of the learning objective, weights applied.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub edge_sparsity: f64,
    pub triangle_sparsity: f64,
    pub node_smoothness: f64,
    pub edge_curl: f64,
    pub data_fit: f64,
    pub closure_penalty: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.edge_sparsity
            + self.triangle_sparsity
            + self.node_smoothness
            + self.edge_curl
            + self.data_fit
            + self.closure_penalty
    }
}

fn data_fit(x1_est: &DMatrix<f64>, x1_obs: &DMatrix<f64>, observed_edges: &[usize]) -> f64 {
    let mut fit = 0.0;
    for (r, &l) in observed_edges.iter().enumerate() {
        for p in 0..x1_obs.ncols() {
            let d = x1_est[(l, p)] - x1_obs[(r, p)];
            fit += d * d;
        }
    }
    fit
}

fn terms_from_parts(
    skeleton: &ComplexSkeleton,
    sel: &Selection,
    var: &[f64],
    curl: &[f64],
    fit: f64,
    params: &HyperParams,
) -> ObjectiveTerms {
    let smooth: f64 = var.iter().zip(&sel.w1).filter(|(_, &w)| w).map(|(v, _)| v).sum();
    let curl_sum: f64 = curl.iter().zip(&sel.w2).filter(|(_, &w)| w).map(|(c, _)| c).sum();
    let missing: usize = (0..sel.w2.len())
        .filter(|&t| sel.w2[t])
        .map(|t| skeleton.missing_edges(t, &sel.w1))
        .sum();
    ObjectiveTerms {
        edge_sparsity: params.alpha1 * sel.n_active_edges() as f64,
        triangle_sparsity: params.alpha2 * sel.n_active_triangles() as f64,
        node_smoothness: params.beta1 * smooth,
        edge_curl: params.beta2 * curl_sum,
        data_fit: params.eta * fit,
        closure_penalty: params.gamma * missing as f64,
    }
}

/// The penalized objective split into its terms.
pub fn objective_terms(
    problem: &Problem<'_>,
    sel: &Selection,
    x1_est: &DMatrix<f64>,
    params: &HyperParams,
) -> Result<ObjectiveTerms> {
    let skeleton = problem.skeleton;
    skeleton.check_selection(sel)?;
    let var = edge_variation(skeleton, problem.x0)?;
    let curl = triangle_curl_energy(skeleton, x1_est)?;
    let fit = data_fit(x1_est, problem.x1_obs, problem.observed_edges);
    Ok(terms_from_parts(skeleton, sel, &var, &curl, fit, params))
}

/// Value of the penalized objective at `(w1, w2, X)`.
pub fn objective_value(
    problem: &Problem<'_>,
    sel: &Selection,
    x1_est: &DMatrix<f64>,
    params: &HyperParams,
) -> Result<f64> {
    Ok(objective_terms(problem, sel, x1_est, params)?.total())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub triangles: f64,
    pub edges: f64,
    pub interpolation: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct LearnState {
    pub selection: Selection,
    /// `E_bar x P1` flow estimate from the last interpolation step.
    pub x1_est: DMatrix<f64>,
    /// Objective after each completed iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Missing-edge count when the loop stopped, before any pruning.
    pub violations_before_prune: usize,
    pub pruned_triangles: usize,
    /// Closure report of the returned selection.
    pub closure: ClosureReport,
    pub timings: PhaseTimings,
}

/// Runs the greedy block-coordinate learner.
///
/// Starts from the observed edges, no triangles, and the flows interpolated
/// from that. Each iteration re-selects triangles, then edges, then
/// re-interpolates flows, and stops once both selections repeat or after
/// `max_iters` iterations.
pub fn run_greedy_scl(problem: &Problem<'_>, params: &HyperParams) -> Result<LearnState> {
    let skeleton = problem.skeleton;
    params.validate(skeleton, problem.observed_edges.len())?;
    let started = Instant::now();
    let mut t_tri = Duration::ZERO;
    let mut t_edge = Duration::ZERO;
    let mut t_interp = Duration::ZERO;

    let var = edge_variation(skeleton, problem.x0)?;
    let mut sel = Selection::empty(skeleton);
    for &l in problem.observed_edges {
        sel.w1[l] = true;
    }
    let clock = Instant::now();
    let mut x1 = interpolate_edge_signals(skeleton, &sel.w2, problem.observed_edges, problem.x1_obs, params)?;
    t_interp += clock.elapsed();

    let mut trace = Vec::with_capacity(params.max_iters);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;

        let clock = Instant::now();
        let curl = triangle_curl_energy(skeleton, &x1)?;
        let s2 = triangle_scores_from_energy(skeleton, &curl, &sel.w1, params);
        let w2 = select_triangles(&s2, params.t_min);
        t_tri += clock.elapsed();

        let clock = Instant::now();
        let s1 = edge_scores_from_variation(skeleton, &var, &w2, problem.observed_edges, params);
        let w1 = select_edges(&s1, problem.observed_edges, params.e_min, params.strict_lemma_mode);
        t_edge += clock.elapsed();

        let clock = Instant::now();
        let w2_changed = w2 != sel.w2;
        if w2_changed {
            x1 = interpolate_edge_signals(skeleton, &w2, problem.observed_edges, problem.x1_obs, params)?;
        }
        t_interp += clock.elapsed();

        let unchanged = !w2_changed && w1 == sel.w1;
        sel = Selection { w1, w2 };
        let curl = triangle_curl_energy(skeleton, &x1)?;
        let fit = data_fit(&x1, problem.x1_obs, problem.observed_edges);
        trace.push(terms_from_parts(skeleton, &sel, &var, &curl, fit, params).total());
        if unchanged {
            converged = true;
            break;
        }
    }

    let violations_before_prune = skeleton.closure_violations(&sel.w1, &sel.w2)?.count;
    let pruned_triangles = if params.prune_closure {
        sel.prune_unsupported_triangles(skeleton)
    } else {
        0
    };
    let closure = skeleton.closure_violations(&sel.w1, &sel.w2)?;
    Ok(LearnState {
        selection: sel,
        x1_est: x1,
        objective_trace: trace,
        iterations_run: iterations,
        converged,
        violations_before_prune,
        pruned_triangles,
        closure,
        timings: PhaseTimings {
            triangles: t_tri.as_secs_f64(),
            edges: t_edge.as_secs_f64(),
            interpolation: t_interp.as_secs_f64(),
            total: started.elapsed().as_secs_f64(),
        },
    })
}
