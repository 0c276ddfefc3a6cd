//! Synthetic instances: Erdős-Rényi edge sets, randomly filled triangles,
//! smooth node signals, low-curl edge flows, noise, and observation masks.
//!
//! Every generator takes an explicit RNG. [`generate_instance`] derives one
//! ChaCha stream per stage from a single seed, so changing e.g. the
//! observation fraction leaves the graph and the signals untouched.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use petgraph::unionfind::UnionFind;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SclError};
use crate::topology::{active_indices, ComplexSkeleton, HodgeBasis, Selection};

/// Attempts made by [`sample_er_selection`] before giving up on connectivity.
pub const MAX_ER_ATTEMPTS: usize = 1000;

/// Eigenvalues of `L0` below this are treated as null modes by the smooth-signal filter.
pub const SMOOTH_NULL_CUTOFF: f64 = 1e-9;

// Guards floor/ceil of `fraction * count` against representation error (0.7 * 10 = 7.000000000000001).
const COUNT_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub selection: Selection,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SignalSet {
    /// `N x P0` node signals.
    pub x0: DMatrix<f64>,
    /// `E_bar x P1` edge flows (noisy, zero on inactive edges).
    pub x1_full: DMatrix<f64>,
    /// Sorted indices (into the candidate edge list) of the observed edges.
    pub observed_edges: Vec<usize>,
    /// Rows of `x1_full` at `observed_edges`, in order.
    pub x1_obs: DMatrix<f64>,
    pub noise_std_node: f64,
    pub noise_std_edge: f64,
}

/// Parameters of one synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceParams {
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub fill_fraction: f64,
    pub p0: usize,
    pub p1: usize,
    pub node_noise_std: f64,
    pub edge_noise_std: f64,
    pub curl_atten: f64,
    pub observed_fraction: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            n_nodes: 20,
            edge_prob: 0.4,
            fill_fraction: 0.5,
            p0: 100,
            p1: 100,
            node_noise_std: 0.0,
            edge_noise_std: 0.0,
            curl_atten: 0.05,
            observed_fraction: 0.8,
        }
    }
}

impl InstanceParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SclError::invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        prob("edge_prob", self.edge_prob)?;
        prob("fill_fraction", self.fill_fraction)?;
        prob("curl_atten", self.curl_atten)?;
        if !(self.observed_fraction > 0.0 && self.observed_fraction <= 1.0) {
            return Err(SclError::invalid(format!(
                "observed_fraction must lie in (0, 1], got {}",
                self.observed_fraction
            )));
        }
        if self.p0 < 1 || self.p1 < 1 {
            return Err(SclError::invalid("p0 and p1 must be at least 1"));
        }
        for (name, v) in [("node_noise_std", self.node_noise_std), ("edge_noise_std", self.edge_noise_std)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SclError::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SclError::invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

fn is_connected(skeleton: &ComplexSkeleton, w1: &[bool]) -> bool {
    let n = skeleton.n_nodes();
    let mut uf = UnionFind::<usize>::new(n);
    let mut merges = 0;
    for (l, &[i, j]) in skeleton.edges().iter().enumerate() {
        if w1[l] && uf.union(i, j) {
            merges += 1;
        }
    }
    merges + 1 == n
}

/// Draws each candidate edge independently with probability `p`, redrawing
/// until the graph is connected (at most [`MAX_ER_ATTEMPTS`] draws).
pub fn sample_er_selection<R: Rng + ?Sized>(
    skeleton: &ComplexSkeleton,
    p: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    check_probability("edge probability", p)?;
    let mut w1 = vec![false; skeleton.n_edges()];
    for _ in 0..MAX_ER_ATTEMPTS {
        for w in w1.iter_mut() {
            *w = rng.random_bool(p);
        }
        if is_connected(skeleton, &w1) {
            return Ok(w1);
        }
    }
    Err(SclError::GenerationFailure(format!(
        "no connected Erdős-Rényi graph with N = {} and p = {p} in {MAX_ER_ATTEMPTS} attempts",
        skeleton.n_nodes()
    )))
}

/// Fills a uniformly random `floor(fraction * #eligible)` subset of the
/// triangles whose three edges are active.
pub fn fill_triangles<R: Rng + ?Sized>(
    skeleton: &ComplexSkeleton,
    w1: &[bool],
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    check_probability("fill fraction", fraction)?;
    if w1.len() != skeleton.n_edges() {
        return Err(SclError::invalid("edge selection length does not match the skeleton"));
    }
    let eligible: Vec<usize> = (0..skeleton.n_triangles())
        .filter(|&t| skeleton.missing_edges(t, w1) == 0)
        .collect();
    let k = ((fraction * eligible.len() as f64) + COUNT_EPS).floor() as usize;
    let k = k.min(eligible.len());
    let mut w2 = vec![false; skeleton.n_triangles()];
    for pos in sample(rng, eligible.len(), k) {
        w2[eligible[pos]] = true;
    }
    Ok(w2)
}

/// Smooth node signals `U f(Λ)^{1/2} z` with `f(λ) = 1/λ` off the null space,
/// each column scaled to unit norm, then white Gaussian noise of std `noise_std`.
///
/// All clean columns are drawn before any noise, so for a fixed RNG state the
/// clean part does not depend on `noise_std`.
pub fn gen_smooth_node_signals<R: Rng + ?Sized>(
    skeleton: &ComplexSkeleton,
    w1: &[bool],
    p0: usize,
    noise_std: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if p0 < 1 {
        return Err(SclError::invalid("p0 must be at least 1"));
    }
    let l0 = skeleton.node_laplacian(w1)?;
    let n = skeleton.n_nodes();
    let eig = SymmetricEigen::new(l0);
    let filter: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&lam| if lam > SMOOTH_NULL_CUTOFF { (1.0 / lam).sqrt() } else { 0.0 })
        .collect();

    let mut x0 = DMatrix::zeros(n, p0);
    for p in 0..p0 {
        let coeffs = DVector::from_iterator(
            n,
            filter.iter().map(|&f| f * rng.sample::<f64, _>(StandardNormal)),
        );
        let mut col = &eig.eigenvectors * coeffs;
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        x0.set_column(p, &col);
    }
    add_noise(&mut x0, noise_std, None, rng);
    Ok(x0)
}

fn add_noise<R: Rng + ?Sized>(m: &mut DMatrix<f64>, std: f64, rows: Option<&[usize]>, rng: &mut R) {
    if std == 0.0 {
        return;
    }
    let all: Vec<usize>;
    let rows = match rows {
        Some(r) => r,
        None => {
            all = (0..m.nrows()).collect();
            &all
        }
    };
    for p in 0..m.ncols() {
        for &r in rows {
            m[(r, p)] += std * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

/// Low-curl edge flows on a closed ground-truth complex.
///
/// Each column is white noise on the active edges, Hodge-decomposed on the
/// true complex, with its curl part scaled by `curl_atten`, normalized to unit
/// norm, and embedded into the candidate edge space. Returns
/// `(noisy, clean)`; noise of std `noise_std` touches active edges only.
pub fn gen_low_curl_edge_signals<R: Rng + ?Sized>(
    skeleton: &ComplexSkeleton,
    sel: &Selection,
    p1: usize,
    curl_atten: f64,
    noise_std: f64,
    rng: &mut R,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if p1 < 1 {
        return Err(SclError::invalid("p1 must be at least 1"));
    }
    check_probability("curl attenuation", curl_atten)?;
    let basis = HodgeBasis::new(skeleton, sel)?;
    let active = sel.active_edges();
    let mut clean = DMatrix::zeros(skeleton.n_edges(), p1);
    for p in 0..p1 {
        let z = DVector::from_iterator(
            active.len(),
            (0..active.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
        );
        let parts = basis.decompose(&z)?;
        let mut x = parts.gradient + parts.harmonic + parts.curl * curl_atten;
        let norm = x.norm();
        if norm > 0.0 {
            x /= norm;
        }
        for (r, &l) in active.iter().enumerate() {
            clean[(l, p)] = x[r];
        }
    }
    let mut noisy = clean.clone();
    add_noise(&mut noisy, noise_std, Some(&active), rng);
    Ok((noisy, clean))
}

/// Uniformly random `ceil(fraction * E)` active edges, sorted ascending.
pub fn sample_observed_edges<R: Rng + ?Sized>(
    w1: &[bool],
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SclError::invalid(format!(
            "observed fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let active = active_indices(w1);
    if active.is_empty() {
        return Err(SclError::invalid("cannot observe edges of an empty edge set"));
    }
    let k = ((fraction * active.len() as f64) - COUNT_EPS).ceil() as usize;
    let k = k.clamp(1, active.len());
    let mut picked: Vec<usize> = sample(rng, active.len(), k).into_iter().map(|i| active[i]).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Row selection `Θ X`.
pub fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |r, c| x[(rows[r], c)])
}

// Stream ids for the per-stage ChaCha generators.
const STREAM_GRAPH: u64 = 0;
const STREAM_TRIANGLES: u64 = 1;
const STREAM_NODE_SIGNALS: u64 = 2;
const STREAM_EDGE_SIGNALS: u64 = 3;
const STREAM_OBSERVATION: u64 = 4;

fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Full synthetic instance for `skeleton` (whose node count must equal `params.n_nodes`).
pub fn generate_instance(
    skeleton: &ComplexSkeleton,
    params: &InstanceParams,
    seed: u64,
) -> Result<(GroundTruth, SignalSet)> {
    params.validate()?;
    if skeleton.n_nodes() != params.n_nodes {
        return Err(SclError::invalid(format!(
            "skeleton has {} nodes but the instance asks for {}",
            skeleton.n_nodes(),
            params.n_nodes
        )));
    }
    let w1 = sample_er_selection(skeleton, params.edge_prob, &mut stage_rng(seed, STREAM_GRAPH))?;
    let w2 = fill_triangles(skeleton, &w1, params.fill_fraction, &mut stage_rng(seed, STREAM_TRIANGLES))?;
    let selection = Selection { w1, w2 };

    let x0 = gen_smooth_node_signals(
        skeleton,
        &selection.w1,
        params.p0,
        params.node_noise_std,
        &mut stage_rng(seed, STREAM_NODE_SIGNALS),
    )?;
    let (x1_full, _) = gen_low_curl_edge_signals(
        skeleton,
        &selection,
        params.p1,
        params.curl_atten,
        params.edge_noise_std,
        &mut stage_rng(seed, STREAM_EDGE_SIGNALS),
    )?;
    let observed_edges = sample_observed_edges(
        &selection.w1,
        params.observed_fraction,
        &mut stage_rng(seed, STREAM_OBSERVATION),
    )?;
    let x1_obs = select_rows(&x1_full, &observed_edges);
    Ok((
        GroundTruth { selection, seed },
        SignalSet {
            x0,
            x1_full,
            observed_edges,
            x1_obs,
            noise_std_node: params.node_noise_std,
            noise_std_edge: params.edge_noise_std,
        },
    ))
}
