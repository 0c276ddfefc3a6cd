//! Dense reference implementations used as test oracles. Nothing here calls
//! the library's scoring or solver code; incidence matrices are rebuilt from
//! the definition.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct DenseComplex {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub triangles: Vec<(usize, usize, usize)>,
    /// `N x E`, `-1` at the tail, `+1` at the head.
    pub b1: DMatrix<f64>,
    /// `E x T`: boundary of `[i, j, k]` is `[j, k] - [i, k] + [i, j]`.
    pub b2: DMatrix<f64>,
}

impl DenseComplex {
    pub fn new(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        let mut triangles = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    triangles.push((i, j, k));
                }
            }
        }
        let find = |a: usize, b: usize| edges.iter().position(|&e| e == (a, b)).unwrap();
        let mut b1 = DMatrix::zeros(n, edges.len());
        for (l, &(i, j)) in edges.iter().enumerate() {
            b1[(i, l)] = -1.0;
            b1[(j, l)] = 1.0;
        }
        let mut b2 = DMatrix::zeros(edges.len(), triangles.len());
        for (t, &(i, j, k)) in triangles.iter().enumerate() {
            b2[(find(i, j), t)] = 1.0;
            b2[(find(i, k), t)] = -1.0;
            b2[(find(j, k), t)] = 1.0;
        }
        DenseComplex { n, edges, triangles, b1, b2 }
    }

    pub fn l0(&self, w1: &[bool]) -> DMatrix<f64> {
        &self.b1 * diag(w1) * self.b1.transpose()
    }

    pub fn lu(&self, w2: &[bool]) -> DMatrix<f64> {
        &self.b2 * diag(w2) * self.b2.transpose()
    }

    /// `(1 - w1)ᵀ |B2| w2`: missing edges summed over active triangles.
    pub fn closure_penalty(&self, w1: &[bool], w2: &[bool]) -> f64 {
        let abs = self.b2.map(f64::abs);
        let miss = DMatrix::from_fn(1, w1.len(), |_, l| if w1[l] { 0.0 } else { 1.0 });
        (miss * abs * indicator(w2))[(0, 0)]
    }
}

pub fn diag(w: &[bool]) -> DMatrix<f64> {
    DMatrix::from_fn(w.len(), w.len(), |r, c| if r == c && w[r] { 1.0 } else { 0.0 })
}

pub fn indicator(w: &[bool]) -> DMatrix<f64> {
    DMatrix::from_fn(w.len(), 1, |r, _| if w[r] { 1.0 } else { 0.0 })
}

pub fn count(w: &[bool]) -> usize {
    w.iter().filter(|&&b| b).count()
}

pub fn trace_form(x: &DMatrix<f64>, l: &DMatrix<f64>) -> f64 {
    (x.transpose() * l * x).trace()
}

pub struct Weights {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub eta: f64,
}

/// Triangle-subproblem objective (terms depending on `w2`).
pub fn triangle_objective(c: &DenseComplex, x1: &DMatrix<f64>, w1: &[bool], w2: &[bool], k: &Weights) -> f64 {
    k.alpha2 * count(w2) as f64 + k.beta2 * trace_form(x1, &c.lu(w2)) + k.gamma * c.closure_penalty(w1, w2)
}

/// Edge-subproblem objective (terms depending on `w1`).
pub fn edge_objective(c: &DenseComplex, x0: &DMatrix<f64>, w1: &[bool], w2: &[bool], k: &Weights) -> f64 {
    k.alpha1 * count(w1) as f64 + k.beta1 * trace_form(x0, &c.l0(w1)) + k.gamma * c.closure_penalty(w1, w2)
}

pub fn bits(mask: usize, len: usize) -> Vec<bool> {
    (0..len).map(|b| mask >> b & 1 == 1).collect()
}

/// Minimum of `f` over all binary vectors of length `len` accepted by `feasible`.
pub fn brute_min(len: usize, feasible: impl Fn(&[bool]) -> bool, f: impl Fn(&[bool]) -> f64) -> f64 {
    (0..1usize << len)
        .map(|m| bits(m, len))
        .filter(|w| feasible(w))
        .map(|w| f(&w))
        .fold(f64::INFINITY, f64::min)
}

/// Row selector `Θ` for the observed edges.
pub fn sampling_matrix(n_edges: usize, observed: &[usize]) -> DMatrix<f64> {
    let mut theta = DMatrix::zeros(observed.len(), n_edges);
    for (r, &l) in observed.iter().enumerate() {
        theta[(r, l)] = 1.0;
    }
    theta
}

/// Minimizes `β2 tr(Xᵀ LU X) + η ‖Θ X − X1ᴼ‖²` by accelerated gradient
/// descent from zero. The iterates stay in the row space of the Hessian, so
/// the limit is the minimum-norm minimizer.
pub fn interpolation_gd(lu: &DMatrix<f64>, theta: &DMatrix<f64>, x1_obs: &DMatrix<f64>, beta2: f64, eta: f64) -> DMatrix<f64> {
    let h = lu * beta2 + theta.transpose() * theta * eta;
    let g = theta.transpose() * x1_obs * eta;
    let lipschitz = h.norm().max(1e-300);
    let step = 1.0 / lipschitz;
    let mut x = DMatrix::zeros(h.nrows(), x1_obs.ncols());
    let mut y = x.clone();
    let mut t = 1.0f64;
    for it in 0..2_000_000 {
        let grad = &h * &y - &g;
        let x_next = &y - grad * step;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
        let delta = (&x_next - &x).norm();
        x = x_next;
        t = t_next;
        // Restart momentum periodically; keeps the iteration monotone in practice.
        if it % 500 == 499 {
            y = x.clone();
            t = 1.0;
        }
        if delta < 1e-15 * (1.0 + x.norm()) && (&h * &x - &g).norm() < 1e-13 * (1.0 + g.norm()) {
            break;
        }
    }
    x
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

pub fn small_int_matrix(rows: usize, cols: usize, lo: i32, hi: i32, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..=hi) as f64)
}

pub fn random_mask(len: usize, p: f64, rng: &mut impl Rng) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(p)).collect()
}

pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let denom = b.norm().max(1e-300);
    (a - b).norm() / denom
}
