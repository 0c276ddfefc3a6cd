//! Candidate simplices of the complete order-2 complex on `N` nodes, their
//! incidence matrices, and the Laplacians and Hodge decomposition of a selected
//! sub-complex.
//!
//! Edges `(i, j)` with `i < j` and triangles `(i, j, k)` with `i < j < k` are
//! enumerated in lexicographic order. That order is the index contract used by
//! every selection vector and every file format in the crate.
//!
//! Orientation: edge `(i, j)` has `-1` at node `i` and `+1` at node `j`.
//! Triangle `(i, j, k)` has `+1` at edges `(i, j)` and `(j, k)` and `-1` at
//! edge `(i, k)`, so `B1 * B2 = 0` holds by construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SclError};
use crate::linalg::pseudo_inverse;

/// Largest node count accepted by [`ComplexSkeleton::new`]. At 40 nodes the
/// three dense incidence matrices take roughly 23 MB.
pub const MAX_NODES: usize = 40;

/// Relative singular-value cutoff for the least-squares solves in the Hodge decomposition.
pub const HODGE_RCOND: f64 = 1e-10;

/// The complete simplicial complex on `n_nodes` vertices.
#[derive(Debug, Clone)]
pub struct ComplexSkeleton {
    n_nodes: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    /// Edge indices of each triangle's boundary, ordered `[(i,j), (i,k), (j,k)]`.
    triangle_edges: Vec<[usize; 3]>,
    /// Triangles having each edge on their boundary, ascending.
    edge_triangles: Vec<Vec<usize>>,
    b1_full: DMatrix<i8>,
    b2_full: DMatrix<i8>,
    b2_unsigned: DMatrix<i8>,
}

fn binom2(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

fn binom3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

impl ComplexSkeleton {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(SclError::invalid(format!(
                "a complex needs at least 2 nodes, got {n_nodes}"
            )));
        }
        if n_nodes > MAX_NODES {
            return Err(SclError::invalid(format!(
                "node count {n_nodes} exceeds the supported maximum of {MAX_NODES}"
            )));
        }
        let n = n_nodes;
        let mut edges = Vec::with_capacity(binom2(n));
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push([i, j]);
            }
        }
        let mut triangles = Vec::with_capacity(binom3(n));
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    triangles.push([i, j, k]);
                }
            }
        }

        let n_edges = edges.len();
        let n_tri = triangles.len();
        let mut b1_full = DMatrix::<i8>::zeros(n, n_edges);
        for (l, &[i, j]) in edges.iter().enumerate() {
            b1_full[(i, l)] = -1;
            b1_full[(j, l)] = 1;
        }

        let mut b2_full = DMatrix::<i8>::zeros(n_edges, n_tri);
        let mut b2_unsigned = DMatrix::<i8>::zeros(n_edges, n_tri);
        let mut triangle_edges = Vec::with_capacity(n_tri);
        let mut edge_triangles = vec![Vec::new(); n_edges];
        for (t, &[i, j, k]) in triangles.iter().enumerate() {
            let e_ij = edge_rank(n, i, j);
            let e_ik = edge_rank(n, i, k);
            let e_jk = edge_rank(n, j, k);
            b2_full[(e_ij, t)] = 1;
            b2_full[(e_ik, t)] = -1;
            b2_full[(e_jk, t)] = 1;
            for e in [e_ij, e_ik, e_jk] {
                b2_unsigned[(e, t)] = 1;
                edge_triangles[e].push(t);
            }
            triangle_edges.push([e_ij, e_ik, e_jk]);
        }

        Ok(ComplexSkeleton {
            n_nodes,
            edges,
            triangles,
            triangle_edges,
            edge_triangles,
            b1_full,
            b2_full,
            b2_unsigned,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of candidate edges, `C(N, 2)`.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of candidate triangles, `C(N, 3)`.
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary edges of triangle `t` as `[(i,j), (i,k), (j,k)]`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Triangles whose boundary contains edge `l`.
    pub fn edge_triangles(&self, l: usize) -> &[usize] {
        &self.edge_triangles[l]
    }

    pub fn b1_full(&self) -> &DMatrix<i8> {
        &self.b1_full
    }

    pub fn b2_full(&self) -> &DMatrix<i8> {
        &self.b2_full
    }

    pub fn b2_unsigned(&self) -> &DMatrix<i8> {
        &self.b2_unsigned
    }

    /// Lexicographic index of edge `(i, j)`; requires `i < j < N`.
    pub fn edge_index(&self, i: usize, j: usize) -> Result<usize> {
        if !(i < j && j < self.n_nodes) {
            return Err(SclError::invalid(format!(
                "edge ({i}, {j}) must satisfy i < j < {}",
                self.n_nodes
            )));
        }
        Ok(edge_rank(self.n_nodes, i, j))
    }

    /// Lexicographic index of triangle `(i, j, k)`; requires `i < j < k < N`.
    pub fn triangle_index(&self, i: usize, j: usize, k: usize) -> Result<usize> {
        if !(i < j && j < k && k < self.n_nodes) {
            return Err(SclError::invalid(format!(
                "triangle ({i}, {j}, {k}) must satisfy i < j < k < {}",
                self.n_nodes
            )));
        }
        Ok(triangle_rank(self.n_nodes, i, j, k))
    }

    fn check_w1(&self, w1: &[bool]) -> Result<()> {
        if w1.len() != self.n_edges() {
            return Err(SclError::invalid(format!(
                "edge selection has length {}, expected {}",
                w1.len(),
                self.n_edges()
            )));
        }
        Ok(())
    }

    fn check_w2(&self, w2: &[bool]) -> Result<()> {
        if w2.len() != self.n_triangles() {
            return Err(SclError::invalid(format!(
                "triangle selection has length {}, expected {}",
                w2.len(),
                self.n_triangles()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_selection(&self, sel: &Selection) -> Result<()> {
        self.check_w1(&sel.w1)?;
        self.check_w2(&sel.w2)
    }

    /// `B1 diag(w1) B1^T` on all `N` nodes.
    pub fn node_laplacian(&self, w1: &[bool]) -> Result<DMatrix<f64>> {
        self.check_w1(w1)?;
        let mut l0 = DMatrix::zeros(self.n_nodes, self.n_nodes);
        for (l, &[i, j]) in self.edges.iter().enumerate() {
            if w1[l] {
                l0[(i, i)] += 1.0;
                l0[(j, j)] += 1.0;
                l0[(i, j)] -= 1.0;
                l0[(j, i)] -= 1.0;
            }
        }
        Ok(l0)
    }

    /// `B2 diag(w2) B2^T` on all candidate edges.
    pub fn upper_laplacian(&self, w2: &[bool]) -> Result<DMatrix<f64>> {
        self.check_w2(w2)?;
        let n_edges = self.n_edges();
        let mut lu = DMatrix::zeros(n_edges, n_edges);
        for (t, &active) in w2.iter().enumerate() {
            if active {
                let es = self.triangle_edges[t];
                for a in 0..3 {
                    for b in 0..3 {
                        let sa = TRIANGLE_SIGNS[a] as f64;
                        let sb = TRIANGLE_SIGNS[b] as f64;
                        lu[(es[a], es[b])] += sa * sb;
                    }
                }
            }
        }
        Ok(lu)
    }

    /// Node-to-edge incidence restricted to the active edges (`N x E`).
    pub fn restricted_b1(&self, sel: &Selection) -> Result<DMatrix<f64>> {
        self.check_selection(sel)?;
        let active = sel.active_edges();
        let mut b1 = DMatrix::zeros(self.n_nodes, active.len());
        for (c, &l) in active.iter().enumerate() {
            let [i, j] = self.edges[l];
            b1[(i, c)] = -1.0;
            b1[(j, c)] = 1.0;
        }
        Ok(b1)
    }

    /// Edge-to-triangle incidence restricted to active edges (rows) and active
    /// triangles (columns). Requires a closed selection.
    pub fn restricted_b2(&self, sel: &Selection) -> Result<DMatrix<f64>> {
        self.check_selection(sel)?;
        self.require_closed(sel)?;
        let active_edges = sel.active_edges();
        let mut row_of = vec![usize::MAX; self.n_edges()];
        for (r, &l) in active_edges.iter().enumerate() {
            row_of[l] = r;
        }
        let active_tri = sel.active_triangles();
        let mut b2 = DMatrix::zeros(active_edges.len(), active_tri.len());
        for (c, &t) in active_tri.iter().enumerate() {
            for (a, &e) in self.triangle_edges[t].iter().enumerate() {
                b2[(row_of[e], c)] = TRIANGLE_SIGNS[a] as f64;
            }
        }
        Ok(b2)
    }

    fn require_closed(&self, sel: &Selection) -> Result<()> {
        let report = self.closure_violations(&sel.w1, &sel.w2)?;
        if report.count > 0 {
            return Err(SclError::PreconditionViolation(format!(
                "selection is not closed: {} missing edge(s) across {} filled triangle(s)",
                report.count,
                report.offending.len()
            )));
        }
        Ok(())
    }

    /// Hodge Laplacian `B1^T B1 + B2 B2^T` on the active-edge space.
    pub fn hodge_laplacian(&self, sel: &Selection) -> Result<DMatrix<f64>> {
        let b1 = self.restricted_b1(sel)?;
        let b2 = self.restricted_b2(sel)?;
        Ok(b1.transpose() * &b1 + &b2 * b2.transpose())
    }

    /// Splits `x` (indexed by active edges) into gradient, curl, and harmonic flows.
    pub fn hodge_decompose(&self, sel: &Selection, x: &DVector<f64>) -> Result<HodgeParts> {
        HodgeBasis::new(self, sel)?.decompose(x)
    }

    /// Closure check: total missing-edge count `(1 - w1)^T B2+ w2` and the
    /// offending filled triangles with their individual missing-edge counts.
    pub fn closure_violations(&self, w1: &[bool], w2: &[bool]) -> Result<ClosureReport> {
        self.check_w1(w1)?;
        self.check_w2(w2)?;
        let mut report = ClosureReport::default();
        for (t, &active) in w2.iter().enumerate() {
            if !active {
                continue;
            }
            let missing = self.triangle_edges[t].iter().filter(|&&e| !w1[e]).count();
            if missing > 0 {
                report.count += missing;
                report.offending.push(TriangleViolation { triangle: t, missing_edges: missing });
            }
        }
        Ok(report)
    }

    /// Number of edges of triangle `t` that are inactive under `w1`.
    pub(crate) fn missing_edges(&self, t: usize, w1: &[bool]) -> usize {
        self.triangle_edges[t].iter().filter(|&&e| !w1[e]).count()
    }
}

/// Signs of a triangle's boundary edges in `[(i,j), (i,k), (j,k)]` order.
pub const TRIANGLE_SIGNS: [i8; 3] = [1, -1, 1];

fn edge_rank(n: usize, i: usize, j: usize) -> usize {
    // Edges starting at a < i contribute (n - 1 - a) each.
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn triangle_rank(n: usize, i: usize, j: usize, k: usize) -> usize {
    // Triangles with first vertex a < i: C(n - 1 - a, 2) each.
    let before_i = binom3(n) - binom3(n - i);
    // With first vertex i and second vertex b in (i, j): n - 1 - b each.
    let m = n - i - 1;
    let before_j = binom2(m) - binom2(n - j);
    before_i + before_j + (k - j - 1)
}

/// Binary edge and triangle indicators over a [`ComplexSkeleton`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub w1: Vec<bool>,
    pub w2: Vec<bool>,
}

impl Selection {
    pub fn empty(skeleton: &ComplexSkeleton) -> Self {
        Selection {
            w1: vec![false; skeleton.n_edges()],
            w2: vec![false; skeleton.n_triangles()],
        }
    }

    pub fn complete(skeleton: &ComplexSkeleton) -> Self {
        Selection {
            w1: vec![true; skeleton.n_edges()],
            w2: vec![true; skeleton.n_triangles()],
        }
    }

    pub fn active_edges(&self) -> Vec<usize> {
        active_indices(&self.w1)
    }

    pub fn active_triangles(&self) -> Vec<usize> {
        active_indices(&self.w2)
    }

    pub fn n_active_edges(&self) -> usize {
        self.w1.iter().filter(|&&b| b).count()
    }

    pub fn n_active_triangles(&self) -> usize {
        self.w2.iter().filter(|&&b| b).count()
    }

    pub fn is_closed(&self, skeleton: &ComplexSkeleton) -> bool {
        skeleton
            .closure_violations(&self.w1, &self.w2)
            .map(|r| r.count == 0)
            .unwrap_or(false)
    }

    /// Deactivates every filled triangle that has a missing edge. Returns how many were removed.
    pub fn prune_unsupported_triangles(&mut self, skeleton: &ComplexSkeleton) -> usize {
        let mut removed = 0;
        for t in 0..self.w2.len() {
            if self.w2[t] && skeleton.missing_edges(t, &self.w1) > 0 {
                self.w2[t] = false;
                removed += 1;
            }
        }
        removed
    }
}

pub(crate) fn active_indices(w: &[bool]) -> Vec<usize> {
    w.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub triangle: usize,
    pub missing_edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub count: usize,
    pub offending: Vec<TriangleViolation>,
}

/// Gradient, curl, and harmonic components of an edge flow, plus the node
/// potential `v` and triangle potential `t` that generate the first two.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub gradient: DVector<f64>,
    pub curl: DVector<f64>,
    pub harmonic: DVector<f64>,
    pub node_potential: DVector<f64>,
    pub triangle_potential: DVector<f64>,
}

/// Precomputed least-squares operators for repeatedly decomposing flows on one closed complex.
#[derive(Debug, Clone)]
pub struct HodgeBasis {
    b1_t: DMatrix<f64>,
    b1_t_pinv: DMatrix<f64>,
    b2: DMatrix<f64>,
    b2_pinv: DMatrix<f64>,
}

impl HodgeBasis {
    pub fn new(skeleton: &ComplexSkeleton, sel: &Selection) -> Result<Self> {
        let b1 = skeleton.restricted_b1(sel)?;
        let b2 = skeleton.restricted_b2(sel)?;
        let b1_t = b1.transpose();
        let b1_t_pinv = pseudo_inverse(&b1_t, HODGE_RCOND);
        let b2_pinv = pseudo_inverse(&b2, HODGE_RCOND);
        Ok(HodgeBasis { b1_t, b1_t_pinv, b2, b2_pinv })
    }

    pub fn n_edges(&self) -> usize {
        self.b1_t.nrows()
    }

    pub fn decompose(&self, x: &DVector<f64>) -> Result<HodgeParts> {
        if x.len() != self.n_edges() {
            return Err(SclError::invalid(format!(
                "edge signal has length {}, expected {} active edges",
                x.len(),
                self.n_edges()
            )));
        }
        let node_potential = &self.b1_t_pinv * x;
        let gradient = &self.b1_t * &node_potential;
        let rest = x - &gradient;
        let triangle_potential = &self.b2_pinv * &rest;
        let curl = &self.b2 * &triangle_potential;
        let harmonic = rest - &curl;
        Ok(HodgeParts {
            gradient,
            curl,
            harmonic,
            node_potential,
            triangle_potential,
        })
    }
}
