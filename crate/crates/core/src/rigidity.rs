//! Graphs, frameworks and rigidity primitives.
//!
//! All stacked quantities (edge function, rigidity matrix rows, per-edge
//! errors) follow the order in which edges are stored in [`RigidGraph`].
//! Vertices are 0-based.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{FormationError, Result};

/// Relative singular-value threshold used for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// An undirected graph with a fixed edge ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl RigidGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(FormationError::InvalidGraph(format!(
                    "edge {k} = ({i}, {j}) references a vertex outside 0..{n}"
                )));
            }
            if i == j {
                return Err(FormationError::InvalidGraph(format!(
                    "edge {k} is a self-loop on {i}"
                )));
            }
            let dup = edges[..k]
                .iter()
                .any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i));
            if dup {
                return Err(FormationError::InvalidGraph(format!(
                    "edge ({i}, {j}) appears twice"
                )));
            }
        }
        Ok(Self { n, edges })
    }

    /// Complete graph in lexicographic edge order.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Incident edges of vertex `i` as `(edge index, neighbor)`.
    pub fn incident(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(move |(k, &(a, b))| {
                if a == i {
                    Some((k, b))
                } else if b == i {
                    Some((k, a))
                } else {
                    None
                }
            })
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (_, w) in self.incident(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// `m n - m (m + 1) / 2`, the rank of an infinitesimally rigid framework.
pub fn rigid_rank(n: usize, dim: usize) -> Option<usize> {
    (dim * n).checked_sub(dim * (dim + 1) / 2)
}

/// A graph with positions for its vertices, stacked as `col(p_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    graph: RigidGraph,
    dim: usize,
    positions: DVector<f64>,
}

impl Framework {
    pub fn new(graph: RigidGraph, dim: usize, positions: DVector<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(FormationError::InvalidFramework(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if positions.len() != graph.vertex_count() * dim {
            return Err(FormationError::InvalidFramework(format!(
                "expected {} coordinates for {} agents in {dim}-D, got {}",
                graph.vertex_count() * dim,
                graph.vertex_count(),
                positions.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(FormationError::InvalidFramework(
                "non-finite coordinate".into(),
            ));
        }
        Ok(Self {
            graph,
            dim,
            positions,
        })
    }

    /// Builds from per-agent points; every point must have the same length.
    pub fn from_points(graph: RigidGraph, points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(FormationError::InvalidFramework(format!(
                "agent {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        Self::new(graph, dim, DVector::from_vec(flat))
    }

    pub fn graph(&self) -> &RigidGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn agent_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn positions(&self) -> &DVector<f64> {
        &self.positions
    }

    pub fn position(&self, i: usize) -> DVectorView<'_, f64> {
        self.positions.rows(i * self.dim, self.dim)
    }

    /// Same graph, new positions.
    pub fn with_positions(&self, positions: DVector<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), self.dim, positions)
    }

    /// `p_i - p_j` for any pair of vertices.
    pub fn difference(&self, i: usize, j: usize) -> DVector<f64> {
        self.position(i) - self.position(j)
    }

    /// `p_i - p_j` for stored edge `k = (i, j)`.
    pub fn relative(&self, k: usize) -> DVector<f64> {
        let (i, j) = self.graph.edges[k];
        self.difference(i, j)
    }

    /// Length of stored edge `k`.
    pub fn edge_length(&self, k: usize) -> f64 {
        let (i, j) = self.graph.edges[k];
        pair_distance(&self.positions, self.dim, i, j)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.graph.edge_count())
            .map(|k| self.edge_length(k))
            .collect()
    }
}

pub(crate) fn pair_distance(q: &DVector<f64>, dim: usize, i: usize, j: usize) -> f64 {
    (0..dim)
        .map(|a| {
            let d = q[i * dim + a] - q[j * dim + a];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Signed incidence matrix: `-1` where an edge leaves its first-listed vertex,
/// `+1` where it sinks at the second.
pub fn incidence_matrix(graph: &RigidGraph) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(graph.edge_count(), graph.vertex_count());
    for (k, &(i, j)) in graph.edges().iter().enumerate() {
        h[(k, i)] = -1.0;
        h[(k, j)] = 1.0;
    }
    h
}

/// Squared edge lengths in stored edge order.
pub fn edge_function(fw: &Framework) -> DVector<f64> {
    DVector::from_iterator(
        fw.graph.edge_count(),
        (0..fw.graph.edge_count()).map(|k| fw.relative(k).norm_squared()),
    )
}

/// Half the Jacobian of [`edge_function`]: row `k = (i, j)` carries
/// `p_i - p_j` in block `i` and `p_j - p_i` in block `j`.
pub fn rigidity_matrix(fw: &Framework) -> DMatrix<f64> {
    let m = fw.dim;
    let mut r = DMatrix::zeros(fw.graph.edge_count(), m * fw.agent_count());
    for (k, &(i, j)) in fw.graph.edges().iter().enumerate() {
        for a in 0..m {
            let diff = fw.positions[i * m + a] - fw.positions[j * m + a];
            r[(k, i * m + a)] = diff;
            r[(k, j * m + a)] = -diff;
        }
    }
    r
}

/// Numerical rank of the rigidity matrix: singular values above
/// `rank_tol` times the largest one.
pub fn rigidity_rank(fw: &Framework, rank_tol: f64) -> usize {
    let r = rigidity_matrix(fw);
    if r.nrows() == 0 || r.ncols() == 0 {
        return 0;
    }
    let sv = r.singular_values();
    let largest = sv.max();
    if largest <= 0.0 || !largest.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * largest).count()
}

pub fn is_infinitesimally_rigid(fw: &Framework, rank_tol: f64) -> bool {
    match rigid_rank(fw.agent_count(), fw.dim) {
        Some(target) if fw.agent_count() > fw.dim => rigidity_rank(fw, rank_tol) == target,
        _ => false,
    }
}

pub fn is_minimally_rigid(fw: &Framework, rank_tol: f64) -> bool {
    rigid_rank(fw.agent_count(), fw.dim) == Some(fw.graph.edge_count())
        && is_infinitesimally_rigid(fw, rank_tol)
}

/// Sum over edges of squared edge-length differences between two frameworks
/// on the same graph.
pub fn shape_discrepancy(fw_q: &Framework, fw_p: &Framework) -> Result<f64> {
    if fw_q.graph != fw_p.graph || fw_q.dim != fw_p.dim {
        return Err(FormationError::IncompatibleFrameworks(
            "frameworks must share graph and dimension".into(),
        ));
    }
    Ok((0..fw_q.graph.edge_count())
        .map(|k| (fw_q.edge_length(k) - fw_p.edge_length(k)).powi(2))
        .sum())
}

/// Smallest eigenvalue of `R R^T`.
pub fn grammian_min_eigenvalue(fw: &Framework) -> f64 {
    let r = rigidity_matrix(fw);
    if r.nrows() == 0 {
        return 0.0;
    }
    let gram = &r * r.transpose();
    gram.symmetric_eigenvalues().min()
}
