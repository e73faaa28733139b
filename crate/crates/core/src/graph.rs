//! Graph states and graph-diagonal mixtures.
//!
//! Bitstrings over the vertices are packed into integers with vertex 0 as the
//! most significant bit, the same convention as [`PauliWord`] masks, so
//! `x = 0b100` on three vertices selects vertex 0.

use serde::{Deserialize, Serialize};

use crate::error::{EdssError, Result};
use crate::quantum::{c64, CMatrix, CVector, DensityMatrix, PauliWord, Phase, Qubit};

/// Simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_vertices == 0 || n_vertices > 8 {
            return Err(EdssError::InvalidGraph(format!(
                "{n_vertices} vertices; 1..=8 supported"
            )));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i >= n_vertices || j >= n_vertices {
                return Err(EdssError::BadVertex {
                    vertex: i.max(j),
                    n: n_vertices,
                });
            }
            if i == j {
                return Err(EdssError::InvalidGraph(format!("self-loop on vertex {i}")));
            }
            let e = (i.min(j), i.max(j));
            if !norm.contains(&e) {
                norm.push(e);
            }
        }
        norm.sort_unstable();
        Ok(Graph {
            n_vertices,
            edges: norm,
        })
    }

    pub fn empty(n_vertices: usize) -> Self {
        Graph::new(n_vertices, &[]).expect("valid vertex count")
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn chain(n_vertices: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n_vertices).map(|i| (i - 1, i)).collect();
        Graph::new(n_vertices, &edges).expect("valid chain")
    }

    /// The protocol graph `C - A - B` on vertices `0, 1, 2`.
    pub fn g3() -> Self {
        Graph::chain(3)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == i, b == i) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }

    /// Induced subgraph on the remaining vertices, re-indexed in order.
    pub fn without_vertex(&self, v: usize) -> Result<Graph> {
        self.check_vertex(v)?;
        if self.n_vertices == 1 {
            return Err(EdssError::InvalidGraph(
                "cannot remove the only vertex".into(),
            ));
        }
        let idx = |u: usize| if u > v { u - 1 } else { u };
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|(a, b)| *a != v && *b != v)
            .map(|&(a, b)| (idx(a), idx(b)))
            .collect();
        Graph::new(self.n_vertices - 1, &edges)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n_vertices {
            Err(EdssError::BadVertex {
                vertex: v,
                n: self.n_vertices,
            })
        } else {
            Ok(())
        }
    }

    fn bit(&self, v: usize) -> usize {
        1 << (self.n_vertices - 1 - v)
    }

    /// Number of bitstrings over the vertices.
    pub fn basis_size(&self) -> usize {
        1 << self.n_vertices
    }
}

/// `K_i = X_i prod_{j ~ i} Z_j`.
pub fn stabilizer(graph: &Graph, i: usize) -> Result<PauliWord> {
    graph.check_vertex(i)?;
    let x = graph.bit(i) as u8;
    let z = graph
        .neighbours(i)
        .into_iter()
        .fold(0u8, |m, j| m | graph.bit(j) as u8);
    Ok(PauliWord::new(graph.n_vertices, x, z, Phase::PlusOne))
}

/// `K_x = prod_{i : x_i = 1} K_i`.
pub fn stabilizer_product(graph: &Graph, x: usize) -> PauliWord {
    let mut w = PauliWord::identity(graph.n_vertices);
    for i in 0..graph.n_vertices {
        if x & graph.bit(i) != 0 {
            w = w * stabilizer(graph, i).expect("vertex in range");
        }
    }
    w
}

fn parity(v: usize) -> f64 {
    if v.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `|psi_x> = Z_x prod_{(i,j)} CZ_ij |+>^N`; its `K_i` eigenvalue is
/// `(-1)^{x_i}`.
pub fn graph_basis_vector(graph: &Graph, x: usize) -> CVector {
    let dim = graph.basis_size();
    let norm = (dim as f64).sqrt().recip();
    CVector::from_fn(dim, |j, _| {
        let cz = graph
            .edges
            .iter()
            .filter(|&&(a, b)| j & graph.bit(a) != 0 && j & graph.bit(b) != 0)
            .count();
        let sign = parity(x & j) * if cz % 2 == 0 { 1.0 } else { -1.0 };
        c64(sign * norm, 0.0)
    })
}

/// Unitary whose column `x` is `|psi_x>`.
pub fn graph_basis(graph: &Graph) -> CMatrix {
    let dim = graph.basis_size();
    let mut m = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        m.set_column(x, &graph_basis_vector(graph, x));
    }
    m
}

/// Result of the coefficient-space positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    /// Bitstring `y` attaining the minimum.
    pub worst_y: usize,
    /// `min_y sum_x s_x (-1)^{x.y}`, i.e. `2^N` times the smallest eigenvalue.
    pub min_value: f64,
}

/// `rho = 2^-N sum_x s_x K_x` with `s_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDiagonalState {
    graph: Graph,
    labels: Vec<Qubit>,
    coeffs: Vec<f64>,
}

impl GraphDiagonalState {
    /// `coeffs[x]` is `s_x`; `coeffs[0]` must be 1.
    pub fn new(graph: Graph, labels: Vec<Qubit>, coeffs: Vec<f64>) -> Result<Self> {
        if labels.len() != graph.n_vertices {
            return Err(EdssError::Dimension(format!(
                "{} labels for {} vertices",
                labels.len(),
                graph.n_vertices
            )));
        }
        if coeffs.len() != graph.basis_size() {
            return Err(EdssError::Dimension(format!(
                "{} coefficients, expected {}",
                coeffs.len(),
                graph.basis_size()
            )));
        }
        if (coeffs[0] - 1.0).abs() > 1e-12 {
            return Err(EdssError::InvalidSpectrum(format!(
                "s_0 = {}, expected 1",
                coeffs[0]
            )));
        }
        Ok(GraphDiagonalState {
            graph,
            labels,
            coeffs,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, x: usize) -> f64 {
        self.coeffs[x]
    }

    /// Eigenvalue on `|psi_y>`.
    pub fn eigenvalue(&self, y: usize) -> f64 {
        self.signed_sum(y, 0) / self.graph.basis_size() as f64
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.graph.basis_size())
            .map(|y| self.eigenvalue(y))
            .collect()
    }

    /// `sum_x s_x (-1)^{x.y} (-1)^{sum_E x_i x_j (z_i ^ z_j)}`.
    fn signed_sum(&self, y: usize, z: usize) -> f64 {
        let mut acc = 0.0;
        for (x, &s) in self.coeffs.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let flips = self
                .graph
                .edges
                .iter()
                .filter(|&&(a, b)| {
                    let (ba, bb) = (self.graph.bit(a), self.graph.bit(b));
                    x & ba != 0 && x & bb != 0 && ((z & ba != 0) != (z & bb != 0))
                })
                .count();
            let edge_sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
            acc += s * parity(x & y) * edge_sign;
        }
        acc
    }

    pub fn positivity_check(&self) -> PositivityReport {
        let (worst_y, min_value) = (0..self.graph.basis_size())
            .map(|y| (y, self.signed_sum(y, 0)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        PositivityReport {
            positive: min_value >= -1e-12,
            worst_y,
            min_value,
        }
    }

    /// `2^N` times the smallest eigenvalue of the partial transpose over the
    /// vertices set in `z`, together with the minimizing `y`.
    pub fn pt_min_coefficient_with_index(&self, z: usize) -> (usize, f64) {
        (0..self.graph.basis_size())
            .map(|y| (y, self.signed_sum(y, z)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
    }

    pub fn pt_min_coefficient(&self, z: usize) -> f64 {
        self.pt_min_coefficient_with_index(z).1
    }

    /// Bipartition mask selecting the given labels.
    pub fn bipartition(&self, side: &[Qubit]) -> Result<usize> {
        side.iter().try_fold(0usize, |m, q| {
            let p = self
                .labels
                .iter()
                .position(|l| l == q)
                .ok_or(EdssError::UnknownQubit(*q))?;
            Ok(m | self.graph.bit(p))
        })
    }

    /// Stabilizer expansion as `(s_x, K_x)` pairs, skipping zero coefficients.
    pub fn terms(&self) -> Vec<(f64, PauliWord)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0)
            .map(|(x, &s)| (s, stabilizer_product(&self.graph, x)))
            .collect()
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        let dim = self.graph.basis_size();
        let mut m = CMatrix::zeros(dim, dim);
        for (s, w) in self.terms() {
            m += w.matrix() * c64(s, 0.0);
        }
        m /= c64(dim as f64, 0.0);
        DensityMatrix::from_matrix(self.labels.clone(), m).expect("labels match vertex count")
    }
}
