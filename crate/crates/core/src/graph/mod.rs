//! Graph-state descriptions, stabilizer generators, oracles and graph extraction.

mod extract;
mod oracle;
mod stabilizers;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub use extract::{extract_graph, ExtractedGraph, LocalGate, LocalOp};
pub use oracle::{graph_state_tableau, graph_state_vector, graph_state_vector_with_limit};
pub use stabilizers::{
    bipartition_settings, stabilizer_generators, Generator, GeneratorRole, Partition, SetLabel,
    StabilizerSet,
};
pub use text::GRAPH_FORMAT_VERSION;

pub type VertexId = u32;

/// A logical vertex realized by one physical qubit, or two for a redundantly encoded
/// vertex. For `[p, q]` the logical basis is `|0⟩_L = |1_p 0_q⟩`, `|1⟩_L = |0_p 1_q⟩`,
/// so `Z_L = Z_q` and `X_L = X_p X_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: VertexId,
    pub qubits: Vec<usize>,
}

impl Vertex {
    pub fn is_redundant(&self) -> bool {
        self.qubits.len() == 2
    }

    /// The physical qubit carrying `Z_L`.
    pub fn z_qubit(&self) -> usize {
        *self.qubits.last().expect("vertex without qubits")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    vertices: Vec<Vertex>,
    edges: BTreeSet<(VertexId, VertexId)>,
    leaf_hadamard: BTreeSet<usize>,
    n_qubits: usize,
}

impl GraphSpec {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        leaf_hadamard: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !ids.insert(v.id) {
                return Err(Error::InvalidGraph(format!("duplicate vertex {}", v.id)));
            }
            if v.qubits.is_empty() || v.qubits.len() > 2 {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} has {} physical qubits; expected 1 or 2",
                    v.id,
                    v.qubits.len()
                )));
            }
            for &q in &v.qubits {
                if !seen.insert(q) {
                    return Err(Error::InvalidGraph(format!("qubit {q} appears twice")));
                }
            }
        }
        let n_qubits = seen.len();
        if seen.iter().next_back().is_some_and(|&m| m + 1 != n_qubits) {
            return Err(Error::InvalidGraph(
                "physical qubits must be numbered 0..n without gaps".into(),
            ));
        }
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            for x in [a, b] {
                if !ids.contains(&x) {
                    return Err(Error::InvalidGraph(format!(
                        "edge references unknown vertex {x}"
                    )));
                }
            }
            edge_set.insert((a.min(b), a.max(b)));
        }
        let leaf_hadamard: BTreeSet<usize> = leaf_hadamard.into_iter().collect();
        if let Some(&q) = leaf_hadamard.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidGraph(format!(
                "leaf qubit {q} does not exist"
            )));
        }
        Ok(GraphSpec {
            vertices,
            edges: edge_set,
            leaf_hadamard,
            n_qubits,
        })
    }

    /// Graph with vertex `i` on physical qubit `i`.
    pub fn simple(n: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let vertices = (0..n)
            .map(|i| Vertex {
                id: i as VertexId,
                qubits: vec![i],
            })
            .collect();
        GraphSpec::new(vertices, edges, [])
    }

    pub fn num_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn leaf_hadamard(&self) -> &BTreeSet<usize> {
        &self.leaf_hadamard
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, id: VertexId) -> Vec<VertexId> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == id {
                    Some(b)
                } else if b == id {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub(crate) fn adjacency(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut adj: BTreeMap<VertexId, Vec<VertexId>> =
            self.vertices.iter().map(|v| (v.id, Vec::new())).collect();
        for &(a, b) in &self.edges {
            adj.get_mut(&a).unwrap().push(b);
            adj.get_mut(&b).unwrap().push(a);
        }
        adj
    }
}

/// Cycle on `n ≥ 3` single-qubit vertices.
pub fn ring_graph(n: usize) -> Result<GraphSpec> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "ring needs at least 3 vertices, got {n}"
        )));
    }
    let edges = (0..n).map(|i| (i as VertexId, ((i + 1) % n) as VertexId));
    GraphSpec::simple(n, edges)
}

/// Open path on `n ≥ 1` vertices.
pub fn path_graph(n: usize) -> Result<GraphSpec> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "path needs at least one vertex".into(),
        ));
    }
    GraphSpec::simple(n, (1..n).map(|i| ((i - 1) as VertexId, i as VertexId)))
}

/// Rooted tree with `branching[d]` children per vertex at depth `d`, labeled breadth-first.
pub fn tree_graph(branching: &[usize]) -> Result<GraphSpec> {
    if branching.is_empty() || branching.contains(&0) {
        return Err(Error::InvalidParameter(
            "branching must be non-empty with positive entries".into(),
        ));
    }
    let mut edges = Vec::new();
    let mut level = vec![0 as VertexId];
    let mut next_id: VertexId = 1;
    for &b in branching {
        let mut next = Vec::new();
        for &parent in &level {
            for _ in 0..b {
                edges.push((parent, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        level = next;
    }
    GraphSpec::simple(next_id as usize, edges)
}

/// Expected graph after a ring protocol with `n_cycles` emission cycles per atom.
///
/// Register order is spin 1, spin 2, then photons in emission order, so atom 1 emits
/// `a_k = 2 + 2k` and atom 2 emits `b_k = 3 + 2k`. The spins form a redundant root
/// `[1, 0]`. The odd variant closes the ring `R, a_{N-1}, …, a_0, b_0, …, b_{N-1}`;
/// the even variant fuses `a_0` and `b_0` into a second redundant vertex `[b_0, a_0]`.
pub fn ring_protocol_graph(n_cycles: usize, odd: bool) -> Result<GraphSpec> {
    if n_cycles < 1 || (!odd && n_cycles < 2) {
        return Err(Error::InvalidParameter(format!(
            "ring protocol needs at least {} cycles",
            if odd { 1 } else { 2 }
        )));
    }
    let a = |k: usize| 2 + 2 * k;
    let b = |k: usize| 3 + 2 * k;
    let mut cycle: Vec<Vec<usize>> = vec![vec![1, 0]];
    for k in (1..n_cycles).rev() {
        cycle.push(vec![a(k)]);
    }
    if odd {
        cycle.push(vec![a(0)]);
        cycle.push(vec![b(0)]);
    } else {
        cycle.push(vec![b(0), a(0)]);
    }
    for k in 1..n_cycles {
        cycle.push(vec![b(k)]);
    }
    let n = cycle.len();
    let vertices = cycle
        .into_iter()
        .enumerate()
        .map(|(i, qubits)| Vertex {
            id: i as VertexId,
            qubits,
        })
        .collect();
    let edges = (0..n).map(|i| (i as VertexId, ((i + 1) % n) as VertexId));
    GraphSpec::new(vertices, edges, [])
}

/// Expected graph after the tree protocol: redundant root `[1, 0]`, children `a_0 = 2`
/// and `b_0 = 3`, leaves `a_1, a_2` under `a_0` and `b_1, b_2` under `b_0`, with the
/// leaf Hadamards absorbed into the measurement basis.
pub fn tree_protocol_graph() -> GraphSpec {
    let vertices = vec![
        Vertex {
            id: 0,
            qubits: vec![1, 0],
        },
        Vertex {
            id: 1,
            qubits: vec![2],
        },
        Vertex {
            id: 2,
            qubits: vec![3],
        },
        Vertex {
            id: 3,
            qubits: vec![4],
        },
        Vertex {
            id: 4,
            qubits: vec![6],
        },
        Vertex {
            id: 5,
            qubits: vec![5],
        },
        Vertex {
            id: 6,
            qubits: vec![7],
        },
    ];
    let edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)];
    GraphSpec::new(vertices, edges, [4, 5, 6, 7]).expect("static tree graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GraphSpec::simple(2, [(0, 0)]).is_err());
        assert!(GraphSpec::simple(2, [(0, 5)]).is_err());
        let v = vec![
            Vertex {
                id: 0,
                qubits: vec![0, 2],
            },
            Vertex {
                id: 1,
                qubits: vec![1],
            },
        ];
        assert!(GraphSpec::new(v, [(0, 1)], []).is_ok());
        let gap = vec![Vertex {
            id: 0,
            qubits: vec![1],
        }];
        assert!(GraphSpec::new(gap, [], []).is_err());
        let triple = vec![Vertex {
            id: 0,
            qubits: vec![0, 1, 2],
        }];
        assert!(GraphSpec::new(triple, [], []).is_err());
    }

    #[test]
    fn builders() {
        let box_ = ring_graph(4).unwrap();
        assert_eq!(box_.edges().len(), 4);
        assert_eq!(box_.neighbors(0), vec![1, 3]);
        let t = tree_graph(&[2, 2]).unwrap();
        assert_eq!(t.num_vertices(), 7);
        assert_eq!(t.neighbors(0), vec![1, 2]);
        assert_eq!(t.neighbors(1), vec![0, 3, 4]);
        assert!(ring_graph(2).is_err());
        assert_eq!(path_graph(4).unwrap().edges().len(), 3);
    }

    #[test]
    fn protocol_graph_shapes() {
        let pent = ring_protocol_graph(2, true).unwrap();
        assert_eq!((pent.num_vertices(), pent.num_qubits()), (5, 6));
        let box_ = ring_protocol_graph(2, false).unwrap();
        assert_eq!((box_.num_vertices(), box_.num_qubits()), (4, 6));
        let hex = ring_protocol_graph(3, false).unwrap();
        assert_eq!((hex.num_vertices(), hex.num_qubits()), (6, 8));
        let tree = tree_protocol_graph();
        assert_eq!((tree.num_vertices(), tree.num_qubits()), (7, 8));
    }
}
