use std::fmt;

use super::{stabilizer_generators, GraphSpec, VertexId};
use crate::error::Result;
use crate::quantum::tableau::Row;
use crate::quantum::StabilizerTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalGate {
    H,
    S,
    Sdg,
    Z,
}

impl fmt::Display for LocalGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalGate::H => "H",
            LocalGate::S => "S",
            LocalGate::Sdg => "Sdg",
            LocalGate::Z => "Z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalOp {
    pub qubit: usize,
    pub gate: LocalGate,
}

impl LocalOp {
    pub fn apply(&self, t: &mut StabilizerTableau) -> Result<()> {
        match self.gate {
            LocalGate::H => t.h(self.qubit),
            LocalGate::S => t.s(self.qubit),
            LocalGate::Sdg => t.s_dag(self.qubit),
            LocalGate::Z => t.z(self.qubit),
        }
    }
}

/// A graph together with the local Cliffords that map the input state onto its graph
/// state: applying `local_ops` in order to the input yields `|G⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedGraph {
    pub graph: GraphSpec,
    pub local_ops: Vec<LocalOp>,
}

impl ExtractedGraph {
    /// Check that the local ops carry `t` onto the graph state, by stabilizer-group equality.
    pub fn verify(&self, t: &StabilizerTableau) -> Result<bool> {
        let mut w = t.clone();
        for op in &self.local_ops {
            op.apply(&mut w)?;
        }
        let gens: Vec<_> = stabilizer_generators(&self.graph)
            .paulis()
            .cloned()
            .collect();
        Ok(w.is_stabilized_by(&gens))
    }
}

struct Gens {
    rows: Vec<Row>,
    ops: Vec<LocalOp>,
}

impl Gens {
    fn h(&mut self, q: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x.get(q), r.z.get(q));
            r.negative ^= x & z;
            r.x.set(q, z);
            r.z.set(q, x);
        }
        self.ops.push(LocalOp {
            qubit: q,
            gate: LocalGate::H,
        });
    }

    fn sdg(&mut self, q: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x.get(q), r.z.get(q));
            r.negative ^= x & !z;
            r.z.set(q, z ^ x);
        }
        self.ops.push(LocalOp {
            qubit: q,
            gate: LocalGate::Sdg,
        });
    }

    fn z(&mut self, q: usize) {
        for r in &mut self.rows {
            r.negative ^= r.x.get(q);
        }
        self.ops.push(LocalOp {
            qubit: q,
            gate: LocalGate::Z,
        });
    }

    /// Eliminate column `c` of the chosen block using rows `from..`, restricted to rows in
    /// `scope`. Returns true when a pivot was found and placed at `from`.
    fn pivot(&mut self, c: usize, from: usize, scope: std::ops::Range<usize>, use_x: bool) -> bool {
        let bit = |r: &Row| if use_x { r.x.get(c) } else { r.z.get(c) };
        let Some(p) = (from..scope.end).find(|&i| bit(&self.rows[i])) else {
            return false;
        };
        self.rows.swap(from, p);
        let pivot = self.rows[from].clone();
        for i in scope {
            if i != from && bit(&self.rows[i]) {
                self.rows[i].left_multiply(&pivot);
            }
        }
        true
    }
}

/// Bring a stabilizer state to graph form by Gaussian elimination and local Cliffords.
pub fn extract_graph(t: &StabilizerTableau) -> ExtractedGraph {
    let n = t.num_qubits();
    let mut g = Gens {
        rows: t.stabilizer_rows().to_vec(),
        ops: Vec::new(),
    };
    let mut rank = 0;
    let mut is_pivot = vec![false; n];
    for c in 0..n {
        if g.pivot(c, rank, 0..n, true) {
            is_pivot[c] = true;
            rank += 1;
        }
    }
    // Z-only rows have full rank on the non-pivot columns; rotating those columns with
    // H makes the X block invertible.
    let order = (0..n)
        .filter(|&c| !is_pivot[c])
        .chain((0..n).filter(|&c| is_pivot[c]));
    let mut k = rank;
    let mut rotate = Vec::new();
    for c in order {
        if k == n {
            break;
        }
        if g.pivot(c, k, rank..n, false) {
            rotate.push(c);
            k += 1;
        }
    }
    for c in rotate {
        g.h(c);
    }
    for c in 0..n {
        let found = g.pivot(c, c, 0..n, true);
        debug_assert!(found, "X block must be invertible");
    }
    for i in 0..n {
        if g.rows[i].z.get(i) {
            g.sdg(i);
        }
        if g.rows[i].negative {
            g.z(i);
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in g.rows[i].z.iter_ones() {
            if j > i {
                edges.push((i as VertexId, j as VertexId));
            }
        }
    }
    let graph = GraphSpec::simple(n, edges).expect("extracted adjacency is a simple graph");
    ExtractedGraph {
        graph,
        local_ops: g.ops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_state_tableau, ring_graph, ring_protocol_graph};

    #[test]
    fn plus_plus_is_empty_graph() {
        let mut t = StabilizerTableau::zero(2);
        t.h(0).unwrap();
        t.h(1).unwrap();
        let e = extract_graph(&t);
        assert!(e.graph.edges().is_empty());
        assert!(e.local_ops.is_empty());
        assert!(e.verify(&t).unwrap());
    }

    #[test]
    fn bell_pair_needs_one_hadamard() {
        let mut t = StabilizerTableau::zero(2);
        t.h(0).unwrap();
        t.cnot(0, 1).unwrap();
        t.x(1).unwrap();
        let e = extract_graph(&t);
        assert_eq!(e.graph.edges().len(), 1);
        let hs = e
            .local_ops
            .iter()
            .filter(|o| o.gate == LocalGate::H)
            .count();
        assert_eq!(hs, 1);
        assert!(e.verify(&t).unwrap());
    }

    #[test]
    fn graph_state_round_trip() {
        let g = ring_graph(6).unwrap();
        let t = graph_state_tableau(&g).unwrap();
        let e = extract_graph(&t);
        assert_eq!(e.graph.edges(), g.edges());
        assert!(e.verify(&t).unwrap());
    }

    #[test]
    fn redundant_graph_round_trip() {
        let g = ring_protocol_graph(3, false).unwrap();
        let t = graph_state_tableau(&g).unwrap();
        let e = extract_graph(&t);
        assert!(e.verify(&t).unwrap());
        // a redundant vertex adds one leaf-like qubit, so the graph has more edges
        assert!(e.graph.edges().len() >= 6);
    }
}
