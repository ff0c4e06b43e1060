use super::GraphSpec;
use crate::error::Result;
use crate::gf2::BitRow;
use crate::quantum::dense::{mat_hadamard, PureState, DEFAULT_DENSE_LIMIT};
use crate::quantum::{Pauli, PauliString, StabilizerTableau};

trait Register {
    fn h(&mut self, q: usize) -> Result<()>;
    fn cnot(&mut self, c: usize, t: usize) -> Result<()>;
    fn x(&mut self, q: usize) -> Result<()>;
}

impl Register for PureState {
    fn h(&mut self, q: usize) -> Result<()> {
        self.apply_matrix(q, &mat_hadamard())
    }
    fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.apply_cnot(c, t)
    }
    fn x(&mut self, q: usize) -> Result<()> {
        let p = PauliString::from_sparse(self.num_qubits(), &[(q, Pauli::X)], false);
        self.apply_pauli_string(&p)
    }
}

impl Register for StabilizerTableau {
    fn h(&mut self, q: usize) -> Result<()> {
        StabilizerTableau::h(self, q)
    }
    fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        StabilizerTableau::cnot(self, c, t)
    }
    fn x(&mut self, q: usize) -> Result<()> {
        StabilizerTableau::x(self, q)
    }
}

/// Redundant-encoding isometry `|0⟩_L → |1_p 0_q⟩`, `|1⟩_L → |0_p 1_q⟩` followed by the
/// leaf Hadamards. The plain graph state must already sit on the `z_qubit` of every vertex.
fn encode<R: Register>(g: &GraphSpec, r: &mut R) -> Result<()> {
    for v in g.vertices() {
        if v.is_redundant() {
            let (p, q) = (v.qubits[0], v.qubits[1]);
            r.cnot(q, p)?;
            r.x(p)?;
        }
    }
    for &q in g.leaf_hadamard() {
        r.h(q)?;
    }
    Ok(())
}

/// Dense oracle: `|+⟩` on every vertex, CZ per edge, then encoding and leaf Hadamards.
pub fn graph_state_vector(g: &GraphSpec) -> Result<PureState> {
    graph_state_vector_with_limit(g, DEFAULT_DENSE_LIMIT)
}

pub fn graph_state_vector_with_limit(g: &GraphSpec, limit: usize) -> Result<PureState> {
    let mut s = PureState::zero_with_limit(g.num_qubits(), limit)?;
    for v in g.vertices() {
        s.h(v.z_qubit())?;
    }
    for &(a, b) in g.edges() {
        let qa = g.vertex(a).expect("edge endpoints exist").z_qubit();
        let qb = g.vertex(b).expect("edge endpoints exist").z_qubit();
        s.apply_cz(qa, qb)?;
    }
    encode(g, &mut s)?;
    Ok(s)
}

/// The same state as [`graph_state_vector`] on the tableau backend.
pub fn graph_state_tableau(g: &GraphSpec) -> Result<StabilizerTableau> {
    let n = g.num_qubits();
    let mut adj = vec![BitRow::zeros(n); n];
    for &(a, b) in g.edges() {
        let qa = g.vertex(a).expect("edge endpoints exist").z_qubit();
        let qb = g.vertex(b).expect("edge endpoints exist").z_qubit();
        adj[qa].set(qb, true);
        adj[qb].set(qa, true);
    }
    // non-logical qubits of redundant vertices start in |0⟩: stabilizer Z, no edges
    let mut is_vertex = vec![false; n];
    for v in g.vertices() {
        is_vertex[v.z_qubit()] = true;
    }
    let mut t = StabilizerTableau::from_graph(&adj)?;
    for (q, &v) in is_vertex.iter().enumerate() {
        if !v {
            t.h(q)?;
        }
    }
    encode(g, &mut t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        ring_graph, ring_protocol_graph, stabilizer_generators, tree_protocol_graph, GraphSpec,
    };
    use crate::quantum::dense::superpose;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_vertex_graph() {
        let g = GraphSpec::simple(2, [(0, 1)]).unwrap();
        let s = graph_state_vector(&g).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = superpose(&[(h, "0+"), (h, "1-")]).unwrap();
        assert_abs_diff_eq!(s.overlap(&expect), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_is_stabilized() {
        let graphs = [
            ring_graph(4).unwrap(),
            ring_protocol_graph(2, false).unwrap(),
            ring_protocol_graph(3, false).unwrap(),
            ring_protocol_graph(2, true).unwrap(),
            tree_protocol_graph(),
        ];
        for g in &graphs {
            let s = graph_state_vector(g).unwrap();
            let t = graph_state_tableau(g).unwrap();
            for gen in stabilizer_generators(g).paulis() {
                assert_abs_diff_eq!(s.expectation(gen).unwrap(), 1.0, epsilon = 1e-10);
                assert_eq!(t.expectation(gen).unwrap(), 1);
            }
        }
    }
}
