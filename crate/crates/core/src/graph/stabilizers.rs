use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use super::{GraphSpec, VertexId};
use crate::error::{Error, Result};
use crate::quantum::{Basis, Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorRole {
    /// `X_v ∏_{N(v)} Z`, with `X_v = X_p X_q` on a redundant vertex.
    Vertex,
    /// `−Z_p Z_q` on a redundant vertex.
    Parity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub pauli: PauliString,
    pub vertex: VertexId,
    pub role: GeneratorRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetLabel {
    A,
    B,
}

impl fmt::Display for SetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetLabel::A => "a",
            SetLabel::B => "b",
        })
    }
}

/// Split of the generators into two locally measurable sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Generator indices in set a.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Per-qubit basis of setting M_a.
    pub setting_a: Vec<Basis>,
    pub setting_b: Vec<Basis>,
}

impl Partition {
    pub fn set(&self, label: SetLabel) -> &[usize] {
        match label {
            SetLabel::A => &self.a,
            SetLabel::B => &self.b,
        }
    }

    pub fn setting(&self, label: SetLabel) -> &[Basis] {
        match label {
            SetLabel::A => &self.setting_a,
            SetLabel::B => &self.setting_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerSet {
    pub generators: Vec<Generator>,
    pub partition: Option<Partition>,
}

impl StabilizerSet {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn paulis(&self) -> impl Iterator<Item = &PauliString> {
        self.generators.iter().map(|g| &g.pauli)
    }

    pub fn all_commute(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| g[i].pauli.commutes_with(&g[j].pauli)))
    }
}

fn swap_xz(p: Pauli) -> Pauli {
    match p {
        Pauli::X => Pauli::Z,
        Pauli::Z => Pauli::X,
        other => other,
    }
}

/// One generator per physical qubit, ordered by vertex; a redundant vertex lists its
/// parity generator first.
pub fn stabilizer_generators(g: &GraphSpec) -> StabilizerSet {
    let n = g.num_qubits();
    let adj = g.adjacency();
    let mut generators = Vec::with_capacity(n);
    for v in g.vertices() {
        if v.is_redundant() {
            let terms = [(v.qubits[0], Pauli::Z), (v.qubits[1], Pauli::Z)];
            generators.push(Generator {
                pauli: PauliString::from_sparse(n, &terms, true),
                vertex: v.id,
                role: GeneratorRole::Parity,
            });
        }
        let mut terms: Vec<(usize, Pauli)> = v.qubits.iter().map(|&q| (q, Pauli::X)).collect();
        for u in &adj[&v.id] {
            let nb = g.vertex(*u).expect("adjacency references known vertices");
            terms.push((nb.z_qubit(), Pauli::Z));
        }
        generators.push(Generator {
            pauli: PauliString::from_sparse(n, &terms, false),
            vertex: v.id,
            role: GeneratorRole::Vertex,
        });
    }
    for gen in &mut generators {
        for &q in g.leaf_hadamard() {
            let l = gen.pauli.letter(q);
            gen.pauli.set_letter(q, swap_xz(l));
        }
    }
    StabilizerSet {
        generators,
        partition: None,
    }
}

/// Two-coloring of the vertex graph, breadth-first from the lowest vertex of each
/// component. Color 0 is set a.
fn two_coloring(g: &GraphSpec) -> Result<BTreeMap<VertexId, u8>> {
    let adj = g.adjacency();
    let mut color: BTreeMap<VertexId, u8> = BTreeMap::new();
    for &start in adj.keys() {
        if color.contains_key(&start) {
            continue;
        }
        color.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let c = color[&v];
            for &u in &adj[&v] {
                match color.get(&u) {
                    None => {
                        color.insert(u, 1 - c);
                        queue.push_back(u);
                    }
                    Some(&cu) if cu == c => return Err(Error::OddCycle(u)),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(color)
}

/// Assign every generator to set a or b so that each set is measurable with one local
/// X/Z setting.
pub fn bipartition_settings(s: &StabilizerSet, g: &GraphSpec) -> Result<Partition> {
    let color = two_coloring(g)?;
    let n = g.num_qubits();
    let mut settings = [vec![Basis::Z; n], vec![Basis::Z; n]];
    for v in g.vertices() {
        let c = color[&v.id] as usize;
        for &q in &v.qubits {
            settings[c][q] = Basis::X;
        }
    }
    for setting in &mut settings {
        for &q in g.leaf_hadamard() {
            setting[q] = match setting[q] {
                Basis::X => Basis::Z,
                _ => Basis::X,
            };
        }
    }
    let mut sets = [Vec::new(), Vec::new()];
    for (i, gen) in s.generators.iter().enumerate() {
        let c = color.get(&gen.vertex).copied().ok_or_else(|| {
            Error::InvalidGraph(format!("generator on unknown vertex {}", gen.vertex))
        })? as usize;
        let set = match gen.role {
            GeneratorRole::Vertex => c,
            GeneratorRole::Parity => 1 - c,
        };
        let measurable = gen
            .pauli
            .letters()
            .iter()
            .zip(&settings[set])
            .all(|(l, b)| *l == Pauli::I || *l == b.pauli());
        if !measurable {
            return Err(Error::SettingMismatch(gen.pauli.to_string()));
        }
        sets[set].push(i);
    }
    let [a, b] = sets;
    let [setting_a, setting_b] = settings;
    Ok(Partition {
        a,
        b,
        setting_a,
        setting_b,
    })
}

impl StabilizerSet {
    /// Generators with their bipartition attached.
    pub fn partitioned(g: &GraphSpec) -> Result<StabilizerSet> {
        let mut s = stabilizer_generators(g);
        s.partition = Some(bipartition_settings(&s, g)?);
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, ring_graph, tree_protocol_graph};

    fn strings(s: &StabilizerSet) -> Vec<String> {
        s.paulis().map(|p| p.to_string()).collect()
    }

    #[test]
    fn triangle_generators() {
        let s = stabilizer_generators(&ring_graph(3).unwrap());
        assert_eq!(strings(&s), vec!["+XZZ", "+ZXZ", "+ZZX"]);
    }

    #[test]
    fn single_vertex() {
        let s = stabilizer_generators(&GraphSpec::simple(1, []).unwrap());
        assert_eq!(strings(&s), vec!["+X"]);
    }

    #[test]
    fn tree_contains_modified_root_generators() {
        let s = stabilizer_generators(&tree_protocol_graph());
        assert_eq!(s.len(), 8);
        assert!(s.all_commute());
        // qubit labels 1..8 = register [1, 0, 2, 4, 6, 3, 5, 7]
        let zz = PauliString::from_sparse(8, &[(0, Pauli::Z), (1, Pauli::Z)], true);
        let xxzz = PauliString::from_sparse(
            8,
            &[(0, Pauli::X), (1, Pauli::X), (2, Pauli::Z), (3, Pauli::Z)],
            false,
        );
        assert!(s.paulis().any(|p| *p == zz));
        assert!(s.paulis().any(|p| *p == xxzz));
    }

    #[test]
    fn path_bipartition() {
        let g = path_graph(4).unwrap();
        let s = stabilizer_generators(&g);
        let p = bipartition_settings(&s, &g).unwrap();
        assert_eq!(p.a, vec![0, 2]);
        assert_eq!(p.b, vec![1, 3]);
        assert_eq!(p.setting_a, vec![Basis::X, Basis::Z, Basis::X, Basis::Z]);
    }

    #[test]
    fn odd_ring_rejected() {
        let g = ring_graph(5).unwrap();
        let s = stabilizer_generators(&g);
        assert!(matches!(
            bipartition_settings(&s, &g),
            Err(Error::OddCycle(_))
        ));
    }

    #[test]
    fn hexagon_alternates() {
        let g = ring_graph(6).unwrap();
        let p = StabilizerSet::partitioned(&g).unwrap().partition.unwrap();
        assert_eq!(p.a, vec![0, 2, 4]);
        assert_eq!(p.b, vec![1, 3, 5]);
    }

    #[test]
    fn tree_bipartition_is_measurable() {
        let g = tree_protocol_graph();
        let s = StabilizerSet::partitioned(&g).unwrap();
        let p = s.partition.as_ref().unwrap();
        assert_eq!(p.a.len() + p.b.len(), 8);
        // leaves sit at even depth with the root, so their X-type letter becomes Z
        assert_eq!(p.setting_a[4], Basis::Z);
    }
}
