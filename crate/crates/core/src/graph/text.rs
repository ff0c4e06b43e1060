//! Line-oriented graph file format.
//!
//! ```text
//! format_version 1
//! vertex 0 1 0      # id, then one or two physical qubits
//! vertex 1 2
//! edge 0 1
//! leaf 2            # qubit whose Hadamard is absorbed in the basis
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{GraphSpec, Vertex, VertexId};
use crate::error::{Error, Result};

pub const GRAPH_FORMAT_VERSION: u32 = 1;

impl GraphSpec {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "format_version {GRAPH_FORMAT_VERSION}").unwrap();
        for v in self.vertices() {
            write!(out, "vertex {}", v.id).unwrap();
            for q in &v.qubits {
                write!(out, " {q}").unwrap();
            }
            out.push('\n');
        }
        for (a, b) in self.edges() {
            writeln!(out, "edge {a} {b}").unwrap();
        }
        for q in self.leaf_hadamard() {
            writeln!(out, "leaf {q}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut leaves = Vec::new();
        let mut version = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let nums: Vec<&str> = parts.collect();
            let parse_all = |what: &str| -> Result<Vec<usize>> {
                nums.iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| Error::parse(line_no, format!("bad {what} field {s:?}")))
                    })
                    .collect()
            };
            match key {
                "format_version" => {
                    let v = parse_all("version")?;
                    if v != [GRAPH_FORMAT_VERSION as usize] {
                        return Err(Error::parse(
                            line_no,
                            format!("unsupported format version {line:?}"),
                        ));
                    }
                    version = Some(v[0]);
                }
                "vertex" => {
                    let v = parse_all("vertex")?;
                    if v.len() < 2 {
                        return Err(Error::parse(line_no, "vertex needs an id and qubits"));
                    }
                    vertices.push(Vertex {
                        id: v[0] as VertexId,
                        qubits: v[1..].to_vec(),
                    });
                }
                "edge" => {
                    let v = parse_all("edge")?;
                    if v.len() != 2 {
                        return Err(Error::parse(line_no, "edge needs two vertex ids"));
                    }
                    edges.push((v[0] as VertexId, v[1] as VertexId));
                }
                "leaf" => {
                    let v = parse_all("leaf")?;
                    if v.len() != 1 {
                        return Err(Error::parse(line_no, "leaf needs one qubit"));
                    }
                    leaves.push(v[0]);
                }
                other => return Err(Error::parse(line_no, format!("unknown record {other:?}"))),
            }
        }
        if version.is_none() {
            return Err(Error::parse(0, "missing format_version"));
        }
        GraphSpec::new(vertices, edges, leaves)
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GraphSpec::from_text(s)
    }
}
