//! Line-oriented program file format.
//!
//! ```text
//! format_version 1
//! name box
//! timing 20 20 1.2566370614359172 0 0 0 3.141592653589793
//! init plus
//! emit 1
//! rotate global 1.5707963267948966 0
//! phase 2 3.141592653589793 frame
//! wait global 20
//! fuse
//! measure_spin 1 X 3
//! measure_photon 0 Z
//! graph vertex 0 1 0
//! ```
//!
//! `timing` lists T, t₀, ω_q, both emission delays and both target phases. Lines
//! starting with `graph` carry the expected graph in the graph file format.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Instruction, PhaseKind, ProtocolProgram, Target, Timing};
use crate::error::{Error, Result};
use crate::graph::{GraphSpec, GRAPH_FORMAT_VERSION};
use crate::quantum::{Atom, Basis};

pub const PROGRAM_FORMAT_VERSION: u32 = 1;

pub(super) fn format_instruction(inst: &Instruction) -> String {
    match *inst {
        Instruction::Init(i) => format!("init {i}"),
        Instruction::Emit(a) => format!("emit {}", a.number()),
        Instruction::Rotate {
            target,
            theta,
            phase,
        } => format!("rotate {target} {theta} {phase}"),
        Instruction::PhaseZ { atom, phi, kind } => format!(
            "phase {} {phi} {}",
            atom.number(),
            match kind {
                PhaseKind::Frame => "frame",
                PhaseKind::Evolution => "evolution",
            }
        ),
        Instruction::Fuse => "fuse".to_string(),
        Instruction::Wait {
            target,
            duration_us,
        } => format!("wait {target} {duration_us}"),
        Instruction::MeasureSpin {
            atom,
            basis,
            max_attempts,
        } => format!("measure_spin {} {basis} {max_attempts}", atom.number()),
        Instruction::MeasurePhoton { photon, basis } => format!("measure_photon {photon} {basis}"),
    }
}

fn parse_atom(s: &str) -> Result<Atom> {
    s.parse::<u8>()
        .ok()
        .and_then(Atom::from_number)
        .ok_or_else(|| Error::parse(0, format!("bad atom {s:?}")))
}

fn parse_target(s: &str) -> Result<Target> {
    if s == "global" {
        Ok(Target::Global)
    } else {
        parse_atom(s).map(Target::Atom)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(0, format!("bad number {s:?}")))
}

fn parse_instruction(f: &[&str]) -> Result<Instruction> {
    let arity = |n: usize| {
        if f.len() == n + 1 {
            Ok(())
        } else {
            Err(Error::parse(0, format!("{} takes {n} arguments", f[0])))
        }
    };
    Ok(match f[0] {
        "init" => {
            arity(1)?;
            Instruction::Init(f[1].parse()?)
        }
        "emit" => {
            arity(1)?;
            Instruction::Emit(parse_atom(f[1])?)
        }
        "rotate" => {
            arity(3)?;
            Instruction::Rotate {
                target: parse_target(f[1])?,
                theta: parse_f64(f[2])?,
                phase: parse_f64(f[3])?,
            }
        }
        "phase" => {
            arity(3)?;
            Instruction::PhaseZ {
                atom: parse_atom(f[1])?,
                phi: parse_f64(f[2])?,
                kind: match f[3] {
                    "frame" => PhaseKind::Frame,
                    "evolution" => PhaseKind::Evolution,
                    other => return Err(Error::parse(0, format!("bad phase kind {other:?}"))),
                },
            }
        }
        "fuse" => {
            arity(0)?;
            Instruction::Fuse
        }
        "wait" => {
            arity(2)?;
            Instruction::Wait {
                target: parse_target(f[1])?,
                duration_us: parse_f64(f[2])?,
            }
        }
        "measure_spin" => {
            arity(3)?;
            Instruction::MeasureSpin {
                atom: parse_atom(f[1])?,
                basis: f[2].parse::<Basis>()?,
                max_attempts: f[3]
                    .parse()
                    .map_err(|_| Error::parse(0, format!("bad attempt count {:?}", f[3])))?,
            }
        }
        "measure_photon" => {
            arity(2)?;
            Instruction::MeasurePhoton {
                photon: f[1]
                    .parse()
                    .map_err(|_| Error::parse(0, format!("bad photon index {:?}", f[1])))?,
                basis: f[2].parse::<Basis>()?,
            }
        }
        other => return Err(Error::parse(0, format!("unknown instruction {other:?}"))),
    })
}

impl ProtocolProgram {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.timing;
        writeln!(out, "format_version {PROGRAM_FORMAT_VERSION}").unwrap();
        writeln!(out, "name {}", self.name).unwrap();
        writeln!(
            out,
            "timing {} {} {} {} {} {} {}",
            t.photon_separation_us,
            t.free_evolution_us,
            t.omega_q,
            t.emission_delay_us[0],
            t.emission_delay_us[1],
            t.target_phases[0],
            t.target_phases[1]
        )
        .unwrap();
        for inst in &self.instructions {
            writeln!(out, "{}", format_instruction(inst)).unwrap();
        }
        if let Some(g) = &self.expected {
            for line in g.to_text().lines().skip(1) {
                writeln!(out, "graph {line}").unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut version = false;
        let mut name = String::from("program");
        let mut timing = Timing::default();
        let mut instructions = Vec::new();
        let mut graph_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let relabel = |e: Error| match e {
                Error::Parse { message, .. } => Error::parse(ln, message),
                e => e,
            };
            match f[0] {
                "format_version" => {
                    if f.len() != 2 || f[1] != PROGRAM_FORMAT_VERSION.to_string() {
                        return Err(Error::parse(
                            ln,
                            format!("unsupported version line {line:?}"),
                        ));
                    }
                    version = true;
                }
                "name" if f.len() == 2 => name = f[1].to_string(),
                "timing" => {
                    if f.len() != 8 {
                        return Err(Error::parse(ln, "timing takes 7 numbers"));
                    }
                    let v = f[1..]
                        .iter()
                        .map(|s| parse_f64(s))
                        .collect::<Result<Vec<_>>>()
                        .map_err(relabel)?;
                    timing = Timing {
                        photon_separation_us: v[0],
                        free_evolution_us: v[1],
                        omega_q: v[2],
                        emission_delay_us: [v[3], v[4]],
                        target_phases: [v[5], v[6]],
                    };
                }
                "graph" => graph_lines.push(f[1..].join(" ")),
                _ => instructions.push(parse_instruction(&f).map_err(relabel)?),
            }
        }
        if !version {
            return Err(Error::parse(0, "missing format_version"));
        }
        let expected = if graph_lines.is_empty() {
            None
        } else {
            let g = format!(
                "format_version {GRAPH_FORMAT_VERSION}\n{}\n",
                graph_lines.join("\n")
            );
            Some(GraphSpec::from_text(&g)?)
        };
        let p = ProtocolProgram {
            name,
            instructions,
            timing,
            expected,
        };
        p.validate()?;
        Ok(p)
    }
}

impl FromStr for ProtocolProgram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolProgram::from_text(s)
    }
}
