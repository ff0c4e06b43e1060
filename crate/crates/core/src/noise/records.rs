//! Line-oriented detector record files.
//!
//! ```text
//! format_version 1
//! seed 7
//! program box
//! click <run_id> <D_R|D_L> <time_ns> <origin>
//! shot <run_id> <a|b> <bases> <outcomes>
//! ```
//!
//! Times are written to 1 ps. `origin` is the emitting qubit (`S1`, `S2`, or
//! `P<order>.<atom>`). `bases` holds one letter per register qubit and `outcomes` one `+`
//! or `-` per qubit.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::SetLabel;
use crate::quantum::{Basis, QubitId};

pub const RECORD_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    R,
    L,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::R => "D_R",
            Detector::L => "D_L",
        })
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D_R" => Ok(Detector::R),
            "D_L" => Ok(Detector::L),
            other => Err(Error::parse(0, format!("unknown detector {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickRecord {
    pub run_id: u64,
    pub detector: Detector,
    /// Arrival time in ns after the pulse start.
    pub time_ns: f64,
    pub origin: QubitId,
}

/// Outcomes of one accepted coincidence in a fixed measurement setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub run_id: u64,
    pub set: SetLabel,
    pub bases: Vec<Basis>,
    pub outcomes: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordFile {
    pub seed: Option<u64>,
    pub program: Option<String>,
    pub clicks: Vec<ClickRecord>,
    pub shots: Vec<ShotRecord>,
}

pub fn write_records(f: &RecordFile) -> String {
    let mut out = String::new();
    writeln!(out, "format_version {RECORD_FORMAT_VERSION}").unwrap();
    if let Some(seed) = f.seed {
        writeln!(out, "seed {seed}").unwrap();
    }
    if let Some(p) = &f.program {
        writeln!(out, "program {p}").unwrap();
    }
    for c in &f.clicks {
        writeln!(
            out,
            "click {} {} {:.3} {}",
            c.run_id, c.detector, c.time_ns, c.origin
        )
        .unwrap();
    }
    for s in &f.shots {
        let bases: String = s.bases.iter().map(|b| b.as_char()).collect();
        let outcomes: String = s
            .outcomes
            .iter()
            .map(|&o| if o > 0 { '+' } else { '-' })
            .collect();
        writeln!(out, "shot {} {} {} {}", s.run_id, s.set, bases, outcomes).unwrap();
    }
    out
}

pub fn parse_records(text: &str) -> Result<RecordFile> {
    let mut file = RecordFile::default();
    let mut version = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |m: String| Error::parse(ln, m);
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("bad integer {s:?}")))
        };
        match fields[0] {
            "format_version" => {
                if fields.len() != 2 || num(fields[1])? != RECORD_FORMAT_VERSION as u64 {
                    return Err(err(format!("unsupported version line {line:?}")));
                }
                version = true;
            }
            "seed" if fields.len() == 2 => file.seed = Some(num(fields[1])?),
            "program" if fields.len() == 2 => file.program = Some(fields[1].to_string()),
            "click" if fields.len() == 5 => {
                let time_ns: f64 = fields[3]
                    .parse()
                    .map_err(|_| err(format!("bad time {:?}", fields[3])))?;
                if !(time_ns >= 0.0) {
                    return Err(err("click time must be non-negative".into()));
                }
                file.clicks.push(ClickRecord {
                    run_id: num(fields[1])?,
                    detector: fields[2].parse().map_err(|e: Error| err(e.to_string()))?,
                    time_ns,
                    origin: fields[4].parse().map_err(|e: Error| err(e.to_string()))?,
                });
            }
            "shot" if fields.len() == 5 => {
                let set = match fields[2] {
                    "a" => SetLabel::A,
                    "b" => SetLabel::B,
                    other => return Err(err(format!("unknown set {other:?}"))),
                };
                let bases = fields[3]
                    .chars()
                    .map(|c| Basis::from_char(c).ok_or_else(|| err(format!("bad basis {c:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                let outcomes = fields[4]
                    .chars()
                    .map(|c| match c {
                        '+' => Ok(1),
                        '-' => Ok(-1),
                        _ => Err(err(format!("bad outcome {c:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if bases.len() != outcomes.len() {
                    return Err(err("bases and outcomes differ in length".into()));
                }
                file.shots.push(ShotRecord {
                    run_id: num(fields[1])?,
                    set,
                    bases,
                    outcomes,
                });
            }
            _ => return Err(err(format!("unrecognized record {line:?}"))),
        }
    }
    if !version {
        return Err(Error::parse(0, "missing format_version"));
    }
    Ok(file)
}
