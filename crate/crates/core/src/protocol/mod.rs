//! Protocol instruction set, built-in ring/tree programs and phase calibration.

mod exec;
mod text;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{ring_protocol_graph, tree_protocol_graph, GraphSpec, Vertex};
use crate::quantum::tableau::quarter_turns;
use crate::quantum::{Atom, Basis, SpinInit};

pub use exec::{
    execute, noise_sites, run, run_exhaustive, BackendChoice, Branch, ExecOptions, Execution,
    FaultRecord, HeraldMode, HeraldRecord, MeasurementRecord, NoiseSite, RunConfig, RunResult,
};
pub use text::PROGRAM_FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Atom(Atom),
    /// Both atoms, as with a global Raman beam.
    Global,
}

impl Target {
    pub fn atoms(self) -> &'static [Atom] {
        match self {
            Target::Atom(Atom::One) => &[Atom::One],
            Target::Atom(Atom::Two) => &[Atom::Two],
            Target::Global => &Atom::BOTH,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Atom(a) => write!(f, "{}", a.number()),
            Target::Global => f.write_str("global"),
        }
    }
}

/// Frame phases are fixed gates; evolution phases are recomputed from the timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    Frame,
    Evolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instruction {
    Init(SpinInit),
    Emit(Atom),
    Rotate {
        target: Target,
        theta: f64,
        phase: f64,
    },
    PhaseZ {
        atom: Atom,
        phi: f64,
        kind: PhaseKind,
    },
    Fuse,
    /// Idle time in µs; only its noise is simulated.
    Wait {
        target: Target,
        duration_us: f64,
    },
    MeasureSpin {
        atom: Atom,
        basis: Basis,
        max_attempts: u32,
    },
    MeasurePhoton {
        photon: usize,
        basis: Basis,
    },
}

impl Instruction {
    pub fn is_clifford(&self) -> bool {
        match *self {
            Instruction::Rotate { theta, phase, .. } => {
                quarter_turns(theta).is_some() && quarter_turns(phase).is_some()
            }
            Instruction::PhaseZ { phi, .. } => quarter_turns(phi).is_some(),
            _ => true,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format_instruction(self))
    }
}

/// Timing parameters in µs and rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    /// Photon separation T.
    pub photon_separation_us: f64,
    /// Free evolution time t₀ before the branch rotation.
    pub free_evolution_us: f64,
    /// Qubit precession frequency ω_q.
    pub omega_q: f64,
    /// Per-atom shift of the emission pulses.
    pub emission_delay_us: [f64; 2],
    /// Branch phases the calibration aims for.
    pub target_phases: [f64; 2],
}

/// Larmor frequency ω_L = 2π × 100 kHz, in rad/µs.
pub const OMEGA_LARMOR: f64 = TAU * 0.1;

impl Default for Timing {
    fn default() -> Self {
        Timing {
            photon_separation_us: 20.0,
            free_evolution_us: 20.0,
            // m_F = ±1 qubit states precess at twice the Larmor frequency
            omega_q: 2.0 * OMEGA_LARMOR,
            emission_delay_us: [0.0, 0.0],
            target_phases: [0.0, PI],
        }
    }
}

impl Timing {
    pub fn period_us(&self) -> f64 {
        TAU / self.omega_q
    }

    /// Accumulated phase of the GHZ branch emitted by `atom`. Atom 2's last emission
    /// happens one photon separation later, so its branch evolves for `t₀ − T`.
    pub fn branch_phase(&self, atom: Atom) -> f64 {
        let lag = match atom {
            Atom::One => 0.0,
            Atom::Two => self.photon_separation_us,
        };
        let t = self.free_evolution_us - lag - self.emission_delay_us[atom.index()];
        (self.omega_q * t).rem_euclid(TAU)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolProgram {
    pub name: String,
    pub instructions: Vec<Instruction>,
    pub timing: Timing,
    pub expected: Option<GraphSpec>,
}

impl ProtocolProgram {
    pub fn new(name: impl Into<String>, instructions: Vec<Instruction>) -> Self {
        ProtocolProgram {
            name: name.into(),
            instructions,
            timing: Timing::default(),
            expected: None,
        }
    }

    pub fn is_clifford(&self) -> bool {
        self.instructions.iter().all(Instruction::is_clifford)
    }

    /// Index of the first non-Clifford instruction.
    pub fn first_non_clifford(&self) -> Option<usize> {
        self.instructions.iter().position(|i| !i.is_clifford())
    }

    pub fn fuse_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Fuse))
            .count()
    }

    pub fn emission_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Emit(_)))
            .count()
    }

    /// Structural checks that do not need a backend.
    pub fn validate(&self) -> Result<()> {
        let bad =
            |i: usize, msg: &str| Err(Error::InvalidProgram(format!("instruction {i}: {msg}")));
        match self.instructions.first() {
            Some(Instruction::Init(_)) => {}
            _ => return Err(Error::InvalidProgram("program must start with init".into())),
        }
        let mut measured = [false; 2];
        for (i, inst) in self.instructions.iter().enumerate() {
            let uses = |a: Atom| measured[a.index()];
            match *inst {
                Instruction::Init(_) if i > 0 => return bad(i, "init may only appear first"),
                Instruction::Fuse if measured.iter().any(|&m| m) => {
                    return bad(i, "fuse requires both spins unmeasured")
                }
                Instruction::Emit(a) | Instruction::PhaseZ { atom: a, .. } if uses(a) => {
                    return bad(i, "spin already measured")
                }
                Instruction::Rotate {
                    target,
                    theta,
                    phase,
                } => {
                    if !theta.is_finite() || !phase.is_finite() {
                        return bad(i, "non-finite angle");
                    }
                    if target.atoms().iter().any(|&a| uses(a)) {
                        return bad(i, "spin already measured");
                    }
                }
                Instruction::Wait { duration_us, .. } if !(duration_us >= 0.0) => {
                    return bad(i, "wait duration must be non-negative")
                }
                Instruction::MeasureSpin {
                    atom, max_attempts, ..
                } => {
                    if max_attempts == 0 {
                        return bad(i, "max_attempts must be at least 1");
                    }
                    if uses(atom) {
                        return bad(i, "spin already measured");
                    }
                    measured[atom.index()] = true;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Recompute every evolution phase and wait from the current timing.
    pub fn apply_timing(&mut self) {
        let timing = self.timing;
        for inst in &mut self.instructions {
            match inst {
                Instruction::PhaseZ {
                    atom,
                    phi,
                    kind: PhaseKind::Evolution,
                } => *phi = timing.branch_phase(*atom),
                Instruction::Wait { duration_us, .. } => *duration_us = timing.free_evolution_us,
                _ => {}
            }
        }
    }

    /// Copy with a different timing, phases recompiled.
    pub fn with_timing(&self, timing: Timing) -> ProtocolProgram {
        let mut p = self.clone();
        p.timing = timing;
        p.apply_timing();
        p
    }

    /// Index of the last fusion, if any.
    pub fn last_fuse(&self) -> Option<usize> {
        self.instructions
            .iter()
            .rposition(|i| matches!(i, Instruction::Fuse))
    }
}

/// Choose t₀ and per-atom emission delays so that each branch phase hits its target.
///
/// t₀ snaps to a whole number of precession periods (at least one); each atom's delay
/// is then the shortest non-negative shift that brings its branch onto target.
pub fn calibrate_phases(program: &ProtocolProgram, omega_q: f64) -> Result<ProtocolProgram> {
    if !(omega_q > 0.0) || !omega_q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "omega_q must be positive, got {omega_q}"
        )));
    }
    let mut timing = program.timing;
    timing.omega_q = omega_q;
    let period = timing.period_us();
    let k = (timing.free_evolution_us / period).round().max(1.0);
    timing.free_evolution_us = k * period;
    for atom in Atom::BOTH {
        let lag = if atom == Atom::Two {
            timing.photon_separation_us
        } else {
            0.0
        };
        let target_time = timing.target_phases[atom.index()] / omega_q;
        let mut d = (timing.free_evolution_us - lag - target_time).rem_euclid(period);
        if period - d < 1e-9 * period {
            d = 0.0;
        }
        timing.emission_delay_us[atom.index()] = d;
    }
    Ok(program.with_timing(timing))
}

fn global_rotation(theta: f64) -> Instruction {
    Instruction::Rotate {
        target: Target::Global,
        theta,
        phase: 0.0,
    }
}

fn frame_z(atom: Atom) -> Instruction {
    Instruction::PhaseZ {
        atom,
        phi: PI,
        kind: PhaseKind::Frame,
    }
}

/// Ring protocol with `n_cycles` emission cycles per atom between two fusions.
///
/// Each cycle emits from both atoms and then applies a global π/2 pulse. Frame Z gates
/// before the pulse turn it into a Hadamard where the ring needs one; on the last cycle
/// this reproduces `H` on atom 1 and `Z` then `H` on atom 2. The even variant inverts the
/// frame choice for atom 2 on the second cycle, which lines the two open chain ends up
/// for a ring with a redundant vertex opposite the root.
pub fn build_ring_protocol(n_cycles: usize, odd: bool) -> Result<ProtocolProgram> {
    let expected = ring_protocol_graph(n_cycles, odd)?;
    let mut inst = vec![Instruction::Init(SpinInit::Plus), Instruction::Fuse];
    if odd {
        inst.push(global_rotation(-FRAC_PI_4));
    }
    for k in 0..n_cycles {
        inst.push(Instruction::Emit(Atom::One));
        inst.push(Instruction::Emit(Atom::Two));
        inst.push(frame_z(Atom::One));
        if (k + 1 < n_cycles) ^ (!odd && k == 1) {
            inst.push(frame_z(Atom::Two));
        }
        inst.push(global_rotation(FRAC_PI_2));
    }
    inst.push(Instruction::Fuse);
    let name = match (n_cycles, odd) {
        (2, false) => "box".to_string(),
        (3, false) => "hexagon".to_string(),
        (2, true) => "pentagon".to_string(),
        (n, o) => format!("ring-{}-{}", n, if o { "odd" } else { "even" }),
    };
    let mut p = ProtocolProgram::new(name, inst);
    p.expected = Some(expected);
    Ok(p)
}

/// Tree protocol: three emissions per atom, free evolution, branch phases, a global
/// Hadamard on both spins, then fusion. The returned program is calibrated to the
/// default branch targets `(0, π)`.
pub fn build_tree_protocol() -> ProtocolProgram {
    build_tree_protocol_with(Timing::default())
}

/// Tree protocol with explicit timing, calibrated towards `timing.target_phases`.
pub fn build_tree_protocol_with(timing: Timing) -> ProtocolProgram {
    let mut inst = vec![Instruction::Init(SpinInit::Plus)];
    for _ in 0..3 {
        inst.push(Instruction::Emit(Atom::One));
        inst.push(Instruction::Emit(Atom::Two));
    }
    inst.push(Instruction::Wait {
        target: Target::Global,
        duration_us: timing.free_evolution_us,
    });
    for atom in Atom::BOTH {
        inst.push(Instruction::PhaseZ {
            atom,
            phi: 0.0,
            kind: PhaseKind::Evolution,
        });
    }
    inst.push(frame_z(Atom::One));
    inst.push(frame_z(Atom::Two));
    inst.push(global_rotation(FRAC_PI_2));
    inst.push(Instruction::Fuse);
    let mut p = ProtocolProgram::new("tree", inst);
    p.timing = timing;
    p.expected = Some(tree_protocol_graph());
    calibrate_phases(&p, timing.omega_q).expect("default timing has positive omega")
}

/// Heralded Bell pair: both spins in `|+⟩`, one fusion.
pub fn build_bell_protocol() -> ProtocolProgram {
    let mut p = ProtocolProgram::new(
        "bell",
        vec![Instruction::Init(SpinInit::Plus), Instruction::Fuse],
    );
    p.expected = Some(
        GraphSpec::new(
            vec![Vertex {
                id: 0,
                qubits: vec![1, 0],
            }],
            [],
            [],
        )
        .expect("single redundant vertex is valid"),
    );
    p
}

pub const BUILTIN_PROTOCOLS: [&str; 5] = ["bell", "box", "pentagon", "hexagon", "tree"];

pub fn builtin(name: &str) -> Result<ProtocolProgram> {
    match name {
        "bell" => Ok(build_bell_protocol()),
        "box" => build_ring_protocol(2, false),
        "pentagon" => build_ring_protocol(2, true),
        "hexagon" => build_ring_protocol(3, false),
        "tree" => Ok(build_tree_protocol()),
        other => Err(Error::InvalidParameter(format!(
            "unknown protocol {other:?}; built-ins are {}",
            BUILTIN_PROTOCOLS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn clifford_classification() {
        assert!(build_ring_protocol(2, false).unwrap().is_clifford());
        assert!(build_tree_protocol().is_clifford());
        let pent = build_ring_protocol(2, true).unwrap();
        assert!(!pent.is_clifford());
        assert_eq!(pent.first_non_clifford(), Some(2));
    }

    #[test]
    fn calibration_offsets() {
        let t = build_tree_protocol().timing;
        assert_abs_diff_eq!(t.emission_delay_us[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.emission_delay_us[1], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(t.branch_phase(Atom::One), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.branch_phase(Atom::Two), PI, epsilon = 1e-9);
    }

    #[test]
    fn zero_targets_give_identity_calibration() {
        let timing = Timing {
            target_phases: [0.0, 0.0],
            ..Timing::default()
        };
        let t = build_tree_protocol_with(timing).timing;
        assert_eq!(t.emission_delay_us, [0.0, 0.0]);
        assert_eq!(t.free_evolution_us, Timing::default().free_evolution_us);
    }

    #[test]
    fn calibration_rejects_bad_omega() {
        assert!(calibrate_phases(&build_tree_protocol(), 0.0).is_err());
    }

    #[test]
    fn validation_catches_misplaced_fuse() {
        let p = ProtocolProgram::new(
            "bad",
            vec![
                Instruction::Init(SpinInit::Plus),
                Instruction::MeasureSpin {
                    atom: Atom::One,
                    basis: Basis::Z,
                    max_attempts: 3,
                },
                Instruction::Fuse,
            ],
        );
        assert!(p.validate().is_err());
        for name in BUILTIN_PROTOCOLS {
            builtin(name).unwrap().validate().unwrap();
        }
    }
}
