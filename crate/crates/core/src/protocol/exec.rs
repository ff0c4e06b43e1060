use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instruction, ProtocolProgram};
use crate::error::{Error, Result};
use crate::noise::{apply_noise, readout_spin, NoiseEvent, NoiseModel};
use crate::quantum::dense::DEFAULT_DENSE_LIMIT;
use crate::quantum::{
    Atom, BackendKind, Basis, FuseChoice, HeraldOutcome, Pauli, Polarization, QubitId, SpinInit,
    State,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    /// Tableau when every instruction is Clifford, dense otherwise.
    #[default]
    Auto,
    Dense,
    Tableau,
}

impl BackendChoice {
    pub fn resolve(self, program: &ProtocolProgram) -> Result<BackendKind> {
        match (self, program.first_non_clifford()) {
            (BackendChoice::Dense, _) | (BackendChoice::Auto, Some(_)) => Ok(BackendKind::Dense),
            (BackendChoice::Tableau, None) | (BackendChoice::Auto, None) => {
                Ok(BackendKind::Tableau)
            }
            (BackendChoice::Tableau, Some(i)) => {
                let inst = program.instructions[i].to_string();
                Err(Error::AtInstruction {
                    index: i,
                    instruction: inst.clone(),
                    source: Box::new(Error::NonCliffordOnTableau(inst)),
                })
            }
        }
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendChoice::Auto => "auto",
            BackendChoice::Dense => "dense",
            BackendChoice::Tableau => "tableau",
        })
    }
}

impl FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(BackendChoice::Auto),
            "dense" => Ok(BackendChoice::Dense),
            "tableau" => Ok(BackendChoice::Tableau),
            other => Err(Error::parse(0, format!("unknown backend {other:?}"))),
        }
    }
}

/// How fusion heralds are resolved during execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeraldMode<'a> {
    /// Born-rule sampling; execution stops at the first failed fusion.
    #[default]
    Sample,
    /// Post-select success on every fusion.
    Success,
    /// One choice per fusion, in program order. Fusions past the end succeed.
    Script(&'a [FuseChoice]),
}

#[derive(Debug, Clone, Copy)]
pub struct ExecOptions<'a> {
    pub herald: HeraldMode<'a>,
    pub noise: Option<&'a NoiseModel>,
    pub dense_limit: usize,
    /// Execute only instructions `0..until`.
    pub until: Option<usize>,
    /// Extra probability of a Z on spin 1 after each fusion, in fusion order.
    pub fuse_dephasing: &'a [f64],
    /// Deterministic faults replacing the sampled ones. Entry `i` applies to the `i`-th
    /// noise site: every emission (fusion heralds included, atom 1 first) and each atom
    /// of every wait. Missing entries mean no fault.
    pub fault_script: Option<&'a [Pauli]>,
}

impl Default for ExecOptions<'_> {
    fn default() -> Self {
        ExecOptions {
            herald: HeraldMode::Sample,
            noise: None,
            dense_limit: DEFAULT_DENSE_LIMIT,
            until: None,
            fuse_dephasing: &[],
            fault_script: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldRecord {
    pub instruction: usize,
    pub outcome: HeraldOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub instruction: usize,
    pub qubit: QubitId,
    pub basis: Basis,
    /// `None` when every readout photon was lost.
    pub outcome: Option<i8>,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultRecord {
    pub instruction: usize,
    pub qubit: usize,
    pub pauli: Pauli,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub state: State,
    pub heralds: Vec<HeraldRecord>,
    pub measurements: Vec<MeasurementRecord>,
    pub faults: Vec<FaultRecord>,
    /// Product of the probabilities of every herald and measurement outcome.
    pub probability: f64,
    /// False when a fusion failed and the remaining instructions were skipped.
    pub completed: bool,
}

impl Execution {
    pub fn success(&self) -> bool {
        self.completed && self.heralds.iter().all(|h| h.outcome.success)
    }
}

struct Runner<'o, 'a, R: ?Sized> {
    opts: &'o ExecOptions<'a>,
    rng: &'o mut R,
    site: usize,
    fuse_index: usize,
    exec: Execution,
}

impl<R: Rng + ?Sized> Runner<'_, '_, R> {
    fn noise(&mut self, index: usize, event: NoiseEvent) -> Result<()> {
        let site = self.site;
        self.site += 1;
        let fault = match (self.opts.fault_script, self.opts.noise) {
            (Some(script), _) => {
                let p = script.get(site).copied().unwrap_or(Pauli::I);
                let atom = match event {
                    NoiseEvent::Emission(a) | NoiseEvent::Wait { atom: a, .. } => a,
                };
                if p != Pauli::I {
                    self.exec.state.apply_pauli(atom.index(), p)?;
                    Some((atom.index(), p))
                } else {
                    None
                }
            }
            (None, Some(model)) => apply_noise(&mut self.exec.state, event, model, self.rng)?,
            (None, None) => None,
        };
        if let Some((qubit, pauli)) = fault {
            self.exec.faults.push(FaultRecord {
                instruction: index,
                qubit,
                pauli,
            });
        }
        Ok(())
    }

    fn fuse(&mut self, index: usize) -> Result<bool> {
        let choice = match self.opts.herald {
            HeraldMode::Sample => FuseChoice::Sample,
            HeraldMode::Success => FuseChoice::Success,
            HeraldMode::Script(s) => s
                .get(self.fuse_index)
                .copied()
                .unwrap_or(FuseChoice::Success),
        };
        let outcome = self.exec.state.fuse(choice, self.rng)?;
        self.exec.probability *= outcome.probability;
        self.exec.heralds.push(HeraldRecord {
            instruction: index,
            outcome,
        });
        for atom in Atom::BOTH {
            self.noise(index, NoiseEvent::Emission(atom))?;
        }
        let p = self
            .opts
            .fuse_dephasing
            .get(self.fuse_index)
            .copied()
            .unwrap_or(0.0);
        if p > 0.0 && self.rng.random::<f64>() < p {
            self.exec.state.apply_pauli(0, Pauli::Z)?;
            self.exec.faults.push(FaultRecord {
                instruction: index,
                qubit: 0,
                pauli: Pauli::Z,
            });
        }
        self.fuse_index += 1;
        Ok(outcome.success)
    }

    fn step(&mut self, index: usize, inst: &Instruction) -> Result<bool> {
        let state = &mut self.exec.state;
        match *inst {
            Instruction::Init(_) => {
                return Err(Error::InvalidProgram("init may only appear first".into()))
            }
            Instruction::Emit(atom) => {
                state.emit_photon(atom)?;
                self.noise(index, NoiseEvent::Emission(atom))?;
            }
            Instruction::Rotate {
                target,
                theta,
                phase,
            } => {
                for a in target.atoms() {
                    state.apply_rotation(a.index(), theta, phase)?;
                }
            }
            Instruction::PhaseZ { atom, phi, .. } => state.apply_phase_z(atom.index(), phi)?,
            Instruction::Fuse => return self.fuse(index),
            Instruction::Wait {
                target,
                duration_us,
            } => {
                for &atom in target.atoms() {
                    self.noise(index, NoiseEvent::Wait { atom, duration_us })?;
                }
            }
            Instruction::MeasureSpin {
                atom,
                basis,
                max_attempts,
            } => {
                let loss = self.opts.noise.map_or(0.0, |m| m.loss_per_photon);
                let (outcome, attempts) =
                    readout_spin(state, atom, basis, max_attempts, loss, self.rng)?;
                self.exec.measurements.push(MeasurementRecord {
                    instruction: index,
                    qubit: state.qubits()[atom.index()],
                    basis,
                    outcome,
                    attempts,
                });
            }
            Instruction::MeasurePhoton { photon, basis } => {
                let q = photon + 2;
                let id = *state.qubits().get(q).ok_or(Error::NoSuchQubit(q))?;
                let loss = self.opts.noise.map_or(0.0, |m| m.loss_per_photon);
                let outcome = if loss > 0.0 && self.rng.random::<f64>() < loss {
                    None
                } else {
                    let (o, p) = state.measure(q, basis, None, self.rng)?;
                    self.exec.probability *= p;
                    Some(o)
                };
                self.exec.measurements.push(MeasurementRecord {
                    instruction: index,
                    qubit: id,
                    basis,
                    outcome,
                    attempts: 1,
                });
            }
        }
        Ok(true)
    }
}

fn at(index: usize, inst: &Instruction, e: Error) -> Error {
    match e {
        e @ Error::AtInstruction { .. } => e,
        e => Error::AtInstruction {
            index,
            instruction: inst.to_string(),
            source: Box::new(e),
        },
    }
}

/// Execute `program` on a fresh register.
pub fn execute<R: Rng + ?Sized>(
    program: &ProtocolProgram,
    backend: BackendKind,
    opts: &ExecOptions<'_>,
    rng: &mut R,
) -> Result<Execution> {
    program.validate()?;
    if backend == BackendKind::Tableau {
        BackendChoice::Tableau.resolve(program)?;
    }
    let init = match program.instructions.first() {
        Some(Instruction::Init(i)) => *i,
        _ => SpinInit::Zero,
    };
    let state = State::init_register_with_limit(init, backend, opts.dense_limit)
        .map_err(|e| at(0, &program.instructions[0], e))?;
    let mut runner = Runner {
        opts,
        rng,
        site: 0,
        fuse_index: 0,
        exec: Execution {
            state,
            heralds: Vec::new(),
            measurements: Vec::new(),
            faults: Vec::new(),
            probability: 1.0,
            completed: true,
        },
    };
    let end = opts
        .until
        .unwrap_or(usize::MAX)
        .min(program.instructions.len());
    for (i, inst) in program.instructions.iter().enumerate().take(end).skip(1) {
        let go_on = runner.step(i, inst).map_err(|e| at(i, inst, e))?;
        if !go_on {
            runner.exec.completed = false;
            break;
        }
    }
    Ok(runner.exec)
}

/// A place where the noise model may insert a fault, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSite {
    pub instruction: usize,
    pub atom: Atom,
    /// Idle dephasing rather than an emission.
    pub wait: bool,
}

/// Noise sites in the order `ExecOptions::fault_script` indexes them.
pub fn noise_sites(program: &ProtocolProgram) -> Vec<NoiseSite> {
    let mut out = Vec::new();
    for (i, inst) in program.instructions.iter().enumerate() {
        let (atoms, wait): (&[Atom], bool) = match inst {
            Instruction::Emit(Atom::One) => (&[Atom::One], false),
            Instruction::Emit(Atom::Two) => (&[Atom::Two], false),
            Instruction::Fuse => (&Atom::BOTH, false),
            Instruction::Wait { target, .. } => (target.atoms(), true),
            _ => continue,
        };
        out.extend(atoms.iter().map(|&atom| NoiseSite {
            instruction: i,
            atom,
            wait,
        }));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub backend: BackendChoice,
    /// Post-select successful heralds instead of sampling them.
    pub post_select: bool,
    pub seed: u64,
    pub dense_limit: usize,
    pub noise: Option<NoiseModel>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: BackendChoice::Auto,
            post_select: true,
            seed: 0,
            dense_limit: DEFAULT_DENSE_LIMIT,
            noise: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub program_name: String,
    pub backend: BackendKind,
    pub seed: u64,
    pub state: State,
    pub heralds: Vec<HeraldRecord>,
    pub measurements: Vec<MeasurementRecord>,
    pub faults: Vec<FaultRecord>,
    pub probability: f64,
    pub success: bool,
    pub elapsed: Duration,
}

/// Seeded single execution.
pub fn run(program: &ProtocolProgram, config: &RunConfig) -> Result<RunResult> {
    let backend = config.backend.resolve(program)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let opts = ExecOptions {
        herald: if config.post_select {
            HeraldMode::Success
        } else {
            HeraldMode::Sample
        },
        noise: config.noise.as_ref(),
        dense_limit: config.dense_limit,
        ..ExecOptions::default()
    };
    let start = Instant::now();
    let ex = execute(program, backend, &opts, &mut rng)?;
    let success = ex.success();
    Ok(RunResult {
        program_name: program.name.clone(),
        backend,
        seed: config.seed,
        state: ex.state,
        heralds: ex.heralds,
        measurements: ex.measurements,
        faults: ex.faults,
        probability: ex.probability,
        success,
        elapsed: start.elapsed(),
    })
}

/// One herald branch of a noiseless program.
#[derive(Debug, Clone)]
pub struct Branch {
    pub state: State,
    pub heralds: Vec<HeraldOutcome>,
    pub probability: f64,
    pub success: bool,
}

/// Every herald branch with non-zero probability. Probabilities sum to one.
pub fn run_exhaustive(program: &ProtocolProgram, backend: BackendChoice) -> Result<Vec<Branch>> {
    let kind = backend.resolve(program)?;
    let n_fuse = program.fuse_count();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::new();
    let failures = [
        FuseChoice::Failure(Polarization::R),
        FuseChoice::Failure(Polarization::L),
    ];
    // fail_at = Some(k): fusions 0..k succeed and fusion k fails
    let mut scripts: Vec<Vec<FuseChoice>> = vec![vec![FuseChoice::Success; n_fuse]];
    for k in 0..n_fuse {
        for f in failures {
            let mut s = vec![FuseChoice::Success; k];
            s.push(f);
            scripts.push(s);
        }
    }
    for script in &scripts {
        let opts = ExecOptions {
            herald: HeraldMode::Script(script),
            ..ExecOptions::default()
        };
        match execute(program, kind, &opts, &mut rng) {
            Ok(ex) => out.push(Branch {
                success: ex.success(),
                heralds: ex.heralds.iter().map(|h| h.outcome).collect(),
                probability: ex.probability,
                state: ex.state,
            }),
            Err(e) if matches!(e.root(), Error::ZeroProbabilityBranch(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
