use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    readout_spin, sample_arrival, ClickRecord, Detector, NoiseModel, PostSelectionPolicy,
    RecordFile, ShotRecord, Verdict,
};
use crate::analysis::{
    product_correlator_from_records, stabilizer_expectations_from_records, Estimate,
    StabilizerValue,
};
use crate::error::{Error, Result};
use crate::graph::{SetLabel, StabilizerSet};
use crate::protocol::{execute, BackendChoice, ExecOptions, HeraldMode, ProtocolProgram};
use crate::quantum::{Atom, Basis, QubitId, QubitKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub n_trials: u64,
    pub seed: u64,
    /// Post-select successful heralds instead of sampling them.
    pub force_herald: bool,
    /// Repeat-until-success limit for spin readout.
    pub readout_attempts: u32,
    /// Protocol attempts per minute, used only to convert fractions into rates.
    pub attempt_rate_per_min: f64,
    /// Keep every click in the output records, not just the accepted shots.
    pub record_clicks: bool,
    pub backend: BackendChoice,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            n_trials: 10_000,
            seed: 0,
            force_herald: false,
            readout_attempts: 3,
            attempt_rate_per_min: 5000.0,
            record_clicks: false,
            backend: BackendChoice::Auto,
        }
    }
}

/// Consecutive filters applied to every attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Attempted,
    /// Both photons of every fusion reached a detector.
    HeraldDetected,
    InWindow,
    InTau,
    /// Every fusion showed one R and one L click.
    HeraldSuccess,
    /// Every graph photon was detected.
    PhotonsDetected,
    /// Both spins were read out within the attempt limit.
    Accepted,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Attempted,
        Stage::HeraldDetected,
        Stage::InWindow,
        Stage::InTau,
        Stage::HeraldSuccess,
        Stage::PhotonsDetected,
        Stage::Accepted,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Attempted => "attempted",
            Stage::HeraldDetected => "herald_detected",
            Stage::InWindow => "in_window",
            Stage::InTau => "in_tau",
            Stage::HeraldSuccess => "herald_success",
            Stage::PhotonsDetected => "photons_detected",
            Stage::Accepted => "accepted",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceStats {
    pub program: String,
    pub seed: u64,
    pub n_trials: u64,
    /// Number of attempts that passed each stage, indexed like `Stage::ALL`.
    pub counts: [u64; 7],
    pub attempt_rate_per_min: f64,
    /// Per-generator estimates from accepted shots, empty without a measurement partition.
    pub stabilizers: Vec<StabilizerValue>,
    pub g_a: Option<Estimate>,
    pub g_b: Option<Estimate>,
}

impl CoincidenceStats {
    pub fn count(&self, s: Stage) -> u64 {
        self.counts[s.index()]
    }

    /// Fraction of the previous stage's survivors that pass `s`.
    pub fn stage_fraction(&self, s: Stage) -> Estimate {
        let i = s.index();
        if i == 0 {
            return Estimate::from_counts(self.counts[0], self.counts[0]);
        }
        Estimate::from_counts(self.counts[i], self.counts[i - 1])
    }

    /// Fraction of all attempts that pass `s`.
    pub fn overall_fraction(&self, s: Stage) -> Estimate {
        Estimate::from_counts(self.count(s), self.n_trials)
    }

    pub fn accepted_per_min(&self) -> f64 {
        self.overall_fraction(Stage::Accepted).value * self.attempt_rate_per_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloOutput {
    pub stats: CoincidenceStats,
    pub records: RecordFile,
}

#[derive(Default)]
struct Chunk {
    counts: [u64; 7],
    clicks: Vec<ClickRecord>,
    shots: Vec<ShotRecord>,
}

struct Ctx<'a> {
    program: &'a ProtocolProgram,
    noise: &'a NoiseModel,
    policy: &'a PostSelectionPolicy,
    config: &'a MonteCarloConfig,
    backend: crate::quantum::BackendKind,
    settings: Option<[Vec<Basis>; 2]>,
    n_fuse: usize,
    n_photons: usize,
}

fn spin_id(atom: Atom) -> QubitId {
    QubitId {
        index: atom.index(),
        kind: QubitKind::Spin(atom),
    }
}

fn detector(outcome: i8) -> Detector {
    if outcome > 0 {
        Detector::R
    } else {
        Detector::L
    }
}

impl Ctx<'_> {
    fn rngs(&self, trial: u64) -> (ChaCha8Rng, ChaCha8Rng) {
        // classical and quantum draws come from separate streams so that filters and
        // record keeping never shift the quantum trajectory
        let mut c = ChaCha8Rng::seed_from_u64(self.config.seed);
        c.set_stream(2 * trial);
        let mut q = ChaCha8Rng::seed_from_u64(self.config.seed);
        q.set_stream(2 * trial + 1);
        (c, q)
    }

    fn trial(&self, trial: u64, out: &mut Chunk) -> Result<()> {
        let (mut crng, mut qrng) = self.rngs(trial);
        let loss = self.noise.loss_per_photon;
        let survive = |r: &mut ChaCha8Rng| !(loss > 0.0 && r.random::<f64>() < loss);
        let wp = &self.noise.wavepacket;

        let mut herald_det = Vec::with_capacity(self.n_fuse);
        let mut herald_t = Vec::with_capacity(self.n_fuse);
        for _ in 0..self.n_fuse {
            herald_det.push([survive(&mut crng), survive(&mut crng)]);
            herald_t.push([sample_arrival(wp, &mut crng), sample_arrival(wp, &mut crng)]);
        }
        let photon_det: Vec<bool> = (0..self.n_photons).map(|_| survive(&mut crng)).collect();
        let photon_t: Vec<f64> = (0..self.n_photons)
            .map(|_| sample_arrival(wp, &mut crng))
            .collect();

        let detected = herald_det.iter().all(|d| d[0] && d[1]);
        let verdicts: Vec<Verdict> = herald_t
            .iter()
            .map(|t| self.policy.judge(t[0], t[1]))
            .collect();
        let in_window = detected && verdicts.iter().all(|v| *v != Verdict::RejectWindow);
        let in_tau = in_window && verdicts.iter().all(|v| *v == Verdict::Accept);

        let mut reached = Stage::Attempted;
        if detected {
            reached = Stage::HeraldDetected;
        }
        if in_window {
            reached = Stage::InWindow;
        }
        if in_tau {
            reached = Stage::InTau;
        }
        let record = self.config.record_clicks;
        if !in_tau && !(record && herald_det.iter().any(|d| d[0] || d[1])) {
            out.counts[reached.index()] += 1;
            return Ok(());
        }

        let fuse_dephasing: Vec<f64> = herald_t
            .iter()
            .map(|t| (self.noise.tau_dephasing_per_ns * (t[0] - t[1]).abs()).min(0.5))
            .collect();
        let opts = ExecOptions {
            herald: if self.config.force_herald {
                HeraldMode::Success
            } else {
                HeraldMode::Sample
            },
            noise: Some(self.noise),
            fuse_dephasing: &fuse_dephasing,
            ..ExecOptions::default()
        };
        let mut ex = execute(self.program, self.backend, &opts, &mut qrng)?;
        if record {
            for (h, (det, t)) in ex.heralds.iter().zip(herald_det.iter().zip(&herald_t)) {
                for j in 0..2 {
                    if det[j] {
                        out.clicks.push(ClickRecord {
                            run_id: trial,
                            detector: match h.outcome.pattern[j] {
                                crate::quantum::Polarization::R => Detector::R,
                                crate::quantum::Polarization::L => Detector::L,
                            },
                            time_ns: t[j],
                            origin: spin_id(Atom::BOTH[j]),
                        });
                    }
                }
            }
        }
        if !in_tau {
            out.counts[reached.index()] += 1;
            return Ok(());
        }
        if !ex.success() {
            out.counts[reached.index()] += 1;
            return Ok(());
        }
        reached = Stage::HeraldSuccess;
        if !photon_det.iter().all(|&d| d) {
            out.counts[reached.index()] += 1;
            return Ok(());
        }
        reached = Stage::PhotonsDetected;

        let label = if trial % 2 == 0 {
            SetLabel::A
        } else {
            SetLabel::B
        };
        let n = ex.state.num_qubits();
        let bases: Vec<Basis> = match &self.settings {
            Some(s) => s[(label == SetLabel::B) as usize].clone(),
            None => vec![Basis::Z; n],
        };
        let mut outcomes = vec![0i8; n];
        let photons: Vec<QubitId> = ex.state.photons().copied().collect();
        for (k, q) in photons.iter().enumerate() {
            let (o, _) = ex.state.measure(q.index, bases[q.index], None, &mut qrng)?;
            outcomes[q.index] = o;
            if record {
                out.clicks.push(ClickRecord {
                    run_id: trial,
                    detector: detector(o),
                    time_ns: photon_t[k],
                    origin: *q,
                });
            }
        }
        for atom in Atom::BOTH {
            let (o, _) = readout_spin(
                &mut ex.state,
                atom,
                bases[atom.index()],
                self.config.readout_attempts,
                loss,
                &mut qrng,
            )?;
            match o {
                Some(o) => outcomes[atom.index()] = o,
                None => {
                    out.counts[reached.index()] += 1;
                    return Ok(());
                }
            }
        }
        out.counts[Stage::Accepted.index()] += 1;
        if self.settings.is_some() {
            out.shots.push(ShotRecord {
                run_id: trial,
                set: label,
                bases,
                outcomes,
            });
        }
        Ok(())
    }
}

const CHUNK: u64 = 2048;

/// Emulate `config.n_trials` protocol attempts with loss, noise, arrival-time
/// post-selection and readout. Deterministic for a given seed regardless of thread count.
///
/// Accepted shots alternate between the two measurement settings of the expected graph
/// (setting a on even attempts). Programs without a bipartite expected graph are measured
/// in Z and yield counts only.
pub fn monte_carlo(
    program: &ProtocolProgram,
    noise: &NoiseModel,
    policy: &PostSelectionPolicy,
    config: &MonteCarloConfig,
) -> Result<MonteCarloOutput> {
    if config.n_trials == 0 {
        return Err(Error::InvalidParameter(
            "n_trials must be at least 1".into(),
        ));
    }
    if config.readout_attempts == 0 {
        return Err(Error::InvalidParameter(
            "readout_attempts must be at least 1".into(),
        ));
    }
    noise.validate()?;
    policy.validate()?;
    program.validate()?;
    let set = program
        .expected
        .as_ref()
        .and_then(|g| StabilizerSet::partitioned(g).ok());
    let settings = set.as_ref().and_then(|s| {
        s.partition
            .as_ref()
            .map(|p| [p.setting_a.clone(), p.setting_b.clone()])
    });
    let ctx = Ctx {
        program,
        noise,
        policy,
        config,
        backend: config.backend.resolve(program)?,
        settings,
        n_fuse: program.fuse_count(),
        n_photons: program.emission_count(),
    };
    let n_chunks = config.n_trials.div_ceil(CHUNK);
    let chunks: Vec<Chunk> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Chunk::default();
            let end = ((c + 1) * CHUNK).min(config.n_trials);
            for t in c * CHUNK..end {
                ctx.trial(t, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut reached = [0u64; 7];
    let mut records = RecordFile {
        seed: Some(config.seed),
        program: Some(program.name.clone()),
        ..RecordFile::default()
    };
    for c in chunks {
        for i in 0..7 {
            reached[i] += c.counts[i];
        }
        records.clicks.extend(c.clicks);
        records.shots.extend(c.shots);
    }
    // a trial that reached stage k also passed every earlier stage
    let mut counts = [0u64; 7];
    let mut run = 0;
    for i in (0..7).rev() {
        run += reached[i];
        counts[i] = run;
    }
    let (stabilizers, g_a, g_b) = match &set {
        Some(s) => (
            stabilizer_expectations_from_records(&records.shots, s)?,
            Some(product_correlator_from_records(
                &records.shots,
                s,
                SetLabel::A,
            )?),
            Some(product_correlator_from_records(
                &records.shots,
                s,
                SetLabel::B,
            )?),
        ),
        None => (Vec::new(), None, None),
    };
    Ok(MonteCarloOutput {
        stats: CoincidenceStats {
            program: program.name.clone(),
            seed: config.seed,
            n_trials: config.n_trials,
            counts,
            attempt_rate_per_min: config.attempt_rate_per_min,
            stabilizers,
            g_a,
            g_b,
        },
        records,
    })
}
