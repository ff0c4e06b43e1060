//! Command-line front end. Every command writes a line-oriented text file (or stdout)
//! that starts with `format_version` and carries the seed where one is used.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    bell_fidelity_depolarizing, calibrate_bell_depolarizing, fit_sinusoid, parity_scan,
    product_correlator, product_correlator_from_records, stabilizer_expectations,
    stabilizer_expectations_from_records, witness_bound, write_stabilizers, Estimate, Report,
};
use crate::error::{Error, Result};
use crate::graph::{graph_state_vector, stabilizer_generators, GraphSpec, SetLabel, StabilizerSet};
use crate::noise::{
    monte_carlo, parse_records, write_records, MonteCarloConfig, NoiseModel, PostSelectionPolicy,
    Stage,
};
use crate::protocol::{builtin, run, run_exhaustive, BackendChoice, ProtocolProgram, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_ANALYSIS: i32 = 4;

/// Exit code for an error, by its innermost cause.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Parse { .. } | Error::InvalidParameter(_) | Error::InvalidGraph(_) => EXIT_CONFIG,
        Error::OddCycle(_) | Error::SettingMismatch(_) => EXIT_ANALYSIS,
        _ => EXIT_SIMULATION,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "graphfuse",
    version,
    about = "Simulate two-emitter photonic graph-state protocols"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a protocol once and report heralds and stabilizer values.
    Run(RunArgs),
    /// Sweep t0, tau_max or the depolarizing probability.
    Scan(ScanArgs),
    /// Witness bound from a record file and a graph file.
    Witness(WitnessArgs),
    /// Monte-Carlo campaign with loss, noise and post-selection.
    Montecarlo(MonteCarloArgs),
    /// Print the stabilizer generators and measurement settings of a graph file.
    Stabilizers(StabilizersArgs),
    /// Write a built-in protocol, or its expected graph, to a file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeraldArg {
    Sample,
    Force,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Built-in protocol name (bell, box, pentagon, hexagon, tree) or program file.
    #[arg(long, short)]
    pub protocol: String,
    #[arg(long, default_value = "auto")]
    pub backend: BackendChoice,
    /// Noise model file (TOML).
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long, env = "GRAPHFUSE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "force")]
    pub herald: HeraldArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParam {
    T0,
    TauMax,
    NoiseP,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub parameter: ScanParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// Monte-Carlo attempts per grid point (tau_max scans).
    #[arg(long, default_value_t = 20_000)]
    pub trials: u64,
    /// Bell fidelity to calibrate against (noise_p scans).
    #[arg(long, default_value_t = 0.915)]
    pub target_fidelity: f64,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Post-select successful heralds instead of sampling them.
    #[arg(long)]
    pub force_herald: bool,
    /// Override the coincidence limit; defaults to 250 ns for bell, 400 ns otherwise.
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub window_start: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub window_end: f64,
    #[arg(long, default_value_t = 3)]
    pub readout_attempts: u32,
    #[arg(long, default_value_t = 5000.0)]
    pub attempt_rate: f64,
    /// Also write every click and accepted shot to this record file.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilizersArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, short)]
    pub protocol: String,
    /// Export the expected graph instead of the program.
    #[arg(long)]
    pub graph: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::InvalidParameter(format!("cannot write stdout: {e}")))
        }
    }
}

pub fn load_program(spec: &str) -> Result<ProtocolProgram> {
    let path = Path::new(spec);
    if path.exists() {
        ProtocolProgram::from_text(&read(path)?)
    } else {
        builtin(spec)
    }
}

fn load_noise(path: &Option<PathBuf>) -> Result<Option<NoiseModel>> {
    path.as_deref().map(NoiseModel::load).transpose()
}

fn default_policy(program: &ProtocolProgram) -> PostSelectionPolicy {
    if program.name == "bell" {
        PostSelectionPolicy::m_f0()
    } else {
        PostSelectionPolicy::m_f2()
    }
}

fn cmd_run(a: &RunArgs) -> Result<String> {
    let c = &a.common;
    let program = load_program(&c.protocol)?;
    let noise = load_noise(&c.noise)?;
    let mut r = Report::new("run", Some(c.seed));
    r.push("program", &program.name);
    let set = program
        .expected
        .as_ref()
        .map(|g| StabilizerSet::partitioned(g).unwrap_or_else(|_| stabilizer_generators(g)));
    if a.herald == HeraldArg::Exhaustive {
        let branches = run_exhaustive(&program, c.backend)?;
        r.push("backend", c.backend.resolve(&program)?);
        for b in &branches {
            let pats: Vec<String> = b.heralds.iter().map(|h| h.pattern_str()).collect();
            r.push(
                "branch",
                format_args!("{} {:.12} {}", pats.join(","), b.probability, b.success),
            );
        }
        if let (Some(b), Some(set)) = (branches.iter().find(|b| b.success), &set) {
            write_stabilizers(&stabilizer_expectations(&b.state, set)?, &mut r);
        }
        return Ok(r.to_string());
    }
    let cfg = RunConfig {
        backend: c.backend,
        post_select: a.herald == HeraldArg::Force,
        seed: c.seed,
        noise,
        ..RunConfig::default()
    };
    let res = run(&program, &cfg)?;
    eprintln!("elapsed {:?}", res.elapsed);
    r.push("backend", res.backend);
    for h in &res.heralds {
        r.push(
            "herald",
            format_args!(
                "{} {} {} {:.12}",
                h.instruction,
                h.outcome.pattern_str(),
                h.outcome.success,
                h.outcome.probability
            ),
        );
    }
    for f in &res.faults {
        r.push(
            "fault",
            format_args!("{} {} {}", f.instruction, f.qubit, f.pauli.as_char()),
        );
    }
    r.push("success", res.success);
    r.push("probability", format_args!("{:.12}", res.probability));
    r.push("qubits", res.state.num_qubits());
    if res.success {
        if let (Some(set), Some(g)) = (&set, &program.expected) {
            write_stabilizers(&stabilizer_expectations(&res.state, set)?, &mut r);
            if let Ok(ps) = StabilizerSet::partitioned(g) {
                let ga = product_correlator(&res.state, &ps, SetLabel::A)?;
                let gb = product_correlator(&res.state, &ps, SetLabel::B)?;
                witness_bound(Estimate::exact(ga), Estimate::exact(gb))?.write_to(&mut r);
            }
            if let Some(d) = res.state.dense() {
                let oracle = graph_state_vector(g)?;
                r.push("overlap", format_args!("{:.12}", d.overlap(&oracle)));
            }
        }
    }
    Ok(r.to_string())
}

fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParameter(
            "scan grid must be non-empty and finite".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn cmd_scan(a: &ScanArgs) -> Result<String> {
    let c = &a.common;
    let program = load_program(&c.protocol)?;
    let noise = load_noise(&c.noise)?;
    let xs = grid(a.from, a.to, a.steps)?;
    let mut r = Report::new("scan", Some(c.seed));
    r.push("program", &program.name);
    match a.parameter {
        ScanParam::T0 => {
            r.push("parameter", "t0_us");
            r.push("columns", "t0_us parity_1 parity_2");
            let omega = program.timing.omega_q;
            let pts = parity_scan(&program, &xs, omega, noise.as_ref())?;
            for p in &pts {
                r.push(
                    "row",
                    format_args!("{} {:.12} {:.12}", p.t0_us, p.parity[0], p.parity[1]),
                );
            }
            if pts.len() >= 3 {
                let t: Vec<f64> = pts.iter().map(|p| p.t0_us).collect();
                let mut phases = [0.0; 2];
                for b in 0..2 {
                    let y: Vec<f64> = pts.iter().map(|p| p.parity[b]).collect();
                    let f = fit_sinusoid(&t, &y, omega)?;
                    phases[b] = f.phase;
                    r.push(
                        "fit",
                        format_args!(
                            "{} {:.12} {:.12} {:.12} {:.3e}",
                            b + 1,
                            f.amplitude,
                            f.phase,
                            f.offset,
                            f.rms_residual
                        ),
                    );
                }
                let off = (phases[1] - phases[0]).rem_euclid(std::f64::consts::TAU);
                r.push("branch_offset", format_args!("{off:.12}"));
            }
        }
        ScanParam::TauMax => {
            r.push("parameter", "tau_max_ns");
            r.push(
                "columns",
                "tau_max_ns accepted accepted_err g_a g_a_err g_b g_b_err",
            );
            let model = noise.unwrap_or_default();
            let cfg = MonteCarloConfig {
                n_trials: a.trials,
                seed: c.seed,
                backend: c.backend,
                ..MonteCarloConfig::default()
            };
            for &tau in &xs {
                let policy = PostSelectionPolicy {
                    tau_max_ns: tau,
                    ..default_policy(&program)
                };
                let s = monte_carlo(&program, &model, &policy, &cfg)?.stats;
                let acc = s.overall_fraction(Stage::Accepted);
                let g = |e: Option<Estimate>| {
                    e.map_or("nan nan".to_string(), |e| {
                        format!("{:.6} {:.6}", e.value, e.stderr)
                    })
                };
                r.push(
                    "row",
                    format_args!(
                        "{} {:.6} {:.6} {} {}",
                        tau,
                        acc.value,
                        acc.stderr,
                        g(s.g_a),
                        g(s.g_b)
                    ),
                );
            }
        }
        ScanParam::NoiseP => {
            r.push("parameter", "depolarizing_per_emission");
            r.push("columns", "p bell_fidelity");
            for &p in &xs {
                r.push(
                    "row",
                    format_args!("{} {:.12}", p, bell_fidelity_depolarizing(p)?),
                );
            }
            let p = calibrate_bell_depolarizing(a.target_fidelity)?;
            r.push("calibrated", format_args!("{} {:.9}", a.target_fidelity, p));
        }
    }
    Ok(r.to_string())
}

fn cmd_witness(a: &WitnessArgs) -> Result<String> {
    let records = parse_records(&read(&a.records)?)?;
    let graph = GraphSpec::from_text(&read(&a.graph)?)?;
    let set = StabilizerSet::partitioned(&graph)?;
    let mut r = Report::new("witness", records.seed);
    if let Some(p) = &records.program {
        r.push("program", p);
    }
    r.push("shots", records.shots.len());
    let ga = product_correlator_from_records(&records.shots, &set, SetLabel::A)?;
    let gb = product_correlator_from_records(&records.shots, &set, SetLabel::B)?;
    if ga.n == 0 || gb.n == 0 {
        return Err(Error::SettingMismatch(
            "records need shots in both settings a and b".into(),
        ));
    }
    witness_bound(ga, gb)?.write_to(&mut r);
    write_stabilizers(
        &stabilizer_expectations_from_records(&records.shots, &set)?,
        &mut r,
    );
    Ok(r.to_string())
}

fn cmd_montecarlo(a: &MonteCarloArgs) -> Result<String> {
    let c = &a.common;
    let program = load_program(&c.protocol)?;
    let noise = load_noise(&c.noise)?.unwrap_or_default();
    let mut policy = default_policy(&program);
    policy.window_ns = (a.window_start, a.window_end);
    if let Some(t) = a.tau_max {
        policy.tau_max_ns = t;
    }
    let cfg = MonteCarloConfig {
        n_trials: a.trials,
        seed: c.seed,
        force_herald: a.force_herald,
        readout_attempts: a.readout_attempts,
        attempt_rate_per_min: a.attempt_rate,
        record_clicks: a.records.is_some(),
        backend: c.backend,
    };
    let out = monte_carlo(&program, &noise, &policy, &cfg)?;
    let s = &out.stats;
    let mut r = Report::new("montecarlo", Some(c.seed));
    r.push("program", &program.name)
        .push("trials", s.n_trials)
        .push(
            "window_ns",
            format_args!("{} {}", policy.window_ns.0, policy.window_ns.1),
        )
        .push("tau_max_ns", policy.tau_max_ns);
    for st in Stage::ALL {
        let f = s.stage_fraction(st);
        r.push(
            "stage",
            format_args!("{} {} {:.6} {:.6}", st, s.count(st), f.value, f.stderr),
        );
    }
    let acc = s.overall_fraction(Stage::Accepted);
    r.push(
        "accepted_fraction",
        format_args!("{:.6e} {:.6e}", acc.value, acc.stderr),
    );
    r.push(
        "accepted_per_min",
        format_args!("{:.4}", s.accepted_per_min()),
    );
    if let (Some(ga), Some(gb)) = (s.g_a, s.g_b) {
        if ga.n > 0 && gb.n > 0 {
            witness_bound(ga, gb)?.write_to(&mut r);
        }
    }
    write_stabilizers(&s.stabilizers, &mut r);
    if let Some(path) = &a.records {
        emit(&Some(path.clone()), &write_records(&out.records))?;
    }
    Ok(r.to_string())
}

fn cmd_stabilizers(a: &StabilizersArgs) -> Result<String> {
    let graph = GraphSpec::from_text(&read(&a.graph)?)?;
    let mut r = Report::new("stabilizers", None);
    let set = match StabilizerSet::partitioned(&graph) {
        Ok(s) => s,
        Err(Error::OddCycle(v)) => {
            r.comment(&format!(
                "odd cycle through vertex {v}; no two-setting partition"
            ));
            stabilizer_generators(&graph)
        }
        Err(e) => return Err(e),
    };
    if let Some(p) = &set.partition {
        let s = |b: &[crate::quantum::Basis]| b.iter().map(|x| x.as_char()).collect::<String>();
        r.push("setting", format_args!("a {}", s(&p.setting_a)));
        r.push("setting", format_args!("b {}", s(&p.setting_b)));
    }
    for (i, g) in set.generators.iter().enumerate() {
        let label = set.partition.as_ref().map_or("-".to_string(), |p| {
            if p.a.contains(&i) { "a" } else { "b" }.to_string()
        });
        r.push(
            "generator",
            format_args!("{} {} {}", g.vertex, label, g.pauli),
        );
    }
    Ok(r.to_string())
}

fn cmd_export(a: &ExportArgs) -> Result<String> {
    let program = load_program(&a.protocol)?;
    if a.graph {
        program
            .expected
            .as_ref()
            .map(|g| g.to_text())
            .ok_or_else(|| {
                Error::InvalidParameter(format!("{} has no expected graph", program.name))
            })
    } else {
        Ok(program.to_text())
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let (text, output) = match &cli.command {
        Command::Run(a) => (cmd_run(a)?, &a.common.output),
        Command::Scan(a) => (cmd_scan(a)?, &a.common.output),
        Command::Witness(a) => (cmd_witness(a)?, &a.output),
        Command::Montecarlo(a) => (cmd_montecarlo(a)?, &a.common.output),
        Command::Stabilizers(a) => (cmd_stabilizers(a)?, &a.output),
        Command::Export(a) => (cmd_export(a)?, &a.output),
    };
    emit(output, &text)
}

/// Parse arguments, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::OddCycle(1)), EXIT_ANALYSIS);
        assert_eq!(exit_code(&Error::parse(3, "x")), EXIT_CONFIG);
        let nested = Error::AtInstruction {
            index: 2,
            instruction: "rotate".into(),
            source: Box::new(Error::NonCliffordOnTableau("rotate".into())),
        };
        assert_eq!(exit_code(&nested), EXIT_SIMULATION);
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn bad_flag_is_config_error() {
        assert_eq!(main_with_args(["graphfuse", "run", "--bogus"]), EXIT_CONFIG);
        assert_eq!(
            main_with_args(["graphfuse", "run", "--protocol", "nonexistent"]),
            EXIT_CONFIG
        );
    }
}
