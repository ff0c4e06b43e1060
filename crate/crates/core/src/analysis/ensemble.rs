//! Exact averages over stochastic Pauli faults by enumerating fault scripts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bell_fidelity, product_correlator};
use crate::error::{Error, Result};
use crate::graph::{SetLabel, StabilizerSet};
use crate::protocol::{
    build_bell_protocol, execute, noise_sites, BackendChoice, ExecOptions, HeraldMode,
    ProtocolProgram,
};
use crate::quantum::{Pauli, PauliString, State};

/// Herald-conditioned averages of quantities bounded in `[0, 1]`.
///
/// Scripts with more than `max_faults` faults are skipped; their prior mass brackets the
/// true average between `lower` and `upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub values: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub omitted_prior: f64,
    /// Probability that every fusion succeeds, over the enumerated scripts.
    pub success_probability: f64,
    pub scripts: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn scripts(sites: &[usize], n_sites: usize, max_faults: usize) -> Vec<(usize, Vec<Pauli>)> {
    fn rec(
        sites: &[usize],
        start: usize,
        left: usize,
        cur: &mut Vec<Pauli>,
        k: usize,
        out: &mut Vec<(usize, Vec<Pauli>)>,
    ) {
        out.push((k, cur.clone()));
        if left == 0 {
            return;
        }
        for j in start..sites.len() {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                cur[sites[j]] = p;
                rec(sites, j + 1, left - 1, cur, k + 1, out);
            }
            cur[sites[j]] = Pauli::I;
        }
    }
    let mut out = Vec::new();
    rec(
        sites,
        0,
        max_faults,
        &mut vec![Pauli::I; n_sites],
        0,
        &mut out,
    );
    out
}

/// Average `f` over depolarizing faults of probability `p` at every emission, with all
/// fusions post-selected on success.
pub fn depolarizing_average<F>(
    program: &ProtocolProgram,
    backend: BackendChoice,
    p: f64,
    max_faults: usize,
    f: F,
) -> Result<EnsembleAverage>
where
    F: Fn(&State) -> Result<Vec<f64>> + Sync,
{
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must be in [0, 1], got {p}"
        )));
    }
    let kind = backend.resolve(program)?;
    let all = noise_sites(program);
    let emission: Vec<usize> = (0..all.len()).filter(|&i| !all[i].wait).collect();
    let n = emission.len();
    let max_faults = max_faults.min(n);
    let list = scripts(&emission, all.len(), max_faults);
    let results: Vec<Option<(f64, Vec<f64>)>> = list
        .par_iter()
        .map(|(k, script)| {
            let prior = (p / 3.0).powi(*k as i32) * (1.0 - p).powi((n - k) as i32);
            if prior == 0.0 {
                return Ok(None);
            }
            let opts = ExecOptions {
                herald: HeraldMode::Success,
                fault_script: Some(script),
                ..ExecOptions::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            match execute(program, kind, &opts, &mut rng) {
                Ok(ex) => Ok(Some((prior * ex.probability, f(&ex.state)?))),
                Err(e) if matches!(e.root(), Error::ZeroProbabilityBranch(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut w_sum = 0.0;
    let mut sums: Vec<f64> = Vec::new();
    for (w, vals) in results.into_iter().flatten() {
        if sums.is_empty() {
            sums = vec![0.0; vals.len()];
        }
        w_sum += w;
        for (s, v) in sums.iter_mut().zip(&vals) {
            *s += w * v;
        }
    }
    if w_sum == 0.0 {
        return Err(Error::ZeroProbabilityBranch(
            "no enumerated fault script lets every fusion succeed".into(),
        ));
    }
    let included: f64 = (0..=max_faults)
        .map(|k| binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .sum();
    let omitted = (1.0 - included).max(0.0);
    Ok(EnsembleAverage {
        values: sums.iter().map(|s| s / w_sum).collect(),
        lower: sums.iter().map(|s| s / (w_sum + omitted)).collect(),
        upper: sums
            .iter()
            .map(|s| (s + omitted) / (w_sum + omitted))
            .collect(),
        omitted_prior: omitted,
        success_probability: w_sum,
        scripts: list.len(),
    })
}

/// Herald-conditioned Bell fidelity of the two spins under per-emission depolarizing
/// noise. Both fusion emissions are enumerated exhaustively.
pub fn bell_fidelity_depolarizing(p: f64) -> Result<f64> {
    let prog = build_bell_protocol();
    let avg = depolarizing_average(&prog, BackendChoice::Auto, p, 2, |s| {
        let e = |t: &str| s.expectation(&t.parse::<PauliString>().expect("valid literal"));
        Ok(vec![bell_fidelity(e("XX")?, e("YY")?, e("ZZ")?)])
    })?;
    Ok(avg.values[0])
}

/// Depolarizing probability at which the simulated Bell fidelity equals `target`.
pub fn calibrate_bell_depolarizing(target: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&target) {
        return Err(Error::InvalidParameter(format!(
            "Bell fidelity target must be in [0.25, 1], got {target}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 0.75);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bell_fidelity_depolarizing(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Witness quantities under depolarizing noise, with truncation brackets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyWitness {
    pub g_a: f64,
    pub g_b: f64,
    pub p: f64,
    pub p_lower: f64,
    pub p_upper: f64,
    pub omitted_prior: f64,
}

pub fn noisy_witness(
    program: &ProtocolProgram,
    set: &StabilizerSet,
    p: f64,
    max_faults: usize,
) -> Result<NoisyWitness> {
    let avg = depolarizing_average(program, BackendChoice::Auto, p, max_faults, |s| {
        Ok(vec![
            product_correlator(s, set, SetLabel::A)?,
            product_correlator(s, set, SetLabel::B)?,
        ])
    })?;
    Ok(NoisyWitness {
        g_a: avg.values[0],
        g_b: avg.values[1],
        p: avg.values[0] + avg.values[1] - 1.0,
        p_lower: avg.lower[0] + avg.lower[1] - 1.0,
        p_upper: avg.upper[0] + avg.upper[1] - 1.0,
        omitted_prior: avg.omitted_prior,
    })
}
