use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::protocol::{
    execute, noise_sites, BackendChoice, ExecOptions, HeraldMode, Instruction, PhaseKind,
    ProtocolProgram,
};
use crate::quantum::{Atom, Pauli, PauliString, QubitKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityPoint {
    pub t0_us: f64,
    /// X parity of the GHZ branch of atom 1 and of atom 2.
    pub parity: [f64; 2],
}

/// X-basis parity of each atom's GHZ branch (spin plus its photons) as the free
/// evolution time varies, evaluated right after the evolution phases.
///
/// Only idle dephasing of `noise` enters: every wait site is enumerated with and without
/// its Z fault, so the result is exact.
pub fn parity_scan(
    program: &ProtocolProgram,
    t0_grid: &[f64],
    omega_q: f64,
    noise: Option<&NoiseModel>,
) -> Result<Vec<ParityPoint>> {
    if t0_grid.is_empty() {
        return Err(Error::InvalidParameter("t0 grid is empty".into()));
    }
    if !(omega_q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega_q must be positive, got {omega_q}"
        )));
    }
    let until = program
        .instructions
        .iter()
        .rposition(|i| {
            matches!(
                i,
                Instruction::PhaseZ {
                    kind: PhaseKind::Evolution,
                    ..
                }
            )
        })
        .ok_or_else(|| Error::InvalidProgram("program has no evolution phase to scan".into()))?
        + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    t0_grid
        .iter()
        .map(|&t0| {
            let mut timing = program.timing;
            timing.free_evolution_us = t0;
            timing.omega_q = omega_q;
            let prog = program.with_timing(timing);
            let backend = BackendChoice::Dense.resolve(&prog)?;
            let waits: Vec<(usize, f64)> = noise_sites(&prog)
                .iter()
                .enumerate()
                .filter(|(_, s)| s.wait && s.instruction < until)
                .map(|(k, s)| {
                    let dur = match prog.instructions[s.instruction] {
                        Instruction::Wait { duration_us, .. } => duration_us,
                        _ => 0.0,
                    };
                    (k, noise.map_or(0.0, |m| m.dephasing_probability(dur)))
                })
                .filter(|&(_, p)| p > 0.0)
                .collect();
            let n_sites = noise_sites(&prog).len();
            let mut parity = [0.0; 2];
            for mask in 0u32..(1 << waits.len()) {
                let mut script = vec![Pauli::I; n_sites];
                let mut weight = 1.0;
                for (j, &(k, p)) in waits.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        script[k] = Pauli::Z;
                        weight *= p;
                    } else {
                        weight *= 1.0 - p;
                    }
                }
                let opts = ExecOptions {
                    herald: HeraldMode::Success,
                    until: Some(until),
                    fault_script: Some(&script),
                    ..ExecOptions::default()
                };
                let ex = execute(&prog, backend, &opts, &mut rng)?;
                for atom in Atom::BOTH {
                    let n = ex.state.num_qubits();
                    let terms: Vec<(usize, Pauli)> = ex
                        .state
                        .qubits()
                        .iter()
                        .filter(|q| match q.kind {
                            QubitKind::Spin(a) | QubitKind::Photon { atom: a, .. } => a == atom,
                        })
                        .map(|q| (q.index, Pauli::X))
                        .collect();
                    let obs = PauliString::from_sparse(n, &terms, false);
                    parity[atom.index()] += weight * ex.state.expectation(&obs)?;
                }
            }
            Ok(ParityPoint { t0_us: t0, parity })
        })
        .collect()
}

/// `y ≈ amplitude · cos(ω t + phase) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub omega: f64,
    pub rms_residual: f64,
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..3 {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Linear least-squares fit at a fixed angular frequency.
pub fn fit_sinusoid(t: &[f64], y: &[f64], omega: f64) -> Result<SineFit> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::InvalidParameter(
            "sinusoid fit needs at least 3 points of matching length".into(),
        ));
    }
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let row = [(omega * ti).cos(), (omega * ti).sin(), 1.0];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            aty[r] += row[r] * yi;
        }
    }
    let [a, b, c] = solve3(ata, aty).ok_or_else(|| {
        Error::InvalidParameter("degenerate sample times for sinusoid fit".into())
    })?;
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - (a * (omega * ti).cos() + b * (omega * ti).sin() + c);
            r * r
        })
        .sum();
    Ok(SineFit {
        amplitude: a.hypot(b),
        phase: (-b).atan2(a),
        offset: c,
        omega,
        rms_residual: (ss / t.len() as f64).sqrt(),
    })
}

/// Fit with the frequency free, searched within ±50% of `omega_guess`.
pub fn fit_sinusoid_free(t: &[f64], y: &[f64], omega_guess: f64) -> Result<SineFit> {
    let cost = |w: f64| fit_sinusoid(t, y, w).map(|f| f.rms_residual);
    let (lo, hi) = (0.5 * omega_guess, 1.5 * omega_guess);
    let steps = 400;
    let mut best = (omega_guess, cost(omega_guess)?);
    for k in 0..=steps {
        let w = lo + (hi - lo) * k as f64 / steps as f64;
        let c = cost(w)?;
        if c < best.1 {
            best = (w, c);
        }
    }
    let h = (hi - lo) / steps as f64;
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if cost(x1)? < cost(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    fit_sinusoid(t, y, (a + b) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_known_sine() {
        let w = 1.3;
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = t.iter().map(|&x| 0.7 * (w * x + 0.4).cos() + 0.1).collect();
        let f = fit_sinusoid(&t, &y, w).unwrap();
        assert_abs_diff_eq!(f.amplitude, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(f.phase, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(f.offset, 0.1, epsilon = 1e-12);
        let free = fit_sinusoid_free(&t, &y, 1.1).unwrap();
        assert_abs_diff_eq!(free.omega, w, epsilon = 1e-7);
    }

    #[test]
    fn tree_working_point() {
        let p = crate::protocol::builtin("tree").unwrap();
        let t0 = p.timing.free_evolution_us;
        let pts = parity_scan(&p, &[t0], p.timing.omega_q, None).unwrap();
        assert_abs_diff_eq!(pts[0].parity[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pts[0].parity[1], -1.0, epsilon = 1e-10);
    }

    #[test]
    fn dephasing_shrinks_fringe() {
        let p = crate::protocol::builtin("tree").unwrap();
        let noise = NoiseModel {
            spin_dephasing_per_us: 0.01,
            ..NoiseModel::zero()
        };
        let t0 = p.timing.free_evolution_us;
        let pts = parity_scan(&p, &[t0], p.timing.omega_q, Some(&noise)).unwrap();
        let expected = 1.0 - 2.0 * noise.dephasing_probability(t0);
        assert_abs_diff_eq!(pts[0].parity[0], expected, epsilon = 1e-10);
        assert!(pts[0].parity[0] < 1.0);
    }
}
