use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{SetLabel, StabilizerSet};
use crate::noise::ShotRecord;
use crate::quantum::state::Expectation;
use crate::quantum::{Basis, Pauli, PauliString};

/// A value with its 1σ standard error. `n == 0` marks an exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            n: 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.n == 0
    }

    /// Mean of `±1` outcomes with Wald error `√((1 − m²)/n)`.
    pub fn from_signs(sum: i64, n: u64) -> Self {
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let m = sum as f64 / n as f64;
        Estimate {
            value: m,
            stderr: ((1.0 - m * m).max(0.0) / n as f64).sqrt(),
            n,
        }
    }

    /// Fraction of successes with Wald error `√(f(1 − f)/n)`.
    pub fn from_counts(successes: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let f = successes as f64 / n as f64;
        Estimate {
            value: f,
            stderr: (f * (1.0 - f) / n as f64).sqrt(),
            n,
        }
    }

    /// Whether `x` lies within `k` standard errors.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.stderr
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} {:.6} {}", self.value, self.stderr, self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerValue {
    pub generator: PauliString,
    pub set: Option<SetLabel>,
    pub estimate: Estimate,
}

fn label_of(set: &StabilizerSet, i: usize) -> Option<SetLabel> {
    let p = set.partition.as_ref()?;
    if p.a.contains(&i) {
        Some(SetLabel::A)
    } else if p.b.contains(&i) {
        Some(SetLabel::B)
    } else {
        None
    }
}

/// Exact `⟨S_i⟩` for every generator.
pub fn stabilizer_expectations<E: Expectation + ?Sized>(
    state: &E,
    set: &StabilizerSet,
) -> Result<Vec<StabilizerValue>> {
    set.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(StabilizerValue {
                generator: g.pauli.clone(),
                set: label_of(set, i),
                estimate: Estimate::exact(state.expectation(&g.pauli)?),
            })
        })
        .collect()
}

/// Eigenvalue of `g` implied by one shot, or `SettingMismatch` if a basis differs from
/// the generator's letter on its support.
pub fn shot_value(g: &PauliString, bases: &[Basis], outcomes: &[i8]) -> Result<i8> {
    if bases.len() != g.len() || outcomes.len() != g.len() {
        return Err(Error::SettingMismatch(format!(
            "{g}: shot covers {} qubits",
            bases.len()
        )));
    }
    let mut v: i8 = if g.is_negative() { -1 } else { 1 };
    for q in g.support() {
        let letter = g.letter(q);
        if letter == Pauli::Y || bases[q].pauli() != letter {
            return Err(Error::SettingMismatch(format!(
                "{g}: qubit {q} measured in {}",
                bases[q]
            )));
        }
        v *= outcomes[q];
    }
    Ok(v)
}

/// `∏ (1 + s_i)/2` over the listed generators for one shot: 1 if all are +1, else 0.
pub fn shot_product(gens: &[&PauliString], shot: &ShotRecord) -> Result<bool> {
    let mut all = true;
    for g in gens {
        all &= shot_value(g, &shot.bases, &shot.outcomes)? == 1;
    }
    Ok(all)
}

fn partition(set: &StabilizerSet) -> Result<&crate::graph::Partition> {
    set.partition
        .as_ref()
        .ok_or_else(|| Error::SettingMismatch("stabilizer set has no measurement partition".into()))
}

/// Estimates from setting-tagged shots. Generator `i` of set `a` is evaluated on the
/// shots recorded in setting `a`.
pub fn stabilizer_expectations_from_records(
    shots: &[ShotRecord],
    set: &StabilizerSet,
) -> Result<Vec<StabilizerValue>> {
    partition(set)?;
    set.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let label = label_of(set, i);
            let mut sum = 0i64;
            let mut n = 0u64;
            for s in shots.iter().filter(|s| Some(s.set) == label) {
                sum += shot_value(&g.pauli, &s.bases, &s.outcomes)? as i64;
                n += 1;
            }
            Ok(StabilizerValue {
                generator: g.pauli.clone(),
                set: label,
                estimate: Estimate::from_signs(sum, n),
            })
        })
        .collect()
}

fn set_paulis(set: &StabilizerSet, label: SetLabel) -> Result<Vec<&PauliString>> {
    Ok(partition(set)?
        .set(label)
        .iter()
        .map(|&i| &set.generators[i].pauli)
        .collect())
}

/// Exact `⟨∏_{i∈set}(1 + S_i)/2⟩`, expanded as the average of `⟨∏_{i∈T} S_i⟩` over all
/// subsets `T`.
pub fn product_correlator<E: Expectation + ?Sized>(
    state: &E,
    set: &StabilizerSet,
    label: SetLabel,
) -> Result<f64> {
    let gens = set_paulis(set, label)?;
    let m = gens.len();
    if m > 24 {
        return Err(Error::TooLarge {
            requested: m,
            limit: 24,
        });
    }
    let n = state.num_qubits();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let mut p = PauliString::identity(n);
        for (j, g) in gens.iter().enumerate() {
            if mask >> j & 1 == 1 {
                p = p.mul(g).ok_or_else(|| {
                    Error::SettingMismatch(format!("generators in set {label} do not commute"))
                })?;
            }
        }
        total += state.expectation(&p)?;
    }
    Ok(total / (1u64 << m) as f64)
}

/// Mean of per-shot products over the shots tagged with `label`.
pub fn product_correlator_from_records(
    shots: &[ShotRecord],
    set: &StabilizerSet,
    label: SetLabel,
) -> Result<Estimate> {
    let gens = set_paulis(set, label)?;
    let mut ok = 0u64;
    let mut n = 0u64;
    for s in shots.iter().filter(|s| s.set == label) {
        ok += shot_product(&gens, s)? as u64;
        n += 1;
    }
    Ok(Estimate::from_counts(ok, n))
}
