//! Stochastic noise, photon timing, post-selection and Monte-Carlo emulation.

mod montecarlo;
mod records;
mod wavepacket;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Atom, Basis, Pauli, State};

pub use montecarlo::{monte_carlo, CoincidenceStats, MonteCarloConfig, MonteCarloOutput, Stage};
pub use records::{
    parse_records, write_records, ClickRecord, Detector, RecordFile, ShotRecord,
    RECORD_FORMAT_VERSION,
};
pub use wavepacket::{
    post_select, sample_arrival, PostSelectionPolicy, ShapeKind, Verdict, Wavepacket,
};

/// Phenomenological noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Probability that any photon is lost before detection.
    pub loss_per_photon: f64,
    /// Probability of a uniformly random X/Y/Z on the emitting spin after each emission.
    pub depolarizing_per_emission: f64,
    /// Spin dephasing rate during waits, 1/µs.
    pub spin_dephasing_per_us: f64,
    /// Dephasing probability per ns of `|t_R − t_L|` in a fusion herald.
    pub tau_dephasing_per_ns: f64,
    pub wavepacket: Wavepacket,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            loss_per_photon: 0.0,
            depolarizing_per_emission: 0.0,
            spin_dephasing_per_us: 0.0,
            tau_dephasing_per_ns: 0.0,
            wavepacket: Wavepacket::default(),
        }
    }
}

impl NoiseModel {
    /// No faults, no loss, and every photon arriving at the wave-packet peak.
    pub fn zero() -> Self {
        NoiseModel {
            wavepacket: Wavepacket::fixed(Wavepacket::default().mode_ns()),
            ..NoiseModel::default()
        }
    }

    pub fn depolarizing(p: f64) -> Self {
        NoiseModel {
            depolarizing_per_emission: p,
            ..NoiseModel::zero()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be in [0, 1], got {v}"
                )))
            }
        };
        prob("loss_per_photon", self.loss_per_photon)?;
        prob("depolarizing_per_emission", self.depolarizing_per_emission)?;
        for (name, v) in [
            ("spin_dephasing_per_us", self.spin_dephasing_per_us),
            ("tau_dephasing_per_ns", self.tau_dephasing_per_ns),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        self.wavepacket.validate()
    }

    pub fn is_noiseless(&self) -> bool {
        self.loss_per_photon == 0.0
            && self.depolarizing_per_emission == 0.0
            && self.spin_dephasing_per_us == 0.0
            && self.tau_dephasing_per_ns == 0.0
    }

    /// Probability of a Z fault on a spin idling for `duration_us`.
    pub fn dephasing_probability(&self, duration_us: f64) -> f64 {
        (1.0 - (-self.spin_dephasing_per_us * duration_us).exp()) / 2.0
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: NoiseModel =
            toml::from_str(text).map_err(|e| Error::parse(0, format!("noise model: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("noise model serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseEvent {
    Emission(Atom),
    Wait { atom: Atom, duration_us: f64 },
}

fn random_pauli<R: Rng + ?Sized>(rng: &mut R) -> Pauli {
    match rng.random_range(0..3) {
        0 => Pauli::X,
        1 => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// Insert a stochastic Pauli fault for `event`. Returns the applied Pauli, if any.
pub fn apply_noise<R: Rng + ?Sized>(
    state: &mut State,
    event: NoiseEvent,
    model: &NoiseModel,
    rng: &mut R,
) -> Result<Option<(usize, Pauli)>> {
    let (q, fault) = match event {
        NoiseEvent::Emission(atom) => {
            let p = model.depolarizing_per_emission;
            let fault = (p > 0.0 && rng.random::<f64>() < p).then(|| random_pauli(rng));
            (atom.index(), fault)
        }
        NoiseEvent::Wait { atom, duration_us } => {
            let p = model.dephasing_probability(duration_us);
            let fault = (p > 0.0 && rng.random::<f64>() < p).then_some(Pauli::Z);
            (atom.index(), fault)
        }
    };
    if let Some(f) = fault {
        state.apply_pauli(q, f)?;
    }
    Ok(fault.map(|f| (q, f)))
}

/// Repeat-until-success spin readout. Each attempt maps the spin onto a photon that
/// survives with probability `1 − loss`; the first detected photon gives the outcome.
/// Returns `(None, max_attempts)` when every attempt was lost.
pub fn readout_spin<R: Rng + ?Sized>(
    state: &mut State,
    atom: Atom,
    basis: Basis,
    max_attempts: u32,
    loss: f64,
    rng: &mut R,
) -> Result<(Option<i8>, u32)> {
    if max_attempts == 0 {
        return Err(Error::InvalidParameter(
            "max_attempts must be at least 1".into(),
        ));
    }
    for attempt in 1..=max_attempts {
        if loss > 0.0 && rng.random::<f64>() < loss {
            continue;
        }
        let (outcome, _) = state.measure(atom.index(), basis, None, rng)?;
        return Ok((Some(outcome), attempt));
    }
    Ok((None, max_attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{BackendKind, PauliString, SpinInit};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_model_leaves_state_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = State::init_register(SpinInit::PairBell, BackendKind::Tableau).unwrap();
        let before = s.clone();
        for _ in 0..100 {
            assert!(apply_noise(
                &mut s,
                NoiseEvent::Emission(Atom::One),
                &NoiseModel::zero(),
                &mut rng
            )
            .unwrap()
            .is_none());
        }
        assert_eq!(s, before);
    }

    #[test]
    fn certain_dephasing_flips_coherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = NoiseModel {
            depolarizing_per_emission: 1.0,
            ..NoiseModel::zero()
        };
        let mut s = State::init_register(SpinInit::PairBell, BackendKind::Tableau).unwrap();
        let f = apply_noise(&mut s, NoiseEvent::Emission(Atom::Two), &m, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(f.0, 1);
        let stays_bell = s
            .expectation(&"XX".parse::<PauliString>().unwrap())
            .unwrap()
            == 1.0
            && s.expectation(&"ZZ".parse::<PauliString>().unwrap())
                .unwrap()
                == -1.0;
        assert!(!stays_bell);
    }

    #[test]
    fn readout_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = State::init_register(SpinInit::Zero, BackendKind::Tableau).unwrap();
        assert_eq!(
            readout_spin(&mut s, Atom::One, Basis::Z, 3, 0.0, &mut rng).unwrap(),
            (Some(1), 1)
        );
        assert_eq!(
            readout_spin(&mut s, Atom::One, Basis::Z, 3, 1.0, &mut rng).unwrap(),
            (None, 3)
        );
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let m = NoiseModel {
            loss_per_photon: 0.5,
            depolarizing_per_emission: 0.03,
            ..NoiseModel::default()
        };
        assert_eq!(NoiseModel::from_toml(&m.to_toml()).unwrap(), m);
        let partial = NoiseModel::from_toml("loss_per_photon = 0.25\n").unwrap();
        assert_eq!(partial.loss_per_photon, 0.25);
        assert!(NoiseModel::from_toml("loss_per_photon = 1.5\n").is_err());
        assert!(NoiseModel::from_toml("bogus = 1\n").is_err());
    }
}
