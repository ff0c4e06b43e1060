use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::dense::{self, PureState, DEFAULT_DENSE_LIMIT};
use super::pauli::{Pauli, PauliString};
use super::tableau::StabilizerTableau;
use super::{Atom, Basis, HeraldOutcome, Polarization, QubitId, QubitKind, SpinInit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Dense,
    Tableau,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Dense => "dense",
            BackendKind::Tableau => "tableau",
        })
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dense" => Ok(BackendKind::Dense),
            "tableau" => Ok(BackendKind::Tableau),
            other => Err(Error::parse(0, format!("unknown backend {other:?}"))),
        }
    }
}

/// How a fusion herald is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuseChoice {
    /// Born-rule sampling.
    Sample,
    /// Post-select the `{|01⟩, |10⟩}` branch.
    Success,
    /// Post-select the failure branch where both photons show this polarization.
    Failure(Polarization),
}

#[derive(Debug, Clone, PartialEq)]
enum Backend {
    Dense(PureState),
    Tableau(StabilizerTableau),
}

/// Two spins plus any number of emitted photons.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    backend: Backend,
    qubits: Vec<QubitId>,
}

fn spin_ids() -> Vec<QubitId> {
    Atom::BOTH
        .iter()
        .map(|&a| QubitId {
            index: a.index(),
            kind: QubitKind::Spin(a),
        })
        .collect()
}

impl State {
    pub fn init_register(init: SpinInit, kind: BackendKind) -> Result<State> {
        Self::init_register_with_limit(init, kind, DEFAULT_DENSE_LIMIT)
    }

    pub fn init_register_with_limit(
        init: SpinInit,
        kind: BackendKind,
        dense_limit: usize,
    ) -> Result<State> {
        let backend = match kind {
            BackendKind::Dense => Backend::Dense(PureState::zero_with_limit(2, dense_limit)?),
            BackendKind::Tableau => Backend::Tableau(StabilizerTableau::zero(2)),
        };
        let mut s = State {
            backend,
            qubits: spin_ids(),
        };
        match init {
            SpinInit::Zero => {}
            SpinInit::Plus => {
                s.apply_hadamard(0)?;
                s.apply_hadamard(1)?;
            }
            SpinInit::PairBell => {
                s.apply_hadamard(0)?;
                s.apply_cnot(0, 1)?;
                s.apply_pauli(1, Pauli::X)?;
            }
        }
        Ok(s)
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Dense(_) => BackendKind::Dense,
            Backend::Tableau(_) => BackendKind::Tableau,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn photons(&self) -> impl Iterator<Item = &QubitId> {
        self.qubits.iter().filter(|q| !q.is_spin())
    }

    pub fn dense(&self) -> Option<&PureState> {
        match &self.backend {
            Backend::Dense(d) => Some(d),
            Backend::Tableau(_) => None,
        }
    }

    pub fn tableau(&self) -> Option<&StabilizerTableau> {
        match &self.backend {
            Backend::Tableau(t) => Some(t),
            Backend::Dense(_) => None,
        }
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.qubits.len() {
            Ok(())
        } else {
            Err(Error::NoSuchQubit(q))
        }
    }

    fn check_spin(&self, q: usize) -> Result<()> {
        self.check(q)?;
        if self.qubits[q].is_spin() {
            Ok(())
        } else {
            Err(Error::NotASpin(q))
        }
    }

    pub fn apply_rotation(&mut self, q: usize, theta: f64, phase: f64) -> Result<()> {
        self.check(q)?;
        match &mut self.backend {
            Backend::Dense(d) => d.apply_matrix(q, &dense::mat_rotation(theta, phase)),
            Backend::Tableau(t) => t.rotation(q, theta, phase),
        }
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        match &mut self.backend {
            Backend::Dense(d) => d.apply_matrix(q, &dense::mat_hadamard()),
            Backend::Tableau(t) => t.h(q),
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        self.check(q)?;
        match &mut self.backend {
            Backend::Dense(d) => {
                let s = PauliString::from_sparse(d.num_qubits(), &[(q, p)], false);
                d.apply_pauli_string(&s)
            }
            Backend::Tableau(t) => t.pauli(q, p),
        }
    }

    /// `diag(1, e^{iφ})`.
    pub fn apply_phase_z(&mut self, q: usize, phi: f64) -> Result<()> {
        self.check(q)?;
        match &mut self.backend {
            Backend::Dense(d) => d.apply_matrix(q, &dense::mat_phase(phi)),
            Backend::Tableau(t) => t.phase(q, phi),
        }
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        match &mut self.backend {
            Backend::Dense(d) => d.apply_cnot(c, t),
            Backend::Tableau(tab) => tab.cnot(c, t),
        }
    }

    /// Emission isometry `|b⟩_S → |b⟩_S |b⟩_ph`; the photon is appended to the register.
    pub fn emit_photon(&mut self, atom: Atom) -> Result<QubitId> {
        let spin = atom.index();
        self.check_spin(spin)?;
        let index = match &mut self.backend {
            Backend::Dense(d) => d.copy_to_new_qubit(spin)?,
            Backend::Tableau(t) => {
                let q = t.push_zero_qubit();
                t.cnot(spin, q)?;
                q
            }
        };
        let order = self.qubits.len() - 2;
        let id = QubitId {
            index,
            kind: QubitKind::Photon { order, atom },
        };
        self.qubits.push(id);
        Ok(id)
    }

    fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(bool, f64)> {
        match &mut self.backend {
            Backend::Dense(d) => d.measure_pauli(p, forced, rng),
            Backend::Tableau(t) => t.measure_pauli(p, forced, rng),
        }
    }

    /// Cavity-assisted fusion of the two spins. Each spin emits a photon, and detecting
    /// one R and one L photon projects the spins onto `span{|01⟩, |10⟩}`. The herald
    /// photons carry copies of the spin values, so the projection is applied directly
    /// to the spins and the photons never enter the register.
    pub fn fuse<R: Rng + ?Sized>(
        &mut self,
        choice: FuseChoice,
        rng: &mut R,
    ) -> Result<HeraldOutcome> {
        let n = self.num_qubits();
        let zz = PauliString::from_sparse(n, &[(0, Pauli::Z), (1, Pauli::Z)], false);
        let forced = match choice {
            FuseChoice::Sample => None,
            FuseChoice::Success => Some(true),
            FuseChoice::Failure(_) => Some(false),
        };
        let (odd, prob) = self.measure_pauli(&zz, forced, rng)?;
        if odd {
            return Ok(HeraldOutcome {
                success: true,
                pattern: [Polarization::R, Polarization::L],
                probability: prob,
            });
        }
        let z0 = PauliString::from_sparse(n, &[(0, Pauli::Z)], false);
        let forced_pol = match choice {
            FuseChoice::Failure(pol) => Some(pol == Polarization::L),
            _ => None,
        };
        let (one, p2) = self.measure_pauli(&z0, forced_pol, rng)?;
        let pol = Polarization::from_bit(one);
        Ok(HeraldOutcome {
            success: false,
            pattern: [pol, pol],
            probability: prob * p2,
        })
    }

    /// Projective single-qubit measurement. Returns the `±1` outcome and its probability.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        basis: Basis,
        forced: Option<i8>,
        rng: &mut R,
    ) -> Result<(i8, f64)> {
        self.check(q)?;
        let p = PauliString::from_sparse(self.num_qubits(), &[(q, basis.pauli())], false);
        let (neg, prob) = self.measure_pauli(&p, forced.map(|v| v < 0), rng)?;
        Ok((if neg { -1 } else { 1 }, prob))
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        match &self.backend {
            Backend::Dense(d) => d.expectation(p),
            Backend::Tableau(t) => t.expectation(p).map(f64::from),
        }
    }
}

/// Anything that can report exact Pauli expectation values.
pub trait Expectation {
    fn num_qubits(&self) -> usize;
    fn expectation(&self, p: &PauliString) -> Result<f64>;
}

impl Expectation for State {
    fn num_qubits(&self) -> usize {
        State::num_qubits(self)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        State::expectation(self, p)
    }
}

impl Expectation for PureState {
    fn num_qubits(&self) -> usize {
        PureState::num_qubits(self)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        PureState::expectation(self, p)
    }
}

impl Expectation for StabilizerTableau {
    fn num_qubits(&self) -> usize {
        StabilizerTableau::num_qubits(self)
    }

    fn expectation(&self, p: &PauliString) -> Result<f64> {
        StabilizerTableau::expectation(self, p).map(f64::from)
    }
}
