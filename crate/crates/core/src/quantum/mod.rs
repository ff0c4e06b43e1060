//! Qubit register with dense and stabilizer-tableau backends.

pub mod dense;
pub mod pauli;
pub mod state;
pub mod tableau;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use dense::PureState;
pub use pauli::{Pauli, PauliString};
pub use state::{BackendKind, FuseChoice, State};
pub use tableau::StabilizerTableau;

/// One of the two emitters. Atom 1 owns register index 0, atom 2 index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    One,
    Two,
}

impl Atom {
    pub const BOTH: [Atom; 2] = [Atom::One, Atom::Two];

    pub fn index(self) -> usize {
        match self {
            Atom::One => 0,
            Atom::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Atom> {
        match n {
            1 => Some(Atom::One),
            2 => Some(Atom::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitKind {
    Spin(Atom),
    /// `order` counts photons across both atoms, starting at 0.
    Photon {
        order: usize,
        atom: Atom,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitId {
    pub index: usize,
    pub kind: QubitKind,
}

impl QubitId {
    pub fn is_spin(&self) -> bool {
        matches!(self.kind, QubitKind::Spin(_))
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QubitKind::Spin(a) => write!(f, "S{}", a.number()),
            QubitKind::Photon { order, atom } => write!(f, "P{}.{}", order, atom.number()),
        }
    }
}

impl FromStr for QubitId {
    type Err = Error;

    /// Parses `S1`, `S2` and `P<order>.<atom>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(0, format!("invalid qubit label {s:?}"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('S') {
            let atom = rest
                .parse::<u8>()
                .ok()
                .and_then(Atom::from_number)
                .ok_or_else(bad)?;
            return Ok(QubitId {
                index: atom.index(),
                kind: QubitKind::Spin(atom),
            });
        }
        let rest = s.strip_prefix('P').ok_or_else(bad)?;
        let (order, atom) = rest.split_once('.').ok_or_else(bad)?;
        let order: usize = order.parse().map_err(|_| bad())?;
        let atom = atom
            .parse::<u8>()
            .ok()
            .and_then(Atom::from_number)
            .ok_or_else(bad)?;
        Ok(QubitId {
            index: order + 2,
            kind: QubitKind::Photon { order, atom },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        self.pauli().as_char()
    }

    pub fn from_char(c: char) -> Option<Basis> {
        match c {
            'X' | 'x' => Some(Basis::X),
            'Y' | 'y' => Some(Basis::Y),
            'Z' | 'z' => Some(Basis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next().and_then(Basis::from_char), chars.next()) {
            (Some(b), None) => Ok(b),
            _ => Err(Error::parse(0, format!("unknown basis {s:?}"))),
        }
    }
}

/// Initial state of the two spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinInit {
    Zero,
    Plus,
    /// `(|01⟩ + |10⟩)/√2`
    PairBell,
}

impl fmt::Display for SpinInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinInit::Zero => "zero",
            SpinInit::Plus => "plus",
            SpinInit::PairBell => "bell",
        })
    }
}

impl FromStr for SpinInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(SpinInit::Zero),
            "plus" => Ok(SpinInit::Plus),
            "bell" => Ok(SpinInit::PairBell),
            other => Err(Error::parse(0, format!("unknown spin init {other:?}"))),
        }
    }
}

/// Photon polarization; `R ≡ |0⟩`, `L ≡ |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    R,
    L,
}

impl Polarization {
    pub fn from_bit(b: bool) -> Self {
        if b {
            Polarization::L
        } else {
            Polarization::R
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::R => "R",
            Polarization::L => "L",
        })
    }
}

/// Result of one fusion attempt. `probability` is the probability of the observed
/// outcome class (success, or the specific failure pattern).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldOutcome {
    pub success: bool,
    pub pattern: [Polarization; 2],
    pub probability: f64,
}

impl HeraldOutcome {
    pub fn pattern_str(&self) -> String {
        format!("{}{}", self.pattern[0], self.pattern[1])
    }
}
