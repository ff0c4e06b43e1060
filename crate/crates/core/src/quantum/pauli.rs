use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Hermitian Pauli operator with a real sign: `±P_0 ⊗ P_1 ⊗ ...`.
///
/// Position `i` of the string acts on register qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; n],
            negative: false,
        }
    }

    pub fn new(letters: Vec<Pauli>, negative: bool) -> Self {
        PauliString { letters, negative }
    }

    /// Build from `(qubit, letter)` pairs on an `n`-qubit register.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)], negative: bool) -> Self {
        let mut p = Self::identity(n);
        for &(q, l) in terms {
            p.letters[q] = l;
        }
        p.negative = negative;
        p
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn set_letter(&mut self, q: usize, l: Pauli) {
        self.letters[q] = l;
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn with_sign(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != Pauli::I)
            .map(|(i, _)| i)
    }

    pub fn weight(&self) -> usize {
        self.support().count()
    }

    pub fn x_row(&self) -> BitRow {
        let mut r = BitRow::zeros(self.len());
        for (i, l) in self.letters.iter().enumerate() {
            if l.x_bit() {
                r.set(i, true);
            }
        }
        r
    }

    pub fn z_row(&self) -> BitRow {
        let mut r = BitRow::zeros(self.len());
        for (i, l) in self.letters.iter().enumerate() {
            if l.z_bit() {
                r.set(i, true);
            }
        }
        r
    }

    /// Bitmasks `(x, z)` for registers of at most 64 qubits.
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.len() <= 64);
        let mut x = 0u64;
        let mut z = 0u64;
        for (i, l) in self.letters.iter().enumerate() {
            if l.x_bit() {
                x |= 1 << i;
            }
            if l.z_bit() {
                z |= 1 << i;
            }
        }
        (x, z)
    }

    pub fn count_y(&self) -> usize {
        self.letters.iter().filter(|l| **l == Pauli::Y).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.len(), other.len());
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Product `self · other`, or `None` when the result carries an imaginary phase.
    pub fn mul(&self, other: &PauliString) -> Option<PauliString> {
        assert_eq!(self.len(), other.len());
        // phase tracked as a power of i
        let mut phase: u32 = 2 * (self.negative as u32) + 2 * (other.negative as u32);
        let mut letters = Vec::with_capacity(self.len());
        for (&a, &b) in self.letters.iter().zip(&other.letters) {
            use Pauli::*;
            let (l, p) = match (a, b) {
                (I, q) | (q, I) => (q, 0),
                (X, X) | (Y, Y) | (Z, Z) => (I, 0),
                (X, Y) => (Z, 1),
                (Y, Z) => (X, 1),
                (Z, X) => (Y, 1),
                (Y, X) => (Z, 3),
                (Z, Y) => (X, 3),
                (X, Z) => (Y, 3),
            };
            phase += p;
            letters.push(l);
        }
        match phase % 4 {
            0 => Some(PauliString::new(letters, false)),
            2 => Some(PauliString::new(letters, true)),
            _ => None,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let letters = body
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::parse(0, format!("invalid Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters, negative })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliString = "-ZZI".parse().unwrap();
        assert!(p.is_negative());
        assert_eq!(p.weight(), 2);
        assert_eq!(p.to_string(), "-ZZI");
        assert_eq!("XY".parse::<PauliString>().unwrap().to_string(), "+XY");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn products_and_commutation() {
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        assert!(xx.commutes_with(&zz));
        assert_eq!(xx.mul(&zz).unwrap().to_string(), "-YY");
        let xi: PauliString = "XI".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        assert!(!xi.commutes_with(&zi));
        assert!(xi.mul(&zi).is_none());
    }
}
