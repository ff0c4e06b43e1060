//! Stabilizer tableau backend with destabilizer rows (Aaronson–Gottesman layout).

use rand::Rng;

use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::gf2::BitRow;

/// One generator row: Pauli letters as `(x, z)` bits plus a sign bit (`true` = −1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub x: BitRow,
    pub z: BitRow,
    pub negative: bool,
}

impl Row {
    pub fn identity(n: usize) -> Self {
        Row {
            x: BitRow::zeros(n),
            z: BitRow::zeros(n),
            negative: false,
        }
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        Row {
            x: p.x_row(),
            z: p.z_row(),
            negative: p.is_negative(),
        }
    }

    pub fn to_pauli(&self) -> PauliString {
        let letters = (0..self.x.len())
            .map(|i| Pauli::from_bits(self.x.get(i), self.z.get(i)))
            .collect();
        PauliString::new(letters, self.negative)
    }

    /// True when the two rows anticommute.
    pub fn anticommutes(&self, other: &Row) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    /// `self ← other · self`, with the sign tracked exactly. The product of two
    /// commuting Hermitian Paulis is Hermitian; anticommuting inputs are a logic error.
    pub fn left_multiply(&mut self, other: &Row) {
        let exp = 2 * (self.negative as i64) + 2 * (other.negative as i64) + phase_sum(other, self);
        debug_assert!(exp.rem_euclid(2) == 0, "product of anticommuting rows");
        self.negative = exp.rem_euclid(4) == 2;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }
}

/// Σ_j g(x1_j, z1_j, x2_j, z2_j): the power of i picked up by the product `a · b`.
fn phase_sum(a: &Row, b: &Row) -> i64 {
    let mut plus = 0i64;
    let mut minus = 0i64;
    for k in 0..a.x.words().len() {
        let (x1, z1) = (a.x.words()[k], a.z.words()[k]);
        let (x2, z2) = (b.x.words()[k], b.z.words()[k]);
        let y1 = x1 & z1;
        let xo1 = x1 & !z1;
        let zo1 = !x1 & z1;
        let p = (y1 & z2 & !x2) | (xo1 & x2 & z2) | (zo1 & x2 & !z2);
        let m = (y1 & x2 & !z2) | (xo1 & !x2 & z2) | (zo1 & x2 & z2);
        plus += p.count_ones() as i64;
        minus += m.count_ones() as i64;
    }
    plus - minus
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    destab: Vec<Row>,
    stab: Vec<Row>,
}

impl StabilizerTableau {
    /// `|0...0⟩`.
    pub fn zero(n: usize) -> Self {
        let mut destab = Vec::with_capacity(n);
        let mut stab = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = Row::identity(n);
            d.x.set(i, true);
            destab.push(d);
            let mut s = Row::identity(n);
            s.z.set(i, true);
            stab.push(s);
        }
        StabilizerTableau { n, destab, stab }
    }

    /// Graph state `∏ CZ |+⟩^n` from a symmetric adjacency matrix with zero diagonal.
    pub fn from_graph(adj: &[BitRow]) -> Result<Self> {
        let n = adj.len();
        let mut destab = Vec::with_capacity(n);
        let mut stab = Vec::with_capacity(n);
        for (i, row) in adj.iter().enumerate() {
            if row.len() != n || row.get(i) {
                return Err(Error::InvalidGraph(
                    "adjacency must be square with zero diagonal".into(),
                ));
            }
            if let Some(j) = row.iter_ones().find(|&j| !adj[j].get(i)) {
                return Err(Error::InvalidGraph(format!(
                    "adjacency not symmetric at ({i}, {j})"
                )));
            }
            let mut d = Row::identity(n);
            d.z.set(i, true);
            destab.push(d);
            let mut s = Row::identity(n);
            s.x.set(i, true);
            s.z = row.clone();
            stab.push(s);
        }
        Ok(StabilizerTableau { n, destab, stab })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer_rows(&self) -> &[Row] {
        &self.stab
    }

    pub fn destabilizer_rows(&self) -> &[Row] {
        &self.destab
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        self.stab.iter().map(Row::to_pauli).collect()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::NoSuchQubit(q))
        }
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut Row> {
        self.destab.iter_mut().chain(self.stab.iter_mut())
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for r in self.rows_mut() {
            let (x, z) = (r.x.get(q), r.z.get(q));
            r.negative ^= x & z;
            r.x.set(q, z);
            r.z.set(q, x);
        }
        Ok(())
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for r in self.rows_mut() {
            let (x, z) = (r.x.get(q), r.z.get(q));
            r.negative ^= x & z;
            r.z.set(q, z ^ x);
        }
        Ok(())
    }

    pub fn s_dag(&mut self, q: usize) -> Result<()> {
        self.z(q)?;
        self.s(q)
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for r in self.rows_mut() {
            r.negative ^= r.z.get(q);
        }
        Ok(())
    }

    pub fn z(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for r in self.rows_mut() {
            r.negative ^= r.x.get(q);
        }
        Ok(())
    }

    pub fn y(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for r in self.rows_mut() {
            r.negative ^= r.x.get(q) ^ r.z.get(q);
        }
        Ok(())
    }

    pub fn pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        match p {
            Pauli::I => self.check(q),
            Pauli::X => self.x(q),
            Pauli::Y => self.y(q),
            Pauli::Z => self.z(q),
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        for r in self.rows_mut() {
            let (xc, zc, xt, zt) = (r.x.get(c), r.z.get(c), r.x.get(t), r.z.get(t));
            r.negative ^= xc & zt & !(xt ^ zc);
            r.x.set(t, xt ^ xc);
            r.z.set(c, zc ^ zt);
        }
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.h(b)?;
        self.cnot(a, b)?;
        self.h(b)
    }

    /// Apply `diag(1, e^{iφ})` for φ a multiple of π/2.
    pub fn phase(&mut self, q: usize, phi: f64) -> Result<()> {
        let k = quarter_turns(phi).ok_or_else(|| {
            Error::NonCliffordOnTableau(format!("phase {phi} is not a multiple of pi/2"))
        })?;
        for _ in 0..k {
            self.s(q)?;
        }
        self.check(q)
    }

    /// Rotation `U(θ, φ) = P(φ) R_y(θ) P(−φ)` for θ, φ multiples of π/2.
    pub fn rotation(&mut self, q: usize, theta: f64, phase: f64) -> Result<()> {
        let kt = quarter_turns(theta).ok_or_else(|| {
            Error::NonCliffordOnTableau(format!("rotation angle {theta} is not a multiple of pi/2"))
        })?;
        let kp = quarter_turns(phase).ok_or_else(|| {
            Error::NonCliffordOnTableau(format!("rotation phase {phase} is not a multiple of pi/2"))
        })?;
        self.check(q)?;
        for _ in 0..(4 - kp) % 4 {
            self.s(q)?;
        }
        // R_y(π/2) = H·Z
        for _ in 0..kt {
            self.z(q)?;
            self.h(q)?;
        }
        for _ in 0..kp {
            self.s(q)?;
        }
        Ok(())
    }

    /// Append a qubit in `|0⟩`.
    pub fn push_zero_qubit(&mut self) -> usize {
        for r in self.rows_mut() {
            r.x.push_zero();
            r.z.push_zero();
        }
        let n = self.n + 1;
        let mut d = Row::identity(n);
        d.x.set(self.n, true);
        self.destab.push(d);
        let mut s = Row::identity(n);
        s.z.set(self.n, true);
        self.stab.push(s);
        self.n = n;
        self.n - 1
    }

    fn check_len(&self, p: &PauliString) -> Result<()> {
        if p.len() == self.n {
            Ok(())
        } else {
            Err(Error::PauliLength {
                len: p.len(),
                n: self.n,
            })
        }
    }

    /// Exact `⟨P⟩ ∈ {−1, 0, +1}`.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        self.check_len(p)?;
        let row = Row::from_pauli(p);
        if self.stab.iter().any(|s| s.anticommutes(&row)) {
            return Ok(0);
        }
        let mut acc = Row::identity(self.n);
        for (d, s) in self.destab.iter().zip(&self.stab) {
            if d.anticommutes(&row) {
                acc.left_multiply(s);
            }
        }
        debug_assert!(acc.x == row.x && acc.z == row.z);
        Ok(if acc.negative == row.negative { 1 } else { -1 })
    }

    /// Measure `P`. Returns `(negative_outcome, probability)`. A forced outcome with
    /// zero probability is an error.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(bool, f64)> {
        self.check_len(p)?;
        let row = Row::from_pauli(p);
        let Some(pivot) = self.stab.iter().position(|s| s.anticommutes(&row)) else {
            let v = self.expectation(p)?;
            let neg = v < 0;
            if let Some(f) = forced {
                if f != neg {
                    return Err(Error::ZeroProbabilityBranch(format!(
                        "{} has deterministic value {}",
                        p, v
                    )));
                }
            }
            return Ok((neg, 1.0));
        };
        let neg = forced.unwrap_or_else(|| rng.random::<bool>());
        let pivot_row = self.stab[pivot].clone();
        for (i, d) in self.destab.iter_mut().enumerate() {
            if i != pivot && d.anticommutes(&row) {
                d.left_multiply(&pivot_row);
            }
        }
        for (i, s) in self.stab.iter_mut().enumerate() {
            if i != pivot && s.anticommutes(&row) {
                s.left_multiply(&pivot_row);
            }
        }
        self.destab[pivot] = pivot_row;
        self.stab[pivot] = Row {
            negative: neg ^ row.negative,
            ..row
        };
        Ok((neg, 0.5))
    }

    /// True when `other` stabilizes exactly the same state.
    pub fn same_state(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n
            && other
                .stabilizers()
                .iter()
                .all(|g| matches!(self.expectation(g), Ok(1)))
    }

    /// True when every listed operator is a +1 stabilizer and they span the full group.
    pub fn is_stabilized_by(&self, generators: &[PauliString]) -> bool {
        if generators.len() != self.n {
            return false;
        }
        let all_plus = generators
            .iter()
            .all(|g| matches!(self.expectation(g), Ok(1)));
        if !all_plus {
            return false;
        }
        let rows: Vec<BitRow> = generators
            .iter()
            .map(|g| {
                let mut r = BitRow::zeros(2 * self.n);
                for i in 0..self.n {
                    r.set(i, g.letter(i).x_bit());
                    r.set(self.n + i, g.letter(i).z_bit());
                }
                r
            })
            .collect();
        crate::gf2::BitMatrix::from_rows(rows, 2 * self.n).rank() == self.n
    }
}

/// `Some(k)` with k in 0..4 when `angle ≈ k·π/2 (mod 2π)`.
pub fn quarter_turns(angle: f64) -> Option<u32> {
    let q = angle / std::f64::consts::FRAC_PI_2;
    let r = q.round();
    if (q - r).abs() > 1e-9 {
        return None;
    }
    Some((r as i64).rem_euclid(4) as u32)
}
