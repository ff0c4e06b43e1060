//! Dense state-vector backend.
//!
//! Register qubit `q` corresponds to bit `q` of the amplitude index.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use super::pauli::PauliString;
use crate::error::{Error, Result};

/// Default upper bound on dense register size.
pub const DEFAULT_DENSE_LIMIT: usize = 24;

const PAR_THRESHOLD: usize = 1 << 14;

pub type Matrix2 = [[C64; 2]; 2];

pub fn mat_rotation(theta: f64, phase: f64) -> Matrix2 {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let e = C64::from_polar(1.0, phase);
    [[C64::new(c, 0.0), -s * e.conj()], [s * e, C64::new(c, 0.0)]]
}

pub fn mat_hadamard() -> Matrix2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(-h, 0.0)],
    ]
}

pub fn mat_phase(phi: f64) -> Matrix2 {
    [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::from_polar(1.0, phi)],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
    n: usize,
    limit: usize,
}

impl PureState {
    /// `|0...0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with_limit(n, DEFAULT_DENSE_LIMIT)
    }

    pub fn zero_with_limit(n: usize, limit: usize) -> Result<Self> {
        if n > limit {
            return Err(Error::TooLarge {
                requested: n,
                limit,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(PureState { amps, n, limit })
    }

    /// Wrap raw amplitudes; the length must be a power of two. Not renormalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        let limit = DEFAULT_DENSE_LIMIT.max(n);
        Ok(PureState { amps, n, limit })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn set_limit(&mut self, limit: usize) {
        self.limit = limit;
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sqr();
        let inv = 1.0 / n2.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        n2
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::NoSuchQubit(q))
        }
    }

    pub fn apply_matrix(&mut self, q: usize, m: &Matrix2) -> Result<()> {
        self.check(q)?;
        let stride = 1usize << q;
        let kernel = |block: &mut [C64]| {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(2 * stride).for_each(kernel);
        } else {
            self.amps.chunks_mut(2 * stride).for_each(kernel);
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check(control)?;
        self.check(target)?;
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    /// Apply a Pauli string (including its sign) as an operator.
    pub fn apply_pauli_string(&mut self, p: &PauliString) -> Result<()> {
        self.amps = self.pauli_image(p)?;
        Ok(())
    }

    /// `P|ψ⟩` as a fresh amplitude vector.
    pub fn pauli_image(&self, p: &PauliString) -> Result<Vec<C64>> {
        if p.len() != self.n {
            return Err(Error::PauliLength {
                len: p.len(),
                n: self.n,
            });
        }
        let (xm, zm) = p.masks();
        let (xm, zm) = (xm as usize, zm as usize);
        let base = i_power(p.count_y() as u32 + if p.is_negative() { 2 } else { 0 });
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let s = if (i & zm).count_ones() % 2 == 1 {
                -base
            } else {
                base
            };
            out[i ^ xm] = s * a;
        }
        Ok(out)
    }

    /// `⟨ψ|P|ψ⟩`, real because `P` is Hermitian.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.len() != self.n {
            return Err(Error::PauliLength {
                len: p.len(),
                n: self.n,
            });
        }
        let (xm, zm) = p.masks();
        let (xm, zm) = (xm as usize, zm as usize);
        let base = i_power(p.count_y() as u32 + if p.is_negative() { 2 } else { 0 });
        let acc: C64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let s = if (i & zm).count_ones() % 2 == 1 {
                    -base
                } else {
                    base
                };
                self.amps[i ^ xm].conj() * s * a
            })
            .sum();
        Ok(acc.re)
    }

    /// Project onto the `(-1)^outcome` eigenspace of `p`; returns the branch probability
    /// and leaves the state renormalized. Zero-probability branches are an error.
    pub fn project_pauli(&mut self, p: &PauliString, negative: bool) -> Result<f64> {
        let img = self.pauli_image(p)?;
        let s = if negative { -1.0 } else { 1.0 };
        let projected: Vec<C64> = self
            .amps
            .iter()
            .zip(&img)
            .map(|(&a, &b)| (a + s * b) * 0.5)
            .collect();
        let prob: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        if prob < 1e-14 {
            return Err(Error::ZeroProbabilityBranch(format!(
                "{} eigenvalue {}",
                p,
                if negative { -1 } else { 1 }
            )));
        }
        self.amps = projected;
        self.normalize();
        Ok(prob)
    }

    /// Probability of the `-1` outcome when measuring `p`.
    pub fn pauli_minus_probability(&self, p: &PauliString) -> Result<f64> {
        Ok(((1.0 - self.expectation(p)?) / 2.0).clamp(0.0, 1.0))
    }

    /// Measure `p` projectively. `forced` selects the outcome; otherwise Born-sampled.
    /// Returns `(negative_outcome, probability_of_that_outcome)`.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(bool, f64)> {
        let p_minus = self.pauli_minus_probability(p)?;
        let neg = match forced {
            Some(v) => v,
            None => rng.random::<f64>() < p_minus,
        };
        let prob = self.project_pauli(p, neg)?;
        Ok((neg, prob))
    }

    /// Append a qubit in `|0⟩` as the new highest index.
    pub fn push_zero_qubit(&mut self) -> Result<usize> {
        if self.n + 1 > self.limit {
            return Err(Error::TooLarge {
                requested: self.n + 1,
                limit: self.limit,
            });
        }
        self.amps.resize(self.amps.len() * 2, C64::new(0.0, 0.0));
        self.n += 1;
        Ok(self.n - 1)
    }

    /// The emission isometry `|b⟩_s → |b⟩_s|b⟩_new` with the new qubit appended.
    pub fn copy_to_new_qubit(&mut self, source: usize) -> Result<usize> {
        self.check(source)?;
        let new = self.push_zero_qubit()?;
        let s = 1usize << source;
        let half = 1usize << new;
        for i in 0..half {
            if i & s != 0 {
                self.amps[i | half] = self.amps[i];
                self.amps[i] = C64::new(0.0, 0.0);
            }
        }
        Ok(new)
    }

    /// Remove qubit `q`, which must be (numerically) in a Z eigenstate.
    pub fn remove_qubit(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let bit = 1usize << q;
        let w1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let keep_one = w1 > 0.5;
        let low = bit - 1;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len() / 2];
        for (j, o) in out.iter_mut().enumerate() {
            let i = (j & low) | ((j & !low) << 1) | if keep_one { bit } else { 0 };
            *o = self.amps[i];
        }
        self.amps = out;
        self.n -= 1;
        self.normalize();
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|`, the overlap modulus (global phase ignored).
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    /// Reorder qubits: new qubit `k` is old qubit `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> PureState {
        assert_eq!(order.len(), self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (k, &old) in order.iter().enumerate() {
                if i >> old & 1 == 1 {
                    j |= 1 << k;
                }
            }
            out[j] = a;
        }
        PureState {
            amps: out,
            n: self.n,
            limit: self.limit,
        }
    }

    /// Tensor product with `other` placed on the higher qubit indices.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n + other.n;
        if n > self.limit.max(other.limit) {
            return Err(Error::TooLarge {
                requested: n,
                limit: self.limit,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState {
            amps,
            n,
            limit: self.limit.max(other.limit),
        })
    }
}

/// Parse a ket written left-to-right (leftmost symbol = qubit 0) over `0 1 + -`.
pub fn product_ket(symbols: &str) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut st = PureState::from_amplitudes(vec![C64::new(1.0, 0.0)])?;
    for c in symbols.chars().filter(|c| !c.is_whitespace()) {
        let v = match c {
            '0' => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            '1' => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            '+' => [C64::new(h, 0.0), C64::new(h, 0.0)],
            '-' => [C64::new(h, 0.0), C64::new(-h, 0.0)],
            other => {
                return Err(Error::InvalidParameter(format!("bad ket symbol {other:?}")));
            }
        };
        st = st.tensor(&PureState::from_amplitudes(v.to_vec())?)?;
    }
    Ok(st)
}

/// Linear combination `Σ c_k |ket_k⟩`, normalized.
pub fn superpose(terms: &[(f64, &str)]) -> Result<PureState> {
    let mut acc: Option<Vec<C64>> = None;
    for &(c, ket) in terms {
        let k = product_ket(ket)?;
        match &mut acc {
            None => acc = Some(k.amps.iter().map(|a| a * c).collect()),
            Some(v) => {
                if v.len() != k.amps.len() {
                    return Err(Error::InvalidParameter("kets of different length".into()));
                }
                v.iter_mut().zip(&k.amps).for_each(|(a, b)| *a += b * c);
            }
        }
    }
    let mut st = PureState::from_amplitudes(acc.unwrap_or_else(|| vec![C64::new(1.0, 0.0)]))?;
    st.normalize();
    Ok(st)
}

fn i_power(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-12;

    #[test]
    fn rotation_matches_transformation_convention() {
        let mut s = PureState::zero(1).unwrap();
        s.apply_matrix(0, &mat_rotation(-std::f64::consts::FRAC_PI_4, 0.0))
            .unwrap();
        let c = (2.0 + 2f64.sqrt()).sqrt() / 2.0;
        let sn = (2.0 - 2f64.sqrt()).sqrt() / 2.0;
        assert!((s.amplitude(0).re - c).abs() < EPS);
        assert!((s.amplitude(1).re + sn).abs() < EPS);

        let mut one = product_ket("1").unwrap();
        one.apply_matrix(0, &mat_rotation(std::f64::consts::FRAC_PI_2, 0.0))
            .unwrap();
        // |1⟩ → -sin|0⟩ + cos|1⟩
        assert!((one.amplitude(0).re + std::f64::consts::FRAC_1_SQRT_2).abs() < EPS);
    }

    #[test]
    fn pauli_expectations() {
        let bell = superpose(&[(1.0, "01"), (1.0, "10")]).unwrap();
        for (p, v) in [
            ("XX", 1.0),
            ("YY", 1.0),
            ("ZZ", -1.0),
            ("XI", 0.0),
            ("-ZZ", 1.0),
        ] {
            let e = bell.expectation(&p.parse().unwrap()).unwrap();
            assert!((e - v).abs() < EPS, "{p}: {e}");
        }
    }

    #[test]
    fn copy_isometry() {
        let mut s = product_ket("+").unwrap();
        s.copy_to_new_qubit(0).unwrap();
        let ghz = superpose(&[(1.0, "00"), (1.0, "11")]).unwrap();
        assert!((s.overlap(&ghz) - 1.0).abs() < EPS);
    }

    #[test]
    fn projection_probability_and_removal() {
        let mut s = product_ket("++").unwrap();
        let p = s.project_pauli(&"ZZ".parse().unwrap(), true).unwrap();
        assert!((p - 0.5).abs() < EPS);
        let psi = superpose(&[(1.0, "01"), (1.0, "10")]).unwrap();
        assert!((s.overlap(&psi) - 1.0).abs() < EPS);

        let mut t = product_ket("+1-").unwrap();
        t.remove_qubit(1).unwrap();
        assert!((t.overlap(&product_ket("+-").unwrap()) - 1.0).abs() < EPS);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (neg, prob) = t
            .measure_pauli(&"IX".parse().unwrap(), None, &mut rng)
            .unwrap();
        assert!(neg);
        assert!((prob - 1.0).abs() < EPS);
    }

    #[test]
    fn permutation_reorders_qubits() {
        let s = product_ket("01+").unwrap();
        let p = s.permuted(&[2, 0, 1]);
        assert!((p.overlap(&product_ket("+01").unwrap()) - 1.0).abs() < EPS);
    }

    #[test]
    fn limit_enforced() {
        assert!(matches!(
            PureState::zero_with_limit(5, 4),
            Err(Error::TooLarge { .. })
        ));
        let mut s = PureState::zero_with_limit(2, 2).unwrap();
        assert!(s.copy_to_new_qubit(0).is_err());
    }
}
