//! Dense state vectors and the handful of linear-algebra operations the rest
//! of the crate is built on.
//!
//! Qubit 0 is the most significant bit of a basis index, so the ket
//! `|q0 q1 ... q(n-1)⟩` reads left to right exactly like the index written
//! in binary.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance used for every state comparison.
pub const TOLERANCE: f64 = 1e-10;

/// Probabilities at or below this are treated as zero when forcing outcomes.
pub const ZERO_PROBABILITY: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unitary acting on `arity` qubits, stored row-major.
///
/// The first target passed to [`StateVector::apply_gate`] corresponds to the
/// most significant bit of the row/column index.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    entries: Vec<Complex64>,
}

impl GateMatrix {
    /// Builds a gate, rejecting anything that is not unitary within
    /// [`TOLERANCE`].
    pub fn new(arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << arity;
        if entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "{arity}-qubit gate needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let gate = GateMatrix { arity, entries };
        let deviation = gate.unitarity_deviation();
        if deviation > TOLERANCE {
            return Err(Error::Validation(format!(
                "gate is not unitary (max |M†M - I| = {deviation:e})"
            )));
        }
        Ok(gate)
    }

    /// Convenience constructor from real entries.
    pub fn from_real(arity: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            arity,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn identity(arity: usize) -> Self {
        let dim = 1usize << arity;
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        GateMatrix { arity, entries }
    }

    /// Diagonal gate from unit-modulus phases.
    pub fn diagonal(phases: &[Complex64]) -> Result<Self> {
        let dim = phases.len();
        if !dim.is_power_of_two() || dim == 0 {
            return Err(Error::Validation(format!(
                "diagonal of length {dim} is not a power of two"
            )));
        }
        let arity = dim.trailing_zeros() as usize;
        let mut entries = vec![ZERO; dim * dim];
        for (i, &p) in phases.iter().enumerate() {
            entries[i * dim + i] = p;
        }
        Self::new(arity, entries)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &GateMatrix) -> Result<GateMatrix> {
        if self.arity != other.arity {
            return Err(Error::Validation(format!(
                "cannot multiply {}-qubit and {}-qubit gates",
                self.arity, other.arity
            )));
        }
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.entries[r * dim + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..dim {
                    entries[r * dim + c] += a * other.entries[k * dim + c];
                }
            }
        }
        Ok(GateMatrix {
            arity: self.arity,
            entries,
        })
    }

    /// Tensor product `self ⊗ other`; `self` acts on the leading qubits.
    pub fn kron(&self, other: &GateMatrix) -> GateMatrix {
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut entries = vec![ZERO; dim * dim];
        for ra in 0..da {
            for ca in 0..da {
                let a = self.entries[ra * da + ca];
                if a == ZERO {
                    continue;
                }
                for rb in 0..db {
                    for cb in 0..db {
                        entries[(ra * db + rb) * dim + ca * db + cb] =
                            a * other.entries[rb * db + cb];
                    }
                }
            }
        }
        GateMatrix {
            arity: self.arity + other.arity,
            entries,
        }
    }

    pub fn dagger(&self) -> GateMatrix {
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[c * dim + r] = self.entries[r * dim + c].conj();
            }
        }
        GateMatrix {
            arity: self.arity,
            entries,
        }
    }

    /// Largest entry of `|M†M - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = ZERO;
                for k in 0..dim {
                    acc += self.entries[k * dim + i].conj() * self.entries[k * dim + j];
                }
                if i == j {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to `other`.
    pub fn max_deviation(&self, other: &GateMatrix) -> f64 {
        if self.arity != other.arity {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Haar-style random unitary: Gram-Schmidt on a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> GateMatrix {
        let dim = 1 << arity;
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        while cols.len() < dim {
            let mut v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= n);
            cols.push(v);
        }
        let mut entries = vec![ZERO; dim * dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                entries[r * dim + c] = *v;
            }
        }
        GateMatrix { arity, entries }
    }

    /// Builds a gate by assembling the controlled-block structure directly.
    /// Only used for constructions that are unitary by definition.
    pub(crate) fn from_parts_unchecked(arity: usize, entries: Vec<Complex64>) -> GateMatrix {
        debug_assert_eq!(entries.len(), (1 << arity) * (1 << arity));
        GateMatrix { arity, entries }
    }
}

/// How to pick the outcome of a measurement.
pub enum MeasureMode<'a> {
    /// Sample from the Born distribution.
    Sample(&'a mut dyn rand::RngCore),
    /// Take this outcome; fails if it has zero probability.
    Forced(u8),
}

/// Index-level result of a single-qubit measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub qubit: usize,
    pub outcome: u8,
    /// Born probability of `outcome` before the collapse.
    pub probability: f64,
}

/// Exact amplitudes for `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0⟩`
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    /// Wraps explicit amplitudes; they must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Validation(format!(
                "{len} amplitudes is not a power of two"
            )));
        }
        let state = StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::Validation(format!("state has norm² {norm}")));
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= ZERO_PROBABILITY {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    /// Haar-distributed random state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        let amplitudes = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amplitudes).expect("gaussian vector is nonzero")
    }

    /// Single-qubit state `α|0⟩ + β|1⟩`.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![alpha, beta])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn shift(&self, qubit: usize) -> usize {
        self.num_qubits - 1 - qubit
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::Address(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &t) in targets.iter().enumerate() {
            self.check_qubit(t)?;
            if targets[..i].contains(&t) {
                return Err(Error::Address(format!("qubit {t} listed twice")));
            }
        }
        Ok(())
    }

    /// Tensor product with `other` appended as the trailing qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes,
        }
    }

    /// Places `sub` on `positions` of a `total`-qubit register whose other
    /// qubits are `|0⟩`. `positions[0]` receives the most significant qubit
    /// of `sub`.
    pub fn embed(total: usize, positions: &[usize], sub: &StateVector) -> Result<StateVector> {
        if positions.len() != sub.num_qubits {
            return Err(Error::Validation(format!(
                "{} positions for a {}-qubit state",
                positions.len(),
                sub.num_qubits
            )));
        }
        let mut full = StateVector::zero(total);
        full.check_targets(positions)?;
        full.amplitudes[0] = ZERO;
        let k = positions.len();
        for (local, &amp) in sub.amplitudes.iter().enumerate() {
            let mut index = 0;
            for (j, &p) in positions.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    index |= 1 << full.shift(p);
                }
            }
            full.amplitudes[index] = amp;
        }
        Ok(full)
    }

    /// Applies `gate` to `targets` (identity elsewhere). `targets[0]` is the
    /// gate's most significant qubit.
    pub fn apply_gate(&mut self, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
        if gate.arity != targets.len() {
            return Err(Error::Validation(format!(
                "{}-qubit gate applied to {} targets",
                gate.arity,
                targets.len()
            )));
        }
        self.check_targets(targets)?;
        match targets {
            [t] => self.apply_one(gate, *t),
            _ => self.apply_many(gate, targets),
        }
        Ok(())
    }

    fn apply_one(&mut self, gate: &GateMatrix, target: usize) {
        let bit = 1usize << self.shift(target);
        let [m00, m01, m10, m11] = [
            gate.entries[0],
            gate.entries[1],
            gate.entries[2],
            gate.entries[3],
        ];
        for base in 0..self.dim() {
            if base & bit != 0 {
                continue;
            }
            let a0 = self.amplitudes[base];
            let a1 = self.amplitudes[base | bit];
            self.amplitudes[base] = m00 * a0 + m01 * a1;
            self.amplitudes[base | bit] = m10 * a0 + m11 * a1;
        }
    }

    fn apply_many(&mut self, gate: &GateMatrix, targets: &[usize]) {
        let k = targets.len();
        let dim = 1usize << k;
        let offsets: Vec<usize> = (0..dim)
            .map(|g| {
                targets.iter().enumerate().fold(0, |acc, (j, &t)| {
                    if (g >> (k - 1 - j)) & 1 == 1 {
                        acc | 1 << self.shift(t)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let mask = offsets[dim - 1];
        // Most multi-qubit gates are permutations or diagonals; skip zeros.
        let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| (c, gate.entries[r * dim + c]))
                    .filter(|(_, m)| *m != ZERO)
                    .collect()
            })
            .collect();
        let mut gathered = vec![ZERO; dim];
        for base in 0..self.dim() {
            if base & mask != 0 {
                continue;
            }
            for (g, off) in offsets.iter().enumerate() {
                gathered[g] = self.amplitudes[base | off];
            }
            for (row, off) in rows.iter().zip(&offsets) {
                self.amplitudes[base | off] =
                    row.iter().fold(ZERO, |acc, &(c, m)| acc + m * gathered[c]);
            }
        }
    }

    /// Probability that `qubit` reads 1.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << self.shift(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Standard-basis measurement of one qubit. The state collapses and is
    /// renormalized; the returned probability is the pre-collapse one.
    pub fn measure(&mut self, qubit: usize, mode: MeasureMode<'_>) -> Result<Measurement> {
        let p1 = self.probability_one(qubit)?.clamp(0.0, 1.0);
        let p0 = 1.0 - p1;
        let outcome = match mode {
            MeasureMode::Forced(bit) => {
                let bit = bit & 1;
                let p = if bit == 1 { p1 } else { p0 };
                if p <= ZERO_PROBABILITY {
                    return Err(Error::ImpossibleBranch {
                        qubit,
                        outcome: bit,
                        probability: p,
                    });
                }
                bit
            }
            MeasureMode::Sample(rng) => {
                if rng.gen::<f64>() < p1 {
                    1
                } else {
                    0
                }
            }
        };
        let probability = if outcome == 1 { p1 } else { p0 };
        let bit = 1usize << self.shift(qubit);
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if ((i & bit != 0) as u8) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(Measurement {
            qubit,
            outcome,
            probability,
        })
    }

    /// `|⟨a|b⟩|`: equals 1 exactly when the states agree up to global phase.
    pub fn fidelity_up_to_global_phase(&self, other: &StateVector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Validation(format!(
                "comparing {}-qubit and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
            .norm())
    }

    /// True iff `qubit` is in `|expected⟩` with probability 1 (within
    /// [`TOLERANCE`]). Out-of-range qubits are never definite.
    pub fn partial_state_check(&self, qubit: usize, expected: u8) -> bool {
        match self.probability_one(qubit) {
            Ok(p1) => {
                let opposite = if expected & 1 == 1 { 1.0 - p1 } else { p1 };
                opposite <= TOLERANCE
            }
            Err(_) => false,
        }
    }

    /// The basis value of `qubit` if it is definite.
    pub fn definite_value(&self, qubit: usize) -> Option<u8> {
        if self.partial_state_check(qubit, 0) {
            Some(0)
        } else if self.partial_state_check(qubit, 1) {
            Some(1)
        } else {
            None
        }
    }

    /// True iff every basis state with nonzero amplitude has equal bits on
    /// `qubits`, i.e. the qubits hold `α|0…0⟩ + β|1…1⟩` (possibly entangled
    /// with qubits outside the group).
    pub fn is_cat_like(&self, qubits: &[usize]) -> Result<bool> {
        self.check_targets(qubits)?;
        let mask: usize = qubits.iter().map(|&q| 1 << self.shift(q)).sum();
        let stray: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let bits = i & mask;
                bits != 0 && bits != mask
            })
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(stray <= TOLERANCE)
    }

    /// True iff `qubits` hold `(|0…0⟩ + |1…1⟩)/√2` in a product with the rest.
    pub fn is_cat_state(&self, qubits: &[usize]) -> Result<bool> {
        if !self.is_cat_like(qubits)? {
            return Ok(false);
        }
        let mask: usize = qubits.iter().map(|&q| 1 << self.shift(q)).sum();
        let mismatch: f64 = (0..self.dim())
            .filter(|i| i & mask == 0)
            .map(|i| (self.amplitudes[i] - self.amplitudes[i | mask]).norm_sqr())
            .sum();
        Ok(mismatch <= TOLERANCE)
    }

    /// Removes qubits that are each in a definite basis state and returns the
    /// state of the remaining qubits (order preserved).
    pub fn drop_definite_qubits(&self, qubits: &[usize]) -> Result<StateVector> {
        self.check_targets(qubits)?;
        let mut fixed = 0usize;
        for &q in qubits {
            match self.definite_value(q) {
                Some(1) => fixed |= 1 << self.shift(q),
                Some(_) => {}
                None => {
                    return Err(Error::InvalidEntanglement(format!(
                        "qubit {q} is not in a definite basis state"
                    )))
                }
            }
        }
        let kept: Vec<usize> = (0..self.num_qubits)
            .filter(|q| !qubits.contains(q))
            .collect();
        let k = kept.len();
        let amplitudes = (0..1usize << k)
            .map(|local| {
                let index = kept.iter().enumerate().fold(fixed, |acc, (j, &q)| {
                    if (local >> (k - 1 - j)) & 1 == 1 {
                        acc | 1 << self.shift(q)
                    } else {
                        acc
                    }
                });
                self.amplitudes[index]
            })
            .collect();
        StateVector::normalized(amplitudes)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() <= 1e-9 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.4}{:+.4}i)|{:0width$b}⟩",
                a.re,
                a.im,
                i,
                width = self.num_qubits
            )?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn x() -> GateMatrix {
        GateMatrix::from_real(1, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn h() -> GateMatrix {
        let s = FRAC_1_SQRT_2;
        GateMatrix::from_real(1, &[s, s, s, -s]).unwrap()
    }

    fn cnot() -> GateMatrix {
        GateMatrix::from_real(
            2,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .unwrap()
    }

    /// Builds the full 2^n matrix by permuting the gate's qubits into place,
    /// independently of `apply_gate`.
    fn naive_full_matrix(n: usize, gate: &GateMatrix, targets: &[usize]) -> Vec<Complex64> {
        let dim = 1usize << n;
        let k = targets.len();
        let mut full = vec![ZERO; dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                let rest_equal = (0..n)
                    .filter(|q| !targets.contains(q))
                    .all(|q| (row >> (n - 1 - q)) & 1 == (col >> (n - 1 - q)) & 1);
                if !rest_equal {
                    continue;
                }
                let sub = |idx: usize| {
                    targets.iter().enumerate().fold(0, |acc, (j, &t)| {
                        acc | ((idx >> (n - 1 - t)) & 1) << (k - 1 - j)
                    })
                };
                full[row * dim + col] = gate.get(sub(row), sub(col));
            }
        }
        full
    }

    #[test]
    fn x_flips_zero() {
        let mut s = StateVector::zero(1);
        s.apply_gate(&x(), &[0]).unwrap();
        assert_eq!(s, StateVector::basis(1, 1));
    }

    #[test]
    fn hadamard_makes_plus() {
        let mut s = StateVector::zero(1);
        s.apply_gate(&h(), &[0]).unwrap();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.amplitude(1) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn cnot_twice_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let original = StateVector::random(3, &mut rng);
        let mut s = original.clone();
        s.apply_gate(&cnot(), &[2, 0]).unwrap();
        assert!(s.fidelity_up_to_global_phase(&original).unwrap() < 1.0 - 1e-6);
        s.apply_gate(&cnot(), &[2, 0]).unwrap();
        let dev = s
            .amplitudes()
            .iter()
            .zip(original.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn target_order_matters() {
        // CNOT with control 1, target 0 on |01⟩ gives |11⟩.
        let mut s = StateVector::basis(2, 0b01);
        s.apply_gate(&cnot(), &[1, 0]).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11));
    }

    #[test]
    fn bad_targets_are_address_errors() {
        let mut s = StateVector::zero(2);
        assert!(matches!(
            s.apply_gate(&cnot(), &[0, 0]),
            Err(Error::Address(_))
        ));
        assert!(matches!(s.apply_gate(&x(), &[2]), Err(Error::Address(_))));
        assert!(matches!(
            s.apply_gate(&x(), &[0, 1]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn non_unitary_gate_is_rejected() {
        let err = GateMatrix::from_real(1, &[1.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn measure_definite_one() {
        let mut s = StateVector::basis(1, 1);
        let m = s.measure(0, MeasureMode::Forced(1)).unwrap();
        assert_eq!(m.outcome, 1);
        assert!((m.probability - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::basis(1, 1);
        assert_eq!(
            s.measure(0, MeasureMode::Sample(&mut rng)).unwrap().outcome,
            1
        );
    }

    #[test]
    fn measure_bell_forced_zero() {
        let mut s =
            StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)])
                .unwrap();
        let m = s.measure(0, MeasureMode::Forced(0)).unwrap();
        assert!((m.probability - 0.5).abs() < 1e-12);
        assert!(
            s.fidelity_up_to_global_phase(&StateVector::zero(2))
                .unwrap()
                > 1.0 - 1e-12
        );
    }

    #[test]
    fn forcing_impossible_outcome_fails() {
        let mut s = StateVector::zero(2);
        let err = s.measure(1, MeasureMode::Forced(1)).unwrap_err();
        assert!(matches!(
            err,
            Error::ImpossibleBranch {
                qubit: 1,
                outcome: 1,
                ..
            }
        ));
    }

    #[test]
    fn measurement_in_cat_entangler_point_a() {
        // α|000⟩+α|011⟩+β|110⟩+β|101⟩ over 3 qubits (m = 2 cat after CNOT);
        // measuring qubit 1 as 1 leaves α|011⟩ + β|110⟩.
        let (a, b) = (0.6, 0.8);
        let s2 = 0.5f64.sqrt();
        let mut amps = vec![ZERO; 8];
        amps[0b000] = c(a * s2);
        amps[0b011] = c(a * s2);
        amps[0b110] = c(b * s2);
        amps[0b101] = c(b * s2);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.measure(1, MeasureMode::Forced(1)).unwrap();
        let mut expected = vec![ZERO; 8];
        expected[0b011] = c(a);
        expected[0b110] = c(b);
        let expected = StateVector::from_amplitudes(expected).unwrap();
        assert!(s.fidelity_up_to_global_phase(&expected).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::random(3, &mut rng);
        assert!((psi.fidelity_up_to_global_phase(&psi).unwrap() - 1.0).abs() < 1e-12);
        let f = StateVector::zero(1)
            .fidelity_up_to_global_phase(&StateVector::basis(1, 1))
            .unwrap();
        assert_eq!(f, 0.0);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated =
            StateVector::from_amplitudes(psi.amplitudes().iter().map(|a| a * phase).collect())
                .unwrap();
        assert!((psi.fidelity_up_to_global_phase(&rotated).unwrap() - 1.0).abs() < 1e-12);
        assert!(psi
            .fidelity_up_to_global_phase(&StateVector::zero(2))
            .is_err());
    }

    #[test]
    fn partial_state_examples() {
        assert!(StateVector::zero(2).partial_state_check(1, 0));
        let bell =
            StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)])
                .unwrap();
        assert!(!bell.partial_state_check(0, 0));
        assert!(!bell.partial_state_check(0, 1));
    }

    #[test]
    fn cat_checks() {
        let bell =
            StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)])
                .unwrap();
        assert!(bell.is_cat_state(&[0, 1]).unwrap());
        let cat_like = StateVector::from_amplitudes(vec![c(0.6), ZERO, ZERO, c(0.8)]).unwrap();
        assert!(cat_like.is_cat_like(&[0, 1]).unwrap());
        assert!(!cat_like.is_cat_state(&[0, 1]).unwrap());
        let plus_plus = StateVector::from_amplitudes(vec![c(0.5); 4]).unwrap();
        assert!(!plus_plus.is_cat_like(&[0, 1]).unwrap());
    }

    #[test]
    fn embed_and_drop_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = StateVector::random(2, &mut rng);
        let full = StateVector::embed(4, &[3, 1], &psi).unwrap();
        let back = full.drop_definite_qubits(&[0, 2]).unwrap();
        // kept qubits are [1, 3]; psi was placed as (3, 1) so swap it back
        let mut swapped = back.clone();
        swapped
            .apply_gate(
                &GateMatrix::from_real(
                    2,
                    &[
                        1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                        1.0,
                    ],
                )
                .unwrap(),
                &[0, 1],
            )
            .unwrap();
        assert!(swapped.fidelity_up_to_global_phase(&psi).unwrap() > 1.0 - 1e-12);
        assert!(StateVector::embed(2, &[0], &psi).is_err());
    }

    #[test]
    fn identity_is_bitwise_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StateVector::random(4, &mut rng);
        let mut s = psi.clone();
        s.apply_gate(&GateMatrix::identity(1), &[2]).unwrap();
        assert_eq!(s, psi);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn apply_gate_matches_full_matrix(seed in any::<u64>(), n in 1usize..=4, arity_pick in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let arity = 1 + arity_pick % n.min(3);
            let gate = GateMatrix::random(arity, &mut rng);
            let mut qubits: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            qubits.shuffle(&mut rng);
            let targets = &qubits[..arity];
            let psi = StateVector::random(n, &mut rng);

            let mut fast = psi.clone();
            fast.apply_gate(&gate, targets).unwrap();

            let full = naive_full_matrix(n, &gate, targets);
            let dim = 1 << n;
            for r in 0..dim {
                let expected: Complex64 = (0..dim).map(|col| full[r * dim + col] * psi.amplitude(col)).sum();
                prop_assert!((expected - fast.amplitude(r)).norm() <= 1e-12);
            }
        }

        #[test]
        fn gate_sequences_preserve_norm(seed in any::<u64>(), steps in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            let mut s = StateVector::random(n, &mut rng);
            for _ in 0..steps {
                let arity = rng.gen_range(1..=2);
                let gate = GateMatrix::random(arity, &mut rng);
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                let targets = if arity == 1 { vec![a] } else { vec![a, b] };
                s.apply_gate(&gate, &targets).unwrap();
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() <= TOLERANCE);
        }
    }
}
