//! Named gates: Paulis, Hadamard, CNOT, swap, `∧_m(U)`, `R_k`, and the
//! local entangling circuit `E_m` in its linear and binary-tree layouts.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{GateMatrix, StateVector};

pub fn pauli_x() -> GateMatrix {
    GateMatrix::from_real(1, &[0.0, 1.0, 1.0, 0.0]).expect("X is unitary")
}

pub fn pauli_z() -> GateMatrix {
    GateMatrix::from_real(1, &[1.0, 0.0, 0.0, -1.0]).expect("Z is unitary")
}

pub fn hadamard() -> GateMatrix {
    let s = FRAC_1_SQRT_2;
    GateMatrix::from_real(1, &[s, s, s, -s]).expect("H is unitary")
}

/// `∧_1(X)`; first target is the control.
pub fn cnot() -> GateMatrix {
    controlled(1, &pauli_x())
}

/// `∧_2(X)`.
pub fn toffoli() -> GateMatrix {
    controlled(2, &pauli_x())
}

pub fn swap() -> GateMatrix {
    GateMatrix::from_real(
        2,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
    .expect("swap is unitary")
}

/// Adds `num_controls` leading control qubits to an arbitrary unitary: the
/// result is the identity except for the trailing block, which is `base`.
pub fn controlled(num_controls: usize, base: &GateMatrix) -> GateMatrix {
    let arity = num_controls + base.arity();
    let dim = 1usize << arity;
    let block = base.dim();
    let offset = dim - block;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..offset {
        entries[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    for r in 0..block {
        for c in 0..block {
            entries[(offset + r) * dim + offset + c] = base.get(r, c);
        }
    }
    GateMatrix::from_parts_unchecked(arity, entries)
}

/// Parameters of an `m`-fold controlled single-qubit gate `∧_m(U)`.
#[derive(Clone, Debug)]
pub struct ControlledSpec {
    pub num_controls: usize,
    pub base: GateMatrix,
}

impl ControlledSpec {
    pub fn new(num_controls: usize, base: GateMatrix) -> Self {
        ControlledSpec { num_controls, base }
    }
}

/// `∧_m(U)` for a single-qubit `U`. Controls come first, the target last.
pub fn make_controlled(spec: &ControlledSpec) -> Result<GateMatrix> {
    if spec.base.arity() != 1 {
        return Err(Error::Validation(format!(
            "∧_m(U) needs a one-qubit base, got arity {}",
            spec.base.arity()
        )));
    }
    // GateMatrix values are unitary by construction; re-check anyway so a
    // hand-built base cannot slip through.
    let deviation = spec.base.unitarity_deviation();
    if deviation > crate::qstate::TOLERANCE {
        return Err(Error::Validation(format!(
            "base is not unitary ({deviation:e})"
        )));
    }
    Ok(controlled(spec.num_controls, &spec.base))
}

/// `R_k = diag(1, e^{2πi/2^k})`.
pub fn make_rk(k: u32) -> Result<GateMatrix> {
    if k < 1 {
        return Err(Error::Validation("R_k needs k ≥ 1".into()));
    }
    let angle = 2.0 * PI / 2f64.powi(k as i32);
    GateMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, angle)])
}

/// Layout of the `E_m` circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmShape {
    /// A CNOT chain: `m − 1` rounds.
    Linear,
    /// Every entangled qubit fans out to a fresh one each round:
    /// `⌈log₂ m⌉` rounds.
    BinaryTree,
}

impl EmShape {
    pub fn name(self) -> &'static str {
        match self {
            EmShape::Linear => "linear",
            EmShape::BinaryTree => "binary-tree",
        }
    }
}

/// CNOT rounds of `E_m` over positions `0..m`, after the Hadamard on
/// position 0. Each round is a list of `(control, target)` pairs on
/// pairwise-disjoint positions.
pub fn em_schedule(m: usize, shape: EmShape) -> Vec<Vec<(usize, usize)>> {
    let mut rounds = Vec::new();
    match shape {
        EmShape::Linear => {
            for t in 1..m {
                rounds.push(vec![(t - 1, t)]);
            }
        }
        EmShape::BinaryTree => {
            let mut entangled = 1usize;
            while entangled < m {
                // Lowest entangled position pairs with the lowest fresh one.
                let round: Vec<(usize, usize)> = (0..entangled).zip(entangled..m).collect();
                entangled += round.len();
                rounds.push(round);
            }
        }
    }
    rounds
}

/// Runs `E_m` on `qubits` (all must be `|0⟩`) and returns the number of
/// CNOT rounds used.
pub fn local_entangle_em(
    state: &mut StateVector,
    qubits: &[usize],
    shape: EmShape,
) -> Result<usize> {
    if qubits.is_empty() {
        return Err(Error::Parameter("E_m needs at least one qubit".into()));
    }
    for &q in qubits {
        if !state.partial_state_check(q, 0) {
            return Err(Error::Precondition(format!(
                "qubit {q} must be |0⟩ before it is entangled"
            )));
        }
    }
    state.apply_gate(&hadamard(), &[qubits[0]])?;
    let schedule = em_schedule(qubits.len(), shape);
    let cx = cnot();
    for round in &schedule {
        for &(c, t) in round {
            state.apply_gate(&cx, &[qubits[c], qubits[t]])?;
        }
    }
    Ok(schedule.len())
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `m` qubits, written out directly.
pub fn cat_state(m: usize) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[(1 << m) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(amps).expect("cat state is normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unitary_1q(rng: &mut ChaCha8Rng) -> GateMatrix {
        // U = e^{iδ} Rz(a) Ry(b) Rz(c)
        let (a, b, c, d): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let (a, b, c, d) = (a * 6.0, b * 6.0, c * 6.0, d * 6.0);
        let e = |t: f64| Complex64::from_polar(1.0, t);
        let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
        GateMatrix::new(
            1,
            vec![
                e(d - a / 2.0 - c / 2.0) * cb,
                -e(d - a / 2.0 + c / 2.0) * sb,
                e(d + a / 2.0 - c / 2.0) * sb,
                e(d + a / 2.0 + c / 2.0) * cb,
            ],
        )
        .unwrap()
    }

    #[test]
    fn controlled_x_is_the_cnot_permutation() {
        let hand = GateMatrix::from_real(
            2,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .unwrap();
        let built = make_controlled(&ControlledSpec::new(1, pauli_x())).unwrap();
        assert_eq!(built.entries(), hand.entries());
    }

    #[test]
    fn toffoli_flips_only_on_11() {
        let t = make_controlled(&ControlledSpec::new(2, pauli_x())).unwrap();
        for input in 0..8usize {
            let mut s = StateVector::basis(3, input);
            s.apply_gate(&t, &[0, 1, 2]).unwrap();
            let expected = if input >> 1 == 0b11 { input ^ 1 } else { input };
            assert_eq!(s, StateVector::basis(3, expected));
        }
    }

    #[test]
    fn zero_controls_is_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary_1q(&mut rng);
        assert_eq!(
            make_controlled(&ControlledSpec::new(0, u.clone())).unwrap(),
            u
        );
    }

    #[test]
    fn controlled_needs_one_qubit_base() {
        let err = make_controlled(&ControlledSpec::new(1, cnot())).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn controlled_matches_defining_formula() {
        // ∧_m(U)|x, y⟩ = u_{0y}|x,0⟩ + u_{1y}|x,1⟩ when all x are 1, else unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 0..=4usize {
            let u = random_unitary_1q(&mut rng);
            let gate = make_controlled(&ControlledSpec::new(m, u.clone())).unwrap();
            let targets: Vec<usize> = (0..=m).collect();
            for input in 0..1usize << (m + 1) {
                let mut s = StateVector::basis(m + 1, input);
                s.apply_gate(&gate, &targets).unwrap();
                let x = input >> 1;
                let y = input & 1;
                let all_one = x == (1 << m) - 1;
                for out in 0..1usize << (m + 1) {
                    let expected = if all_one {
                        if out >> 1 == x {
                            u.get(out & 1, y)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    } else if out == input {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    assert_eq!(s.amplitude(out), expected, "m={m} in={input:b} out={out:b}");
                }
            }
        }
    }

    #[test]
    fn rk_values() {
        assert!(make_rk(1).unwrap().max_deviation(&pauli_z()) < 1e-15);
        let r2 = make_rk(2).unwrap();
        assert!((r2.get(1, 1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(make_rk(0).is_err());
    }

    #[test]
    fn rk_power_is_identity() {
        let r3 = make_rk(3).unwrap();
        let mut acc = GateMatrix::identity(1);
        for _ in 0..8 {
            acc = acc.compose(&r3).unwrap();
        }
        assert!(acc.max_deviation(&GateMatrix::identity(1)) < 1e-12);
        // and no smaller power does it
        let mut acc = GateMatrix::identity(1);
        for _ in 0..4 {
            acc = acc.compose(&r3).unwrap();
        }
        assert!(acc.max_deviation(&GateMatrix::identity(1)) > 1.0);
    }

    #[test]
    fn e2_and_e3_outputs() {
        let mut s = StateVector::zero(2);
        local_entangle_em(&mut s, &[0, 1], EmShape::Linear).unwrap();
        assert!(s.fidelity_up_to_global_phase(&cat_state(2)).unwrap() > 1.0 - 1e-12);

        let mut s = StateVector::zero(3);
        local_entangle_em(&mut s, &[0, 1, 2], EmShape::Linear).unwrap();
        assert!(s.fidelity_up_to_global_phase(&cat_state(3)).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn em_depths_for_eight() {
        let tree = em_schedule(8, EmShape::BinaryTree);
        assert_eq!(tree.len(), 3);
        assert_eq!(tree[2], vec![(0, 4), (1, 5), (2, 6), (3, 7)]);
        assert_eq!(em_schedule(8, EmShape::Linear).len(), 7);
    }

    #[test]
    fn schedule_rounds_are_disjoint_and_cover_all() {
        for m in 1..=17 {
            for shape in [EmShape::Linear, EmShape::BinaryTree] {
                let rounds = em_schedule(m, shape);
                let mut reached = vec![false; m];
                reached[0] = true;
                for round in &rounds {
                    let mut used = Vec::new();
                    for &(c, t) in round {
                        assert!(reached[c] && !reached[t]);
                        assert!(!used.contains(&c) && !used.contains(&t));
                        used.extend([c, t]);
                    }
                    for &(_, t) in round {
                        reached[t] = true;
                    }
                }
                assert!(reached.iter().all(|&r| r));
                let expected = match shape {
                    EmShape::Linear => m - 1,
                    EmShape::BinaryTree => (m as f64).log2().ceil() as usize,
                };
                assert_eq!(rounds.len(), expected, "m={m} {shape:?}");
            }
        }
    }

    #[test]
    fn both_shapes_give_the_same_state() {
        for m in 2..=6 {
            let qubits: Vec<usize> = (0..m).rev().collect();
            let mut a = StateVector::zero(m + 1);
            let mut b = StateVector::zero(m + 1);
            local_entangle_em(&mut a, &qubits, EmShape::Linear).unwrap();
            local_entangle_em(&mut b, &qubits, EmShape::BinaryTree).unwrap();
            assert!(a.fidelity_up_to_global_phase(&b).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn em_requires_zero_inputs() {
        let mut s = StateVector::basis(2, 1);
        let err = local_entangle_em(&mut s, &[0, 1], EmShape::Linear).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
