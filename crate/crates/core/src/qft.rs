//! Quantum Fourier transform: the local H + controlled-R cascade, its
//! placement over `m` machines, and a distributed execution where every
//! cross-machine controlled-R becomes a remote-controlled gate.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{controlled, hadamard, make_rk, swap};
use crate::network::{Network, NodeId, NodeSpec, QubitAddress};
use crate::protocols::verify::{
    extract, input_rng, run_branches, BranchMode, Check, Tally, VerifyOptions,
};
use crate::protocols::{
    distributed_swap, nonlocal_controlled_sequence, reset_channel_qubits, ControlledPart,
    EntanglementPolicy, Meter, ProtocolReport, ProtocolRun, Section,
};
use crate::qstate::{GateMatrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum QftStep {
    H {
        qubit: usize,
    },
    /// `R_k` on `target`, controlled by `control`.
    ControlledR {
        control: usize,
        target: usize,
        k: u32,
        local: bool,
    },
    Swap {
        a: usize,
        b: usize,
        local: bool,
    },
}

/// The cascade for `n` qubits with qubit `q` on machine `q / k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QftPlan {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub steps: Vec<QftStep>,
}

/// `(total, local, non-local)` controlled-R counts from the closed forms
/// `n(n−1)/2`, `m·k(k−1)/2` and their difference.
pub fn formula_counts(n: usize, m: usize) -> (usize, usize, usize) {
    let k = n / m;
    let total = n * (n - 1) / 2;
    let local = m * k * (k.max(1) - 1) / 2;
    (total, local, total - local)
}

pub fn build_qft_plan(n: usize, m: usize) -> Result<QftPlan> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter("n and m must be positive".into()));
    }
    if !n.is_multiple_of(m) {
        return Err(Error::Parameter(format!(
            "{m} machines do not divide {n} qubits"
        )));
    }
    let k = n / m;
    let machine = |q: usize| q / k;
    let mut steps = Vec::new();
    for target in 0..n {
        steps.push(QftStep::H { qubit: target });
        for j in 2..=(n - target) {
            let control = target + j - 1;
            steps.push(QftStep::ControlledR {
                control,
                target,
                k: j as u32,
                local: machine(control) == machine(target),
            });
        }
    }
    for a in 0..n / 2 {
        let b = n - 1 - a;
        steps.push(QftStep::Swap {
            a,
            b,
            local: machine(a) == machine(b),
        });
    }
    Ok(QftPlan { n, m, k, steps })
}

impl QftPlan {
    pub fn machine_of(&self, qubit: usize) -> usize {
        qubit / self.k
    }

    fn count(&self, f: impl Fn(&QftStep) -> bool) -> usize {
        self.steps.iter().filter(|s| f(s)).count()
    }

    pub fn controlled_count(&self) -> usize {
        self.count(|s| matches!(s, QftStep::ControlledR { .. }))
    }

    pub fn local_controlled_count(&self) -> usize {
        self.count(|s| matches!(s, QftStep::ControlledR { local: true, .. }))
    }

    pub fn nonlocal_controlled_count(&self) -> usize {
        self.count(|s| matches!(s, QftStep::ControlledR { local: false, .. }))
    }

    pub fn cross_swap_count(&self) -> usize {
        self.count(|s| matches!(s, QftStep::Swap { local: false, .. }))
    }

    /// Non-local gates after sharing each target line with every remote
    /// machine once: one distribution per (target, remote machine) pair.
    pub fn amortized_nonlocal_count(&self) -> usize {
        let mut groups: Vec<(usize, usize)> = self
            .steps
            .iter()
            .filter_map(|s| match *s {
                QftStep::ControlledR {
                    control,
                    target,
                    local: false,
                    ..
                } => Some((target, self.machine_of(control))),
                _ => None,
            })
            .collect();
        groups.sort_unstable();
        groups.dedup();
        groups.len()
    }

    /// Network with one node per machine, `k` register qubits and
    /// `channels` channel qubits each.
    pub fn network(&self, channels: usize) -> Result<Network> {
        let specs: Vec<NodeSpec> = (0..self.m)
            .map(|i| NodeSpec::new(format!("M{i}"), self.k, channels))
            .collect();
        Network::new(&specs)
    }

    pub fn address(&self, qubit: usize) -> QubitAddress {
        QubitAddress::register(NodeId(qubit / self.k), qubit % self.k)
    }

    pub fn addresses(&self) -> Vec<QubitAddress> {
        (0..self.n).map(|q| self.address(q)).collect()
    }
}

fn check_distinct(qubits: &[usize]) -> Result<()> {
    for (i, q) in qubits.iter().enumerate() {
        if qubits[..i].contains(q) {
            return Err(Error::Address(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Applies the QFT to `qubits` (most significant first) of `state`.
pub fn qft_local(state: &StateVector, qubits: &[usize]) -> Result<StateVector> {
    check_distinct(qubits)?;
    let plan = build_qft_plan(qubits.len().max(1), 1)?;
    let mut out = state.clone();
    if qubits.is_empty() {
        return Ok(out);
    }
    for step in &plan.steps {
        match *step {
            QftStep::H { qubit } => out.apply_gate(&hadamard(), &[qubits[qubit]])?,
            QftStep::ControlledR {
                control, target, k, ..
            } => out.apply_gate(
                &controlled(1, &make_rk(k)?),
                &[qubits[control], qubits[target]],
            )?,
            QftStep::Swap { a, b, .. } => out.apply_gate(&swap(), &[qubits[a], qubits[b]])?,
        }
    }
    Ok(out)
}

/// The inverse transform: the cascade reversed with every gate conjugated.
pub fn qft_local_inverse(state: &StateVector, qubits: &[usize]) -> Result<StateVector> {
    check_distinct(qubits)?;
    let mut out = state.clone();
    if qubits.is_empty() {
        return Ok(out);
    }
    let plan = build_qft_plan(qubits.len(), 1)?;
    for step in plan.steps.iter().rev() {
        match *step {
            QftStep::H { qubit } => out.apply_gate(&hadamard(), &[qubits[qubit]])?,
            QftStep::ControlledR {
                control, target, k, ..
            } => out.apply_gate(
                &controlled(1, &make_rk(k)?.dagger()),
                &[qubits[control], qubits[target]],
            )?,
            QftStep::Swap { a, b, .. } => out.apply_gate(&swap(), &[qubits[a], qubits[b]])?,
        }
    }
    Ok(out)
}

/// The `2^n × 2^n` matrix with entries `e^{2πi·jk/2^n}/√(2^n)`.
pub fn qft_matrix(n: usize) -> GateMatrix {
    let dim = 1usize << n;
    let scale = 1.0 / (dim as f64).sqrt();
    let entries = (0..dim * dim)
        .map(|idx| {
            let (row, col) = (idx / dim, idx % dim);
            let angle = 2.0 * std::f64::consts::PI * ((row * col) % dim) as f64 / dim as f64;
            num_complex::Complex64::from_polar(scale, angle)
        })
        .collect();
    GateMatrix::from_parts_unchecked(n, entries)
}

/// How cross-machine controlled-R gates are paid for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QftMode {
    /// One remote-controlled gate, and one ebit, per non-local controlled-R.
    Raw,
    /// Controlled-R is symmetric in its two qubits, so the target line is
    /// shared once with each remote machine and drives every gate there.
    Amortized,
}

/// Runs the plan on a network laid out by [`QftPlan::network`]. Pairs are
/// established on demand and channel qubits reset after every remote gate.
pub fn qft_distributed(net: &mut Network, plan: &QftPlan, mode: QftMode) -> Result<ProtocolRun> {
    if net.num_nodes() != plan.m || net.node_ids().any(|n| net.register_count(n) != plan.k) {
        return Err(Error::Parameter(format!(
            "network does not match the plan: need {} nodes with {} register qubits",
            plan.m, plan.k
        )));
    }
    let policy = EntanglementPolicy::OnDemand;
    let addr = |q: usize| plan.address(q);
    let meter = Meter::start(net);
    let mut controlled_section = Default::default();
    let mut swap_section = Default::default();

    let mut i = 0;
    while i < plan.steps.len() {
        match plan.steps[i] {
            QftStep::H { qubit } => {
                net.local_apply(&hadamard(), &[addr(qubit)])?;
                i += 1;
            }
            QftStep::ControlledR { target, .. } => {
                // All controlled-R gates of one target are consecutive.
                let end = plan.steps[i..]
                    .iter()
                    .position(
                        |s| !matches!(s, QftStep::ControlledR { target: t, .. } if *t == target),
                    )
                    .map_or(plan.steps.len(), |p| i + p);
                let m0 = Meter::start(net);
                run_target_group(net, plan, &plan.steps[i..end], mode, policy)?;
                controlled_section = controlled_section + m0.read(net);
                i = end;
            }
            QftStep::Swap { a, b, local } => {
                let m0 = Meter::start(net);
                if local {
                    net.local_apply(&swap(), &[addr(a), addr(b)])?;
                } else {
                    distributed_swap(net, addr(a), addr(b), policy)?;
                }
                swap_section = swap_section + m0.read(net);
                i += 1;
            }
        }
    }
    Ok(ProtocolRun {
        ledger: meter.read(net),
        records: Vec::new(),
        sections: vec![
            Section {
                name: "controlled".into(),
                ledger: controlled_section,
            },
            Section {
                name: "swaps".into(),
                ledger: swap_section,
            },
        ],
    })
}

fn run_target_group(
    net: &mut Network,
    plan: &QftPlan,
    steps: &[QftStep],
    mode: QftMode,
    policy: EntanglementPolicy,
) -> Result<()> {
    let addr = |q: usize| plan.address(q);
    let mut remote: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
    for step in steps {
        let QftStep::ControlledR {
            control,
            target,
            k,
            local,
        } = *step
        else {
            continue;
        };
        let cr = controlled(1, &make_rk(k)?);
        if local {
            net.local_apply(&cr, &[addr(control), addr(target)])?;
            continue;
        }
        match mode {
            QftMode::Raw => {
                let part = ControlledPart::new(make_rk(k)?, vec![addr(target)]);
                let run = nonlocal_controlled_sequence(net, addr(control), &[part], policy)?;
                reset_channel_qubits(net, &run.records)?;
            }
            QftMode::Amortized => remote
                .entry(plan.machine_of(control))
                .or_default()
                .push((control, k)),
        }
    }
    if let Some(QftStep::ControlledR { target, .. }) = steps.first() {
        for gates in remote.values() {
            let parts: Vec<ControlledPart> = gates
                .iter()
                .map(|&(control, k)| Ok(ControlledPart::new(make_rk(k)?, vec![addr(control)])))
                .collect::<Result<_>>()?;
            let run = nonlocal_controlled_sequence(net, addr(*target), &parts, policy)?;
            reset_channel_qubits(net, &run.records)?;
        }
    }
    Ok(())
}

/// Verifies the distributed transform against the defining matrix, in both
/// modes, and checks the gate counts against the closed forms.
pub fn verify_qft(n: usize, m: usize, opts: &VerifyOptions) -> Result<ProtocolReport> {
    let plan = build_qft_plan(n, m)?;
    let mut tally = Tally::new("qft");
    let (total, local, nonlocal) = formula_counts(n, m);
    tally.count("total_controlled", plan.controlled_count() as u64);
    tally.count("local_controlled", plan.local_controlled_count() as u64);
    tally.count(
        "nonlocal_controlled",
        plan.nonlocal_controlled_count() as u64,
    );
    tally.count(
        "nonlocal_controlled_amortized",
        plan.amortized_nonlocal_count() as u64,
    );
    tally.count("cross_machine_swaps", plan.cross_swap_count() as u64);
    tally.problem(
        (
            plan.controlled_count(),
            plan.local_controlled_count(),
            plan.nonlocal_controlled_count(),
        ) == (total, local, nonlocal),
        || format!("plan counts differ from the closed forms ({total}, {local}, {nonlocal})"),
    );

    // Exhaustive enumeration doubles per measurement; past 2^16 branches per
    // input a seeded sample of 200 branches in total is used instead.
    let measurements = 2 * plan.nonlocal_controlled_count() + 4 * plan.cross_swap_count();
    let (mut opts, inputs) = match opts.branches {
        BranchMode::Exhaustive if measurements > 16 => {
            tally.note(format!(
                "{measurements} measurements per run: sampled 40 branches for each of 5 inputs"
            ));
            (
                VerifyOptions {
                    branches: BranchMode::Sampled(40),
                    ..*opts
                },
                5,
            )
        }
        BranchMode::Exhaustive => (*opts, 3),
        BranchMode::Sampled(s) => (*opts, 5.max(200usize.div_ceil(s.max(1)))),
    };
    opts.n = n;
    opts.m = m;

    let matrix = qft_matrix(n);
    let all: Vec<usize> = (0..n).collect();
    let mut rng = input_rng(&opts, 11);
    let cross = plan.cross_swap_count() as u64;
    for (mode, label) in [(QftMode::Raw, "raw"), (QftMode::Amortized, "amortized")] {
        let gates = match mode {
            QftMode::Raw => plan.nonlocal_controlled_count() as u64,
            QftMode::Amortized => plan.amortized_nonlocal_count() as u64,
        };
        let expected = (gates + 2 * cross, 2 * gates + 4 * cross);
        for i in 0..inputs {
            let input = if i == 0 {
                StateVector::zero(n)
            } else {
                StateVector::random(n, &mut rng)
            };
            let mut want = input.clone();
            want.apply_gate(&matrix, &all)?;
            let branches = run_branches(&opts, i as u64, |o| {
                let mut net = plan.network(2)?.with_outcomes(o);
                net.load_input(&plan.addresses(), &input)?;
                let msgs = net.messages().len();
                let run = qft_distributed(&mut net, &plan, mode)?;
                let mut check = Check {
                    ledger: run.ledger,
                    messages: crate::protocols::verify::messages_since(&net, msgs),
                    ..Default::default()
                };
                let controlled_ebits = run.section("controlled").map_or(0, |l| l.ebits_consumed);
                check.expect(controlled_ebits == gates, || {
                    format!("controlled section used {controlled_ebits} ebits, expected {gates}")
                });
                check.sections = run.sections;
                check.compare("output", extract(&net, &plan.addresses()), &want);
                Ok((check, net.trace().to_vec()))
            })?;
            tally.add(
                &format!("{label} input {i}"),
                &branches,
                Some(expected),
                mode == QftMode::Raw,
            );
        }
    }
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_counts() {
        for (n, m, want) in [
            (4, 2, (6, 2, 4)),
            (4, 1, (6, 6, 0)),
            (8, 4, (28, 4, 24)),
            (6, 3, (15, 3, 12)),
        ] {
            let plan = build_qft_plan(n, m).unwrap();
            let got = (
                plan.controlled_count(),
                plan.local_controlled_count(),
                plan.nonlocal_controlled_count(),
            );
            assert_eq!(got, want, "n={n} m={m}");
            assert_eq!(formula_counts(n, m), want);
        }
        assert!(matches!(build_qft_plan(5, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn nonlocal_count_grows_quadratically() {
        // Doubling n at fixed m: (2n(2n−1) − 2n(2n/m−1)) / (n(n−1) − n(n/m−1)) = 4.
        for m in [2usize, 4] {
            for n in [8usize, 16, 32] {
                let (_, _, a) = formula_counts(n, m);
                let (_, _, b) = formula_counts(2 * n, m);
                assert_eq!(4 * a, b, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn single_qubit_is_hadamard() {
        let out = qft_local(&StateVector::basis(1, 1), &[0]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((out.amplitude(0) - Complex64::new(h, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(1) - Complex64::new(-h, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_goes_to_uniform() {
        let out = qft_local(&StateVector::zero(4), &[0, 1, 2, 3]).unwrap();
        for a in out.amplitudes() {
            assert!((a - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn five_on_three_qubits() {
        let out = qft_local(&StateVector::basis(3, 5), &[0, 1, 2]).unwrap();
        for k in 0..8 {
            let want = Complex64::from_polar(
                1.0 / 8f64.sqrt(),
                2.0 * std::f64::consts::PI * 5.0 * k as f64 / 8.0,
            );
            assert!((out.amplitude(k) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn cascade_equals_defining_sum() {
        for n in 1..=6usize {
            let dim = 1 << n;
            let qubits: Vec<usize> = (0..n).collect();
            let mut dev: f64 = 0.0;
            for j in 0..dim {
                let out = qft_local(&StateVector::basis(n, j), &qubits).unwrap();
                for k in 0..dim {
                    let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
                    let want = Complex64::from_polar(1.0 / (dim as f64).sqrt(), angle);
                    dev = dev.max((out.amplitude(k) - want).norm());
                }
            }
            assert!(dev <= 1e-10, "n={n} deviation {dev}");
        }
    }

    #[test]
    fn inverse_undoes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=5 {
            let psi = StateVector::random(n, &mut rng);
            let q: Vec<usize> = (0..n).collect();
            let back = qft_local_inverse(&qft_local(&psi, &q).unwrap(), &q).unwrap();
            for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn qubit_order_is_respected() {
        // Transform on qubits [2, 0] of a 3-qubit register.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = StateVector::random(3, &mut rng);
        let got = qft_local(&psi, &[2, 0]).unwrap();
        let mut want = psi.clone();
        want.apply_gate(&qft_matrix(2), &[2, 0]).unwrap();
        assert!(got.fidelity_up_to_global_phase(&want).unwrap() > 1.0 - 1e-12);
        assert!(qft_local(&psi, &[1, 1]).is_err());
    }

    #[test]
    fn amortized_counts() {
        assert_eq!(build_qft_plan(4, 2).unwrap().amortized_nonlocal_count(), 2);
        assert_eq!(build_qft_plan(4, 1).unwrap().amortized_nonlocal_count(), 0);
        assert_eq!(build_qft_plan(6, 3).unwrap().amortized_nonlocal_count(), 6);
    }
}
