use super::{obtain_pair, reset_channel_qubits, EntanglementPolicy, Meter, ProtocolRun};
use crate::error::{Error, Result};
use crate::gates::{cnot, controlled, hadamard, pauli_x, pauli_z, swap, toffoli};
use crate::network::{Network, Pool, QubitAddress, Recipient};
use crate::primitives::{cat_disentangler, cat_entangler};
use crate::qstate::GateMatrix;

/// `∧_m(base)` with controls spread over several nodes and the target on
/// node `T`. Each remote control line is distributed to `T` through its own
/// cat-like pair, parked in an empty register qubit so the channel qubit is
/// free again, and the gate then runs locally. Costs one ebit and two cbits
/// per remote control; every qubit used along the way is reset.
pub fn nonlocal_multi_control(
    net: &mut Network,
    controls: &[QubitAddress],
    base: &GateMatrix,
    target: QubitAddress,
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    if base.arity() != 1 {
        return Err(Error::Parameter(
            "the controlled gate must act on one qubit".into(),
        ));
    }
    if controls.is_empty() {
        return Err(Error::Parameter("no controls given".into()));
    }
    let t = target.node;
    let remote: Vec<QubitAddress> = controls.iter().copied().filter(|c| c.node != t).collect();
    let empties: Vec<QubitAddress> = (0..net.register_count(t))
        .map(|slot| QubitAddress::register(t, slot))
        .filter(|&q| q != target && !controls.contains(&q) && net.is_definite(q, 0))
        .take(remote.len())
        .collect();
    if empties.len() < remote.len() {
        return Err(Error::Capacity(format!(
            "{} needs {} empty register qubits to hold the control lines, has {}; \
             decompose the gate into smaller controlled gates instead",
            net.node_name(t),
            remote.len(),
            empties.len()
        )));
    }

    let meter = Meter::start(net);
    let mut groups = Vec::with_capacity(remote.len());
    let mut to_reset = Vec::new();
    for (&c, &slot) in remote.iter().zip(&empties) {
        let pair = obtain_pair(net, c.node, t, policy)?;
        let mut group = cat_entangler(net, c, &[pair.a, pair.b])?;
        net.local_apply(&swap(), &[pair.b, slot])?;
        group.members = vec![c, slot];
        to_reset.extend(group.record);
        groups.push(group);
    }

    let mut lines: Vec<QubitAddress> = controls
        .iter()
        .map(|&c| match remote.iter().position(|&r| r == c) {
            Some(i) => empties[i],
            None => c,
        })
        .collect();
    lines.push(target);
    net.local_apply(&controlled(controls.len(), base), &lines)?;

    for group in &groups {
        to_reset.extend(cat_disentangler(net, group, group.members[0])?);
    }
    reset_channel_qubits(net, &to_reset)?;
    Ok(ProtocolRun {
        ledger: meter.read(net),
        ..Default::default()
    })
}

/// `∧_4(X)` on six lines (four controls, an ancilla, a target) from two
/// Toffolis and two `∧_3(X)` gates that route the first two controls through
/// the ancilla. The ancilla may start in any state and is restored.
///
/// If all six qubits share a node the gates run locally. If the first two
/// controls and the ancilla sit on one node and the rest on another, only
/// the ancilla's line crosses: its net contribution, the parity `c1·c2`, is
/// folded into one EPR half by two CNOTs, so one ebit and two cbits suffice.
pub fn decompose_multi_control_x(
    net: &mut Network,
    controls: &[QubitAddress],
    ancilla: QubitAddress,
    target: QubitAddress,
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    let &[c1, c2, c3, c4] = controls else {
        return Err(Error::Parameter(format!(
            "expected 4 controls, got {}",
            controls.len()
        )));
    };
    let meter = Meter::start(net);
    let mut records = Vec::new();
    let x3 = controlled(3, &pauli_x());
    let top = ancilla.node;
    let bottom = target.node;

    if [c1, c2, c3, c4, ancilla].iter().all(|q| q.node == bottom) {
        for _ in 0..2 {
            net.local_apply(&toffoli(), &[c1, c2, ancilla])?;
            net.local_apply(&x3, &[c3, c4, ancilla, target])?;
        }
    } else if c1.node == top && c2.node == top && c3.node == bottom && c4.node == bottom {
        let pair = obtain_pair(net, top, bottom, policy)?;
        let (x, y) = (pair.a, pair.b);
        if x.pool != Pool::Channel || y.pool != Pool::Channel {
            return Err(Error::Pool("EPR halves must be channel qubits".into()));
        }
        let q = [net.resolve(x)?, net.resolve(y)?];
        if !net.state().is_cat_state(&q)? {
            return Err(Error::InvalidEntanglement(format!(
                "{x} and {y} are not an EPR pair"
            )));
        }
        net.consume_ebits(1);

        // x picks up (s ⊕ c1c2) ⊕ s = c1c2, where s is the ancilla's value.
        for _ in 0..2 {
            net.local_apply(&toffoli(), &[c1, c2, ancilla])?;
            net.local_apply(&cnot(), &[ancilla, x])?;
        }
        let r = net.measure(x)?;
        net.send_cbit(top, r.bit, Recipient::Node(bottom), "cat-entangle-r")?;
        net.classically_controlled_apply(r.bit, &pauli_x(), &[y])?;

        net.local_apply(&x3, &[c3, c4, y, target])?;

        net.local_apply(&hadamard(), &[y])?;
        let r2 = net.measure(y)?;
        net.send_cbit(bottom, r2.bit, Recipient::Node(top), "disentangle-r")?;
        // The phase (−1)^{r2·c1c2} is a controlled-Z between the controls.
        net.classically_controlled_apply(r2.bit, &controlled(1, &pauli_z()), &[c1, c2])?;
        records.extend([r, r2]);
    } else {
        return Err(Error::Parameter(
            "place all six lines on one node, or controls 1, 2 and the ancilla on one node \
             and controls 3, 4 and the target on another"
                .into(),
        ));
    }
    Ok(ProtocolRun {
        ledger: meter.read(net),
        records,
        sections: Vec::new(),
    })
}
