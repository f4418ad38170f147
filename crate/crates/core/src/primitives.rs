//! Cat-entangler, cat-disentangler, and teleportation as their composition.
//!
//! The entangler turns a control qubit `α|0⟩ + β|1⟩` plus a shared cat state
//! into the cat-like state `α|0…0⟩ + β|1…1⟩` spread over several nodes, so
//! each node holds a local copy of the control line. The disentangler folds
//! the line back onto any one member.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gates::{cnot, hadamard, pauli_x, pauli_z};
use crate::network::{EprPair, MeasurementRecord, Network, NodeId, QubitAddress, Recipient};

/// Qubits sharing one control line in a cat-like state.
#[derive(Clone, Debug, PartialEq)]
pub struct CatGroup {
    pub members: Vec<QubitAddress>,
    /// The cat qubit sacrificed by the entangler.
    pub measured: Option<QubitAddress>,
    pub record: Option<MeasurementRecord>,
}

impl CatGroup {
    /// The member on `node`, if any.
    pub fn member_on(&self, node: NodeId) -> Option<QubitAddress> {
        self.members.iter().copied().find(|a| a.node == node)
    }
}

fn indices(net: &Network, qubits: &[QubitAddress]) -> Result<Vec<usize>> {
    qubits.iter().map(|&a| net.resolve(a)).collect()
}

fn remote_nodes(from: NodeId, qubits: &[QubitAddress]) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = qubits
        .iter()
        .map(|a| a.node)
        .filter(|&n| n != from)
        .collect();
    nodes.sort();
    nodes.dedup();
    nodes
}

/// Spreads `control` over the nodes holding `cat`.
///
/// `cat` must hold `(|0…0⟩ + |1…1⟩)/√2` and its first member must sit on the
/// control's node. Consumes `cat.len() − 1` ebits and one cbit per remote
/// node that needs the correction bit.
pub fn cat_entangler(
    net: &mut Network,
    control: QubitAddress,
    cat: &[QubitAddress],
) -> Result<CatGroup> {
    let (&first, rest) = cat
        .split_first()
        .ok_or_else(|| Error::Parameter("cat-entangler needs at least one cat qubit".into()))?;
    if cat.contains(&control) {
        return Err(Error::Parameter(
            "the control cannot be a cat member".into(),
        ));
    }
    if first.node != control.node {
        return Err(Error::Locality(control.node, first.node));
    }
    net.resolve(control)?;
    if !net.state().is_cat_state(&indices(net, cat)?)? {
        return Err(Error::InvalidEntanglement(
            "cat members do not hold (|0…0⟩+|1…1⟩)/√2".into(),
        ));
    }
    net.release_reservations(cat);
    net.consume_ebits(rest.len() as u64);

    net.local_apply(&cnot(), &[control, first])?;
    let r = net.measure(first)?;
    let remote = remote_nodes(control.node, rest);
    if !remote.is_empty() {
        net.send_cbit(
            control.node,
            r.bit,
            Recipient::Broadcast(remote),
            "cat-entangle-r",
        )?;
    }
    let x = pauli_x();
    net.parallel(|p| {
        for &member in rest {
            p.branch(|n| {
                n.classically_controlled_apply(r.bit, &x, &[member])
                    .map(drop)
            })?;
        }
        Ok(())
    })?;

    let mut members = Vec::with_capacity(cat.len());
    members.push(control);
    members.extend_from_slice(rest);
    Ok(CatGroup {
        members,
        measured: Some(first),
        record: Some(r),
    })
}

/// Removes `drop` from a cat-like group. The rest keep holding
/// `α|0…0⟩ + β|1…1⟩`; the phase fix lands on the first remaining member.
///
/// Each dropped member is Hadamard-ed and measured. Every node XORs its own
/// results and sends one bit to the fixing node.
pub fn cat_shrink(
    net: &mut Network,
    group: &CatGroup,
    drop: &[QubitAddress],
) -> Result<(CatGroup, Vec<MeasurementRecord>)> {
    if let Some(stray) = drop.iter().find(|a| !group.members.contains(a)) {
        return Err(Error::Parameter(format!("{stray} is not in the group")));
    }
    let keep: Vec<QubitAddress> = group
        .members
        .iter()
        .copied()
        .filter(|a| !drop.contains(a))
        .collect();
    let &fix = keep
        .first()
        .ok_or_else(|| Error::Parameter("at least one member must remain".into()))?;
    let remaining = CatGroup {
        members: keep,
        measured: group.measured,
        record: group.record,
    };
    if drop.is_empty() {
        return Ok((remaining, Vec::new()));
    }
    if !net.state().is_cat_like(&indices(net, &group.members)?)? {
        return Err(Error::InvalidEntanglement(
            "group members are not in a cat-like state".into(),
        ));
    }

    let h = hadamard();
    let records = net.parallel(|p| {
        drop.iter()
            .map(|&q| {
                p.branch(|n| {
                    n.local_apply(&h, &[q])?;
                    n.measure(q)
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut by_node: BTreeMap<NodeId, Vec<_>> = BTreeMap::new();
    for r in &records {
        by_node.entry(r.address.node).or_default().push(r.bit);
    }
    let mut at_fix = Vec::with_capacity(by_node.len());
    for (node, bits) in by_node {
        let parity = net.xor_bits(node, &bits)?;
        if node != fix.node {
            net.send_cbit(node, parity, Recipient::Node(fix.node), "disentangle-r")?;
        }
        at_fix.push(parity);
    }
    let total = net.xor_bits(fix.node, &at_fix)?;
    net.classically_controlled_apply(total, &pauli_z(), &[fix])?;
    Ok((remaining, records))
}

/// Collapses the group back onto `keep`, which ends up holding
/// `α|0⟩ + β|1⟩`; every other member ends in a known basis state.
pub fn cat_disentangler(
    net: &mut Network,
    group: &CatGroup,
    keep: QubitAddress,
) -> Result<Vec<MeasurementRecord>> {
    if !group.members.contains(&keep) {
        return Err(Error::Parameter(format!("{keep} is not in the group")));
    }
    let mut ordered = group.clone();
    ordered.members.retain(|&a| a != keep);
    let drop = ordered.members.clone();
    ordered.members.insert(0, keep);
    cat_shrink(net, &ordered, &drop).map(|(_, records)| records)
}

/// What a teleportation left behind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Teleported {
    /// Where the state now lives.
    pub destination: QubitAddress,
    /// The local EPR half, measured by the entangler.
    pub entangler: MeasurementRecord,
    /// The source qubit, measured by the disentangler.
    pub disentangler: MeasurementRecord,
}

/// Moves the state of `source` onto `pair.b`. `pair.a` must be on the
/// source's node. Costs one ebit and two cbits.
pub fn teleport(net: &mut Network, source: QubitAddress, pair: EprPair) -> Result<Teleported> {
    let group = cat_entangler(net, source, &[pair.a, pair.b])?;
    let records = cat_disentangler(net, &group, pair.b)?;
    Ok(Teleported {
        destination: pair.b,
        entangler: group.record.expect("the entangler always measures"),
        disentangler: records[0],
    })
}
