use std::collections::HashSet;

use super::{obtain_pair, EntanglementPolicy, Meter, ProtocolRun, Section};
use crate::error::{Error, Result};
use crate::gates::{controlled, pauli_x};
use crate::network::{Network, NodeId, QubitAddress};
use crate::primitives::{cat_disentangler, cat_entangler};
use crate::qstate::GateMatrix;

/// A gate to run under remote control, on qubits of a single node.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledPart {
    pub gate: GateMatrix,
    pub targets: Vec<QubitAddress>,
}

impl ControlledPart {
    pub fn new(gate: GateMatrix, targets: Vec<QubitAddress>) -> Self {
        ControlledPart { gate, targets }
    }

    fn node(&self) -> Result<NodeId> {
        let first = self
            .targets
            .first()
            .ok_or_else(|| Error::Parameter("controlled part without targets".into()))?
            .node;
        if let Some(other) = self.targets.iter().find(|a| a.node != first) {
            return Err(Error::Locality(first, other.node));
        }
        if self.gate.arity() != self.targets.len() {
            return Err(Error::Parameter(format!(
                "gate acts on {} qubits but {} targets were given",
                self.gate.arity(),
                self.targets.len()
            )));
        }
        Ok(first)
    }
}

/// CNOT between qubits on different nodes: one ebit, two cbits.
pub fn nonlocal_cnot(
    net: &mut Network,
    control: QubitAddress,
    target: QubitAddress,
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    let part = ControlledPart::new(pauli_x(), vec![target]);
    nonlocal_controlled_sequence(net, control, std::slice::from_ref(&part), policy)
}

/// Runs `∧_1(U_1 ⋯ U_k)` with every `U_i` on one remote node. The control
/// line is distributed once and reused by all `k` gates, so the cost stays at
/// one ebit and two cbits.
pub fn nonlocal_controlled_sequence(
    net: &mut Network,
    control: QubitAddress,
    gates: &[ControlledPart],
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    let first = gates
        .first()
        .ok_or_else(|| Error::Parameter("empty gate sequence".into()))?;
    let remote = first.node()?;
    for part in gates {
        let node = part.node()?;
        if node != remote {
            return Err(Error::Locality(remote, node));
        }
    }
    if remote == control.node {
        return Err(Error::Parameter(
            "control and targets share a node; apply the gate locally".into(),
        ));
    }

    let meter = Meter::start(net);
    let pair = obtain_pair(net, control.node, remote, policy)?;
    let group = cat_entangler(net, control, &[pair.a, pair.b])?;
    let line = pair.b;

    let inner = Meter::start(net);
    for part in gates {
        let mut qubits = vec![line];
        qubits.extend_from_slice(&part.targets);
        net.local_apply(&controlled(1, &part.gate), &qubits)?;
    }
    let controlled_section = inner.read(net);

    let mut records = cat_disentangler(net, &group, control)?;
    records.insert(0, group.record.expect("the entangler always measures"));
    Ok(ProtocolRun {
        ledger: meter.read(net),
        records,
        sections: vec![Section {
            name: "controlled".into(),
            ledger: controlled_section,
        }],
    })
}

fn check_disjoint(net: &Network, parts: &[ControlledPart]) -> Result<()> {
    let mut seen = HashSet::new();
    for part in parts {
        for &t in &part.targets {
            let q = net.resolve(t)?;
            if !seen.insert(q) {
                return Err(Error::NotDisjoint(q));
            }
        }
    }
    Ok(())
}

/// Runs `∧_1(U_1 ⊗ ⋯ ⊗ U_p)` with each part on its own node. A
/// `(p + 1)`-party cat distributes the control once, and the `p` controlled
/// parts then run side by side in one round.
pub fn parallel_distributed_control(
    net: &mut Network,
    control: QubitAddress,
    parts: &[ControlledPart],
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    if parts.is_empty() {
        return Err(Error::Parameter("no controlled parts".into()));
    }
    let nodes = parts
        .iter()
        .map(ControlledPart::node)
        .collect::<Result<Vec<_>>>()?;
    if nodes.contains(&control.node) {
        return Err(Error::Parameter(
            "a part shares the control's node; fold it into a local gate".into(),
        ));
    }
    check_disjoint(net, parts)?;

    let meter = Meter::start(net);
    let mut parties = vec![control.node];
    parties.extend_from_slice(&nodes);
    let cat = match net.take_cat(&parties) {
        Some(cat) => cat,
        None => match policy {
            EntanglementPolicy::PreEstablished => {
                return Err(Error::Resource(format!(
                    "no {}-party cat spanning the control and part nodes",
                    parties.len()
                )))
            }
            EntanglementPolicy::OnDemand => {
                super::establish_cat(net, control.node, &nodes)?;
                net.take_cat(&parties)
                    .ok_or_else(|| Error::Resource("establishment registered no cat".into()))?
            }
        },
    };
    let group = cat_entangler(net, control, &cat)?;

    let inner = Meter::start(net);
    net.parallel(|p| {
        for (part, &line) in parts.iter().zip(&group.members[1..]) {
            p.branch(|n| {
                let mut qubits = vec![line];
                qubits.extend_from_slice(&part.targets);
                n.local_apply(&controlled(1, &part.gate), &qubits)
            })?;
        }
        Ok(())
    })?;
    let controlled_section = inner.read(net);

    let mut records = cat_disentangler(net, &group, control)?;
    records.insert(0, group.record.expect("the entangler always measures"));
    Ok(ProtocolRun {
        ledger: meter.read(net),
        records,
        sections: vec![Section {
            name: "controlled".into(),
            ledger: controlled_section,
        }],
    })
}

/// The same transformation as [`parallel_distributed_control`], done as `p`
/// separate remote-controlled gates one after another.
pub fn sequential_distributed_control(
    net: &mut Network,
    control: QubitAddress,
    parts: &[ControlledPart],
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    check_disjoint(net, parts)?;
    let meter = Meter::start(net);
    let mut records = Vec::new();
    let mut controlled_section = Default::default();
    for part in parts {
        let run = nonlocal_controlled_sequence(net, control, std::slice::from_ref(part), policy)?;
        if let Some(s) = run.section("controlled") {
            controlled_section = controlled_section + *s;
        }
        records.extend(run.records);
    }
    Ok(ProtocolRun {
        ledger: meter.read(net),
        records,
        sections: vec![Section {
            name: "controlled".into(),
            ledger: controlled_section,
        }],
    })
}
