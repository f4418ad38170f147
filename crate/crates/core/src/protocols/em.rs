use std::collections::BTreeMap;

use super::{establish_epr, nonlocal_cnot, EntanglementPolicy, Meter, ProtocolRun, Section};
use crate::error::{Error, Result};
use crate::gates::{em_schedule, hadamard, EmShape};
use crate::network::{Network, NodeId, QubitAddress, ResourceLedger};

/// Builds the m-fold cat state on `targets`, one register qubit per node,
/// by running the local E_m circuit with every CNOT replaced by a non-local
/// one: `m − 1` ebits in total.
///
/// The `linear` shape chains the nodes and needs two channel qubits per
/// node. The `binary-tree` shape doubles the entangled set each layer, so it
/// finishes in `⌈log₂ m⌉` layers, but the root holds `⌈log₂ m⌉` pairs at once.
/// All pairs are in place before the first gate.
pub fn distributed_em(
    net: &mut Network,
    targets: &[QubitAddress],
    shape: EmShape,
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    let m = targets.len();
    if m < 2 {
        return Err(Error::Parameter(format!(
            "E_m needs at least 2 nodes, got {m}"
        )));
    }
    let nodes: Vec<NodeId> = targets.iter().map(|t| t.node).collect();
    for (i, n) in nodes.iter().enumerate() {
        if nodes[..i].contains(n) {
            return Err(Error::Parameter(format!(
                "{} appears twice",
                net.node_name(*n)
            )));
        }
    }
    if let Some(dirty) = targets.iter().find(|&&t| !net.is_definite(t, 0)) {
        return Err(Error::Precondition(format!("{dirty} is not |0⟩")));
    }
    let schedule = em_schedule(m, shape);

    let meter = Meter::start(net);
    if policy == EntanglementPolicy::OnDemand {
        let mut held: BTreeMap<usize, usize> = BTreeMap::new();
        for &(i, j) in schedule.iter().flatten() {
            *held.entry(i).or_default() += 1;
            *held.entry(j).or_default() += 1;
        }
        for (&i, &need) in &held {
            let have = net.channel_capacity(nodes[i]);
            if need > have {
                return Err(Error::Capacity(format!(
                    "{} must hold {need} pairs at once for the {} schedule but has {have} channel slots",
                    net.node_name(nodes[i]),
                    shape.name()
                )));
            }
        }
        for &(i, j) in schedule.iter().flatten() {
            establish_epr(net, nodes[i], nodes[j])?;
        }
    }
    let establish = meter.read(net);

    net.local_apply(&hadamard(), &[targets[0]])?;
    let mut records = Vec::new();
    for layer in &schedule {
        let runs = net.parallel(|p| {
            layer
                .iter()
                .map(|&(i, j)| {
                    p.branch(|n| {
                        nonlocal_cnot(
                            n,
                            targets[i],
                            targets[j],
                            EntanglementPolicy::PreEstablished,
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        records.extend(runs.into_iter().flat_map(|r| r.records));
    }

    Ok(ProtocolRun {
        ledger: meter.read(net),
        records,
        sections: vec![
            Section {
                name: "establish".into(),
                ledger: establish,
            },
            Section {
                name: "nonlocal-cnot-layers".into(),
                ledger: ResourceLedger {
                    rounds: schedule.len() as u64,
                    ..Default::default()
                },
            },
        ],
    })
}
