use super::{
    establish_epr_exchange, obtain_pair, reset_channel_qubits, EntanglementPolicy, Meter,
    ProtocolRun,
};
use crate::error::{Error, Result};
use crate::gates::swap;
use crate::network::{EprPair, Network, Pool, QubitAddress};
use crate::primitives::teleport;

/// Teleports `source` into the empty register qubit `empty` on the far node
/// and leaves every other qubit involved in `|0⟩`: both channel qubits and
/// the source itself, which becomes an empty slot for later inbound states.
pub fn teleport_with_reset(
    net: &mut Network,
    source: QubitAddress,
    pair: EprPair,
    empty: QubitAddress,
) -> Result<ProtocolRun> {
    if empty.pool != Pool::Register || empty.node != pair.b.node {
        return Err(Error::Precondition(format!(
            "{empty} must be a register qubit on the receiving node"
        )));
    }
    if !net.is_definite(empty, 0) {
        return Err(Error::Precondition(format!(
            "{empty} is not an empty |0⟩ qubit"
        )));
    }
    let meter = Meter::start(net);
    let t = teleport(net, source, pair)?;
    reset_channel_qubits(net, &[t.entangler, t.disentangler])?;
    net.local_apply(&swap(), &[pair.b, empty])?;
    Ok(ProtocolRun {
        ledger: meter.read(net),
        ..Default::default()
    })
}

/// Exchanges the states of `a` and `b` on different nodes with two
/// teleportations: two ebits, two cbits each way.
///
/// With two channel qubits per node the received channel qubits act as the
/// swap buffers and no register space is needed. Otherwise an empty register
/// qubit on `b`'s node holds the incoming state while `b` is emptied.
pub fn distributed_swap(
    net: &mut Network,
    a: QubitAddress,
    b: QubitAddress,
    policy: EntanglementPolicy,
) -> Result<ProtocolRun> {
    let (na, nb) = (a.node, b.node);
    if na == nb {
        return Err(Error::Parameter(
            "both qubits are on one node; swap locally".into(),
        ));
    }
    net.resolve(a)?;
    net.resolve(b)?;
    let meter = Meter::start(net);
    let can_exchange = policy == EntanglementPolicy::OnDemand
        && net.fresh_channel_qubits(na).len() >= 2
        && net.fresh_channel_qubits(nb).len() >= 2;

    if net.available_epr(na, nb) >= 2 || can_exchange {
        if net.available_epr(na, nb) < 2 {
            establish_epr_exchange(net, na, nb)?;
        }
        let p1 = obtain_pair(net, na, nb, policy)?;
        let p2 = obtain_pair(net, nb, na, policy)?;
        let t1 = teleport(net, a, p1)?;
        let t2 = teleport(net, b, p2)?;
        reset_channel_qubits(
            net,
            &[t1.entangler, t1.disentangler, t2.entangler, t2.disentangler],
        )?;
        let s = swap();
        net.parallel(|p| {
            p.branch(|n| n.local_apply(&s, &[a, t2.destination]))?;
            p.branch(|n| n.local_apply(&s, &[b, t1.destination]))
        })?;
    } else {
        let buffer = (0..net.register_count(nb))
            .map(|slot| QubitAddress::register(nb, slot))
            .find(|&q| q != b && net.is_definite(q, 0))
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "{} has fewer than two channel qubits and no empty register qubit",
                    net.node_name(nb)
                ))
            })?;
        let p1 = obtain_pair(net, na, nb, policy)?;
        teleport_with_reset(net, a, p1, buffer)?;
        let p2 = obtain_pair(net, nb, na, policy)?;
        teleport_with_reset(net, b, p2, a)?;
        net.local_apply(&swap(), &[buffer, b])?;
    }
    Ok(ProtocolRun {
        ledger: meter.read(net),
        ..Default::default()
    })
}
