use crate::error::{Error, Result};
use crate::gates::{cnot, hadamard};
use crate::network::{EprPair, Network, NodeId, QubitAddress};

fn prepare_pair(net: &mut Network, x: QubitAddress, y: QubitAddress) -> Result<()> {
    net.local_apply(&hadamard(), &[x])?;
    net.local_apply(&cnot(), &[x, y])
}

/// Sends `x` to `to`: into a free slot if there is one, otherwise by swapping
/// places with one of `to`'s fresh channel qubits.
fn deliver(net: &mut Network, x: QubitAddress, to: NodeId) -> Result<QubitAddress> {
    if net.free_channel_slots(to) > 0 {
        return net.transport_qubit(x, to);
    }
    let &y = net.fresh_channel_qubits(to).first().ok_or_else(|| {
        Error::Capacity(format!(
            "{} has neither a free channel slot nor a fresh channel qubit",
            net.node_name(to)
        ))
    })?;
    net.exchange_qubits(x, y)?;
    Ok(y)
}

/// Shares one EPR pair between `a` and `b` and registers it. The returned
/// pair has `a`'s half first.
///
/// A node with two fresh channel qubits entangles them and ships one
/// across. With only one fresh qubit on each side, one of them travels to
/// the other node, gets entangled there, and comes back.
pub fn establish_epr(net: &mut Network, a: NodeId, b: NodeId) -> Result<EprPair> {
    if a == b {
        return Err(Error::Parameter(
            "an EPR pair needs two different nodes".into(),
        ));
    }
    let pair = match build(net, a, b)? {
        Some(pair) => pair,
        None => build(net, b, a)?
            .map(EprPair::flipped)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "cannot establish a pair between {} and {}: not enough fresh channel qubits or slots",
                    net.node_name(a),
                    net.node_name(b)
                ))
            })?,
    };
    net.register_epr(pair)?;
    Ok(pair)
}

/// Tries to build a pair driven from `a`. `Ok(None)` means `a` cannot drive.
fn build(net: &mut Network, a: NodeId, b: NodeId) -> Result<Option<EprPair>> {
    let fa = net.fresh_channel_qubits(a);
    let fb = net.fresh_channel_qubits(b);
    if fa.len() >= 2 && (net.free_channel_slots(b) > 0 || !fb.is_empty()) {
        prepare_pair(net, fa[0], fa[1])?;
        let far = deliver(net, fa[1], b)?;
        return Ok(Some(EprPair { a: fa[0], b: far }));
    }
    if !fa.is_empty() && !fb.is_empty() && net.free_channel_slots(b) > 0 {
        let visiting = net.transport_qubit(fa[0], b)?;
        prepare_pair(net, fb[0], visiting)?;
        let home = net.transport_qubit(visiting, a)?;
        return Ok(Some(EprPair { a: home, b: fb[0] }));
    }
    Ok(None)
}

/// Both nodes entangle their own two channel qubits, then swap one qubit of
/// each pair: two ebits for two transported qubits.
pub fn establish_epr_exchange(net: &mut Network, a: NodeId, b: NodeId) -> Result<[EprPair; 2]> {
    if a == b {
        return Err(Error::Parameter(
            "an EPR pair needs two different nodes".into(),
        ));
    }
    let mut picks = Vec::with_capacity(2);
    for node in [a, b] {
        let fresh = net.fresh_channel_qubits(node);
        let usable: Vec<QubitAddress> = net
            .channel_qubits(node)
            .into_iter()
            .filter(|&q| !net.is_reserved(q))
            .collect();
        if usable.len() < 2 {
            return Err(Error::Capacity(format!(
                "{} needs two unreserved channel qubits",
                net.node_name(node)
            )));
        }
        if let Some(dirty) = usable[..2].iter().find(|q| !fresh.contains(q)) {
            return Err(Error::Precondition(format!(
                "channel qubit {dirty} is not |0⟩"
            )));
        }
        picks.push((usable[0], usable[1]));
    }
    let ((x1, x2), (y1, y2)) = (picks[0], picks[1]);
    net.parallel(|p| {
        p.branch(|n| prepare_pair(n, x1, x2))?;
        p.branch(|n| prepare_pair(n, y1, y2))
    })?;
    net.exchange_qubits(x2, y2)?;
    let pairs = [EprPair { a: x1, b: y2 }, EprPair { a: x2, b: y1 }];
    for pair in pairs {
        net.register_epr(pair)?;
    }
    Ok(pairs)
}

/// Prepares an `(others.len() + 1)`-party cat state on `hub`'s channel
/// qubits and hands one member to each node in `others`. Returns the members
/// in node order, hub first, and registers the cat.
pub fn establish_cat(
    net: &mut Network,
    hub: NodeId,
    others: &[NodeId],
) -> Result<Vec<QubitAddress>> {
    if others.is_empty() {
        return Err(Error::Parameter("a cat needs at least two parties".into()));
    }
    if others.contains(&hub) {
        return Err(Error::Parameter(
            "the hub already holds the first member".into(),
        ));
    }
    let fresh = net.fresh_channel_qubits(hub);
    let m = others.len() + 1;
    if fresh.len() < m {
        return Err(Error::Capacity(format!(
            "{} needs {m} fresh channel qubits to prepare the cat, has {}",
            net.node_name(hub),
            fresh.len()
        )));
    }
    let local = &fresh[..m];
    net.local_apply(&hadamard(), &[local[0]])?;
    for &q in &local[1..] {
        net.local_apply(&cnot(), &[local[0], q])?;
    }
    let mut members = vec![local[0]];
    for (&q, &to) in local[1..].iter().zip(others) {
        members.push(deliver(net, q, to)?);
    }
    net.register_cat(members.clone())?;
    Ok(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NodeSpec;

    fn is_pair(net: &Network, p: EprPair) -> bool {
        let q = [net.resolve(p.a).unwrap(), net.resolve(p.b).unwrap()];
        net.state().is_cat_state(&q).unwrap()
    }

    #[test]
    fn exchange_gives_two_pairs_for_two_transports() {
        let mut net = Network::new(&[NodeSpec::new("A", 0, 2), NodeSpec::new("B", 0, 2)]).unwrap();
        let (a, b) = (NodeId(0), NodeId(1));
        let pairs = establish_epr_exchange(&mut net, a, b).unwrap();
        for p in pairs {
            assert_eq!((p.a.node, p.b.node), (a, b));
            assert!(is_pair(&net, p));
        }
        assert_eq!(net.ledger().qubits_transported, 2);
        assert_eq!(net.ledger().communication(), (0, 0));
        assert_eq!(net.available_epr(a, b), 2);
        net.check_ownership().unwrap();
    }

    #[test]
    fn exchange_is_additive() {
        let mut net = Network::new(&[NodeSpec::new("A", 0, 6), NodeSpec::new("B", 0, 6)]).unwrap();
        for _ in 0..3 {
            establish_epr_exchange(&mut net, NodeId(0), NodeId(1)).unwrap();
        }
        assert_eq!(net.available_epr(NodeId(0), NodeId(1)), 6);
        assert_eq!(net.ledger().qubits_transported, 6);
    }

    #[test]
    fn exchange_refuses_dirty_channels() {
        let mut net = Network::new(&[NodeSpec::new("A", 0, 2), NodeSpec::new("B", 0, 2)]).unwrap();
        net.local_apply(&hadamard(), &[QubitAddress::channel(NodeId(1), 1)])
            .unwrap();
        assert!(matches!(
            establish_epr_exchange(&mut net, NodeId(0), NodeId(1)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn single_pair_paths() {
        // Free slot on the far side: one transport.
        let mut net = Network::new(&[
            NodeSpec::new("A", 0, 2),
            NodeSpec::new("B", 0, 0).with_channel_capacity(1),
        ])
        .unwrap();
        let p = establish_epr(&mut net, NodeId(0), NodeId(1)).unwrap();
        assert!(is_pair(&net, p));
        assert_eq!(net.ledger().qubits_transported, 1);

        // Driven from the other side, pair still oriented a-first.
        let mut net = Network::new(&[NodeSpec::new("A", 0, 1), NodeSpec::new("B", 0, 2)]).unwrap();
        let p = establish_epr(&mut net, NodeId(0), NodeId(1)).unwrap();
        assert_eq!(p.a.node, NodeId(0));
        assert!(is_pair(&net, p));

        // One qubit each plus a spare slot: there and back again.
        let mut net = Network::new(&[
            NodeSpec::new("A", 0, 1),
            NodeSpec::new("B", 0, 1).with_channel_capacity(2),
        ])
        .unwrap();
        let p = establish_epr(&mut net, NodeId(0), NodeId(1)).unwrap();
        assert!(is_pair(&net, p));
        assert_eq!(net.ledger().qubits_transported, 2);

        // One qubit each and no slots: impossible.
        let mut net = Network::new(&[NodeSpec::new("A", 0, 1), NodeSpec::new("B", 0, 1)]).unwrap();
        assert!(matches!(
            establish_epr(&mut net, NodeId(0), NodeId(1)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn cat_spans_the_requested_nodes() {
        let mut net = Network::new(&[
            NodeSpec::new("H", 0, 4),
            NodeSpec::new("B", 0, 1),
            NodeSpec::new("C", 0, 1),
            NodeSpec::new("D", 0, 1),
        ])
        .unwrap();
        let members =
            establish_cat(&mut net, NodeId(0), &[NodeId(1), NodeId(2), NodeId(3)]).unwrap();
        let nodes: Vec<_> = members.iter().map(|a| a.node.0).collect();
        assert_eq!(nodes, vec![0, 1, 2, 3]);
        let q: Vec<_> = members.iter().map(|&a| net.resolve(a).unwrap()).collect();
        assert!(net.state().is_cat_state(&q).unwrap());
        assert_eq!(net.ledger().qubits_transported, 6);
        assert!(net
            .take_cat(&[NodeId(0), NodeId(1), NodeId(2), NodeId(3)])
            .is_some());
    }
}
