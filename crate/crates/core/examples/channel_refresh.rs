//! Channel qubits are a fixed resource. After a non-local gate they hold
//! measured values; resetting them from the recorded outcomes lets the same
//! slots carry the next pair.

use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::{establish_epr, nonlocal_cnot, reset_channel_qubits, EntanglementPolicy};
use dqc::qstate::StateVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b) = (NodeId(0), NodeId(1));
    // One channel qubit each, with room to host one visitor: no room for a
    // second pair without a reset.
    let specs = [
        NodeSpec::new("A", 1, 1).with_channel_capacity(2),
        NodeSpec::new("B", 1, 1).with_channel_capacity(2),
    ];
    let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(9));
    let (ra, rb) = (QubitAddress::register(a, 0), QubitAddress::register(b, 0));
    net.load_input(&[ra, rb], &StateVector::basis(2, 0b10))?;

    for cycle in 1..=3 {
        establish_epr(&mut net, a, b)?;
        let run = nonlocal_cnot(&mut net, ra, rb, EntanglementPolicy::PreEstablished)?;
        let dirty: Vec<_> = net
            .all_channel_qubits()
            .into_iter()
            .filter(|&q| !net.is_definite(q, 0))
            .collect();
        reset_channel_qubits(&mut net, &run.records)?;
        let clean = net
            .all_channel_qubits()
            .iter()
            .all(|&q| net.is_definite(q, 0));
        println!(
            "cycle {cycle}: target reads {}  dirty before reset {:?}  clean after {}",
            u8::from(net.is_definite(rb, 1)),
            dirty.iter().map(ToString::to_string).collect::<Vec<_>>(),
            clean
        );
    }
    println!("total {:?}", net.ledger());

    // Without the reset the next establishment has nowhere to go.
    establish_epr(&mut net, a, b)?;
    nonlocal_cnot(&mut net, ra, rb, EntanglementPolicy::PreEstablished)?;
    match establish_epr(&mut net, a, b) {
        Ok(_) => println!("unexpected: second pair fit"),
        Err(e) => println!("without reset: {e}"),
    }
    Ok(())
}
