//! A CNOT whose control and target live on different nodes, driven by one
//! shared EPR pair and two classical bits. Every measurement branch is forced
//! in turn and compared with the local CNOT.

use dqc::gates::cnot;
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{establish_epr, nonlocal_cnot, reset_channel_qubits, EntanglementPolicy};
use dqc::qstate::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let input = StateVector::random(2, &mut rng);
    let mut want = input.clone();
    want.apply_gate(&cnot(), &[0, 1])?;

    let (alice, bob) = (NodeId(0), NodeId(1));
    let control = QubitAddress::register(alice, 0);
    let target = QubitAddress::register(bob, 0);
    let specs = [NodeSpec::new("alice", 1, 2), NodeSpec::new("bob", 1, 2)];

    for outcomes in [[0, 0], [0, 1], [1, 0], [1, 1]] {
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::forced(outcomes));
        net.load_input(&[control, target], &input)?;
        establish_epr(&mut net, alice, bob)?;

        let run = nonlocal_cnot(
            &mut net,
            control,
            target,
            EntanglementPolicy::PreEstablished,
        )?;
        let fidelity = extract(&net, &[control, target])?.fidelity_up_to_global_phase(&want)?;
        reset_channel_qubits(&mut net, &run.records)?;

        println!(
            "branch {outcomes:?}  p = {:.3}  fidelity = {fidelity:.12}  ebits = {}  cbits = {}",
            net.branch_probability(),
            run.ledger.ebits_consumed,
            run.ledger.cbits_sent,
        );
        for m in net.messages() {
            let to: Vec<_> =
                m.to.nodes()
                    .iter()
                    .map(|&n| net.node_name(n).to_owned())
                    .collect();
            println!(
                "    {} -> {}  bit {}  ({})",
                net.node_name(m.from),
                to.join(","),
                m.bit,
                m.tag
            );
        }
    }
    Ok(())
}
