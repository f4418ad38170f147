//! Swapping two qubits on different nodes costs two teleports: two ebits and
//! two cbits in each direction.

use dqc::gates::swap;
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{distributed_swap, EntanglementPolicy};
use dqc::qstate::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = StateVector::random(2, &mut ChaCha8Rng::seed_from_u64(21));
    let mut want = input.clone();
    want.apply_gate(&swap(), &[0, 1])?;
    let (a, b) = (
        QubitAddress::register(NodeId(0), 0),
        QubitAddress::register(NodeId(1), 0),
    );

    let layouts = [
        (
            "two channel qubits each",
            vec![NodeSpec::new("A", 1, 2), NodeSpec::new("B", 1, 2)],
        ),
        (
            "one channel qubit, a spare register on B",
            vec![
                NodeSpec::new("A", 1, 1).with_channel_capacity(2),
                NodeSpec::new("B", 2, 1).with_channel_capacity(2),
            ],
        ),
    ];
    for (label, specs) in layouts {
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(1));
        net.load_input(&[a, b], &input)?;
        distributed_swap(&mut net, a, b, EntanglementPolicy::OnDemand)?;
        let l = net.ledger();
        println!(
            "{label}: fidelity {:.12}  ebits {}  cbits {}  transported {}  rounds {}",
            extract(&net, &[a, b])?.fidelity_up_to_global_phase(&want)?,
            l.ebits_consumed,
            l.cbits_sent,
            l.qubits_transported,
            l.rounds
        );
    }
    Ok(())
}
