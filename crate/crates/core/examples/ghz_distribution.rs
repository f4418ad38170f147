//! Builds an m-node GHZ state with non-local CNOTs in two shapes. Both use
//! m-1 ebits; the binary tree needs far fewer layers.

use dqc::gates::{cat_state, em_schedule, EmShape};
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{distributed_em, EntanglementPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in 2..=5 {
        for shape in [EmShape::Linear, EmShape::BinaryTree] {
            let specs: Vec<_> = (0..m)
                .map(|k| NodeSpec::new(format!("N{k}"), 1, 3))
                .collect();
            let targets: Vec<_> = (0..m)
                .map(|k| QubitAddress::register(NodeId(k), 0))
                .collect();
            let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(m as u64));
            let run = distributed_em(&mut net, &targets, shape, EntanglementPolicy::OnDemand)?;
            let layers = run
                .sections
                .iter()
                .find(|s| s.name == "nonlocal-cnot-layers")
                .unwrap();
            println!(
                "m = {m}  {:<12} layers {}  ebits {}  cbits {}  fidelity {:.12}",
                shape.name(),
                layers.ledger.rounds,
                run.ledger.ebits_consumed,
                run.ledger.cbits_sent,
                extract(&net, &targets)?.fidelity_up_to_global_phase(&cat_state(m))?
            );
        }
    }
    for m in [8, 16, 64] {
        println!(
            "m = {m}: linear {} layers, binary tree {} layers",
            em_schedule(m, EmShape::Linear).len(),
            em_schedule(m, EmShape::BinaryTree).len()
        );
    }
    Ok(())
}
