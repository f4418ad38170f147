//! A controlled tensor product U1 ⊗ U2 ⊗ U3 spread over three nodes. A
//! four-party cat shares the control with every node at once, so the three
//! parts run in a single round instead of three.

use dqc::gates::controlled;
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{
    parallel_distributed_control, sequential_distributed_control, ControlledPart,
    EntanglementPolicy,
};
use dqc::qstate::{GateMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let u: Vec<_> = (0..3).map(|_| GateMatrix::random(1, &mut rng)).collect();
    let input = StateVector::random(4, &mut rng);
    let control = QubitAddress::register(NodeId(0), 0);
    let targets: Vec<_> = (1..=3)
        .map(|k| QubitAddress::register(NodeId(k), 0))
        .collect();

    let whole = u[0].kron(&u[1]).kron(&u[2]);
    let mut want = input.clone();
    want.apply_gate(&controlled(1, &whole), &[0, 1, 2, 3])?;

    let mut specs = vec![NodeSpec::new("ctl", 1, 4)];
    specs.extend((1..=3).map(|k| NodeSpec::new(format!("P{k}"), 1, 2)));
    let parts: Vec<_> = u
        .iter()
        .zip(&targets)
        .map(|(g, &t)| ControlledPart::new(g.clone(), vec![t]))
        .collect();
    let mut lines = vec![control];
    lines.extend_from_slice(&targets);

    for parallel in [true, false] {
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(2));
        net.load_input(&lines, &input)?;
        let run = if parallel {
            parallel_distributed_control(&mut net, control, &parts, EntanglementPolicy::OnDemand)?
        } else {
            sequential_distributed_control(&mut net, control, &parts, EntanglementPolicy::OnDemand)?
        };
        let rounds = run
            .sections
            .iter()
            .find(|s| s.name == "controlled")
            .unwrap()
            .ledger
            .rounds;
        println!(
            "{:<10} controlled rounds {rounds}  ebits {}  cbits {}  fidelity {:.12}",
            if parallel { "parallel" } else { "sequential" },
            run.ledger.ebits_consumed,
            run.ledger.cbits_sent,
            extract(&net, &lines)?.fidelity_up_to_global_phase(&want)?
        );
    }
    Ok(())
}
