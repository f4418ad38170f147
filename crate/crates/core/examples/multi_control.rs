//! Multiply controlled gates across nodes. First a four-control X built from
//! Toffolis and three-control X gates through an ancilla, split over two
//! nodes so only one line crosses; then a controlled-controlled-U whose two
//! controls each sit on their own node.

use dqc::gates::{controlled, pauli_x};
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{
    decompose_multi_control_x, establish_epr, nonlocal_multi_control, EntanglementPolicy,
};
use dqc::qstate::{GateMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = |n, s| QubitAddress::register(NodeId(n), s);
    let x4 = controlled(4, &pauli_x());

    // Lines c1 c2 c3 c4 ancilla target; top holds c1 c2 ancilla.
    let lines = [
        reg(0, 0),
        reg(0, 1),
        reg(1, 0),
        reg(1, 1),
        reg(0, 2),
        reg(1, 2),
    ];
    let specs = [NodeSpec::new("top", 3, 2), NodeSpec::new("bottom", 3, 2)];
    let mut mismatches = 0;
    for k in 0..64 {
        let input = StateVector::basis(6, k);
        let mut want = input.clone();
        want.apply_gate(&x4, &[0, 1, 2, 3, 5])?;
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(k as u64));
        net.load_input(&lines, &input)?;
        establish_epr(&mut net, NodeId(0), NodeId(1))?;
        let run = decompose_multi_control_x(
            &mut net,
            &lines[..4],
            lines[4],
            lines[5],
            EntanglementPolicy::PreEstablished,
        )?;
        let f = extract(&net, &lines)?.fidelity_up_to_global_phase(&want)?;
        if f < 1.0 - 1e-10 {
            mismatches += 1;
        }
        if k == 63 {
            println!(
                "∧4(X) split over two nodes: ebits {}  cbits {}",
                run.ledger.ebits_consumed, run.ledger.cbits_sent
            );
        }
    }
    println!("64 basis inputs, {mismatches} mismatches");

    // ∧2(U) with controls on A and B and the target on T.
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let u = GateMatrix::random(1, &mut rng);
    let input = StateVector::random(3, &mut rng);
    let mut want = input.clone();
    want.apply_gate(&controlled(2, &u), &[0, 1, 2])?;
    let specs = [
        NodeSpec::new("A", 1, 1),
        NodeSpec::new("B", 1, 1),
        NodeSpec::new("T", 3, 2),
    ];
    let lines = [reg(0, 0), reg(1, 0), reg(2, 0)];
    let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(0));
    net.load_input(&lines, &input)?;
    let run = nonlocal_multi_control(
        &mut net,
        &lines[..2],
        &u,
        lines[2],
        EntanglementPolicy::OnDemand,
    )?;
    println!(
        "∧2(U) with both controls remote: ebits {}  cbits {}  fidelity {:.12}",
        run.ledger.ebits_consumed,
        run.ledger.cbits_sent,
        extract(&net, &lines)?.fidelity_up_to_global_phase(&want)?
    );
    Ok(())
}
