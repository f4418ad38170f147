//! A run of gates all controlled by the same remote qubit. The control line
//! is shared once, so ten gates cost what one does.

use dqc::gates::{controlled, hadamard, pauli_x, pauli_z};
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{
    establish_epr, nonlocal_controlled_sequence, ControlledPart, EntanglementPolicy,
};
use dqc::qstate::{GateMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let input = StateVector::random(3, &mut rng);
    let control = QubitAddress::register(NodeId(0), 0);
    let t = [
        QubitAddress::register(NodeId(1), 0),
        QubitAddress::register(NodeId(1), 1),
    ];
    let palette = [
        hadamard(),
        pauli_x(),
        pauli_z(),
        GateMatrix::random(1, &mut rng),
    ];

    for k in [1, 2, 5, 10] {
        let parts: Vec<_> = (0..k)
            .map(|i| ControlledPart::new(palette[i % palette.len()].clone(), vec![t[i % 2]]))
            .collect();

        // Oracle: the same gates applied directly, control on qubit 0.
        let mut want = input.clone();
        for (i, p) in parts.iter().enumerate() {
            want.apply_gate(&controlled(1, &p.gate), &[0, 1 + i % 2])?;
        }

        let specs = [NodeSpec::new("ctl", 1, 2), NodeSpec::new("work", 2, 2)];
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(k as u64));
        net.load_input(&[control, t[0], t[1]], &input)?;
        establish_epr(&mut net, NodeId(0), NodeId(1))?;
        let run = nonlocal_controlled_sequence(
            &mut net,
            control,
            &parts,
            EntanglementPolicy::PreEstablished,
        )?;
        println!(
            "k = {k:>2}: ebits {}  cbits {}  fidelity {:.12}",
            run.ledger.ebits_consumed,
            run.ledger.cbits_sent,
            extract(&net, &[control, t[0], t[1]])?.fidelity_up_to_global_phase(&want)?
        );
    }
    Ok(())
}
