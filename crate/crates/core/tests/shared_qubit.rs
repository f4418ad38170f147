//! Controlled U = (I ⊗ U2)(U1 ⊗ I) where U1 acts on (x, s) at P1 and U2 on
//! (s, y) at P2. The shared qubit s moves to P2 between the two parts and
//! comes home afterwards, both times by teleportation into a freed slot.

use dqc::branches::enumerate;
use dqc::gates::controlled;
use dqc::network::{Network, NodeId, NodeSpec, QubitAddress};
use dqc::protocols::verify::extract;
use dqc::protocols::{
    establish_epr, nonlocal_controlled_sequence, reset_channel_qubits, teleport_with_reset,
    ControlledPart, EntanglementPolicy,
};
use dqc::qstate::{GateMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn shared_qubit_travels_between_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (c_node, p1, p2) = (NodeId(0), NodeId(1), NodeId(2));
    let c = QubitAddress::register(c_node, 0);
    let (x, s_home) = (QubitAddress::register(p1, 0), QubitAddress::register(p1, 1));
    let (y, s_away) = (QubitAddress::register(p2, 0), QubitAddress::register(p2, 1));
    let specs = [
        NodeSpec::new("C", 1, 2),
        NodeSpec::new("P1", 2, 2),
        NodeSpec::new("P2", 2, 2),
    ];

    for _ in 0..3 {
        let u1 = GateMatrix::random(2, &mut rng);
        let u2 = GateMatrix::random(2, &mut rng);
        let input = StateVector::random(4, &mut rng);
        // Oracle on (c, x, s, y).
        let whole = u1.kron(&GateMatrix::identity(1));
        let whole = GateMatrix::identity(1).kron(&u2).compose(&whole).unwrap();
        let mut want = input.clone();
        want.apply_gate(&controlled(1, &whole), &[0, 1, 2, 3])
            .unwrap();

        let branches = enumerate(|o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            net.load_input(&[c, x, s_home, y], &input)?;
            let policy = EntanglementPolicy::OnDemand;

            let part = ControlledPart::new(u1.clone(), vec![x, s_home]);
            let run = nonlocal_controlled_sequence(&mut net, c, &[part], policy)?;
            reset_channel_qubits(&mut net, &run.records)?;

            let pair = establish_epr(&mut net, p1, p2)?;
            teleport_with_reset(&mut net, s_home, pair, s_away)?;

            let part = ControlledPart::new(u2.clone(), vec![s_away, y]);
            let run = nonlocal_controlled_sequence(&mut net, c, &[part], policy)?;
            reset_channel_qubits(&mut net, &run.records)?;

            let pair = establish_epr(&mut net, p2, p1)?;
            teleport_with_reset(&mut net, s_away, pair, s_home)?;

            let fidelity = extract(&net, &[c, x, s_home, y])?.fidelity_up_to_global_phase(&want)?;
            let clean = net
                .all_channel_qubits()
                .iter()
                .all(|&q| net.is_definite(q, 0))
                && net.is_definite(s_away, 0);
            Ok(((fidelity, clean, net.ledger()), net.trace().to_vec()))
        })
        .unwrap();

        assert_eq!(branches.len(), 256);
        for b in &branches {
            let (fidelity, clean, ledger) = b.value;
            assert!(
                fidelity > 1.0 - 1e-10,
                "branch {:?}: fidelity {fidelity}",
                b.outcomes
            );
            assert!(clean, "branch {:?} left a dirty qubit", b.outcomes);
            assert_eq!(ledger.communication(), (4, 8));
        }
    }
}
