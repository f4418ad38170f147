//! The two primitives on their own. The cat-entangler spreads one control
//! qubit α|0⟩+β|1⟩ over a cat state into α|0…0⟩+β|1…1⟩; the cat-disentangler
//! folds it back onto whichever member we choose, after an optional shrink.

use dqc::gates::cat_state;
use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::primitives::{cat_disentangler, cat_entangler, cat_shrink};
use dqc::protocols::verify::extract;
use dqc::qstate::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(5));
    let m = 4;
    let mut specs = vec![NodeSpec::new("hub", 1, 1)];
    specs.extend((1..m).map(|k| NodeSpec::new(format!("leaf{k}"), 0, 1)));
    let control = QubitAddress::register(NodeId(0), 0);
    let cat: Vec<_> = (0..m)
        .map(|k| QubitAddress::channel(NodeId(k), 0))
        .collect();

    for keep in 0..m {
        let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(keep as u64));
        let mut places = vec![control];
        places.extend_from_slice(&cat);
        net.load_input(&places, &psi.tensor(&cat_state(m)))?;

        let group = cat_entangler(&mut net, control, &cat)?;
        let like = extract(&net, &group.members)?;
        let (first, last) = (like.amplitude(0), like.amplitude((1 << m) - 1));

        // The hub's cat qubit was measured; the control itself is a member.
        // Drop one member first, then collapse the rest onto `keep`.
        let target = group.members[keep];
        let drop = group.members[(keep + 1) % m];
        let (group, _) = cat_shrink(&mut net, &group, &[drop])?;
        cat_disentangler(&mut net, &group, target)?;

        println!(
            "keep {}  |0…0⟩ {:.3}  |1…1⟩ {:.3}  restored fidelity {:.12}  ebits {} cbits {}",
            target,
            first,
            last,
            extract(&net, &[target])?.fidelity_up_to_global_phase(&psi)?,
            net.ledger().ebits_consumed,
            net.ledger().cbits_sent
        );
    }
    Ok(())
}
