//! Teleportation as cat-entangler plus cat-disentangler, then a return trip
//! into the register slot the first teleport freed.

use dqc::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress};
use dqc::primitives::teleport;
use dqc::protocols::verify::extract;
use dqc::protocols::{establish_epr, teleport_with_reset};
use dqc::qstate::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(11));
    let (a, b) = (NodeId(0), NodeId(1));
    let specs = [NodeSpec::new("A", 1, 2), NodeSpec::new("B", 1, 2)];
    let (ra, rb) = (QubitAddress::register(a, 0), QubitAddress::register(b, 0));

    // Bare teleport: the state lands on B's half of the pair.
    let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(3));
    net.load_input(&[ra], &psi)?;
    let pair = establish_epr(&mut net, a, b)?;
    let t = teleport(&mut net, ra, pair)?;
    println!(
        "teleported onto {}: fidelity {:.12}, outcomes ({}, {})",
        t.destination,
        extract(&net, &[t.destination])?.fidelity_up_to_global_phase(&psi)?,
        t.entangler.outcome,
        t.disentangler.outcome
    );

    // Ping-pong with resets: A -> B register, then back into A's register.
    let mut net = Network::new(&specs)?.with_outcomes(Outcomes::seeded(4));
    net.load_input(&[ra], &psi)?;
    let there = establish_epr(&mut net, a, b)?;
    teleport_with_reset(&mut net, ra, there, rb)?;
    println!(
        "A -> B: fidelity {:.12}, source back to |0⟩: {}",
        extract(&net, &[rb])?.fidelity_up_to_global_phase(&psi)?,
        net.is_definite(ra, 0)
    );
    let back = establish_epr(&mut net, b, a)?;
    teleport_with_reset(&mut net, rb, back, ra)?;
    println!(
        "B -> A: fidelity {:.12}, ledger {:?}",
        extract(&net, &[ra])?.fidelity_up_to_global_phase(&psi)?,
        net.ledger()
    );
    Ok(())
}
