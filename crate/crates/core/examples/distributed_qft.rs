//! The quantum Fourier transform on n qubits split evenly over m machines.
//! Prints the gate plan, the local/non-local split, and checks one run
//! against the defining matrix.

use dqc::network::Outcomes;
use dqc::protocols::verify::extract;
use dqc::qft::{build_qft_plan, formula_counts, qft_distributed, qft_matrix, QftMode, QftStep};
use dqc::qstate::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (4, 2);
    let plan = build_qft_plan(n, m)?;
    for step in &plan.steps {
        match step {
            QftStep::H { qubit } => println!("  H      q{qubit}"),
            QftStep::ControlledR {
                control,
                target,
                k,
                local,
            } => println!(
                "  CR_{k}   q{control} -> q{target}{}",
                if *local { "" } else { "   (non-local)" }
            ),
            QftStep::Swap { a, b, local } => {
                println!(
                    "  SWAP   q{a} <-> q{b}{}",
                    if *local { "" } else { "   (non-local)" }
                )
            }
        }
    }

    println!("\n   n   m  total  local  non-local  amortized");
    for (n, m) in [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (16, 4)] {
        let (total, local, nonlocal) = formula_counts(n, m);
        let amortized = build_qft_plan(n, m)?.amortized_nonlocal_count();
        println!("  {n:>2}  {m:>2}  {total:>5}  {local:>5}  {nonlocal:>9}  {amortized:>9}");
    }

    let input = StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(23));
    let mut want = input.clone();
    want.apply_gate(&qft_matrix(n), &(0..n).collect::<Vec<_>>())?;
    println!();
    for mode in [QftMode::Raw, QftMode::Amortized] {
        let mut net = plan.network(2)?.with_outcomes(Outcomes::seeded(5));
        net.load_input(&plan.addresses(), &input)?;
        let run = qft_distributed(&mut net, &plan, mode)?;
        println!(
            "{mode:?}: ebits {}  cbits {}  transported {}  fidelity {:.12}",
            run.ledger.ebits_consumed,
            run.ledger.cbits_sent,
            run.ledger.qubits_transported,
            extract(&net, &plan.addresses())?.fidelity_up_to_global_phase(&want)?
        );
    }
    Ok(())
}
