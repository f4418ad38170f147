//! Running a measurement-driven procedure over all of its outcome branches,
//! or over a seeded sample of them.

use crate::error::{Error, Result};
use crate::network::{MeasurementRecord, Outcomes};
use crate::qstate::ZERO_PROBABILITY;

/// One completed run.
#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub outcomes: Vec<u8>,
    pub probability: f64,
    pub value: T,
}

/// Output of a single run: whatever the caller wants to keep, plus the
/// measurement trace that determines the branch.
pub type Run<T> = (T, Vec<MeasurementRecord>);

/// Visits every branch with nonzero probability, depth first, by forcing
/// outcome prefixes. Fails if the branch probabilities do not sum to one,
/// which would mean the procedure is not a function of its outcomes.
pub fn enumerate<T>(mut run: impl FnMut(Outcomes) -> Result<Run<T>>) -> Result<Vec<Branch<T>>> {
    let mut branches = Vec::new();
    let mut prefix: Vec<u8> = Vec::new();
    loop {
        let (value, trace) = run(Outcomes::forced(prefix.clone()))?;
        let outcomes: Vec<u8> = trace.iter().map(|r| r.outcome).collect();
        if !outcomes.starts_with(&prefix) {
            return Err(Error::Validation(
                "procedure did not honor the forced outcome prefix".into(),
            ));
        }
        let probability = trace.iter().map(|r| r.probability).product();
        let next = trace
            .iter()
            .rposition(|r| r.outcome == 0 && r.probability < 1.0 - ZERO_PROBABILITY);
        branches.push(Branch {
            outcomes: outcomes.clone(),
            probability,
            value,
        });
        match next {
            Some(i) => {
                prefix = outcomes[..i].to_vec();
                prefix.push(1);
            }
            None => break,
        }
    }
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "branch probabilities sum to {total}, not 1"
        )));
    }
    Ok(branches)
}

/// Runs `count` times with Born-rule sampling seeded from `seed`.
pub fn sample<T>(
    count: usize,
    seed: u64,
    mut run: impl FnMut(Outcomes) -> Result<Run<T>>,
) -> Result<Vec<Branch<T>>> {
    (0..count as u64)
        .map(|i| {
            let (value, trace) = run(Outcomes::seeded(seed.wrapping_add(i)))?;
            Ok(Branch {
                outcomes: trace.iter().map(|r| r.outcome).collect(),
                probability: trace.iter().map(|r| r.probability).product(),
                value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cnot, hadamard};
    use crate::network::{Network, NodeId, NodeSpec, QubitAddress};

    fn run_bell(outcomes: Outcomes, measure_both: bool) -> Result<Run<()>> {
        let mut net = Network::new(&[NodeSpec::new("A", 3, 0)])?.with_outcomes(outcomes);
        let a = NodeId(0);
        let (q0, q1, q2) = (
            QubitAddress::register(a, 0),
            QubitAddress::register(a, 1),
            QubitAddress::register(a, 2),
        );
        net.local_apply(&hadamard(), &[q0])?;
        net.local_apply(&cnot(), &[q0, q1])?;
        net.local_apply(&hadamard(), &[q2])?;
        net.measure(q0)?;
        if measure_both {
            net.measure(q1)?;
        }
        net.measure(q2)?;
        Ok(((), net.trace().to_vec()))
    }

    #[test]
    fn skips_impossible_branches() {
        // q1 is fixed once q0 is measured, so only 2 × 2 branches exist.
        let branches = enumerate(|o| run_bell(o, true)).unwrap();
        let mut seen: Vec<Vec<u8>> = branches.iter().map(|b| b.outcomes.clone()).collect();
        seen.sort();
        assert_eq!(
            seen,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![1, 1, 0], vec![1, 1, 1]]
        );
        for b in &branches {
            assert!((b.probability - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample(20, 7, |o| run_bell(o, false)).unwrap();
        let b = sample(20, 7, |o| run_bell(o, false)).unwrap();
        let oa: Vec<_> = a.iter().map(|x| x.outcomes.clone()).collect();
        let ob: Vec<_> = b.iter().map(|x| x.outcomes.clone()).collect();
        assert_eq!(oa, ob);
    }
}
