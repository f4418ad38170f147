//! Composite protocols built from the two primitives, plus entanglement
//! establishment, channel reset, and per-protocol verification harnesses.

mod em;
mod establish;
mod multi_control;
mod nonlocal;
mod teleport;
pub mod verify;

pub use em::distributed_em;
pub use establish::{establish_cat, establish_epr, establish_epr_exchange};
pub use multi_control::{decompose_multi_control_x, nonlocal_multi_control};
pub use nonlocal::{
    nonlocal_cnot, nonlocal_controlled_sequence, parallel_distributed_control,
    sequential_distributed_control, ControlledPart,
};
pub use teleport::{distributed_swap, teleport_with_reset};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::pauli_x;
use crate::network::{EprPair, MeasurementRecord, Network, NodeId, ResourceLedger};

/// Where protocols get their shared entanglement from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EntanglementPolicy {
    /// Draw on pairs already registered with the network; fail if missing.
    #[default]
    PreEstablished,
    /// Establish missing pairs by transporting channel qubits. Transport
    /// shows up in `qubits_transported`, never in ebits or cbits.
    OnDemand,
}

/// Named slice of a run's resource usage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    pub ledger: ResourceLedger,
}

/// Outcome of one protocol execution on one network.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProtocolRun {
    /// Resources used by this run alone.
    pub ledger: ResourceLedger,
    /// Measurements whose qubits are left in known basis states; feed them
    /// to [`reset_channel_qubits`] to recycle the qubits.
    pub records: Vec<MeasurementRecord>,
    pub sections: Vec<Section>,
}

impl ProtocolRun {
    pub(crate) fn section(&self, name: &str) -> Option<&ResourceLedger> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.ledger)
    }
}

pub(crate) struct Meter {
    start: ResourceLedger,
}

impl Meter {
    pub(crate) fn start(net: &Network) -> Self {
        Meter {
            start: net.ledger(),
        }
    }

    pub(crate) fn read(&self, net: &Network) -> ResourceLedger {
        net.ledger() - self.start
    }
}

/// Returns measured qubits to `|0⟩` using their recorded outcomes. Only a
/// qubit in a known basis state can be reset; anything else would delete
/// unknown quantum information.
pub fn reset_channel_qubits(net: &mut Network, records: &[MeasurementRecord]) -> Result<()> {
    for r in records {
        if !net.is_definite(r.address, r.outcome) {
            return Err(Error::CannotReset(format!(
                "{} is not in its recorded state |{}⟩",
                r.address, r.outcome
            )));
        }
    }
    let x = pauli_x();
    net.parallel(|p| {
        for r in records {
            p.branch(|n| {
                n.classically_controlled_apply(r.bit, &x, &[r.address])
                    .map(drop)
            })?;
        }
        Ok(())
    })
}

pub(crate) fn obtain_pair(
    net: &mut Network,
    a: NodeId,
    b: NodeId,
    policy: EntanglementPolicy,
) -> Result<EprPair> {
    if let Some(pair) = net.take_epr(a, b) {
        return Ok(pair);
    }
    match policy {
        EntanglementPolicy::PreEstablished => Err(Error::Resource(format!(
            "no EPR pair between {} and {}",
            net.node_name(a),
            net.node_name(b)
        ))),
        EntanglementPolicy::OnDemand => {
            establish_epr(net, a, b)?;
            net.take_epr(a, b)
                .ok_or_else(|| Error::Resource("establishment registered no pair".into()))
        }
    }
}

/// Summary of a verification harness over many inputs and branches.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolReport {
    pub name: String,
    pub branches_tested: usize,
    /// Resources of one protocol execution; identical on every branch.
    pub ledger: ResourceLedger,
    pub rounds: u64,
    pub verified: bool,
    pub max_infidelity: f64,
    pub sections: Vec<Section>,
    /// Classical traffic of the first branch tested, with node names.
    pub message_log: Vec<LoggedMessage>,
    /// Protocol-specific tallies, such as gate counts.
    pub counts: Vec<Count>,
    pub notes: Vec<String>,
    /// Per-branch diagnostics for anything that failed.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Count {
    pub name: String,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoggedMessage {
    pub from: String,
    pub to: Vec<String>,
    pub bit: u8,
    pub tag: String,
}

impl ProtocolReport {
    pub fn new(name: impl Into<String>) -> Self {
        ProtocolReport {
            name: name.into(),
            branches_tested: 0,
            ledger: ResourceLedger::default(),
            rounds: 0,
            verified: false,
            max_infidelity: 0.0,
            sections: Vec::new(),
            message_log: Vec::new(),
            counts: Vec::new(),
            notes: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn section(&self, name: &str) -> Option<&ResourceLedger> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.ledger)
    }

    pub fn count(&self, name: &str) -> Option<u64> {
        self.counts.iter().find(|c| c.name == name).map(|c| c.value)
    }
}
