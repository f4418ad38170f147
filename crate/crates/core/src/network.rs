//! The distributed machine: nodes with register and channel qubit pools,
//! locality enforcement, classical messaging, qubit transport, and the
//! resource ledger.
//!
//! One [`StateVector`] spans every node. Locality is enforced by the API:
//! multi-qubit gates are refused unless all their targets live on the same
//! node, so the only ways to correlate nodes are transporting channel qubits
//! and sending classical bits.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{GateMatrix, MeasureMode, StateVector, ZERO_PROBABILITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pool {
    Register,
    Channel,
}

/// Where a qubit lives: `(node, pool, slot)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitAddress {
    pub node: NodeId,
    pub pool: Pool,
    pub slot: usize,
}

impl QubitAddress {
    pub fn register(node: NodeId, slot: usize) -> Self {
        QubitAddress {
            node,
            pool: Pool::Register,
            slot,
        }
    }

    pub fn channel(node: NodeId, slot: usize) -> Self {
        QubitAddress {
            node,
            pool: Pool::Channel,
            slot,
        }
    }
}

impl fmt::Display for QubitAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pool = match self.pool {
            Pool::Register => 'r',
            Pool::Channel => 'c',
        };
        write!(f, "{}.{}{}", self.node.0, pool, self.slot)
    }
}

/// Shape of one node: register size, channel qubits present at start, and
/// channel slots (capacity for qubits transported in).
#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub name: String,
    pub registers: usize,
    pub channels: usize,
    pub channel_capacity: usize,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, registers: usize, channels: usize) -> Self {
        NodeSpec {
            name: name.into(),
            registers,
            channels,
            channel_capacity: channels,
        }
    }

    pub fn with_channel_capacity(mut self, capacity: usize) -> Self {
        self.channel_capacity = capacity;
        self
    }
}

#[derive(Clone, Debug)]
struct Node {
    name: String,
    register: Vec<usize>,
    channel: Vec<Option<usize>>,
}

/// Destination of a classical message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recipient {
    Node(NodeId),
    Broadcast(Vec<NodeId>),
}

impl Recipient {
    pub fn nodes(&self) -> Vec<NodeId> {
        match self {
            Recipient::Node(n) => vec![*n],
            Recipient::Broadcast(ns) => ns.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalMessage {
    pub from: NodeId,
    pub to: Recipient,
    pub bit: u8,
    pub tag: &'static str,
}

/// Communication and time counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResourceLedger {
    pub ebits_consumed: u64,
    pub cbits_sent: u64,
    pub qubits_transported: u64,
    pub rounds: u64,
}

impl ResourceLedger {
    pub fn new(ebits: u64, cbits: u64) -> Self {
        ResourceLedger {
            ebits_consumed: ebits,
            cbits_sent: cbits,
            ..Default::default()
        }
    }

    /// `(ebits, cbits)`
    pub fn communication(&self) -> (u64, u64) {
        (self.ebits_consumed, self.cbits_sent)
    }
}

impl Add for ResourceLedger {
    type Output = ResourceLedger;

    fn add(self, rhs: Self) -> Self {
        ResourceLedger {
            ebits_consumed: self.ebits_consumed + rhs.ebits_consumed,
            cbits_sent: self.cbits_sent + rhs.cbits_sent,
            qubits_transported: self.qubits_transported + rhs.qubits_transported,
            rounds: self.rounds + rhs.rounds,
        }
    }
}

impl Sub for ResourceLedger {
    type Output = ResourceLedger;

    fn sub(self, rhs: Self) -> Self {
        ResourceLedger {
            ebits_consumed: self.ebits_consumed - rhs.ebits_consumed,
            cbits_sent: self.cbits_sent - rhs.cbits_sent,
            qubits_transported: self.qubits_transported - rhs.qubits_transported,
            rounds: self.rounds - rhs.rounds,
        }
    }
}

/// Handle to a classical bit produced by a measurement or a local XOR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitId(usize);

#[derive(Clone, Debug)]
struct BitInfo {
    value: u8,
    known_at: BTreeSet<NodeId>,
}

/// Outcome of measuring one network qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub address: QubitAddress,
    pub outcome: u8,
    /// Born probability of `outcome` before collapse.
    pub probability: f64,
    pub bit: BitId,
}

/// A shared pair `(|00⟩ + |11⟩)/√2` with `a` and `b` on different nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EprPair {
    pub a: QubitAddress,
    pub b: QubitAddress,
}

impl EprPair {
    pub fn flipped(self) -> EprPair {
        EprPair {
            a: self.b,
            b: self.a,
        }
    }
}

/// Source of measurement outcomes.
#[derive(Clone, Debug)]
pub enum Outcomes {
    /// Sample from the Born rule with a seeded generator.
    Seeded(Box<ChaCha8Rng>),
    /// Use these outcomes in order. Once exhausted, take 0 when it is
    /// possible and 1 otherwise.
    Forced(Vec<u8>),
}

impl Outcomes {
    pub fn seeded(seed: u64) -> Self {
        Outcomes::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn forced(bits: impl Into<Vec<u8>>) -> Self {
        Outcomes::Forced(bits.into())
    }
}

/// The distributed machine.
#[derive(Clone, Debug)]
pub struct Network {
    nodes: Vec<Node>,
    owner: Vec<QubitAddress>,
    state: StateVector,
    messages: Vec<ClassicalMessage>,
    ledger: ResourceLedger,
    outcomes: Outcomes,
    trace: Vec<MeasurementRecord>,
    bits: Vec<BitInfo>,
    epr_pairs: Vec<EprPair>,
    cats: Vec<Vec<QubitAddress>>,
    touched: Vec<HashSet<usize>>,
    input_loaded: bool,
}

impl Network {
    /// All qubits start in `|0⟩`. Global indices are assigned node by node,
    /// registers before channels.
    pub fn new(specs: &[NodeSpec]) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Parameter("a network needs at least one node".into()));
        }
        let mut nodes = Vec::with_capacity(specs.len());
        let mut owner = Vec::new();
        for (id, spec) in specs.iter().enumerate() {
            if spec.channel_capacity < spec.channels {
                return Err(Error::Parameter(format!(
                    "node {} has {} channel qubits but capacity {}",
                    spec.name, spec.channels, spec.channel_capacity
                )));
            }
            if specs[..id].iter().any(|s| s.name == spec.name) {
                return Err(Error::Parameter(format!(
                    "duplicate node name {}",
                    spec.name
                )));
            }
            let node = NodeId(id);
            let register = (0..spec.registers)
                .map(|slot| {
                    owner.push(QubitAddress::register(node, slot));
                    owner.len() - 1
                })
                .collect();
            let mut channel: Vec<Option<usize>> = (0..spec.channels)
                .map(|slot| {
                    owner.push(QubitAddress::channel(node, slot));
                    Some(owner.len() - 1)
                })
                .collect();
            channel.resize(spec.channel_capacity, None);
            nodes.push(Node {
                name: spec.name.clone(),
                register,
                channel,
            });
        }
        if owner.len() > 24 {
            return Err(Error::Parameter(format!(
                "{} qubits is beyond what a dense simulation should hold",
                owner.len()
            )));
        }
        let state = StateVector::zero(owner.len());
        Ok(Network {
            nodes,
            owner,
            state,
            messages: Vec::new(),
            ledger: ResourceLedger::default(),
            outcomes: Outcomes::seeded(0),
            trace: Vec::new(),
            bits: Vec::new(),
            epr_pairs: Vec::new(),
            cats: Vec::new(),
            touched: Vec::new(),
            input_loaded: false,
        })
    }

    pub fn with_outcomes(mut self, outcomes: Outcomes) -> Self {
        self.outcomes = outcomes;
        self
    }

    pub fn set_outcomes(&mut self, outcomes: Outcomes) {
        self.outcomes = outcomes;
    }

    /// Loads the initial joint state of `qubits` (all other qubits stay
    /// `|0⟩`). This describes the input to a computation, so it is allowed
    /// once, before any operation.
    pub fn load_input(&mut self, qubits: &[QubitAddress], input: &StateVector) -> Result<()> {
        if self.input_loaded || self.has_history() {
            return Err(Error::Precondition(
                "input can only be loaded into a fresh network".into(),
            ));
        }
        let indices = qubits
            .iter()
            .map(|&a| self.resolve(a))
            .collect::<Result<Vec<_>>>()?;
        self.state = StateVector::embed(self.owner.len(), &indices, input)?;
        self.input_loaded = true;
        Ok(())
    }

    fn has_history(&self) -> bool {
        !self.trace.is_empty()
            || !self.messages.is_empty()
            || self.ledger != ResourceLedger::default()
    }

    // ----- inspection -------------------------------------------------------

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn ledger(&self) -> ResourceLedger {
        self.ledger
    }

    pub fn messages(&self) -> &[ClassicalMessage] {
        &self.messages
    }

    /// Every measurement made so far, in order.
    pub fn trace(&self) -> &[MeasurementRecord] {
        &self.trace
    }

    /// Product of the probabilities of all outcomes taken so far.
    pub fn branch_probability(&self) -> f64 {
        self.trace.iter().map(|r| r.probability).product()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.owner.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.nodes[node.0].name
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn register_count(&self, node: NodeId) -> usize {
        self.nodes[node.0].register.len()
    }

    pub fn channel_capacity(&self, node: NodeId) -> usize {
        self.nodes[node.0].channel.len()
    }

    /// Occupied channel slots of `node`.
    pub fn channel_qubits(&self, node: NodeId) -> Vec<QubitAddress> {
        self.nodes[node.0]
            .channel
            .iter()
            .enumerate()
            .filter(|(_, q)| q.is_some())
            .map(|(slot, _)| QubitAddress::channel(node, slot))
            .collect()
    }

    pub fn all_channel_qubits(&self) -> Vec<QubitAddress> {
        self.node_ids()
            .flat_map(|n| self.channel_qubits(n))
            .collect()
    }

    /// Global state-vector index of the qubit at `addr`.
    pub fn resolve(&self, addr: QubitAddress) -> Result<usize> {
        let node = self
            .nodes
            .get(addr.node.0)
            .ok_or_else(|| Error::Address(format!("no node {}", addr.node)))?;
        let slot = match addr.pool {
            Pool::Register => node.register.get(addr.slot).copied(),
            Pool::Channel => node.channel.get(addr.slot).copied().flatten(),
        };
        slot.ok_or_else(|| Error::Address(format!("nothing at {addr}")))
    }

    pub fn address_of(&self, index: usize) -> Option<QubitAddress> {
        self.owner.get(index).copied()
    }

    /// Checks that slots and the owner table describe the same bijection.
    pub fn check_ownership(&self) -> Result<()> {
        let mut seen = vec![false; self.owner.len()];
        for (n, node) in self.nodes.iter().enumerate() {
            let slots =
                node.register
                    .iter()
                    .enumerate()
                    .map(|(s, &q)| (QubitAddress::register(NodeId(n), s), q))
                    .chain(
                        node.channel.iter().enumerate().filter_map(|(s, q)| {
                            q.map(|q| (QubitAddress::channel(NodeId(n), s), q))
                        }),
                    );
            for (addr, q) in slots {
                if seen[q] || self.owner[q] != addr {
                    return Err(Error::Address(format!("ownership broken at {addr}")));
                }
                seen[q] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Address("a qubit has no owner".into()))
        }
    }

    /// True iff the qubit at `addr` is definitely `|expected⟩`.
    pub fn is_definite(&self, addr: QubitAddress, expected: u8) -> bool {
        self.resolve(addr)
            .map(|q| self.state.partial_state_check(q, expected))
            .unwrap_or(false)
    }

    /// Channel qubits on `node` that are `|0⟩` and not held in a registered
    /// pair.
    pub fn fresh_channel_qubits(&self, node: NodeId) -> Vec<QubitAddress> {
        self.channel_qubits(node)
            .into_iter()
            .filter(|&a| self.is_definite(a, 0))
            .filter(|&a| !self.is_reserved(a))
            .collect()
    }

    pub fn free_channel_slots(&self, node: NodeId) -> usize {
        self.nodes[node.0]
            .channel
            .iter()
            .filter(|q| q.is_none())
            .count()
    }

    pub fn bit_value(&self, bit: BitId) -> u8 {
        self.bits[bit.0].value
    }

    pub fn bit_known_at(&self, bit: BitId, node: NodeId) -> bool {
        self.bits[bit.0].known_at.contains(&node)
    }

    // ----- quantum operations ----------------------------------------------

    fn tick(&mut self, qubits: &[usize]) {
        self.ledger.rounds += 1;
        if let Some(scope) = self.touched.last_mut() {
            scope.extend(qubits.iter().copied());
        }
    }

    fn same_node(&self, targets: &[QubitAddress]) -> Result<NodeId> {
        let first = targets
            .first()
            .ok_or_else(|| Error::Parameter("operation without targets".into()))?
            .node;
        if let Some(other) = targets.iter().find(|a| a.node != first) {
            return Err(Error::Locality(first, other.node));
        }
        Ok(first)
    }

    /// Applies a gate to qubits that all live on one node. Register and
    /// channel qubits of the same node interact freely.
    pub fn local_apply(&mut self, gate: &GateMatrix, targets: &[QubitAddress]) -> Result<()> {
        self.same_node(targets)?;
        let indices = targets
            .iter()
            .map(|&a| self.resolve(a))
            .collect::<Result<Vec<_>>>()?;
        self.state.apply_gate(gate, &indices)?;
        self.tick(&indices);
        Ok(())
    }

    /// Standard-basis measurement. The result bit is known only at the
    /// qubit's node until it is sent.
    pub fn measure(&mut self, addr: QubitAddress) -> Result<MeasurementRecord> {
        let qubit = self.resolve(addr)?;
        let measured = match &mut self.outcomes {
            Outcomes::Seeded(rng) => self.state.measure(qubit, MeasureMode::Sample(&mut **rng))?,
            Outcomes::Forced(bits) => {
                let forced = match bits.get(self.trace.len()) {
                    Some(&b) => b,
                    None => {
                        let p1 = self.state.probability_one(qubit)?;
                        u8::from(1.0 - p1 <= ZERO_PROBABILITY)
                    }
                };
                self.state.measure(qubit, MeasureMode::Forced(forced))?
            }
        };
        let bit = BitId(self.bits.len());
        self.bits.push(BitInfo {
            value: measured.outcome,
            known_at: BTreeSet::from([addr.node]),
        });
        let record = MeasurementRecord {
            address: addr,
            outcome: measured.outcome,
            probability: measured.probability,
            bit,
        };
        self.trace.push(record);
        self.tick(&[qubit]);
        Ok(record)
    }

    /// Applies `gate` iff `bit` is 1. The bit must already be known at the
    /// targets' node.
    pub fn classically_controlled_apply(
        &mut self,
        bit: BitId,
        gate: &GateMatrix,
        targets: &[QubitAddress],
    ) -> Result<bool> {
        let node = self.same_node(targets)?;
        let info = self
            .bits
            .get(bit.0)
            .ok_or_else(|| Error::Parameter(format!("unknown bit {bit:?}")))?;
        if !info.known_at.contains(&node) {
            return Err(Error::Causality(format!(
                "bit {} is not available at {}",
                bit.0,
                self.node_name(node)
            )));
        }
        let indices = targets
            .iter()
            .map(|&a| self.resolve(a))
            .collect::<Result<Vec<_>>>()?;
        let fire = info.value == 1;
        if fire {
            self.state.apply_gate(gate, &indices)?;
        }
        // The slot is spent whether or not the gate fires.
        self.tick(&indices);
        Ok(fire)
    }

    /// XOR of bits already known at `node`, computed locally.
    pub fn xor_bits(&mut self, node: NodeId, bits: &[BitId]) -> Result<BitId> {
        let mut value = 0;
        for &b in bits {
            if !self.bit_known_at(b, node) {
                return Err(Error::Causality(format!(
                    "bit {} is not available at {}",
                    b.0,
                    self.node_name(node)
                )));
            }
            value ^= self.bits[b.0].value;
        }
        let id = BitId(self.bits.len());
        self.bits.push(BitInfo {
            value,
            known_at: BTreeSet::from([node]),
        });
        Ok(id)
    }

    /// Sends a classical bit. Costs one cbit per remote destination; a node
    /// "sending" to itself costs nothing.
    pub fn send_cbit(
        &mut self,
        from: NodeId,
        bit: BitId,
        to: Recipient,
        tag: &'static str,
    ) -> Result<()> {
        if !self.bit_known_at(bit, from) {
            return Err(Error::Causality(format!(
                "{} cannot send bit {} it does not hold",
                self.node_name(from),
                bit.0
            )));
        }
        let destinations: BTreeSet<NodeId> = to.nodes().into_iter().collect();
        for d in &destinations {
            if d.0 >= self.nodes.len() {
                return Err(Error::Address(format!("no node {d}")));
            }
        }
        let cost = destinations.iter().filter(|&&d| d != from).count() as u64;
        let info = &mut self.bits[bit.0];
        info.known_at.extend(destinations.iter().copied());
        let value = info.value;
        self.messages.push(ClassicalMessage {
            from,
            to,
            bit: value,
            tag,
        });
        self.ledger.cbits_sent += cost;
        Ok(())
    }

    /// Moves a channel qubit to a free channel slot on `to_node`. The quantum
    /// state is untouched; only ownership changes.
    pub fn transport_qubit(&mut self, from: QubitAddress, to_node: NodeId) -> Result<QubitAddress> {
        if from.pool != Pool::Channel {
            return Err(Error::Pool(format!("{from} is a register qubit")));
        }
        let qubit = self.resolve(from)?;
        let dest = self
            .nodes
            .get(to_node.0)
            .ok_or_else(|| Error::Address(format!("no node {to_node}")))?;
        let slot = dest
            .channel
            .iter()
            .position(Option::is_none)
            .ok_or_else(|| Error::Capacity(format!("{} has no free channel slot", dest.name)))?;
        self.nodes[from.node.0].channel[from.slot] = None;
        self.nodes[to_node.0].channel[slot] = Some(qubit);
        let new = QubitAddress::channel(to_node, slot);
        self.owner[qubit] = new;
        self.ledger.qubits_transported += 1;
        Ok(new)
    }

    /// Sends `x` to `y`'s node and `y` to `x`'s node at the same time; each
    /// lands in the slot the other vacated. Costs two transported qubits.
    pub fn exchange_qubits(&mut self, x: QubitAddress, y: QubitAddress) -> Result<()> {
        for a in [x, y] {
            if a.pool != Pool::Channel {
                return Err(Error::Pool(format!("{a} is a register qubit")));
            }
        }
        if x.node == y.node {
            return Err(Error::Parameter(
                "exchange needs two different nodes".into(),
            ));
        }
        let (qx, qy) = (self.resolve(x)?, self.resolve(y)?);
        self.nodes[x.node.0].channel[x.slot] = Some(qy);
        self.nodes[y.node.0].channel[y.slot] = Some(qx);
        self.owner[qx] = y;
        self.owner[qy] = x;
        self.ledger.qubits_transported += 2;
        Ok(())
    }

    // ----- shared entanglement ---------------------------------------------

    /// Records an established pair so protocols can draw on it.
    pub fn register_epr(&mut self, pair: EprPair) -> Result<()> {
        if pair.a.node == pair.b.node {
            return Err(Error::InvalidEntanglement(
                "an EPR pair must span two nodes".into(),
            ));
        }
        let q = [self.resolve(pair.a)?, self.resolve(pair.b)?];
        if !self.state.is_cat_state(&q)? {
            return Err(Error::InvalidEntanglement(format!(
                "{} and {} do not hold (|00⟩+|11⟩)/√2",
                pair.a, pair.b
            )));
        }
        self.epr_pairs.push(pair);
        Ok(())
    }

    /// Removes and returns a registered pair between `a` and `b`, oriented so
    /// that `pair.a` is on node `a`.
    pub fn take_epr(&mut self, a: NodeId, b: NodeId) -> Option<EprPair> {
        let pos = self
            .epr_pairs
            .iter()
            .position(|p| (p.a.node == a && p.b.node == b) || (p.a.node == b && p.b.node == a))?;
        let pair = self.epr_pairs.remove(pos);
        Some(if pair.a.node == a {
            pair
        } else {
            pair.flipped()
        })
    }

    pub fn available_epr(&self, a: NodeId, b: NodeId) -> usize {
        self.epr_pairs
            .iter()
            .filter(|p| (p.a.node == a && p.b.node == b) || (p.a.node == b && p.b.node == a))
            .count()
    }

    /// Records an established multi-party cat state `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn register_cat(&mut self, members: Vec<QubitAddress>) -> Result<()> {
        let q = members
            .iter()
            .map(|&a| self.resolve(a))
            .collect::<Result<Vec<_>>>()?;
        if members.len() < 2 || !self.state.is_cat_state(&q)? {
            return Err(Error::InvalidEntanglement(
                "registered members do not hold a cat state".into(),
            ));
        }
        self.cats.push(members);
        Ok(())
    }

    /// Removes and returns a registered cat whose members sit on exactly
    /// `nodes` (in this order).
    pub fn take_cat(&mut self, nodes: &[NodeId]) -> Option<Vec<QubitAddress>> {
        let pos = self
            .cats
            .iter()
            .position(|c| c.iter().map(|a| a.node).eq(nodes.iter().copied()))?;
        Some(self.cats.remove(pos))
    }

    /// True iff `addr` belongs to a registered pair or cat.
    pub fn is_reserved(&self, addr: QubitAddress) -> bool {
        self.epr_pairs.iter().any(|p| p.a == addr || p.b == addr)
            || self.cats.iter().any(|c| c.contains(&addr))
    }

    /// Drops registry entries that involve any of `qubits`; they are about to
    /// be consumed.
    pub(crate) fn release_reservations(&mut self, qubits: &[QubitAddress]) {
        self.epr_pairs
            .retain(|p| !qubits.contains(&p.a) && !qubits.contains(&p.b));
        self.cats.retain(|c| !c.iter().any(|a| qubits.contains(a)));
    }

    pub(crate) fn consume_ebits(&mut self, count: u64) {
        self.ledger.ebits_consumed += count;
    }

    // ----- parallel rounds --------------------------------------------------

    /// Runs independent branches as one parallel step: the rounds counter
    /// advances by the longest branch instead of the sum, and branches must
    /// touch pairwise-disjoint qubits.
    pub fn parallel<T>(&mut self, f: impl FnOnce(&mut Parallel<'_>) -> Result<T>) -> Result<T> {
        let start = self.ledger.rounds;
        let mut scope = Parallel {
            net: self,
            start,
            longest: 0,
            claimed: HashSet::new(),
        };
        let out = f(&mut scope)?;
        let Parallel {
            net,
            start,
            longest,
            claimed,
        } = scope;
        net.ledger.rounds = start + longest;
        if let Some(parent) = net.touched.last_mut() {
            parent.extend(claimed);
        }
        Ok(out)
    }
}

/// Scope handed to the closure of [`Network::parallel`].
pub struct Parallel<'a> {
    net: &'a mut Network,
    start: u64,
    longest: u64,
    claimed: HashSet<usize>,
}

impl Parallel<'_> {
    pub fn branch<T>(&mut self, f: impl FnOnce(&mut Network) -> Result<T>) -> Result<T> {
        self.net.ledger.rounds = self.start;
        self.net.touched.push(HashSet::new());
        let out = f(self.net);
        let touched = self.net.touched.pop().unwrap_or_default();
        let out = out?;
        self.longest = self.longest.max(self.net.ledger.rounds - self.start);
        self.net.ledger.rounds = self.start + self.longest;
        let mut sorted: Vec<usize> = touched.into_iter().collect();
        sorted.sort_unstable();
        for q in sorted {
            if !self.claimed.insert(q) {
                return Err(Error::NotDisjoint(q));
            }
        }
        Ok(out)
    }

    pub fn network(&self) -> &Network {
        self.net
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cnot, hadamard, pauli_x};

    fn two_nodes() -> (Network, NodeId, NodeId) {
        let net = Network::new(&[NodeSpec::new("A", 2, 2), NodeSpec::new("B", 2, 2)]).unwrap();
        (net, NodeId(0), NodeId(1))
    }

    #[test]
    fn local_gates_apply() {
        let (mut net, a, _) = two_nodes();
        net.local_apply(&hadamard(), &[QubitAddress::register(a, 0)])
            .unwrap();
        net.local_apply(
            &cnot(),
            &[QubitAddress::register(a, 0), QubitAddress::channel(a, 0)],
        )
        .unwrap();
        let q = [
            net.resolve(QubitAddress::register(a, 0)).unwrap(),
            net.resolve(QubitAddress::channel(a, 0)).unwrap(),
        ];
        assert!(net.state().is_cat_state(&q).unwrap());
        assert_eq!(net.ledger().rounds, 2);
    }

    #[test]
    fn cross_node_gate_is_a_locality_violation() {
        let (mut net, a, b) = two_nodes();
        let err = net
            .local_apply(
                &cnot(),
                &[QubitAddress::register(a, 0), QubitAddress::register(b, 0)],
            )
            .unwrap_err();
        assert_eq!(err, Error::Locality(a, b));
    }

    #[test]
    fn transport_relabels_without_touching_state() {
        let (a, b) = (NodeId(0), NodeId(1));
        let mut net = Network::new(&[
            NodeSpec::new("A", 1, 2),
            NodeSpec::new("B", 1, 1).with_channel_capacity(2),
        ])
        .unwrap();
        net.local_apply(&hadamard(), &[QubitAddress::channel(a, 1)])
            .unwrap();
        let before = net.state().clone();
        let idx = net.resolve(QubitAddress::channel(a, 1)).unwrap();
        let moved = net.transport_qubit(QubitAddress::channel(a, 1), b).unwrap();
        assert_eq!(moved, QubitAddress::channel(b, 1));
        assert_eq!(net.resolve(moved).unwrap(), idx);
        assert_eq!(net.state(), &before);
        assert!(net.resolve(QubitAddress::channel(a, 1)).is_err());
        net.check_ownership().unwrap();

        let back = net.transport_qubit(moved, a).unwrap();
        assert_eq!(back.node, a);
        assert_eq!(net.ledger().qubits_transported, 2);
        net.check_ownership().unwrap();
    }

    #[test]
    fn transport_errors() {
        let (mut net, a, b) = two_nodes();
        assert!(matches!(
            net.transport_qubit(QubitAddress::register(a, 0), b),
            Err(Error::Pool(_))
        ));
        assert!(matches!(
            net.transport_qubit(QubitAddress::channel(a, 0), b),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn cbit_costs() {
        let net = Network::new(&[
            NodeSpec::new("A", 1, 0),
            NodeSpec::new("B", 1, 0),
            NodeSpec::new("C", 1, 0),
        ])
        .unwrap();
        let mut net = net.with_outcomes(Outcomes::forced(vec![0]));
        let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
        let r = net.measure(QubitAddress::register(a, 0)).unwrap();
        net.send_cbit(a, r.bit, Recipient::Node(b), "t").unwrap();
        assert_eq!(net.ledger().cbits_sent, 1);
        net.send_cbit(a, r.bit, Recipient::Broadcast(vec![b, c]), "t")
            .unwrap();
        assert_eq!(net.ledger().cbits_sent, 3);
        net.send_cbit(a, r.bit, Recipient::Node(a), "t").unwrap();
        assert_eq!(net.ledger().cbits_sent, 3);
        assert_eq!(net.messages().len(), 3);
    }

    #[test]
    fn classical_control_needs_the_bit_locally() {
        let (mut net, a, b) = two_nodes();
        net.local_apply(&pauli_x(), &[QubitAddress::register(a, 0)])
            .unwrap();
        net.local_apply(&pauli_x(), &[QubitAddress::channel(b, 0)])
            .unwrap();
        let r = net.measure(QubitAddress::register(a, 0)).unwrap();
        assert_eq!(r.outcome, 1);
        let target = QubitAddress::channel(b, 0);
        assert!(matches!(
            net.classically_controlled_apply(r.bit, &pauli_x(), &[target]),
            Err(Error::Causality(_))
        ));
        net.send_cbit(a, r.bit, Recipient::Node(b), "r").unwrap();
        assert!(net
            .classically_controlled_apply(r.bit, &pauli_x(), &[target])
            .unwrap());
        assert!(net.is_definite(target, 0));
    }

    #[test]
    fn zero_bit_leaves_state_alone() {
        let (mut net, a, _) = two_nodes();
        net.set_outcomes(Outcomes::forced(vec![0]));
        let r = net.measure(QubitAddress::register(a, 1)).unwrap();
        let before = net.state().clone();
        assert!(!net
            .classically_controlled_apply(r.bit, &pauli_x(), &[QubitAddress::register(a, 0)])
            .unwrap());
        assert_eq!(net.state(), &before);
    }

    #[test]
    fn parallel_counts_the_longest_branch() {
        let (mut net, a, b) = two_nodes();
        net.parallel(|p| {
            p.branch(|n| n.local_apply(&hadamard(), &[QubitAddress::register(a, 0)]))?;
            p.branch(|n| {
                n.local_apply(&hadamard(), &[QubitAddress::register(b, 0)])?;
                n.local_apply(&hadamard(), &[QubitAddress::register(b, 0)])
            })?;
            Ok(())
        })
        .unwrap();
        assert_eq!(net.ledger().rounds, 2);

        let err = net
            .parallel(|p| {
                p.branch(|n| n.local_apply(&hadamard(), &[QubitAddress::register(a, 0)]))?;
                p.branch(|n| n.local_apply(&hadamard(), &[QubitAddress::register(a, 0)]))
            })
            .unwrap_err();
        assert!(matches!(err, Error::NotDisjoint(_)));
    }

    #[test]
    fn no_cross_node_gate_ever_succeeds() {
        // Without transports, every two-qubit gate across nodes is refused.
        let (mut net, a, b) = two_nodes();
        let left: Vec<_> = (0..2)
            .flat_map(|s| [QubitAddress::register(a, s), QubitAddress::channel(a, s)])
            .collect();
        let right: Vec<_> = (0..2)
            .flat_map(|s| [QubitAddress::register(b, s), QubitAddress::channel(b, s)])
            .collect();
        for &x in &left {
            for &y in &right {
                assert!(net.local_apply(&cnot(), &[x, y]).is_err());
                assert!(net.local_apply(&cnot(), &[y, x]).is_err());
            }
        }
        assert_eq!(net.ledger(), ResourceLedger::default());
    }

    #[test]
    fn epr_registry_validates() {
        let (mut net, a, b) = two_nodes();
        let pair = EprPair {
            a: QubitAddress::channel(a, 0),
            b: QubitAddress::channel(b, 0),
        };
        assert!(matches!(
            net.register_epr(pair),
            Err(Error::InvalidEntanglement(_))
        ));
    }

    #[test]
    fn input_loads_once() {
        let (mut net, a, b) = two_nodes();
        let psi = StateVector::basis(2, 0b10);
        net.load_input(
            &[QubitAddress::register(a, 1), QubitAddress::register(b, 0)],
            &psi,
        )
        .unwrap();
        assert!(net.is_definite(QubitAddress::register(a, 1), 1));
        assert!(net.is_definite(QubitAddress::register(b, 0), 0));
        assert!(net
            .load_input(&[QubitAddress::register(a, 0)], &StateVector::zero(1))
            .is_err());
    }
}
