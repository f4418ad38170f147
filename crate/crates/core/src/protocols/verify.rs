//! Verification harnesses: run a protocol over random inputs and every
//! measurement branch (or a seeded sample), compare against the monolithic
//! gate, and check the resource counts.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    decompose_multi_control_x, distributed_em, distributed_swap, establish_cat, establish_epr,
    establish_epr_exchange, nonlocal_cnot, nonlocal_controlled_sequence, nonlocal_multi_control,
    parallel_distributed_control, reset_channel_qubits, sequential_distributed_control,
    teleport_with_reset, ControlledPart, Count, EntanglementPolicy, LoggedMessage, ProtocolReport,
    Section,
};
use crate::branches::{enumerate, sample, Branch, Run};
use crate::error::{Error, Result};
use crate::gates::{
    cat_state, cnot, controlled, em_schedule, local_entangle_em, pauli_x, swap, toffoli, EmShape,
};
use crate::network::{Network, NodeId, NodeSpec, Outcomes, QubitAddress, ResourceLedger};
use crate::qstate::{GateMatrix, StateVector, TOLERANCE};

/// How many branches each input is run over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    Exhaustive,
    Sampled(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub branches: BranchMode,
    pub seed: u64,
    /// QFT size and machine count.
    pub n: usize,
    pub m: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            branches: BranchMode::Exhaustive,
            seed: 2024,
            n: 4,
            m: 2,
        }
    }
}

/// Names accepted by [`verify`].
pub const PROTOCOLS: &[&str] = &[
    "nonlocal-cnot",
    "teleport",
    "cat-roundtrip",
    "ghz",
    "refresh",
    "swap",
    "mcx",
    "sequence",
    "parallel-control",
    "qft",
    "multi-control",
    "establish",
];

/// Runs the named harness. `None` if the name is unknown.
pub fn verify(name: &str, opts: &VerifyOptions) -> Option<Result<ProtocolReport>> {
    let run: fn(&VerifyOptions) -> Result<ProtocolReport> = match name {
        "nonlocal-cnot" => verify_nonlocal_cnot,
        "teleport" => verify_teleport,
        "cat-roundtrip" => verify_cat_roundtrip,
        "ghz" => verify_ghz,
        "refresh" => verify_refresh,
        "swap" => verify_swap,
        "mcx" => verify_mcx,
        "sequence" => verify_sequence,
        "parallel-control" => verify_parallel_control,
        "qft" => |o: &VerifyOptions| crate::qft::verify_qft(o.n, o.m, o),
        "multi-control" => verify_multi_control,
        "establish" => verify_establish,
        _ => return None,
    };
    Some(run(opts))
}

// ----- shared plumbing -------------------------------------------------------

/// What one branch produced.
#[derive(Clone, Debug, Default)]
pub struct Check {
    pub infidelity: f64,
    pub ledger: ResourceLedger,
    pub sections: Vec<Section>,
    pub messages: Vec<LoggedMessage>,
    pub problems: Vec<String>,
}

impl Check {
    pub fn compare(&mut self, what: &str, got: Result<StateVector>, want: &StateVector) {
        match got.and_then(|g| g.fidelity_up_to_global_phase(want)) {
            Ok(f) => self.infidelity = self.infidelity.max(1.0 - f),
            Err(e) => {
                self.infidelity = 1.0;
                self.problems.push(format!("{what}: {e}"));
            }
        }
    }

    pub fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }
}

const MAX_FAILURE_LINES: usize = 25;

/// Folds branch checks into a report.
pub struct Tally {
    report: ProtocolReport,
    have_primary: bool,
    suppressed: usize,
    distinct: BTreeSet<Vec<u8>>,
}

impl Tally {
    pub fn new(name: &str) -> Self {
        Tally {
            report: ProtocolReport::new(name),
            have_primary: false,
            suppressed: 0,
            distinct: BTreeSet::new(),
        }
    }

    fn fail(&mut self, line: String) {
        if self.report.failures.len() < MAX_FAILURE_LINES {
            self.report.failures.push(line);
        } else {
            self.suppressed += 1;
        }
    }

    /// Adds branches. `expected` pins `(ebits, cbits)`. The first `primary`
    /// group defines the reported ledger, and every later primary branch
    /// must reproduce it exactly.
    pub fn add(
        &mut self,
        label: &str,
        branches: &[Branch<Check>],
        expected: Option<(u64, u64)>,
        primary: bool,
    ) {
        for b in branches {
            let c = &b.value;
            let bits: String = b.outcomes.iter().map(|o| char::from(b'0' + o)).collect();
            self.report.branches_tested += 1;
            if primary {
                self.distinct.insert(b.outcomes.clone());
            }
            self.report.max_infidelity = self.report.max_infidelity.max(c.infidelity);
            if c.infidelity > TOLERANCE {
                self.fail(format!(
                    "{label} branch [{bits}]: infidelity {:.3e}",
                    c.infidelity
                ));
            }
            for p in &c.problems {
                self.fail(format!("{label} branch [{bits}]: {p}"));
            }
            if let Some(want) = expected {
                if c.ledger.communication() != want {
                    self.fail(format!(
                        "{label} branch [{bits}]: ledger (ebits {}, cbits {}) expected ({}, {})",
                        c.ledger.ebits_consumed, c.ledger.cbits_sent, want.0, want.1
                    ));
                }
            }
            if primary {
                if !self.have_primary {
                    self.have_primary = true;
                    self.report.ledger = c.ledger;
                    self.report.rounds = c.ledger.rounds;
                    self.report.sections = c.sections.clone();
                    self.report.message_log = c.messages.clone();
                } else if c.ledger != self.report.ledger {
                    let r = self.report.ledger;
                    self.fail(format!(
                        "{label} branch [{bits}]: ledger {:?} differs from {:?}",
                        c.ledger, r
                    ));
                }
            }
        }
    }

    pub fn section(&mut self, name: &str, ledger: ResourceLedger) {
        self.report.sections.push(Section {
            name: name.into(),
            ledger,
        });
    }

    pub fn count(&mut self, name: &str, value: u64) {
        self.report.counts.push(Count {
            name: name.into(),
            value,
        });
    }

    pub fn note(&mut self, text: String) {
        self.report.notes.push(text);
    }

    pub fn problem(&mut self, ok: bool, line: impl FnOnce() -> String) {
        if !ok {
            let l = line();
            self.fail(l);
        }
    }

    pub fn finish(mut self) -> ProtocolReport {
        // Outcome strings seen across the primary groups: the per-input
        // branch count when every input was enumerated.
        self.report.counts.insert(
            0,
            Count {
                name: "distinct_branches".into(),
                value: self.distinct.len() as u64,
            },
        );
        if self.suppressed > 0 {
            self.report
                .failures
                .push(format!("... {} more failures", self.suppressed));
        }
        self.report.verified =
            self.report.failures.is_empty() && self.report.max_infidelity <= TOLERANCE;
        self.report
    }
}

pub(crate) fn run_branches(
    opts: &VerifyOptions,
    salt: u64,
    run: impl FnMut(Outcomes) -> Result<Run<Check>>,
) -> Result<Vec<Branch<Check>>> {
    match opts.branches {
        BranchMode::Exhaustive => enumerate(run),
        BranchMode::Sampled(n) => {
            sample(n, opts.seed.wrapping_mul(1_000_003).wrapping_add(salt), run)
        }
    }
}

pub(crate) fn input_rng(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The joint state of `wanted`, in that order. Every other qubit must be in
/// a definite basis state.
pub fn extract(net: &Network, wanted: &[QubitAddress]) -> Result<StateVector> {
    let idx = wanted
        .iter()
        .map(|&a| net.resolve(a))
        .collect::<Result<Vec<_>>>()?;
    let others: Vec<usize> = (0..net.num_qubits()).filter(|q| !idx.contains(q)).collect();
    let sub = net.state().drop_definite_qubits(&others)?;
    let mut sorted = idx.clone();
    sorted.sort_unstable();
    let k = idx.len();
    let amplitudes = (0..1usize << k)
        .map(|local| {
            let mut s = 0;
            for (j, q) in idx.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    let pos = sorted.binary_search(q).expect("sorted copy");
                    s |= 1 << (k - 1 - pos);
                }
            }
            sub.amplitude(s)
        })
        .collect();
    StateVector::from_amplitudes(amplitudes)
}

pub(crate) fn messages_since(net: &Network, start: usize) -> Vec<LoggedMessage> {
    net.messages()[start..]
        .iter()
        .map(|m| LoggedMessage {
            from: net.node_name(m.from).to_string(),
            to: m
                .to
                .nodes()
                .iter()
                .map(|&n| net.node_name(n).to_string())
                .collect(),
            bit: m.bit,
            tag: m.tag.to_string(),
        })
        .collect()
}

fn applied(input: &StateVector, gate: &GateMatrix, positions: &[usize]) -> Result<StateVector> {
    let mut out = input.clone();
    out.apply_gate(gate, positions)?;
    Ok(out)
}

fn channels_clean(net: &Network, check: &mut Check) {
    for q in net.all_channel_qubits() {
        check.expect(net.is_definite(q, 0), || {
            format!("channel qubit {q} not reset to |0⟩")
        });
    }
}

fn reg(node: usize, slot: usize) -> QubitAddress {
    QubitAddress::register(NodeId(node), slot)
}

/// Starts measuring a protocol's own resources and messages.
struct Window {
    ledger: ResourceLedger,
    messages: usize,
}

impl Window {
    fn open(net: &Network) -> Self {
        Window {
            ledger: net.ledger(),
            messages: net.messages().len(),
        }
    }

    fn close(&self, net: &Network, check: &mut Check) {
        check.ledger = net.ledger() - self.ledger;
        check.messages = messages_since(net, self.messages);
    }
}

// ----- harnesses ---------------------------------------------------------------

pub fn verify_nonlocal_cnot(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("nonlocal-cnot");
    let mut rng = input_rng(opts, 1);
    let specs = [NodeSpec::new("A", 2, 2), NodeSpec::new("B", 1, 2)];
    let (c, t, bystander) = (reg(0, 0), reg(1, 0), reg(0, 1));
    for i in 0..10 {
        // Half the inputs entangle the pair with a third qubit.
        let input = if i % 2 == 0 {
            StateVector::random(2, &mut rng).tensor(&StateVector::zero(1))
        } else {
            StateVector::random(3, &mut rng)
        };
        let want = applied(&input, &cnot(), &[0, 1])?;
        let branches = run_branches(opts, i, |o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            net.load_input(&[c, t, bystander], &input)?;
            establish_epr(&mut net, NodeId(0), NodeId(1))?;
            let w = Window::open(&net);
            let run = nonlocal_cnot(&mut net, c, t, EntanglementPolicy::PreEstablished)?;
            let mut check = Check::default();
            w.close(&net, &mut check);
            check.sections = run.sections;
            check.compare("output", extract(&net, &[c, t, bystander]), &want);
            reset_channel_qubits(&mut net, &run.records)?;
            channels_clean(&net, &mut check);
            Ok((check, net.trace().to_vec()))
        })?;
        tally.add(&format!("input {i}"), &branches, Some((1, 2)), true);
    }
    Ok(tally.finish())
}

pub fn verify_teleport(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("teleport");
    let mut rng = input_rng(opts, 2);
    let specs = [NodeSpec::new("A", 1, 2), NodeSpec::new("B", 1, 2)];
    let (a, b) = (NodeId(0), NodeId(1));
    for i in 0..10 {
        let psi = StateVector::random(1, &mut rng);
        let branches = run_branches(opts, i, |o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            net.load_input(&[reg(0, 0)], &psi)?;
            let pair = establish_epr(&mut net, a, b)?;
            let w = Window::open(&net);
            teleport_with_reset(&mut net, reg(0, 0), pair, reg(1, 0))?;
            let mut check = Check::default();
            w.close(&net, &mut check);
            check.compare("delivered", extract(&net, &[reg(1, 0)]), &psi);
            check.expect(net.is_definite(reg(0, 0), 0), || "source not reset".into());
            channels_clean(&net, &mut check);

            // Send it back into the slot the first teleport freed.
            let back = establish_epr(&mut net, b, a)?;
            let before = net.ledger();
            teleport_with_reset(&mut net, reg(1, 0), back, reg(0, 0))?;
            let returned = net.ledger() - before;
            check.compare("returned", extract(&net, &[reg(0, 0)]), &psi);
            check.expect(returned.communication() == (1, 2), || {
                format!("return leg cost {:?}", returned.communication())
            });
            channels_clean(&net, &mut check);
            Ok((check, net.trace().to_vec()))
        })?;
        tally.add(&format!("state {i}"), &branches, Some((1, 2)), true);
    }
    Ok(tally.finish())
}

pub fn verify_cat_roundtrip(opts: &VerifyOptions) -> Result<ProtocolReport> {
    use crate::primitives::{cat_disentangler, cat_entangler};
    let mut tally = Tally::new("cat-roundtrip");
    let mut rng = input_rng(opts, 3);
    for i in 0..5 {
        let psi = StateVector::random(1, &mut rng);
        for m in 2..=4usize {
            let mut specs = vec![NodeSpec::new("A", 1, 1)];
            specs.extend((1..m).map(|k| NodeSpec::new(format!("N{k}"), 0, 1)));
            for keep in 0..m {
                let branches = run_branches(opts, (i * 16 + m * 4 + keep) as u64, |o| {
                    let mut net = Network::new(&specs)?.with_outcomes(o);
                    let cat: Vec<_> = (0..m)
                        .map(|k| QubitAddress::channel(NodeId(k), 0))
                        .collect();
                    let mut places = vec![reg(0, 0)];
                    places.extend_from_slice(&cat);
                    net.load_input(&places, &psi.tensor(&cat_state(m)))?;
                    let w = Window::open(&net);
                    let group = cat_entangler(&mut net, reg(0, 0), &cat)?;
                    let mut alpha_beta = vec![num_complex::Complex64::new(0.0, 0.0); 1 << m];
                    alpha_beta[0] = psi.amplitude(0);
                    alpha_beta[(1 << m) - 1] = psi.amplitude(1);
                    let mut check = Check::default();
                    check.compare(
                        "cat-like state",
                        extract(&net, &group.members),
                        &StateVector::from_amplitudes(alpha_beta)?,
                    );
                    let target = group.members[keep];
                    cat_disentangler(&mut net, &group, target)?;
                    w.close(&net, &mut check);
                    check.compare("restored", extract(&net, &[target]), &psi);
                    Ok((check, net.trace().to_vec()))
                })?;
                let want = ((m - 1) as u64, 2 * (m - 1) as u64);
                tally.add(
                    &format!("state {i} m={m} keep={keep}"),
                    &branches,
                    Some(want),
                    m == 2 && keep == 0,
                );
            }
        }
    }
    Ok(tally.finish())
}

pub fn verify_ghz(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("ghz");
    let ceil_log2 = |m: usize| (usize::BITS - (m - 1).leading_zeros()) as u64;
    for m in 2..=5usize {
        for shape in [EmShape::Linear, EmShape::BinaryTree] {
            let root_channels = 2.max(ceil_log2(m) as usize);
            let specs: Vec<NodeSpec> = (0..m)
                .map(|k| NodeSpec::new(format!("N{k}"), 1, if k == 0 { root_channels } else { 2 }))
                .collect();
            let targets: Vec<_> = (0..m).map(|k| reg(k, 0)).collect();
            let want_layers = match shape {
                EmShape::Linear => (m - 1) as u64,
                EmShape::BinaryTree => ceil_log2(m),
            };
            let mut oracle = StateVector::zero(m);
            local_entangle_em(&mut oracle, &(0..m).collect::<Vec<_>>(), shape)?;
            let branches = run_branches(opts, m as u64, |o| {
                let mut net = Network::new(&specs)?.with_outcomes(o);
                let w = Window::open(&net);
                let run = distributed_em(&mut net, &targets, shape, EntanglementPolicy::OnDemand)?;
                let mut check = Check::default();
                w.close(&net, &mut check);
                check.sections = run.sections.clone();
                check.compare("cat state", extract(&net, &targets), &oracle);
                let layers = run.section("nonlocal-cnot-layers").map_or(0, |l| l.rounds);
                check.expect(layers == want_layers, || {
                    format!("{layers} non-local CNOT layers, expected {want_layers}")
                });
                reset_channel_qubits(&mut net, &run.records)?;
                channels_clean(&net, &mut check);
                Ok((check, net.trace().to_vec()))
            })?;
            tally.add(
                &format!("m={m} {}", shape.name()),
                &branches,
                Some(((m - 1) as u64, 2 * (m - 1) as u64)),
                m == 4 && shape == EmShape::BinaryTree,
            );
        }
    }
    for (shape, want) in [(EmShape::BinaryTree, 3u64), (EmShape::Linear, 7)] {
        let layers = em_schedule(8, shape).len() as u64;
        tally.problem(layers == want, || {
            format!(
                "m=8 {} schedule has {layers} layers, expected {want}",
                shape.name()
            )
        });
        tally.section(
            &format!("m8-{}-layers", shape.name()),
            ResourceLedger {
                rounds: layers,
                ..Default::default()
            },
        );
    }
    Ok(tally.finish())
}

pub fn verify_refresh(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("refresh");
    let mut rng = input_rng(opts, 5);
    let specs = [NodeSpec::new("A", 1, 2), NodeSpec::new("B", 1, 2)];
    let (a, b) = (NodeId(0), NodeId(1));
    for i in 0..5 {
        let input = StateVector::random(2, &mut rng);
        let after_first = applied(&input, &cnot(), &[0, 1])?;
        let want = applied(&after_first, &cnot(), &[1, 0])?;
        let branches = run_branches(opts, i, |o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            net.load_input(&[reg(0, 0), reg(1, 0)], &input)?;
            let w = Window::open(&net);
            let mut check = Check::default();

            establish_epr(&mut net, a, b)?;
            let run = nonlocal_cnot(
                &mut net,
                reg(0, 0),
                reg(1, 0),
                EntanglementPolicy::PreEstablished,
            )?;
            check.compare(
                "first gate",
                extract(&net, &[reg(0, 0), reg(1, 0)]),
                &after_first,
            );
            reset_channel_qubits(&mut net, &run.records)?;
            channels_clean(&net, &mut check);

            establish_epr(&mut net, b, a)?;
            let run = nonlocal_cnot(
                &mut net,
                reg(1, 0),
                reg(0, 0),
                EntanglementPolicy::PreEstablished,
            )?;
            check.compare("second gate", extract(&net, &[reg(0, 0), reg(1, 0)]), &want);
            reset_channel_qubits(&mut net, &run.records)?;
            channels_clean(&net, &mut check);
            w.close(&net, &mut check);

            let pairs = establish_epr_exchange(&mut net, a, b);
            check.expect(pairs.is_ok(), || {
                "channels not reusable after refresh".into()
            });
            Ok((check, net.trace().to_vec()))
        })?;
        tally.add(&format!("input {i}"), &branches, Some((2, 4)), true);
    }
    Ok(tally.finish())
}

pub fn verify_swap(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("swap");
    let mut rng = input_rng(opts, 6);
    // One register qubit per node: there is no register space to borrow.
    let roomy = [NodeSpec::new("A", 1, 2), NodeSpec::new("B", 1, 2)];
    let tight = [
        NodeSpec::new("A", 1, 1).with_channel_capacity(2),
        NodeSpec::new("B", 2, 1).with_channel_capacity(2),
    ];
    let (a, b) = (reg(0, 0), reg(1, 0));
    for i in 0..5 {
        let input = StateVector::random(2, &mut rng);
        let want = applied(&input, &swap(), &[0, 1])?;
        for (variant, specs) in [("two channels", &roomy[..]), ("one channel", &tight[..])] {
            let branches = run_branches(opts, i, |o| {
                let mut net = Network::new(specs)?.with_outcomes(o);
                net.load_input(&[a, b], &input)?;
                let w = Window::open(&net);
                distributed_swap(&mut net, a, b, EntanglementPolicy::OnDemand)?;
                let mut check = Check::default();
                w.close(&net, &mut check);
                check.compare("swapped", extract(&net, &[a, b]), &want);
                channels_clean(&net, &mut check);
                if net.register_count(NodeId(1)) > 1 {
                    check.expect(net.is_definite(reg(1, 1), 0), || {
                        "buffer not emptied".into()
                    });
                }
                Ok((check, net.trace().to_vec()))
            })?;
            tally.add(
                &format!("pair {i} ({variant})"),
                &branches,
                Some((2, 4)),
                variant == "two channels",
            );
        }
    }
    Ok(tally.finish())
}

pub fn verify_mcx(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("mcx");
    let mut rng = input_rng(opts, 7);
    let x4 = controlled(4, &pauli_x());
    let single = [NodeSpec::new("M", 6, 0)];
    let split = [NodeSpec::new("top", 3, 2), NodeSpec::new("bottom", 3, 2)];
    // Lines 1..6 = c1, c2, c3, c4, ancilla, target.
    let mono_lines: Vec<_> = (0..6).map(|s| reg(0, s)).collect();
    let dist_lines = vec![
        reg(0, 0),
        reg(0, 1),
        reg(1, 0),
        reg(1, 1),
        reg(0, 2),
        reg(1, 2),
    ];

    let mut inputs: Vec<(String, StateVector)> = (0..64)
        .map(|k| (format!("basis {k:06b}"), StateVector::basis(6, k)))
        .collect();
    inputs.extend((0..5).map(|k| (format!("random {k}"), StateVector::random(6, &mut rng))));

    for (label, input) in &inputs {
        let want = applied(input, &x4, &[0, 1, 2, 3, 5])?;
        for (variant, specs, lines) in [
            ("monolithic", &single[..], &mono_lines),
            ("distributed", &split[..], &dist_lines),
        ] {
            let branches = run_branches(opts, 7, |o| {
                let mut net = Network::new(specs)?.with_outcomes(o);
                net.load_input(lines, input)?;
                if specs.len() == 2 {
                    establish_epr(&mut net, NodeId(0), NodeId(1))?;
                }
                let w = Window::open(&net);
                decompose_multi_control_x(
                    &mut net,
                    &lines[..4],
                    lines[4],
                    lines[5],
                    EntanglementPolicy::PreEstablished,
                )?;
                let mut check = Check::default();
                w.close(&net, &mut check);
                check.compare("output", extract(&net, lines), &want);
                Ok((check, net.trace().to_vec()))
            })?;
            let expected = if specs.len() == 2 { (1, 2) } else { (0, 0) };
            tally.add(
                &format!("{label} {variant}"),
                &branches,
                Some(expected),
                variant == "distributed",
            );
        }
    }
    Ok(tally.finish())
}

fn embed_one(g: &GateMatrix, position: usize) -> GateMatrix {
    let id = GateMatrix::identity(1);
    if position == 0 {
        g.kron(&id)
    } else {
        id.kron(g)
    }
}

pub fn verify_sequence(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("sequence");
    let mut rng = input_rng(opts, 8);
    let specs = [NodeSpec::new("A", 1, 2), NodeSpec::new("B", 2, 2)];
    let (c, t1, t2) = (reg(0, 0), reg(1, 0), reg(1, 1));
    for k in [1usize, 2, 5, 10] {
        let parts: Vec<ControlledPart> = (0..k)
            .map(|j| match j % 3 {
                0 => ControlledPart::new(GateMatrix::random(1, &mut rng), vec![t1]),
                1 => ControlledPart::new(GateMatrix::random(1, &mut rng), vec![t2]),
                _ => ControlledPart::new(cnot(), vec![t1, t2]),
            })
            .collect();
        let mut u = GateMatrix::identity(2);
        for p in &parts {
            let g = match p.targets.as_slice() {
                [q] if *q == t1 => embed_one(&p.gate, 0),
                [_] => embed_one(&p.gate, 1),
                _ => p.gate.clone(),
            };
            u = g.compose(&u)?;
        }
        let oracle = controlled(1, &u);
        for i in 0..3 {
            let input = StateVector::random(3, &mut rng);
            let want = applied(&input, &oracle, &[0, 1, 2])?;
            let branches = run_branches(opts, (k * 10 + i) as u64, |o| {
                let mut net = Network::new(&specs)?.with_outcomes(o);
                net.load_input(&[c, t1, t2], &input)?;
                establish_epr(&mut net, NodeId(0), NodeId(1))?;
                let w = Window::open(&net);
                let run = nonlocal_controlled_sequence(
                    &mut net,
                    c,
                    &parts,
                    EntanglementPolicy::PreEstablished,
                )?;
                let mut check = Check::default();
                w.close(&net, &mut check);
                check.sections = run.sections;
                check.compare("output", extract(&net, &[c, t1, t2]), &want);
                Ok((check, net.trace().to_vec()))
            })?;
            tally.add(
                &format!("k={k} input {i}"),
                &branches,
                Some((1, 2)),
                k == 10,
            );
        }
    }
    Ok(tally.finish())
}

pub fn verify_parallel_control(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("parallel-control");
    let mut rng = input_rng(opts, 9);
    let sizes = [2usize, 3, 2];
    let mut specs = vec![NodeSpec::new("C", 1, 4)];
    specs.extend(
        sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| NodeSpec::new(format!("U{}", i + 1), s, 1)),
    );
    let gates: Vec<GateMatrix> = sizes
        .iter()
        .map(|&s| GateMatrix::random(s, &mut rng))
        .collect();
    let u = gates[1..]
        .iter()
        .fold(gates[0].clone(), |acc, g| acc.kron(g));
    let oracle = controlled(1, &u);
    let control = reg(0, 0);
    let parts: Vec<ControlledPart> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            ControlledPart::new(gates[i].clone(), (0..s).map(|q| reg(i + 1, q)).collect())
        })
        .collect();
    let mut lines = vec![control];
    lines.extend(parts.iter().flat_map(|p| p.targets.iter().copied()));
    let part_nodes: Vec<NodeId> = (1..=3).map(NodeId).collect();

    for (variant, count) in [("parallel", 3u64), ("sequential", 1)] {
        for i in 0..count {
            let input = StateVector::random(8, &mut rng);
            let want = applied(&input, &oracle, &(0..8).collect::<Vec<_>>())?;
            let branches = run_branches(opts, i, |o| {
                let mut net = Network::new(&specs)?.with_outcomes(o);
                net.load_input(&lines, &input)?;
                let mut check = Check::default();
                let run = if variant == "parallel" {
                    establish_cat(&mut net, NodeId(0), &part_nodes)?;
                    let w = Window::open(&net);
                    let run = parallel_distributed_control(
                        &mut net,
                        control,
                        &parts,
                        EntanglementPolicy::PreEstablished,
                    )?;
                    w.close(&net, &mut check);
                    run
                } else {
                    let w = Window::open(&net);
                    let run = sequential_distributed_control(
                        &mut net,
                        control,
                        &parts,
                        EntanglementPolicy::OnDemand,
                    )?;
                    w.close(&net, &mut check);
                    run
                };
                let rounds = run.section("controlled").map_or(0, |l| l.rounds);
                let want_rounds = if variant == "parallel" { 1 } else { 3 };
                check.expect(rounds == want_rounds, || {
                    format!(
                        "{variant} controlled section took {rounds} rounds, expected {want_rounds}"
                    )
                });
                check.sections = run.sections;
                check.compare("output", extract(&net, &lines), &want);
                Ok((check, net.trace().to_vec()))
            })?;
            if variant == "sequential" {
                if let Some(b) = branches.first() {
                    let l = b
                        .value
                        .sections
                        .first()
                        .map(|s| s.ledger)
                        .unwrap_or_default();
                    tally.section("sequential-controlled", l);
                }
            }
            tally.add(
                &format!("{variant} input {i}"),
                &branches,
                Some((3, 6)),
                variant == "parallel",
            );
        }
    }
    Ok(tally.finish())
}

pub fn verify_multi_control(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("multi-control");
    let mut rng = input_rng(opts, 10);
    let specs = [
        NodeSpec::new("C1", 1, 2),
        NodeSpec::new("C2", 1, 2),
        NodeSpec::new("T", 3, 2),
    ];
    let (c1, c2, t) = (reg(0, 0), reg(1, 0), reg(2, 0));
    let mut inputs: Vec<StateVector> = (0..8).map(|k| StateVector::basis(3, k)).collect();
    inputs.extend((0..5).map(|_| StateVector::random(3, &mut rng)));
    for (i, input) in inputs.iter().enumerate() {
        let want = applied(input, &toffoli(), &[0, 1, 2])?;
        let branches = run_branches(opts, i as u64, |o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            net.load_input(&[c1, c2, t], input)?;
            let w = Window::open(&net);
            nonlocal_multi_control(
                &mut net,
                &[c1, c2],
                &pauli_x(),
                t,
                EntanglementPolicy::OnDemand,
            )?;
            let mut check = Check::default();
            w.close(&net, &mut check);
            check.compare("output", extract(&net, &[c1, c2, t]), &want);
            channels_clean(&net, &mut check);
            for slot in 1..3 {
                check.expect(net.is_definite(reg(2, slot), 0), || {
                    format!("register {slot} on T not reset")
                });
            }
            Ok((check, net.trace().to_vec()))
        })?;
        tally.add(&format!("input {i}"), &branches, Some((2, 4)), true);
    }
    Ok(tally.finish())
}

pub fn verify_establish(opts: &VerifyOptions) -> Result<ProtocolReport> {
    let mut tally = Tally::new("establish");
    for rounds in 1..=3usize {
        let specs = [
            NodeSpec::new("A", 0, 2 * rounds),
            NodeSpec::new("B", 0, 2 * rounds),
        ];
        let branches = run_branches(opts, rounds as u64, |o| {
            let mut net = Network::new(&specs)?.with_outcomes(o);
            let w = Window::open(&net);
            let mut check = Check::default();
            for _ in 0..rounds {
                for p in establish_epr_exchange(&mut net, NodeId(0), NodeId(1))? {
                    let q = [net.resolve(p.a)?, net.resolve(p.b)?];
                    check.expect(net.state().is_cat_state(&q)?, || {
                        format!("{} - {} is not a pair", p.a, p.b)
                    });
                }
            }
            w.close(&net, &mut check);
            let pairs = net.available_epr(NodeId(0), NodeId(1));
            let moved = check.ledger.qubits_transported as usize;
            check.expect(pairs == 2 * rounds && moved == 2 * rounds, || {
                format!("{pairs} pairs for {moved} transported qubits")
            });
            Ok((check, Vec::new()))
        })?;
        tally.add(
            &format!("{rounds} exchanges"),
            &branches,
            Some((0, 0)),
            rounds == 1,
        );
    }
    Ok(tally.finish())
}

pub fn not_verified(name: &str, err: &Error) -> ProtocolReport {
    let mut report = ProtocolReport::new(name);
    report.failures.push(format!("harness error: {err}"));
    report.max_infidelity = 1.0;
    report
}
