//! Honest execution of the transfer between Alice's agents `A, A0, A1` and
//! Bob's agents `B, B0, B1`.
//!
//! Stage I (key material and qubits) happens well before `P`; Stage II
//! (Bob's choice and Alice's masked inputs) fits between `P` and the
//! delivery points `Q_i`. Every message carries emission and reception
//! events and is checked against the light cone before it is recorded.

mod hiding;
mod losses;
mod randomness;

pub use hiding::{
    alice_view_distribution, exact_hiding_distance, hiding_chi_square, total_variation,
    HidingChiSquare, ViewDistribution,
};
pub use losses::{
    apply_losses, detection_independence_test, detection_tallies, DetectionTallies,
    IndependenceTest,
};
pub use randomness::{BranchEnumerator, ChoiceSource, RngSource};

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::bits::{tolerated_errors, BitString, BitsError};
use crate::qstate::{
    bb84_pair_state, computational_basis, hadamard_basis, pair_label, Basis, ProjectiveMeasurement,
    QStateError,
};
use crate::seed::SeedTree;
use crate::spacetime::{
    in_region, validate_message, Agent, CausalityViolation, Geometry, Message, Payload,
    SpacetimeEvent,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("expected strings of length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("run aborted: no pair was detected on both qubits")]
    Aborted,
    #[error("need at least {required} samples per basis choice, got {available}")]
    InsufficientSamples { required: u64, available: u64 },
    #[error(transparent)]
    Causality(#[from] CausalityViolation),
    #[error(transparent)]
    Quantum(#[from] QStateError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Optional departures from the main protocol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Variant {
    /// `B` does not forward `b`; each `B_i` acts as if `b = i`.
    pub outposts_assume_own_index: bool,
    /// `A` fixes `x_0, x_1` before `P` and ships `x_i` to `A_i`.
    pub alice_pregenerates_inputs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub n: usize,
    pub geometry: Geometry,
    pub seed: u64,
    /// Independent loss probability of each transmitted qubit.
    pub loss_prob: f64,
    /// Accepted fraction of bit errors in an output.
    pub gamma: f64,
    pub variant: Variant,
}

impl ProtocolParams {
    pub fn new(n: usize, geometry: Geometry, seed: u64) -> Result<Self, ProtocolError> {
        if n == 0 {
            return Err(ProtocolError::InvalidParams("n must be at least 1".into()));
        }
        Ok(ProtocolParams {
            n,
            geometry,
            seed,
            loss_prob: 0.0,
            gamma: 0.0,
            variant: Variant::default(),
        })
    }

    pub fn with_loss_prob(mut self, loss_prob: f64) -> Result<Self, ProtocolError> {
        if !(0.0..1.0).contains(&loss_prob) {
            return Err(ProtocolError::InvalidParams(format!(
                "loss probability must lie in [0, 1), got {loss_prob}"
            )));
        }
        self.loss_prob = loss_prob;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self, ProtocolError> {
        if !(0.0..=0.5).contains(&gamma) {
            return Err(ProtocolError::InvalidParams(format!(
                "gamma must lie in [0, 0.5], got {gamma}"
            )));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn seeds(&self) -> SeedTree {
        SeedTree::new(self.seed)
    }

    pub fn timeline(&self) -> Timeline {
        Timeline::new(&self.geometry)
    }
}

/// Alice's secret strings `r_0, r_1, s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AliceSecrets {
    pub r0: BitString,
    pub r1: BitString,
    pub s: BitString,
}

impl AliceSecrets {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        AliceSecrets {
            r0: BitString::random(n, rng),
            r1: BitString::random(n, rng),
            s: BitString::random(n, rng),
        }
    }

    /// Every assignment of the `3n` secret bits.
    pub fn all(n: usize) -> impl Iterator<Item = AliceSecrets> {
        BitString::all(3 * n).map(move |bits| {
            let part = |k: usize| -> BitString { (0..n).map(|j| bits.get(k * n + j)).collect() };
            AliceSecrets {
                r0: part(0),
                r1: part(1),
                s: part(2),
            }
        })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `r_i`.
    pub fn r(&self, i: bool) -> &BitString {
        if i {
            &self.r1
        } else {
            &self.r0
        }
    }
}

/// Event times of the schedule, in units where `c = 1`. Stage I starts at
/// `-3h`; outposts are a light-travel time `h` away from `L`; `eps = 0.01 h`
/// separates consecutive local actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timeline {
    pub h: f64,
    pub eps: f64,
}

impl Timeline {
    pub fn new(geometry: &Geometry) -> Self {
        Timeline {
            h: geometry.h,
            eps: 0.01 * geometry.h,
        }
    }

    pub fn secrets_generated(&self) -> f64 {
        -3.0 * self.h
    }

    pub fn basis_chosen(&self) -> f64 {
        -3.0 * self.h + 0.5 * self.eps
    }

    pub fn qubits_received(&self) -> f64 {
        -3.0 * self.h + self.eps
    }

    pub fn records_sent(&self) -> f64 {
        -3.0 * self.h + 2.0 * self.eps
    }

    pub fn loss_report_received(&self) -> f64 {
        -3.0 * self.h + 3.0 * self.eps
    }

    pub fn choice_made(&self) -> f64 {
        -2.0 * self.eps
    }

    pub fn choice_received(&self) -> f64 {
        -self.eps
    }

    pub fn inputs_generated(&self) -> f64 {
        self.h - 0.5 * self.eps
    }

    /// Reception time at an outpost of a signal sent from `L` at `t`.
    pub fn at_outpost(&self, t: f64) -> f64 {
        t + self.h
    }

    /// Delivery time at `Q_i`.
    pub fn delivery(&self) -> f64 {
        self.h
    }
}

/// A local action: generation, measurement, choice or output.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEvent {
    pub step: String,
    pub agent: Agent,
    pub action: String,
    pub at: SpacetimeEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub agent: Agent,
    pub bits: BitString,
    pub at: SpacetimeEvent,
}

/// Everything that happened in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub n: usize,
    pub r0: BitString,
    pub r1: BitString,
    pub s: BitString,
    pub c: bool,
    pub d0: BitString,
    pub d1: BitString,
    pub b: bool,
    pub x0: BitString,
    pub x1: BitString,
    /// `c ⊕ b`; absent when the run aborted before Stage II.
    pub b_prime: Option<bool>,
    pub t0: BitString,
    pub t1: BitString,
    /// Zero-based labels of the pairs detected on both qubits.
    pub surviving: Vec<usize>,
    /// `y_b` as output by `B_b`.
    pub output: Option<Output>,
    /// Output of `B_{1-b}` when outposts assume `b = i`.
    pub spurious_output: Option<Output>,
    pub messages: Vec<Message>,
    pub events: Vec<LocalEvent>,
    pub aborted: bool,
}

/// What Alice's agents receive, keyed by receiver and step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AliceView(pub Vec<(Agent, String, Payload)>);

impl fmt::Display for AliceView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(agent, step, payload)| format!("{agent}/{step}/{payload}"))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl Transcript {
    /// `x_b` restricted to the surviving pairs.
    pub fn expected_output(&self) -> Result<BitString, ProtocolError> {
        let x = if self.b { &self.x1 } else { &self.x0 };
        Ok(x.restrict(&self.surviving)?)
    }

    /// Whether `y_b` matches `x_b` on the surviving pairs within the
    /// tolerated error count.
    pub fn output_correct(&self, gamma: f64) -> bool {
        match (&self.output, self.expected_output()) {
            (Some(out), Ok(x)) => error_accept(&out.bits, &x, gamma),
            _ => false,
        }
    }

    pub fn alice_view(&self) -> AliceView {
        let mut view: Vec<_> = self
            .messages
            .iter()
            .filter(|m| m.receiver.is_alice() && !m.sender.is_alice())
            .map(|m| (m.receiver, m.step.clone(), m.payload.clone()))
            .collect();
        view.sort();
        AliceView(view)
    }

    pub fn validate_causality(&self) -> Result<(), CausalityViolation> {
        self.messages.iter().try_for_each(validate_message)
    }

    pub fn has_quantum_message_between_bobs(&self) -> bool {
        self.messages
            .iter()
            .any(|m| m.payload.is_quantum() && !m.sender.is_alice() && !m.receiver.is_alice())
    }
}

/// `(d^1_{s^1 ⊕ c}, ..., d^n_{s^n ⊕ c})`.
pub fn decode_rc(
    s: &BitString,
    d0: &BitString,
    d1: &BitString,
    c: bool,
) -> Result<BitString, ProtocolError> {
    for d in [d0, d1] {
        if d.len() != s.len() {
            return Err(ProtocolError::LengthMismatch {
                expected: s.len(),
                actual: d.len(),
            });
        }
    }
    Ok((0..s.len())
        .map(|j| if s.get(j) ^ c { d1.get(j) } else { d0.get(j) })
        .collect())
}

/// True iff `y` and `x` differ in at most `floor(gamma * n)` positions.
/// Strings of different length are never accepted.
pub fn error_accept(y: &BitString, x: &BitString, gamma: f64) -> bool {
    match y.hamming_distance(x) {
        Ok(d) => d <= tolerated_errors(x.len(), gamma),
        Err(_) => false,
    }
}

/// Measurement of one pair in `D_c ⊗ D_c`; outcome `2 l0 + l1`.
pub fn pair_measurement(c: bool) -> ProjectiveMeasurement {
    let single: Basis = if c { hadamard_basis() } else { computational_basis() };
    ProjectiveMeasurement::from_basis(&single.product(&single), &["A0", "A1"])
        .expect("product of orthonormal bases")
}

/// Collects messages after checking each against the light cone.
#[derive(Debug)]
pub(crate) struct Ledger<'a> {
    geometry: &'a Geometry,
    pub messages: Vec<Message>,
    pub events: Vec<LocalEvent>,
}

impl<'a> Ledger<'a> {
    pub fn new(geometry: &'a Geometry) -> Self {
        Ledger {
            geometry,
            messages: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn send(
        &mut self,
        step: &str,
        sender: Agent,
        receiver: Agent,
        payload: Payload,
        emitted: f64,
        received: f64,
    ) -> Result<(), CausalityViolation> {
        let msg = Message {
            step: step.to_string(),
            sender,
            receiver,
            payload,
            emitted: self.geometry.event_at(sender.site(), emitted),
            received: self.geometry.event_at(receiver.site(), received),
        };
        validate_message(&msg)?;
        self.messages.push(msg);
        Ok(())
    }

    pub fn record(&mut self, step: &str, agent: Agent, action: &str, t: f64) -> SpacetimeEvent {
        let at = self.geometry.event_at(agent.site(), t);
        self.events.push(LocalEvent {
            step: step.to_string(),
            agent,
            action: action.to_string(),
            at,
        });
        at
    }

    /// Alice's Stage I distribution of `r_0, r_1, s` and the qubits.
    pub fn alice_stage_one(&mut self, tl: &Timeline, secrets: &AliceSecrets) -> Result<(), CausalityViolation> {
        let t0 = tl.secrets_generated();
        self.record("1", Agent::Alice, "generate r0 r1 s", t0);
        for i in 0..2 {
            for (name, bits) in [("r0", &secrets.r0), ("r1", &secrets.r1), ("s", &secrets.s)] {
                self.send(
                    "1",
                    Agent::Alice,
                    Agent::alice_outpost(i),
                    Payload::classical(name, bits.clone()),
                    t0,
                    tl.at_outpost(t0),
                )?;
            }
        }
        let registers = crate::qstate::pair_registers('A', secrets.len())
            .into_iter()
            .map(|r| r.label)
            .collect();
        self.send(
            "2",
            Agent::Alice,
            Agent::Bob,
            Payload::Quantum { registers },
            t0,
            tl.qubits_received(),
        )
    }

    /// Alice relays `b'` to her outposts and each `A_i` hands over `t_i` and
    /// `s^S` at `Q_i`. Returns `(t_0, t_1)`.
    pub fn alice_stage_two(
        &mut self,
        tl: &Timeline,
        secrets: &AliceSecrets,
        surviving: &[usize],
        b_prime: bool,
        x: [&BitString; 2],
        pregenerated: bool,
    ) -> Result<[BitString; 2], ProtocolError> {
        let sent = tl.choice_received();
        let mut t = [BitString::default(), BitString::default()];
        for i in 0..2 {
            let outpost = Agent::alice_outpost(i);
            self.send("6", Agent::Alice, outpost, Payload::bit("b'", b_prime), sent, tl.at_outpost(sent))?;
            if !pregenerated {
                self.record("7", outpost, "generate x", tl.inputs_generated());
            }
            let r = secrets.r((i == 1) ^ b_prime).restrict(surviving)?;
            t[i] = r.xor(&x[i].restrict(surviving)?)?;
            let emitted = tl.inputs_generated();
            let bob = Agent::bob_outpost(i);
            self.send("7", outpost, bob, Payload::classical("t", t[i].clone()), emitted, tl.delivery())?;
            self.send(
                "7",
                outpost,
                bob,
                Payload::classical("s", secrets.s.restrict(surviving)?),
                emitted,
                tl.delivery(),
            )?;
        }
        Ok(t)
    }

    /// Loss report `B -> A` and its relay to both outposts.
    pub fn loss_report(&mut self, tl: &Timeline, n: usize, surviving: &[usize]) -> Result<(), CausalityViolation> {
        let mut mask = BitString::zeros(n);
        for &j in surviving {
            mask.set(j, true);
        }
        let sent = tl.records_sent();
        let got = tl.loss_report_received();
        self.send("S", Agent::Bob, Agent::Alice, Payload::classical("S", mask.clone()), sent, got)?;
        for i in 0..2 {
            self.send("S", Agent::Alice, Agent::alice_outpost(i), Payload::classical("S", mask.clone()), got, tl.at_outpost(got))?;
        }
        Ok(())
    }
}

/// Runs both stages with Alice's secrets fixed and every choice on Bob's
/// side (basis, detections, outcomes) drawn from `bob`.
pub fn execute(
    params: &ProtocolParams,
    b: bool,
    x0: &BitString,
    x1: &BitString,
    secrets: &AliceSecrets,
    bob: &mut dyn ChoiceSource,
) -> Result<Transcript, ProtocolError> {
    let n = params.n;
    for len in [x0.len(), x1.len(), secrets.len(), secrets.r0.len(), secrets.r1.len()] {
        if len != n {
            return Err(ProtocolError::LengthMismatch { expected: n, actual: len });
        }
    }
    let geometry = &params.geometry;
    let tl = params.timeline();
    let mut ledger = Ledger::new(geometry);

    // Stage I
    ledger.alice_stage_one(&tl, secrets)?;
    if params.variant.alice_pregenerates_inputs {
        let t = tl.secrets_generated();
        ledger.record("1", Agent::Alice, "generate x0 x1", t);
        for (i, x) in [x0, x1].into_iter().enumerate() {
            ledger.send("1", Agent::Alice, Agent::alice_outpost(i), Payload::classical("x", x.clone()), t, tl.at_outpost(t))?;
        }
    }
    let c = bob.choose(&[0.5, 0.5])? == 1;
    ledger.record("3", Agent::Bob, "choose c", tl.basis_chosen());

    let surviving = losses::sample_survivors(n, params.loss_prob, bob)?;
    let meas = pair_measurement(c);
    let mut d0 = BitString::zeros(n);
    let mut d1 = BitString::zeros(n);
    for &j in &surviving {
        let state = bb84_pair_state(secrets.r0.get(j), secrets.r1.get(j), secrets.s.get(j));
        let (l0, l1) = pair_label(bob.choose(&state.probabilities(&meas)?)?);
        d0.set(j, l0);
        d1.set(j, l1);
    }
    ledger.record("3", Agent::Bob, "measure", tl.qubits_received());
    let sent = tl.records_sent();
    for i in 0..2 {
        let outpost = Agent::bob_outpost(i);
        ledger.send("3", Agent::Bob, outpost, Payload::bit("c", c), sent, tl.at_outpost(sent))?;
        ledger.send("3", Agent::Bob, outpost, Payload::classical("d0", d0.clone()), sent, tl.at_outpost(sent))?;
        ledger.send("3", Agent::Bob, outpost, Payload::classical("d1", d1.clone()), sent, tl.at_outpost(sent))?;
    }
    if params.loss_prob > 0.0 {
        ledger.loss_report(&tl, n, &surviving)?;
    }

    let mut transcript = Transcript {
        n,
        r0: secrets.r0.clone(),
        r1: secrets.r1.clone(),
        s: secrets.s.clone(),
        c,
        d0,
        d1,
        b,
        x0: x0.clone(),
        x1: x1.clone(),
        b_prime: None,
        t0: BitString::default(),
        t1: BitString::default(),
        surviving,
        output: None,
        spurious_output: None,
        messages: Vec::new(),
        events: Vec::new(),
        aborted: false,
    };
    if transcript.surviving.is_empty() {
        transcript.aborted = true;
        transcript.messages = ledger.messages;
        transcript.events = ledger.events;
        return Ok(transcript);
    }

    // Stage II
    let choice = tl.choice_made();
    ledger.record("4", Agent::Bob, "choose b", choice);
    let b_prime = c ^ b;
    ledger.send("4", Agent::Bob, Agent::Alice, Payload::bit("b'", b_prime), choice, tl.choice_received())?;
    if !params.variant.outposts_assume_own_index {
        for i in 0..2 {
            ledger.send("5", Agent::Bob, Agent::bob_outpost(i), Payload::bit("b", b), choice, tl.at_outpost(choice))?;
        }
    }
    let [t0, t1] = ledger.alice_stage_two(
        &tl,
        secrets,
        &transcript.surviving,
        b_prime,
        [x0, x1],
        params.variant.alice_pregenerates_inputs,
    )?;

    let rc = decode_rc(&transcript.s, &transcript.d0, &transcript.d1, c)?.restrict(&transcript.surviving)?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let acts = params.variant.outposts_assume_own_index || (i == 1) == b;
        if !acts {
            continue;
        }
        let agent = Agent::bob_outpost(i);
        let t = if i == 0 { &t0 } else { &t1 };
        let at = ledger.record("8", agent, "output y", tl.delivery());
        outputs.push((i, Output { agent, bits: rc.xor(t)?, at }));
    }
    for (i, out) in outputs {
        if (i == 1) == b {
            if !in_region(&out.at, geometry.region(i)) {
                return Err(ProtocolError::Invariant(format!("output event {} outside R_{i}", out.at)));
            }
            transcript.output = Some(out);
        } else {
            transcript.spurious_output = Some(out);
        }
    }
    transcript.b_prime = Some(b_prime);
    transcript.t0 = t0;
    transcript.t1 = t1;
    transcript.messages = ledger.messages;
    transcript.events = ledger.events;
    Ok(transcript)
}

/// Samples a full honest run from the parameter seed. Runs in which every
/// pair is lost are reported as [`ProtocolError::Aborted`].
pub fn run_honest(
    params: &ProtocolParams,
    b: bool,
    x0: &BitString,
    x1: &BitString,
) -> Result<Transcript, ProtocolError> {
    let seeds = params.seeds().subtree("protocol");
    let secrets = AliceSecrets::random(params.n, &mut seeds.stream("alice", 0));
    let mut rng = seeds.stream("bob", 0);
    let transcript = execute(params, b, x0, x1, &secrets, &mut RngSource(&mut rng))?;
    if transcript.aborted {
        return Err(ProtocolError::Aborted);
    }
    Ok(transcript)
}
