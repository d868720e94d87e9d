//! Dishonest Bob: measurement-and-guess strategies, their exact success
//! probabilities and Monte-Carlo runs against an honest Alice.
//!
//! A strategy measures the received qubits once at `L`, announces `b'`,
//! and sends its classical record to both outposts. `B_i` then guesses
//! `r_{i ⊕ b'}` from the record, `s` and `b'`; the attack succeeds when
//! both outposts guess right, i.e. when `B_0` learns `x_0` and `B_1` learns
//! `x_1`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bits::{tolerated_errors, BitString};
use crate::linalg::haar_unitary;
use crate::protocol::{pair_measurement, AliceSecrets, Ledger, ProtocolError, ProtocolParams, Timeline};
use crate::qstate::{
    bb84_pair_state, full_state, pair_index, pair_label, xi_basis, Basis, BasisKind,
    ProjectiveMeasurement, QStateError,
};
use crate::spacetime::{Agent, CausalityViolation, Message, Payload};
use crate::stats::Proportion;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("exact evaluation needs a strategy that acts pair by pair")]
    NotProduct,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("joint strategies are limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("record reaches {agent} at t = {received}, after delivery at t = {deadline}")]
    LateRecord { agent: Agent, received: f64, deadline: f64 },
    #[error(transparent)]
    Causality(#[from] CausalityViolation),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Quantum(#[from] QStateError),
}

/// Largest `n` for which joint strategies are simulated.
pub const MAX_JOINT_PAIRS: usize = 3;

/// A strategy applying the same two-qubit measurement to every pair and
/// guessing each pair's bits from that pair's outcome and `s^j` alone.
pub trait PairStrategy: Send + Sync {
    fn name(&self) -> String;
    /// Measurement on registers `(A0, A1)` of one pair.
    fn measurement(&self) -> &ProjectiveMeasurement;
    fn b_prime(&self) -> bool;
    /// Guess of `B_i` for `r^j_{i ⊕ b'}`.
    fn guess(&self, i: usize, outcome: usize, s: bool) -> bool;
}

/// A strategy measuring all `2n` qubits at once.
pub trait JointStrategy: Send + Sync {
    fn name(&self) -> String;
    /// Measurement on `A0_1 A1_1 ... A0_n A1_n`.
    fn measurement(&self, n: usize) -> Result<ProjectiveMeasurement, AdversaryError>;
    fn announce(&self, outcome: usize) -> bool;
    /// Guess of `B_i` for `r_{i ⊕ b'}`.
    fn guess(&self, i: usize, outcome: usize, s: &BitString, b_prime: bool) -> BitString;
}

#[derive(Clone)]
pub enum StrategyKind {
    PerPair(Arc<dyn PairStrategy>),
    Joint(Arc<dyn JointStrategy>),
}

/// When Bob's record leaves `L` and reaches the outposts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordTiming {
    /// Sent right after the measurement, as in the honest schedule.
    Standard,
    /// Explicit emission time at `L` and reception time at `L_i`.
    Custom { emitted: f64, received: f64 },
}

#[derive(Clone)]
pub struct CheatStrategy {
    pub kind: StrategyKind,
    pub timing: RecordTiming,
}

impl fmt::Debug for CheatStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CheatStrategy")
            .field("name", &self.name())
            .field("timing", &self.timing)
            .finish()
    }
}

impl CheatStrategy {
    pub fn per_pair(strategy: impl PairStrategy + 'static) -> Self {
        CheatStrategy {
            kind: StrategyKind::PerPair(Arc::new(strategy)),
            timing: RecordTiming::Standard,
        }
    }

    pub fn joint(strategy: impl JointStrategy + 'static) -> Self {
        CheatStrategy {
            kind: StrategyKind::Joint(Arc::new(strategy)),
            timing: RecordTiming::Standard,
        }
    }

    pub fn with_timing(mut self, timing: RecordTiming) -> Self {
        self.timing = timing;
        self
    }

    pub fn name(&self) -> String {
        match &self.kind {
            StrategyKind::PerPair(s) => s.name(),
            StrategyKind::Joint(s) => s.name(),
        }
    }
}

/// Guessing map for pairs prepared with `s = 1`.
pub fn xi_guess_map(l: (bool, bool)) -> (bool, bool) {
    match l {
        (false, false) => (false, true),
        (false, true) => (true, true),
        (true, false) => (true, false),
        (true, true) => (false, false),
    }
}

/// Measure each pair in the ξ basis, announce `b' = 0`, and guess
/// `e = l` when `s = 0`, `e = f(l)` when `s = 1`.
#[derive(Debug, Clone)]
pub struct XiStrategy {
    measurement: ProjectiveMeasurement,
}

impl Default for XiStrategy {
    fn default() -> Self {
        XiStrategy {
            measurement: ProjectiveMeasurement::from_basis(&xi_basis(), &["A0", "A1"])
                .expect("ξ basis is orthonormal"),
        }
    }
}

impl PairStrategy for XiStrategy {
    fn name(&self) -> String {
        "xi".into()
    }

    fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }

    fn b_prime(&self) -> bool {
        false
    }

    fn guess(&self, i: usize, outcome: usize, s: bool) -> bool {
        let l = pair_label(outcome);
        let e = if s { xi_guess_map(l) } else { l };
        if i == 0 {
            e.0
        } else {
            e.1
        }
    }
}

pub fn xi_strategy() -> CheatStrategy {
    CheatStrategy::per_pair(XiStrategy::default())
}

/// Honest-looking attack: measure both qubits of each pair in `D_c`,
/// announce a fixed `b'`, and let `B_i` report `d_{s ⊕ i ⊕ b'}`. One outpost
/// gets the matching-basis outcome, the other a uniformly random bit.
#[derive(Debug, Clone)]
pub struct BasisStrategy {
    pub c: bool,
    pub announced: bool,
    measurement: ProjectiveMeasurement,
}

impl BasisStrategy {
    pub fn new(c: bool, announced: bool) -> Self {
        BasisStrategy {
            c,
            announced,
            measurement: pair_measurement(c),
        }
    }
}

impl PairStrategy for BasisStrategy {
    fn name(&self) -> String {
        format!("basis-d{}", self.c as u8)
    }

    fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }

    fn b_prime(&self) -> bool {
        self.announced
    }

    fn guess(&self, i: usize, outcome: usize, s: bool) -> bool {
        let (l0, l1) = pair_label(outcome);
        if s ^ (i == 1) ^ self.announced {
            l1
        } else {
            l0
        }
    }
}

/// Arbitrary two-qubit measurement with a lookup table of guesses indexed
/// by `(outcome, s, i)`.
#[derive(Debug, Clone)]
pub struct TabulatedPairStrategy {
    pub label: String,
    pub announced: bool,
    pub table: Vec<[[bool; 2]; 2]>,
    measurement: ProjectiveMeasurement,
}

impl TabulatedPairStrategy {
    pub fn new(
        label: &str,
        measurement: ProjectiveMeasurement,
        announced: bool,
        table: Vec<[[bool; 2]; 2]>,
    ) -> Result<Self, AdversaryError> {
        if measurement.dim() != 4 || table.len() != measurement.outcomes() {
            return Err(QStateError::InvalidMeasurement(format!(
                "pair strategy needs a 4-dimensional measurement with one table row per outcome, got dimension {} with {} rows for {} outcomes",
                measurement.dim(),
                table.len(),
                measurement.outcomes()
            ))
            .into());
        }
        Ok(TabulatedPairStrategy {
            label: label.to_string(),
            announced,
            table,
            measurement,
        })
    }

    /// Haar-random basis measurement with the guesses that maximize the
    /// success probability for that measurement.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u = haar_unitary(4, rng);
        let basis = Basis::new(
            BasisKind::Other("haar".into()),
            (0..4).map(|k| u.column(k).into_owned()).collect(),
        );
        let m = ProjectiveMeasurement::from_basis(&basis, &["A0", "A1"]).expect("unitary columns");
        let announced = rng.random::<bool>();
        TabulatedPairStrategy::best_response("random", m, announced)
    }

    /// Guesses maximizing the joint success probability for a fixed
    /// measurement and announcement.
    pub fn best_response(label: &str, measurement: ProjectiveMeasurement, announced: bool) -> Self {
        let probs = pair_outcome_table(&measurement).expect("pair measurement");
        let table = (0..measurement.outcomes())
            .map(|o| {
                let mut row = [[false; 2]; 2];
                for s in [false, true] {
                    let mut best = (f64::NEG_INFINITY, [false; 2]);
                    for guess in 0..4 {
                        let (e0, e1) = pair_label(guess);
                        let weight: f64 = (0..4)
                            .map(|r| {
                                let (r0, r1) = pair_label(r);
                                let target = if announced { (r1, r0) } else { (r0, r1) };
                                if (e0, e1) == target {
                                    probs[r][s as usize][o]
                                } else {
                                    0.0
                                }
                            })
                            .sum();
                        if weight > best.0 + 1e-15 {
                            best = (weight, [e0, e1]);
                        }
                    }
                    row[s as usize] = best.1;
                }
                row
            })
            .collect();
        TabulatedPairStrategy {
            label: label.to_string(),
            announced,
            table,
            measurement,
        }
    }
}

impl PairStrategy for TabulatedPairStrategy {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }

    fn b_prime(&self) -> bool {
        self.announced
    }

    fn guess(&self, i: usize, outcome: usize, s: bool) -> bool {
        self.table[outcome][s as usize][i]
    }
}

/// Runs a pair strategy on every pair but through the joint interface;
/// the announcement is the pair strategy's fixed `b'`.
pub struct ProductJoint(pub Arc<dyn PairStrategy>);

impl JointStrategy for ProductJoint {
    fn name(&self) -> String {
        format!("{}-joint", self.0.name())
    }

    fn measurement(&self, n: usize) -> Result<ProjectiveMeasurement, AdversaryError> {
        if n > MAX_JOINT_PAIRS {
            return Err(AdversaryError::TooLarge { n, max: MAX_JOINT_PAIRS });
        }
        let single = self.0.measurement();
        let k = single.outcomes();
        let mut projectors = single.projectors().to_vec();
        for _ in 1..n {
            projectors = projectors
                .iter()
                .flat_map(|p| single.projectors().iter().map(move |q| p.kronecker(q)))
                .collect();
        }
        debug_assert_eq!(projectors.len(), k.pow(n as u32));
        let labels: Vec<String> = crate::qstate::pair_registers('A', n).into_iter().map(|r| r.label).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Ok(ProjectiveMeasurement::new(&refs, projectors)?)
    }

    fn announce(&self, _outcome: usize) -> bool {
        self.0.b_prime()
    }

    fn guess(&self, i: usize, outcome: usize, s: &BitString, _b_prime: bool) -> BitString {
        let k = self.0.measurement().outcomes();
        let n = s.len();
        (0..n)
            .map(|j| {
                let o = (outcome / k.pow((n - 1 - j) as u32)) % k;
                self.0.guess(i, o, s.get(j))
            })
            .collect()
    }
}

/// Joint measurement with an outcome-dependent announcement and a full
/// lookup table of guesses, for small `n`.
#[derive(Debug, Clone)]
pub struct TabulatedJointStrategy {
    pub label: String,
    pub n: usize,
    pub announcements: Vec<bool>,
    /// `guesses[outcome][s as index] = [e_0, e_1]`.
    pub guesses: Vec<Vec<[BitString; 2]>>,
    measurement: ProjectiveMeasurement,
}

impl TabulatedJointStrategy {
    /// Haar-random basis on all `2n` qubits, random announcements, and the
    /// best guesses for them.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self, AdversaryError> {
        if n > 2 {
            return Err(AdversaryError::TooLarge { n, max: 2 });
        }
        let dim = 1usize << (2 * n);
        let u = haar_unitary(dim, rng);
        let basis = Basis::new(
            BasisKind::Other("haar".into()),
            (0..dim).map(|k| u.column(k).into_owned()).collect(),
        );
        let labels: Vec<String> = crate::qstate::pair_registers('A', n).into_iter().map(|r| r.label).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let measurement = ProjectiveMeasurement::from_basis(&basis, &refs)?;
        let announcements = (0..dim).map(|_| rng.random::<bool>()).collect();
        TabulatedJointStrategy::best_response("random-joint", n, measurement, announcements)
    }

    pub fn best_response(
        label: &str,
        n: usize,
        measurement: ProjectiveMeasurement,
        announcements: Vec<bool>,
    ) -> Result<Self, AdversaryError> {
        let outcomes = measurement.outcomes();
        if announcements.len() != outcomes {
            return Err(QStateError::InvalidMeasurement("one announcement per outcome required".into()).into());
        }
        let secrets: Vec<AliceSecrets> = AliceSecrets::all(n).collect();
        let probs: Vec<Vec<f64>> = secrets
            .iter()
            .map(|a| full_state(&a.r0, &a.r1, &a.s).and_then(|st| st.probabilities(&measurement)))
            .collect::<Result<_, _>>()?;
        let strings: Vec<BitString> = BitString::all(n).collect();
        let mut guesses = vec![vec![[BitString::zeros(n), BitString::zeros(n)]; 1 << n]; outcomes];
        for o in 0..outcomes {
            let bp = announcements[o];
            for (si, s) in strings.iter().enumerate() {
                let mut weight = std::collections::BTreeMap::new();
                for (a, p) in secrets.iter().zip(&probs) {
                    if &a.s == s {
                        let key = (a.r(bp).clone(), a.r(!bp).clone());
                        *weight.entry(key).or_insert(0.0) += p[o];
                    }
                }
                let mut best: Option<((BitString, BitString), f64)> = None;
                for (key, w) in weight {
                    if best.as_ref().map_or(true, |(_, bw)| w > bw + 1e-15) {
                        best = Some((key, w));
                    }
                }
                let ((e0, e1), _) = best.expect("at least one secret per s");
                guesses[o][si] = [e0, e1];
            }
        }
        Ok(TabulatedJointStrategy {
            label: label.to_string(),
            n,
            announcements,
            guesses,
            measurement,
        })
    }
}

impl JointStrategy for TabulatedJointStrategy {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn measurement(&self, n: usize) -> Result<ProjectiveMeasurement, AdversaryError> {
        if n != self.n {
            return Err(ProtocolError::LengthMismatch { expected: self.n, actual: n }.into());
        }
        Ok(self.measurement.clone())
    }

    fn announce(&self, outcome: usize) -> bool {
        self.announcements[outcome]
    }

    fn guess(&self, i: usize, outcome: usize, s: &BitString, _b_prime: bool) -> BitString {
        self.guesses[outcome][s.to_index() as usize][i].clone()
    }
}

/// `probs[r][s][o]`: probability of outcome `o` on the pair state with
/// `(r0, r1) = pair_label(r)`.
fn pair_outcome_table(m: &ProjectiveMeasurement) -> Result<Vec<[Vec<f64>; 2]>, QStateError> {
    (0..4)
        .map(|r| {
            let (r0, r1) = pair_label(r);
            Ok([
                bb84_pair_state(r0, r1, false).probabilities(m)?,
                bb84_pair_state(r0, r1, true).probabilities(m)?,
            ])
        })
        .collect()
}

/// Single-pair success probability of a per-pair strategy by exact Born-rule
/// enumeration over `(r0, r1, s)` and outcomes.
pub fn exact_pair_probability(strategy: &dyn PairStrategy) -> Result<f64, AdversaryError> {
    let m = strategy.measurement();
    let probs = pair_outcome_table(m)?;
    let bp = strategy.b_prime();
    let mut total = 0.0;
    for r in 0..4 {
        let (r0, r1) = pair_label(r);
        let target = if bp { (r1, r0) } else { (r0, r1) };
        for s in [false, true] {
            for (o, p) in probs[r][s as usize].iter().enumerate() {
                if (strategy.guess(0, o, s), strategy.guess(1, o, s)) == target {
                    total += p;
                }
            }
        }
    }
    Ok(total / 8.0)
}

/// `p^n` for a per-pair strategy.
pub fn exact_cheat_probability(strategy: &CheatStrategy, n: usize) -> Result<f64, AdversaryError> {
    match &strategy.kind {
        StrategyKind::PerPair(s) => Ok(exact_pair_probability(s.as_ref())?.powi(n as i32)),
        StrategyKind::Joint(_) => Err(AdversaryError::NotProduct),
    }
}

/// Exact success probability of a joint strategy by enumerating all `2^{3n}`
/// secrets and all outcomes.
pub fn exact_joint_probability(strategy: &dyn JointStrategy, n: usize) -> Result<f64, AdversaryError> {
    if n > MAX_JOINT_PAIRS {
        return Err(AdversaryError::TooLarge { n, max: MAX_JOINT_PAIRS });
    }
    let m = strategy.measurement(n)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for a in AliceSecrets::all(n) {
        let probs = full_state(&a.r0, &a.r1, &a.s)?.probabilities(&m)?;
        for (o, p) in probs.into_iter().enumerate() {
            let bp = strategy.announce(o);
            if &strategy.guess(0, o, &a.s, bp) == a.r(bp) && &strategy.guess(1, o, &a.s, bp) == a.r(!bp) {
                total += p;
            }
        }
        count += 1;
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheatReport {
    pub strategy: String,
    pub n: usize,
    pub trials: u64,
    /// Trials where both outposts recovered their strings exactly.
    pub successes: u64,
    /// Trials where `B_i` recovered `r_{i ⊕ b'}` exactly.
    pub region_successes: [u64; 2],
    /// Joint successes within `floor(gamma n)` errors per outpost.
    pub tolerant_successes: u64,
    pub gamma: f64,
    /// Messages of the first trial.
    pub messages: Vec<Message>,
}

impl CheatReport {
    pub fn proportion(&self) -> Proportion {
        Proportion::new(self.successes, self.trials)
    }

    pub fn estimate(&self) -> f64 {
        self.proportion().estimate()
    }

    pub fn standard_error(&self) -> f64 {
        self.proportion().standard_error()
    }

    pub fn region_estimate(&self, i: usize) -> f64 {
        Proportion::new(self.region_successes[i], self.trials).estimate()
    }

    pub fn has_quantum_message_between_bobs(&self) -> bool {
        self.messages
            .iter()
            .any(|m| m.payload.is_quantum() && !m.sender.is_alice() && !m.receiver.is_alice())
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    trials: u64,
    successes: u64,
    region: [u64; 2],
    tolerant: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.successes += other.successes;
        self.region[0] += other.region[0];
        self.region[1] += other.region[1];
        self.tolerant += other.tolerant;
        self
    }
}

/// Sampler for Bob's measurement outcome given Alice's secrets.
enum Sampler {
    PerPair {
        strategy: Arc<dyn PairStrategy>,
        probs: Vec<[Vec<f64>; 2]>,
    },
    Joint {
        strategy: Arc<dyn JointStrategy>,
        measurement: ProjectiveMeasurement,
        bits: usize,
    },
}

struct Attempt {
    record: BitString,
    b_prime: bool,
    guesses: [BitString; 2],
}

impl Sampler {
    fn new(strategy: &CheatStrategy, n: usize) -> Result<Self, AdversaryError> {
        Ok(match &strategy.kind {
            StrategyKind::PerPair(s) => Sampler::PerPair {
                strategy: s.clone(),
                probs: pair_outcome_table(s.measurement())?,
            },
            StrategyKind::Joint(s) => {
                if n > MAX_JOINT_PAIRS {
                    return Err(AdversaryError::TooLarge { n, max: MAX_JOINT_PAIRS });
                }
                let measurement = s.measurement(n)?;
                let bits = usize::BITS as usize - (measurement.outcomes() - 1).leading_zeros() as usize;
                Sampler::Joint {
                    strategy: s.clone(),
                    measurement,
                    bits,
                }
            }
        })
    }

    fn attempt<R: Rng + ?Sized>(&self, a: &AliceSecrets, rng: &mut R) -> Result<Attempt, AdversaryError> {
        let n = a.len();
        match self {
            Sampler::PerPair { strategy, probs } => {
                let mut record = Vec::with_capacity(2 * n);
                let mut guesses = [BitString::zeros(n), BitString::zeros(n)];
                for j in 0..n {
                    let s = a.s.get(j);
                    let r = pair_index(a.r0.get(j), a.r1.get(j));
                    let o = crate::qstate::sample_index(&probs[r][s as usize], rng)?;
                    let (l0, l1) = pair_label(o % 4);
                    record.extend([l0, l1]);
                    for (i, g) in guesses.iter_mut().enumerate() {
                        g.set(j, strategy.guess(i, o, s));
                    }
                }
                Ok(Attempt {
                    record: record.into(),
                    b_prime: strategy.b_prime(),
                    guesses,
                })
            }
            Sampler::Joint {
                strategy,
                measurement,
                bits,
            } => {
                let state = full_state(&a.r0, &a.r1, &a.s)?;
                let o = crate::qstate::sample_index(&state.probabilities(measurement)?, rng)?;
                let b_prime = strategy.announce(o);
                Ok(Attempt {
                    record: BitString::from_index(o as u64, *bits),
                    b_prime,
                    guesses: [strategy.guess(0, o, &a.s, b_prime), strategy.guess(1, o, &a.s, b_prime)],
                })
            }
        }
    }
}

const CHUNKS: u64 = 64;

/// Plays `trials` rounds of the strategy against an honest Alice. Alice's
/// inputs are uniformly random; losses are not modelled here.
pub fn run_cheat(strategy: &CheatStrategy, params: &ProtocolParams, trials: u64) -> Result<CheatReport, AdversaryError> {
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let n = params.n;
    let sampler = Sampler::new(strategy, n)?;
    let seeds = params.seeds().subtree("adversary");
    let tl = params.timeline();
    let limit = tolerated_errors(n, params.gamma);

    let play = |rng: &mut crate::seed::SimRng, keep: bool| -> Result<(Tally, Vec<Message>), AdversaryError> {
        let secrets = AliceSecrets::random(n, rng);
        let x = [BitString::random(n, rng), BitString::random(n, rng)];
        let mut ledger = Ledger::new(&params.geometry);
        ledger.alice_stage_one(&tl, &secrets)?;
        let attempt = sampler.attempt(&secrets, rng)?;
        record_messages(&mut ledger, &tl, strategy.timing, &attempt)?;
        let all: Vec<usize> = (0..n).collect();
        let t = ledger.alice_stage_two(&tl, &secrets, &all, attempt.b_prime, [&x[0], &x[1]], false)?;
        let mut tally = Tally {
            trials: 1,
            ..Tally::default()
        };
        let mut exact = [false; 2];
        let mut close = [false; 2];
        for i in 0..2 {
            // y_i = e_i ⊕ t_i equals x_i iff e_i = r_{i ⊕ b'}
            let y = attempt.guesses[i].xor(&t[i]).map_err(ProtocolError::from)?;
            let d = y.hamming_distance(&x[i]).map_err(ProtocolError::from)?;
            exact[i] = d == 0;
            close[i] = d <= limit;
            tally.region[i] += exact[i] as u64;
        }
        tally.successes = (exact[0] && exact[1]) as u64;
        tally.tolerant = (close[0] && close[1]) as u64;
        let messages = if keep { ledger.messages } else { Vec::new() };
        Ok((tally, messages))
    };

    let chunks = CHUNKS.min(trials);
    let results: Vec<(Tally, Vec<Message>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let share = trials / chunks + u64::from(c < trials % chunks);
            let mut rng = seeds.stream("trials", c);
            let mut tally = Tally::default();
            let mut first = Vec::new();
            for k in 0..share {
                let (t, m) = play(&mut rng, c == 0 && k == 0)?;
                tally = tally.merge(t);
                if !m.is_empty() {
                    first = m;
                }
            }
            Ok((tally, first))
        })
        .collect::<Result<_, AdversaryError>>()?;
    let mut messages = Vec::new();
    let mut total = Tally::default();
    for (t, m) in results {
        total = total.merge(t);
        if messages.is_empty() {
            messages = m;
        }
    }
    Ok(CheatReport {
        strategy: strategy.name(),
        n,
        trials: total.trials,
        successes: total.successes,
        region_successes: total.region,
        tolerant_successes: total.tolerant,
        gamma: params.gamma,
        messages,
    })
}

/// Bob's announcement of `b'` to Alice and his record to both outposts.
fn record_messages(
    ledger: &mut Ledger<'_>,
    tl: &Timeline,
    timing: RecordTiming,
    attempt: &Attempt,
) -> Result<(), AdversaryError> {
    ledger.record("3", Agent::Bob, "measure", tl.qubits_received());
    let (emitted, received) = match timing {
        RecordTiming::Standard => (tl.records_sent(), tl.at_outpost(tl.records_sent())),
        RecordTiming::Custom { emitted, received } => (emitted, received),
    };
    for i in 0..2 {
        let agent = Agent::bob_outpost(i);
        ledger.send("3", Agent::Bob, agent, Payload::classical("record", attempt.record.clone()), emitted, received)?;
        if received > tl.delivery() {
            return Err(AdversaryError::LateRecord {
                agent,
                received,
                deadline: tl.delivery(),
            });
        }
    }
    ledger.send(
        "4",
        Agent::Bob,
        Agent::Alice,
        Payload::bit("b'", attempt.b_prime),
        tl.choice_made(),
        tl.choice_received(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;
    use crate::spacetime::standard_geometry;

    fn params(n: usize) -> ProtocolParams {
        ProtocolParams::new(n, standard_geometry(1.0, 0.1).unwrap(), 11).unwrap()
    }

    #[test]
    fn xi_map_is_a_permutation() {
        let images: std::collections::BTreeSet<_> =
            (0..4).map(|k| xi_guess_map(pair_label(k))).collect();
        assert_eq!(images.len(), 4);
        assert_eq!(xi_guess_map((false, false)), (false, true));
        assert_eq!(xi_guess_map((false, true)), (true, true));
    }

    #[test]
    fn basis_strategy_wins_half_the_time() {
        for c in [false, true] {
            for bp in [false, true] {
                let p = exact_pair_probability(&BasisStrategy::new(c, bp)).unwrap();
                assert!((p - 0.5).abs() < 1e-12, "c={c} b'={bp}: {p}");
            }
        }
    }

    #[test]
    fn best_response_never_loses_to_its_table() {
        let mut rng = SeedTree::new(2).stream("t", 0);
        for _ in 0..5 {
            let s = TabulatedPairStrategy::random(&mut rng);
            let mut worse = s.clone();
            for row in &mut worse.table {
                row[0][0] = !row[0][0];
            }
            assert!(exact_pair_probability(&s).unwrap() >= exact_pair_probability(&worse).unwrap() - 1e-12);
        }
    }

    #[test]
    fn product_joint_matches_per_pair() {
        let xi: Arc<dyn PairStrategy> = Arc::new(XiStrategy::default());
        let p = exact_joint_probability(&ProductJoint(xi), 2).unwrap();
        assert!((p - 0.5625).abs() < 1e-12);
        assert!(matches!(
            exact_cheat_probability(&CheatStrategy::joint(ProductJoint(Arc::new(XiStrategy::default()))), 2),
            Err(AdversaryError::NotProduct)
        ));
    }

    #[test]
    fn late_record_rejected() {
        let strategy = xi_strategy().with_timing(RecordTiming::Custom {
            emitted: -3.0,
            received: 1.5,
        });
        assert!(matches!(
            run_cheat(&strategy, &params(1), 10),
            Err(AdversaryError::LateRecord { .. })
        ));
    }

    #[test]
    fn superluminal_record_rejected() {
        let strategy = xi_strategy().with_timing(RecordTiming::Custom {
            emitted: 0.5,
            received: 0.9,
        });
        assert!(matches!(
            run_cheat(&strategy, &params(1), 10),
            Err(AdversaryError::Causality(_))
        ));
    }

    #[test]
    fn report_is_reproducible() {
        let a = run_cheat(&xi_strategy(), &params(2), 500).unwrap();
        let b = run_cheat(&xi_strategy(), &params(2), 500).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 500);
        assert!(a.successes <= a.region_successes[0].min(a.region_successes[1]));
    }
}
