//! Bit commitment from the transfer: committing to `b` is running the
//! transfer with input `b`; unveiling is `B_b` handing `x_b` to the adjacent
//! `A_b`, who accepts only inside `[h, h + delta_h]`.

use thiserror::Error;

use crate::adversary::{run_cheat, AdversaryError, BasisStrategy, CheatStrategy};
use crate::bits::BitString;
use crate::bounds::security_bound;
use crate::protocol::{error_accept, run_honest, ProtocolError, ProtocolParams, Transcript};
use crate::spacetime::{in_region, validate_message, Agent, Message, Payload};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommitError {
    #[error("unveil delay must be finite and non-negative, got {0}")]
    InvalidDelay(f64),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentOutcome {
    pub b: bool,
    pub unveil: Message,
    pub string_matches: bool,
    pub in_window: bool,
    pub accepted: bool,
    /// Time from which Bob is bound, the time coordinate of `P'`.
    pub t_prime: f64,
}

/// Commit phase: an honest run with input `b` and inputs `x_0, x_1`
/// drawn from the parameter seed.
pub fn commit(params: &ProtocolParams, b: bool) -> Result<Transcript, CommitError> {
    let mut rng = params.seeds().stream("commit.inputs", 0);
    let x0 = BitString::random(params.n, &mut rng);
    let x1 = BitString::random(params.n, &mut rng);
    Ok(run_honest(params, b, &x0, &x1)?)
}

/// `B_b` sends `claimed` to `A_b` at `delay` after obtaining `x_b`.
/// Acceptance requires a match with `x_b` on the detected pairs (up to
/// `floor(gamma n)` errors when `gamma > 0`) and reception inside `R_b`.
pub fn unveil(
    params: &ProtocolParams,
    commitment: &Transcript,
    claimed: &BitString,
    delay: f64,
) -> Result<CommitmentOutcome, CommitError> {
    if !(delay >= 0.0) || !delay.is_finite() {
        return Err(CommitError::InvalidDelay(delay));
    }
    let b = commitment.b;
    let i = b as usize;
    let output = commitment
        .output
        .as_ref()
        .ok_or_else(|| ProtocolError::Invariant("committed run has no output".into()))?;
    let at = params.geometry.event_at(Agent::bob_outpost(i).site(), output.at.t + delay);
    let unveil = Message {
        step: "unveil".into(),
        sender: Agent::bob_outpost(i),
        receiver: Agent::alice_outpost(i),
        payload: Payload::classical("x", claimed.clone()),
        emitted: at,
        received: at,
    };
    validate_message(&unveil).map_err(ProtocolError::from)?;
    let expected = commitment.expected_output()?;
    let string_matches = if params.gamma > 0.0 {
        error_accept(claimed, &expected, params.gamma)
    } else {
        claimed == &expected
    };
    let in_window = in_region(&unveil.received, params.geometry.region(i));
    Ok(CommitmentOutcome {
        b,
        unveil,
        string_matches,
        in_window,
        accepted: string_matches && in_window,
        t_prime: params.geometry.p_prime.t,
    })
}

/// Honest commit followed by an unveil of Bob's own output.
pub fn commit_and_unveil(params: &ProtocolParams, b: bool, unveil_delay: f64) -> Result<CommitmentOutcome, CommitError> {
    if !(unveil_delay >= 0.0) || !unveil_delay.is_finite() {
        return Err(CommitError::InvalidDelay(unveil_delay));
    }
    let transcript = commit(params, b)?;
    let y = transcript
        .output
        .as_ref()
        .map(|o| o.bits.clone())
        .ok_or_else(|| ProtocolError::Invariant("committed run has no output".into()))?;
    unveil(params, &transcript, &y, unveil_delay)
}

/// A committer following the protocol with `b` (basis `c = 0`, hence
/// announcement `b' = b`), viewed as a strategy.
pub fn honest_committer(b: bool) -> CheatStrategy {
    CheatStrategy::per_pair(BasisStrategy::new(false, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BindingReport {
    pub strategy: String,
    pub n: usize,
    pub trials: u64,
    /// Estimated probability of a successful unveil of `0` and of `1`.
    pub p0: f64,
    pub p1: f64,
    pub sum: f64,
    /// Standard error of `p0 + p1`.
    pub standard_error: f64,
    /// `1 + (1/2 + 1/(2 sqrt 2))^n`.
    pub bound: f64,
    /// `sum <= bound + 3 standard errors`.
    pub within_bound: bool,
}

/// Estimates how often the strategy could unveil each bit and compares the
/// total with `1 + p_n`.
pub fn binding_experiment(strategy: &CheatStrategy, params: &ProtocolParams, trials: u64) -> Result<BindingReport, CommitError> {
    let report = run_cheat(strategy, params, trials)?;
    let t = report.trials as f64;
    let p0 = report.region_estimate(0);
    let p1 = report.region_estimate(1);
    let both = report.successes as f64 / t;
    let variance = p0 * (1.0 - p0) + p1 * (1.0 - p1) + 2.0 * (both - p0 * p1);
    let standard_error = (variance.max(0.0) / t).sqrt();
    let bound = 1.0 + security_bound(params.n);
    Ok(BindingReport {
        strategy: report.strategy,
        n: params.n,
        trials: report.trials,
        p0,
        p1,
        sum: p0 + p1,
        standard_error,
        bound,
        within_bound: p0 + p1 <= bound + 3.0 * standard_error,
    })
}
