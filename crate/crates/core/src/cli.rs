//! Batch front end behind the `scot` binary.

use std::ffi::OsString;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::adversary::{exact_cheat_probability, run_cheat, xi_strategy, AdversaryError, BasisStrategy, CheatStrategy};
use crate::bitcommit::{binding_experiment, commit_and_unveil, honest_committer, CommitError};
use crate::bits::BitString;
use crate::bounds::{
    self, error_bound, error_bound_base, gamma_threshold, lemma_checks, norm_identity_check, security_bound,
    BoundsError, XI_PAIR_PROBABILITY,
};
use crate::protocol::{run_honest, ProtocolError, ProtocolParams};
use crate::report::{self, fmt_f64, Format, Report};
use crate::seed::SeedTree;
use crate::spacetime::{standard_geometry, GeometryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    /// Measure each pair in the ξ basis, announce b' = 0.
    Xi,
    /// Measure every qubit in the computational basis.
    Basis0,
    /// Measure every qubit in the Hadamard basis.
    Basis1,
}

impl StrategyChoice {
    fn strategy(self) -> CheatStrategy {
        match self {
            StrategyChoice::Xi => xi_strategy(),
            StrategyChoice::Basis0 => CheatStrategy::per_pair(BasisStrategy::new(false, false)),
            StrategyChoice::Basis1 => CheatStrategy::per_pair(BasisStrategy::new(true, false)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RunConfig {
    /// Number of qubit pairs
    #[arg(long, global = true, default_value_t = 16)]
    pub n: usize,
    /// Monte Carlo trials
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: u64,
    /// Master seed
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Distance scale h (light travel time from P to each output region)
    #[arg(long, global = true, default_value_t = 1.0)]
    pub h: f64,
    /// Duration of each output region
    #[arg(long = "delta-h", global = true, default_value_t = 0.1)]
    pub delta_h: f64,
    /// Tolerated error fraction
    #[arg(long, global = true, default_value_t = 0.0)]
    pub gamma: f64,
    /// Per-qubit loss probability
    #[arg(long = "loss-prob", global = true, default_value_t = 0.0)]
    pub loss_prob: f64,
    /// Report serialization
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// One honest run and a correctness summary
    Honest {
        /// Bob's choice b
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        b: u8,
    },
    /// Monte Carlo estimate of a cheating strategy against its exact value
    Cheat {
        #[arg(long, value_enum, default_value_t = StrategyChoice::Xi)]
        strategy: StrategyChoice,
    },
    /// Bound tables for n = 1..=N at the given gamma
    Bounds,
    /// Norm identity on random measurement families and the norm lemmas
    Normcheck {
        /// Random families per k (n is capped at 2)
        #[arg(long, default_value_t = 20)]
        families: usize,
        /// Random instances per lemma
        #[arg(long = "lemma-trials", default_value_t = 100)]
        lemma_trials: usize,
        /// Operator dimension for the lemmas
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    /// Largest gamma for which the error-tolerant bound decays
    Threshold,
    /// Commit, unveil, and binding estimates
    Bitcommit {
        /// Committed bit
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        b: u8,
        /// Unveil delay after Bob's output
        #[arg(long, default_value_t = 0.0)]
        delay: f64,
        #[arg(long, value_enum, default_value_t = StrategyChoice::Xi)]
        strategy: StrategyChoice,
    },
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "scot", version, about = "Spacetime-constrained oblivious transfer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::InvalidParams(_)
            | ProtocolError::LengthMismatch { .. }
            | ProtocolError::InsufficientSamples { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::Protocol(p) => p.into(),
            AdversaryError::NoTrials | AdversaryError::TooLarge { .. } | AdversaryError::NotProduct => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Quantum(_) | BoundsError::Dimension(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CommitError> for CliError {
    fn from(e: CommitError) -> Self {
        match e {
            CommitError::InvalidDelay(_) => CliError::Validation(e.to_string()),
            CommitError::Protocol(p) => p.into(),
            CommitError::Adversary(a) => a.into(),
        }
    }
}

/// Exit code with what goes to standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let mut text = text;
                if !text.contains("Usage:") {
                    text.push_str(&format!("\n{}\n", Cli::command().render_usage()));
                }
                Outcome { code: 1, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => Outcome {
            code: 0,
            stdout: report.render(cli.config.output.into()),
            stderr: String::new(),
        },
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Validation(m) => ("error", m),
                CliError::Internal(m) => ("internal error", m),
            };
            Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr: format!("{kind}: {msg}\n"),
            }
        }
    }
}

fn params(config: &RunConfig) -> Result<ProtocolParams, CliError> {
    let geometry = standard_geometry(config.h, config.delta_h)?;
    Ok(ProtocolParams::new(config.n, geometry, config.seed)?
        .with_gamma(config.gamma)?
        .with_loss_prob(config.loss_prob)?)
}

fn config_section(report: &mut Report, cli: &Cli) {
    let c = &cli.config;
    let name = match cli.command {
        Command::Honest { .. } => "honest",
        Command::Cheat { .. } => "cheat",
        Command::Bounds => "bounds",
        Command::Normcheck { .. } => "normcheck",
        Command::Threshold => "threshold",
        Command::Bitcommit { .. } => "bitcommit",
    };
    report
        .section("config")
        .field("subcommand", name)
        .field("n", c.n)
        .field("trials", c.trials)
        .field("seed", c.seed)
        .float("h", c.h)
        .float("delta_h", c.delta_h)
        .float("gamma", c.gamma)
        .float("loss_prob", c.loss_prob);
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let config = &cli.config;
    let mut out = Report::new();
    config_section(&mut out, cli);
    match &cli.command {
        Command::Honest { b } => {
            let p = params(config)?;
            let mut rng = p.seeds().stream("cli.inputs", 0);
            let x0 = BitString::random(p.n, &mut rng);
            let x1 = BitString::random(p.n, &mut rng);
            match run_honest(&p, *b == 1, &x0, &x1) {
                Ok(t) => {
                    let correct = t.output_correct(p.gamma);
                    report::transcript_report(&mut out, &t);
                    out.section("summary")
                        .flag("output_correct", correct)
                        .field("surviving_pairs", t.surviving.len());
                }
                Err(ProtocolError::Aborted) => {
                    out.section("summary").flag("aborted", true);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Cheat { strategy } => {
            let p = params(config)?;
            let s = strategy.strategy();
            let r = run_cheat(&s, &p, config.trials)?;
            let exact = exact_cheat_probability(&s, p.n)?;
            let bound = security_bound(p.n);
            report::cheat_report(&mut out, &r);
            out.section("comparison")
                .float("exact", exact)
                .float("bound", bound)
                .float("deviation_sigmas", (r.estimate() - exact) / r.proportion().standard_error_at(exact).max(f64::MIN_POSITIVE))
                .flag("exact_within_bound", exact <= bound + 1e-12);
        }
        Command::Bounds => {
            if config.n == 0 {
                return Err(BoundsError::ZeroN.into());
            }
            error_bound(1, config.gamma)?;
            let rows = (1..=config.n)
                .map(|n| {
                    let b = bounds::bound_report(n, Some(config.gamma))?;
                    Ok(vec![
                        n.to_string(),
                        fmt_f64(b.bound),
                        fmt_f64(b.cheat_lower),
                        fmt_f64(b.gap),
                        fmt_f64(b.error_bound.unwrap_or(f64::NAN)),
                    ])
                })
                .collect::<Result<Vec<_>, BoundsError>>()?;
            out.section("constants")
                .float("bound_base", bounds::BOUND_BASE)
                .float("xi_pair_probability", XI_PAIR_PROBABILITY)
                .float("error_bound_base", error_bound_base(config.gamma)?);
            out.table("bounds", &["n", "bound", "xi_probability", "gap", "error_bound"], rows);
        }
        Command::Normcheck { families, lemma_trials, dim } => {
            if config.n == 0 {
                return Err(BoundsError::ZeroN.into());
            }
            let seeds = SeedTree::new(config.seed).subtree("bounds");
            for n in 1..=config.n.min(bounds::operators::MAX_OPERATOR_N) {
                let mut rng = seeds.stream("normcheck", n as u64);
                let r = norm_identity_check(n, *families, &mut rng)?;
                report::norm_report(&mut out, &r);
                out.field("n", n);
                if !r.pass {
                    return Err(CliError::Internal(format!("norm identity failed at n = {n}")));
                }
            }
            let mut rng = seeds.stream("lemmas", 0);
            let l = lemma_checks(*lemma_trials, *dim, &mut rng)?;
            report::lemma_report(&mut out, &l);
            if !l.pass() {
                return Err(CliError::Internal("lemma check found a violation".into()));
            }
        }
        Command::Threshold => {
            let g = gamma_threshold();
            out.section("threshold")
                .float("gamma_star", g)
                .float("tolerance", bounds::THRESHOLD_TOL)
                .float("base_at_gamma_star", error_bound_base(g)?);
        }
        Command::Bitcommit { b, delay, strategy } => {
            let p = params(config)?;
            let o = commit_and_unveil(&p, *b == 1, *delay)?;
            report::commitment_report(&mut out, &o);
            let honest = binding_experiment(&honest_committer(*b == 1), &p, config.trials)?;
            report::binding_report(&mut out, "binding_honest", &honest);
            let cheat = binding_experiment(&strategy.strategy(), &p, config.trials)?;
            report::binding_report(&mut out, "binding_cheat", &cheat);
        }
    }
    Ok(out)
}
