//! Command-line front end.
//!
//! Every flag can also be set through an `IDCODE_*` environment variable.
//! `verify` exits 0 on accept, 1 on reject and 2 on malformed input; every
//! other failure also exits 2.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, ChallengeMode, CollisionExperiment};
use crate::bench::{self, BenchConfig, BenchError};
use crate::code::{Challenge, CodeError, CodeParams, IdCode, Identity};
use crate::gf2m::Backend;
use crate::netdemo::session::{self, default_backend, write_stats_csv};
use crate::netdemo::{NetError, SendMode, SenderConfig, VerifierConfig};

#[derive(Debug, Parser)]
#[command(name = "idcode", version, about = "Reed-Solomon identification codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, env = "IDCODE_M")]
    pub m: Option<u32>,
    #[arg(long, env = "IDCODE_K")]
    pub k: Option<u32>,
    #[arg(long, env = "IDCODE_DELTA")]
    pub delta: Option<u32>,
    /// `m,k,delta` in one flag; overrides --m/--k/--delta.
    #[arg(long, env = "IDCODE_PARAMS")]
    pub params: Option<CodeParams>,
}

impl ParamArgs {
    fn get(&self) -> Result<Option<CodeParams>, CliError> {
        if let Some(p) = self.params {
            return Ok(Some(p));
        }
        match (self.m, self.k, self.delta) {
            (None, None, None) => Ok(None),
            (Some(m), Some(k), Some(d)) => Ok(Some(CodeParams::new(m, k, d)?)),
            _ => Err(CliError::Usage("--m, --k and --delta must be given together".into())),
        }
    }

    fn require(&self) -> Result<CodeParams, CliError> {
        self.get()?
            .ok_or_else(|| CliError::Usage("parameters required (--m --k --delta or --params)".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollideMode {
    Distinct,
    Independent,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random identity file.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IDCODE_OUT")]
        out: PathBuf,
    },
    /// Print a challenge for an identity.
    Tag {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_IDENTITY_FILE")]
        identity_file: PathBuf,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Check a hex challenge against an identity.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_IDENTITY_FILE")]
        identity_file: PathBuf,
        challenge: String,
    },
    /// Monte Carlo collision fractions as CSV.
    Collide {
        /// Single parameter point; defaults to k=3, delta=2, m in {4, 6, 8}.
        #[command(flatten)]
        params: ParamArgs,
        /// Runs n_c = 1..=N.
        #[arg(long, env = "IDCODE_N_CHALLENGES", default_value_t = 3)]
        n_challenges: u32,
        #[arg(long, env = "IDCODE_SAMPLES", default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IDCODE_MODE", value_enum, default_value_t = CollideMode::Distinct)]
        mode: CollideMode,
        #[arg(long, env = "IDCODE_OUT")]
        out: Option<PathBuf>,
    },
    /// Tag timing against identity transmission time as CSV.
    Bench {
        /// Single parameter point; defaults to the built-in grid.
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_LINK_RATE", default_value_t = bench::DEFAULT_LINK_RATE_BPS)]
        link_rate: f64,
        #[arg(long, env = "IDCODE_REPETITIONS", default_value_t = 5)]
        repetitions: u32,
        /// Seconds per grid point.
        #[arg(long, env = "IDCODE_TIME_BUDGET", default_value_t = 10.0)]
        time_budget: f64,
        /// Restrict to one backend.
        #[arg(long, env = "IDCODE_BACKEND")]
        backend: Option<Backend>,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IDCODE_OUT")]
        out: Option<PathBuf>,
    },
    /// Run a sender session against a verifier.
    Send {
        /// Verifier address, host:port.
        #[arg(env = "IDCODE_CONNECT")]
        endpoint: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_IDENTITY_FILE")]
        identity_file: PathBuf,
        #[arg(long, env = "IDCODE_MODE", default_value_t = SendMode::Identify)]
        mode: SendMode,
        #[arg(long, env = "IDCODE_COUNT", default_value_t = 1)]
        count: u64,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IDCODE_TIMEOUT_MS", default_value_t = 5000)]
        timeout_ms: u64,
        #[arg(long, env = "IDCODE_STATS_CSV")]
        stats_csv: Option<PathBuf>,
    },
    /// Serve as verifier until interrupted.
    Listen {
        /// Bind address, host:port.
        #[arg(long, env = "IDCODE_BIND", default_value = "127.0.0.1:7878")]
        bind: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "IDCODE_IDENTITY_FILE")]
        identity_file: PathBuf,
        #[arg(long, env = "IDCODE_FLIP_PROB", default_value_t = 0.0)]
        flip_prob: f64,
        #[arg(long, env = "IDCODE_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("malformed challenge: {0}")]
    MalformedChallenge(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

impl CliError {
    /// Output closed early by the reader, as in `idcode tag ... | head -1`.
    fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            CliError::Analysis(AnalysisError::Csv(e)) | CliError::Bench(BenchError::Csv(e)) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            CliError::Analysis(AnalysisError::Io(e)) | CliError::Bench(BenchError::Io(e)) => Some(e),
            _ => None,
        };
        io.is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
    }
}

fn read_identity(params: CodeParams, path: &Path) -> Result<Identity, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Identity::from_bytes(params, &bytes)?)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::File {
            path: p.clone(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn dispatch(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Keygen { params, seed, out } => {
            let params = params.require()?;
            let id = Identity::random(params, &mut ChaCha8Rng::seed_from_u64(seed));
            fs::write(&out, id.to_bytes()).map_err(|source| CliError::File { path: out, source })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tag {
            params,
            identity_file,
            seed,
        } => {
            let params = params.require()?;
            let id = read_identity(params, &identity_file)?;
            let code = IdCode::new(params, default_backend(params))?;
            let ch = code.generate_challenge(&id, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let mut out = io::stdout().lock();
            writeln!(out, "{}", hex::encode(ch.to_bytes(&params)))?;
            writeln!(out, "{ch}")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            params,
            identity_file,
            challenge,
        } => {
            let params = params.require()?;
            let id = read_identity(params, &identity_file)?;
            let bytes = hex::decode(challenge.trim())
                .map_err(|e| CliError::MalformedChallenge(e.to_string()))?;
            let ch = Challenge::from_bytes(&params, &bytes)
                .map_err(|e| CliError::MalformedChallenge(e.to_string()))?;
            let code = IdCode::new(params, default_backend(params))?;
            let r = code.verify_challenge(&id, &ch)?;
            let verdict = if r.accepted { "accept" } else { "reject" };
            writeln!(io::stdout(), "{verdict} recomputed_tag={} received_tag={}", r.recomputed_tag, ch.tag)?;
            Ok(ExitCode::from(if r.accepted { EXIT_ACCEPT } else { EXIT_REJECT }))
        }
        Command::Collide {
            params,
            n_challenges,
            samples,
            seed,
            mode,
            out,
        } => {
            let mode = match mode {
                CollideMode::Distinct => ChallengeMode::DistinctOuter,
                CollideMode::Independent => ChallengeMode::Independent,
            };
            let grid: Vec<CollisionExperiment> = match params.get()? {
                Some(p) => (1..=n_challenges)
                    .map(|n| CollisionExperiment::new(p, n, samples, seed ^ n as u64))
                    .collect::<Result<_, _>>()?,
                None => analysis::reference_grid(samples, seed)
                    .into_iter()
                    .filter(|e| e.n_challenges <= n_challenges)
                    .collect(),
            };
            let grid: Vec<_> = grid.into_iter().map(|e| e.with_mode(mode)).collect();
            let results = analysis::run_collision_grid(&grid)?;
            analysis::emit_collision_csv(&results, output(&out)?)?;
            if let Some(slope) = analysis::log_slope(&results, 20) {
                eprintln!("slope of ln(fraction) against n_c ln q: {slope:.4}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            params,
            link_rate,
            repetitions,
            time_budget,
            backend,
            seed,
            out,
        } => {
            if !(time_budget >= 0.0 && time_budget.is_finite()) {
                return Err(CliError::Usage("--time-budget must be a non-negative number".into()));
            }
            let mut cfg = BenchConfig {
                link_rate_bps: link_rate,
                repetitions,
                time_budget: Duration::from_secs_f64(time_budget),
                seed,
                ..Default::default()
            };
            if let Some(p) = params.get()? {
                cfg.param_grid = vec![p];
            }
            if let Some(b) = backend {
                cfg.backends = vec![b];
            }
            let rows = bench::run_bench(&cfg)?;
            bench::emit_bench_csv(&rows, output(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Send {
            endpoint,
            params,
            identity_file,
            mode,
            count,
            seed,
            timeout_ms,
            stats_csv,
        } => {
            let params = params.require()?;
            let id = read_identity(params, &identity_file)?;
            let cfg = SenderConfig {
                timeout: Duration::from_millis(timeout_ms),
                ..SenderConfig::new(params, mode, count, seed)
            };
            let stats = session::run_sender(endpoint.as_str(), &id, &cfg)?;
            let mut lat = stats.latencies_ns();
            lat.sort_unstable();
            let median_us = lat.get(lat.len() / 2).map(|&n| n as f64 / 1e3).unwrap_or(f64::NAN);
            writeln!(
                io::stdout(),
                "exchanges={} accepts={} rejects={} frame_drops={} bytes_sent={} median_latency_us={median_us:.1}",
                stats.exchanges.len(),
                stats.accepts,
                stats.rejects,
                stats.frame_drops,
                stats.bytes_sent
            )?;
            if let Some(path) = stats_csv {
                write_stats_csv(&stats, output(&Some(path))?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Listen {
            bind,
            params,
            identity_file,
            flip_prob,
            seed,
        } => {
            let params = params.require()?;
            let id = read_identity(params, &identity_file)?;
            let cfg = VerifierConfig {
                flip_prob,
                seed,
                ..VerifierConfig::new(id)
            };
            let handle = session::spawn_verifier(bind.as_str(), cfg)?;
            writeln!(io::stdout(), "listening on {}", handle.local_addr())?;
            io::stdout().flush()?;
            let stats = handle.join();
            writeln!(
                io::stdout(),
                "accepts={} rejects={} frame_drops={}",
                stats.accepts, stats.rejects, stats.frame_drops
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
