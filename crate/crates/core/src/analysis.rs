//! Collision statistics for multiple identities.
//!
//! For an MDS outer code, `n_c` challenges at distinct outer positions are
//! accepted by exactly a `q^(-n_c)` fraction of all identities. This module
//! estimates that fraction by Monte Carlo, counts it exactly on small codes,
//! checks the underlying equidistribution of outer codeword symbols and
//! computes the challenge count at which sending the identity becomes
//! cheaper.

use std::collections::HashSet;
use std::io::Write;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::code::{Challenge, CodeError, CodeParams, IdCode, Identity};
use crate::gf2m::{Backend, FieldElem};
use crate::gfext::ExtElem;

/// Work is split into this many seeded streams regardless of thread count,
/// so results do not depend on the machine.
const WORK_CHUNKS: u64 = 64;

/// Largest message space enumerated by the exhaustive helpers.
pub const MAX_ENUMERATION_BITS: u64 = 24;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid experiment: {0}")]
    InvalidExperiment(&'static str),
    #[error("{requested} challenges requested but only {available} distinct randomness values exist")]
    TooManyChallenges { requested: u128, available: u128 },
    #[error("{requested} positions exceed the outer dimension {outer_dim}")]
    TooManyPositions { requested: usize, outer_dim: usize },
    #[error("evaluation positions must be distinct")]
    DuplicatePositions,
    #[error("instance too large to enumerate (2^{0} cases)")]
    TooLarge(u64),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the `n_c` challenges of one experiment pick their randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChallengeMode {
    /// Every challenge uses a different outer position `r1`; acceptance is
    /// then exactly `q^(-n_c)`.
    #[default]
    DistinctOuter,
    /// Each challenge draws `(r1, r2)` independently; repeated positions
    /// make the constraints dependent.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionExperiment {
    pub params: CodeParams,
    pub n_challenges: u32,
    pub num_samples: u64,
    pub seed: u64,
    pub mode: ChallengeMode,
    pub backend: Backend,
}

impl CollisionExperiment {
    pub fn new(
        params: CodeParams,
        n_challenges: u32,
        num_samples: u64,
        seed: u64,
    ) -> Result<Self, AnalysisError> {
        if n_challenges < 1 {
            return Err(AnalysisError::InvalidExperiment("n_challenges must be at least 1"));
        }
        if num_samples < 1 {
            return Err(AnalysisError::InvalidExperiment("num_samples must be at least 1"));
        }
        Ok(CollisionExperiment {
            params,
            n_challenges,
            num_samples,
            seed,
            mode: ChallengeMode::DistinctOuter,
            // tables exist for every m; the bench regime does not apply here
            backend: Backend::Zech,
        })
    }

    pub fn with_mode(mut self, mode: ChallengeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionResult {
    pub params: CodeParams,
    pub n_challenges: u32,
    pub num_samples: u64,
    pub accept_count: u64,
    pub fraction: f64,
    /// `q^(-n_c)`.
    pub theory: f64,
    /// Binomial standard error `sqrt(p(1-p)/N)` at `p = theory`.
    pub std_error: f64,
}

impl CollisionResult {
    /// `|fraction - theory| ≤ sigmas · std_error`.
    pub fn within(&self, sigmas: f64) -> bool {
        (self.fraction - self.theory).abs() <= sigmas * self.std_error
    }
}

/// Generates `n` challenges from `id` under the given randomness mode.
pub fn make_challenges<R: Rng + ?Sized>(
    code: &IdCode,
    id: &Identity,
    n: u32,
    mode: ChallengeMode,
    rng: &mut R,
) -> Result<Vec<Challenge>, AnalysisError> {
    let params = code.params();
    let bits = params.outer_len_log2();
    let (available, pool_bits) = match mode {
        ChallengeMode::DistinctOuter => (bits, bits),
        ChallengeMode::Independent => (bits + params.m() as u64, bits),
    };
    if available < 128 && n as u128 > 1u128 << available {
        return Err(AnalysisError::TooManyChallenges {
            requested: n as u128,
            available: 1u128 << available,
        });
    }
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(n as usize);
    while out.len() < n as usize {
        let (r1, r2) = code.sample_randomness(rng);
        if mode == ChallengeMode::DistinctOuter && pool_bits <= 128 && !used.insert(r1.clone()) {
            continue;
        }
        out.push(code.challenge_at(id, r1, r2)?);
    }
    Ok(out)
}

fn accepts_all(code: &IdCode, id: &Identity, challenges: &[Challenge]) -> Result<bool, CodeError> {
    for ch in challenges {
        if !code.verify_challenge(id, ch)?.accepted {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fixes a reference identity, issues `n_c` challenges from it and counts
/// how many uniformly sampled identities accept all of them.
pub fn run_collision_experiment(exp: &CollisionExperiment) -> Result<CollisionResult, AnalysisError> {
    let params = exp.params;
    let code = IdCode::new(params, exp.backend)?;
    params.outer_dim_usize()?;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
    let reference = Identity::random(params, &mut rng);
    let challenges = make_challenges(&code, &reference, exp.n_challenges, exp.mode, &mut rng)?;

    let chunks = WORK_CHUNKS.min(exp.num_samples);
    let accept_count = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<u64, CodeError> {
            let lo = exp.num_samples * chunk / chunks;
            let hi = exp.num_samples * (chunk + 1) / chunks;
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            rng.set_stream(chunk + 1);
            let mut count = 0;
            for _ in lo..hi {
                let candidate = Identity::random(params, &mut rng);
                if accepts_all(&code, &candidate, &challenges)? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let n = exp.num_samples as f64;
    let theory = (params.q() as f64).powi(-(exp.n_challenges as i32));
    Ok(CollisionResult {
        params,
        n_challenges: exp.n_challenges,
        num_samples: exp.num_samples,
        accept_count,
        fraction: accept_count as f64 / n,
        theory,
        std_error: (theory * (1.0 - theory) / n).sqrt(),
    })
}

pub fn run_collision_grid(grid: &[CollisionExperiment]) -> Result<Vec<CollisionResult>, AnalysisError> {
    grid.iter().map(run_collision_experiment).collect()
}

/// The `k = 3, δ = 2` grid over `q ∈ {16, 64, 256}` and `n_c ∈ {1, 2, 3}`.
pub fn reference_grid(num_samples: u64, seed: u64) -> Vec<CollisionExperiment> {
    let mut grid = Vec::new();
    for m in [4, 6, 8] {
        for n_c in 1..=3 {
            let params = CodeParams::new(m, 3, 2).expect("valid grid parameters");
            let exp_seed = seed ^ ((m as u64) << 32 | n_c as u64);
            grid.push(
                CollisionExperiment::new(params, n_c, num_samples, exp_seed)
                    .expect("valid experiment"),
            );
        }
    }
    grid
}

/// Counts the identities accepting every challenge, by enumerating all of
/// them. Returns `(accepting, total)`.
pub fn exhaustive_acceptance(
    code: &IdCode,
    challenges: &[Challenge],
) -> Result<(u64, u64), AnalysisError> {
    let params = code.params();
    let bits = params
        .identity_bits()
        .to_u64_digits()
        .first()
        .copied()
        .unwrap_or(0);
    if params.identity_bits() > BigUint::from(MAX_ENUMERATION_BITS) {
        return Err(AnalysisError::TooLarge(bits));
    }
    let total = 1u64 << bits;
    let accepting = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<u64, CodeError> {
            let id = Identity::from_index(params, idx)?;
            Ok(accepts_all(code, &id, challenges)? as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok((accepting, total))
}

/// Number of randomness pairs `(r1, r2)` on which two identities produce
/// the same tag, out of `q^k · q`.
pub fn pairwise_collisions(
    code: &IdCode,
    a: &Identity,
    b: &Identity,
) -> Result<(u64, u64), AnalysisError> {
    let params = code.params();
    let bits = params.outer_len_log2() + params.m() as u64;
    if bits > MAX_ENUMERATION_BITS {
        return Err(AnalysisError::TooLarge(bits));
    }
    let mut collisions = 0;
    for r1 in 0..1u128 << params.outer_len_log2() {
        let r1 = code.ext().from_index(r1).map_err(CodeError::from)?;
        let oa = code.outer_eval(a, &r1)?;
        let ob = code.outer_eval(b, &r1)?;
        for r2 in 0..params.q() {
            let r2 = FieldElem(r2 as u16);
            if code.inner_eval(oa.coeffs(), r2) == code.inner_eval(ob.coeffs(), r2) {
                collisions += 1;
            }
        }
    }
    Ok((collisions, 1 << bits))
}

fn outcome_counts(
    code: &IdCode,
    positions: &[ExtElem],
) -> Result<(Vec<u64>, u64), AnalysisError> {
    let params = code.params();
    let outer_dim = params.outer_dim_usize()?;
    if positions.len() > outer_dim {
        return Err(AnalysisError::TooManyPositions {
            requested: positions.len(),
            outer_dim,
        });
    }
    let distinct: HashSet<&ExtElem> = positions.iter().collect();
    if distinct.len() != positions.len() {
        return Err(AnalysisError::DuplicatePositions);
    }
    let message_bits = params.identity_bits().to_u64_digits().first().copied().unwrap_or(0);
    let cell_bits = params.outer_len_log2() * positions.len() as u64;
    if params.identity_bits() > BigUint::from(MAX_ENUMERATION_BITS) || cell_bits > MAX_ENUMERATION_BITS
    {
        return Err(AnalysisError::TooLarge(message_bits.max(cell_bits)));
    }
    let ext = code.ext();
    let symbol_bits = params.outer_len_log2();
    let mut counts = vec![0u64; 1 << cell_bits];
    for msg in 0..1u64 << message_bits {
        let id = Identity::from_index(params, msg)?;
        let mut cell = 0usize;
        for (i, pos) in positions.iter().enumerate() {
            let v = ext.to_index(&code.outer_eval(&id, pos)?).map_err(CodeError::from)?;
            cell |= (v as usize) << (symbol_bits as usize * i);
        }
        counts[cell] += 1;
    }
    Ok((counts, 1 << message_bits))
}

/// Enumerates every outer message, evaluates it at the given distinct
/// positions and reports whether every vector of outer symbols occurs
/// equally often. Small parameters only.
pub fn mds_equidistribution_check(
    params: CodeParams,
    positions: &[ExtElem],
) -> Result<bool, AnalysisError> {
    let code = IdCode::new(params, Backend::Zech)?;
    let (counts, messages) = outcome_counts(&code, positions)?;
    let expected = messages / counts.len() as u64;
    Ok(expected * counts.len() as u64 == messages && counts.iter().all(|&c| c == expected))
}

/// Per-vector occurrence counts behind [`mds_equidistribution_check`],
/// indexed by the concatenated outer-symbol indices (first position lowest).
pub fn outer_outcome_counts(
    params: CodeParams,
    positions: &[ExtElem],
) -> Result<Vec<u64>, AnalysisError> {
    let code = IdCode::new(params, Backend::Zech)?;
    Ok(outcome_counts(&code, positions)?.0)
}

/// `floor(k/(k+2) · q^(k-δ))`: the largest number of challenges whose total
/// size does not exceed the identity size.
pub fn breakeven_challenges(params: CodeParams) -> BigUint {
    params.outer_dim() * params.k() / (params.k() + 2)
}

/// Least-squares slope of `ln(fraction)` against `n_c · ln q`, over rows
/// with at least `min_accepts` accepting samples.
pub fn log_slope(results: &[CollisionResult], min_accepts: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.accept_count >= min_accepts && r.accept_count > 0)
        .map(|r| {
            (
                r.n_challenges as f64 * (r.params.q() as f64).ln(),
                r.fraction.ln(),
            )
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub const COLLISION_CSV_HEADER: [&str; 9] = [
    "m", "k", "delta", "n_c", "samples", "accepts", "fraction", "theory", "std_error",
];

/// Writes one row per result, sorted by `(m, k, delta, n_c)`.
pub fn emit_collision_csv<W: Write>(results: &[CollisionResult], out: W) -> Result<(), AnalysisError> {
    let mut rows: Vec<&CollisionResult> = results.iter().collect();
    rows.sort_by_key(|r| (r.params, r.n_challenges));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLLISION_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.params.m().to_string(),
            r.params.k().to_string(),
            r.params.delta().to_string(),
            r.n_challenges.to_string(),
            r.num_samples.to_string(),
            r.accept_count.to_string(),
            format!("{:e}", r.fraction),
            format!("{:e}", r.theory),
            format!("{:e}", r.std_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}
