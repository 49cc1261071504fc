//! Tag-computation timing against identity transmission time.
//!
//! Each grid point times `compute_tag` on a fixed random identity and fixed
//! randomness. Identity generation and serialization are outside the timed
//! region. Timing is single-threaded on the calling thread.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::{CodeError, CodeParams, IdCode, Identity};
use crate::gf2m::Backend;

pub const DEFAULT_LINK_RATE_BPS: f64 = 20e6;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench configuration: {0}")]
    Config(&'static str),
    #[error("clock failure: {0}")]
    Clock(&'static str),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub param_grid: Vec<CodeParams>,
    pub backends: Vec<Backend>,
    pub link_rate_bps: f64,
    pub repetitions: u32,
    /// Points whose first timed run exceeds this are skipped.
    pub time_budget: Duration,
    /// Minimum wall time of one timed batch; short tags are repeated until
    /// a batch reaches it.
    pub min_batch: Duration,
    /// Identities with more base-field symbols than this are not allocated.
    pub max_identity_symbols: u64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            param_grid: default_grid(),
            backends: Backend::ALL.to_vec(),
            link_rate_bps: DEFAULT_LINK_RATE_BPS,
            repetitions: 5,
            time_budget: Duration::from_secs(10),
            min_batch: Duration::from_millis(2),
            max_identity_symbols: 1 << 26,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn with_grid(grid: Vec<CodeParams>) -> Self {
        BenchConfig {
            param_grid: grid,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.param_grid.is_empty() {
            return Err(BenchError::Config("empty parameter grid"));
        }
        if self.backends.is_empty() {
            return Err(BenchError::Config("no backend selected"));
        }
        if self.repetitions < 3 {
            return Err(BenchError::Config("repetitions must be at least 3"));
        }
        if !(self.link_rate_bps > 0.0 && self.link_rate_bps.is_finite()) {
            return Err(BenchError::Config("link rate must be positive"));
        }
        Ok(())
    }
}

/// Every valid `(m, k, δ)` with `2 ≤ m ≤ max_m` and `k ≤ max_k`.
pub fn small_grid(max_m: u32, max_k: u32) -> Vec<CodeParams> {
    let mut grid = Vec::new();
    for m in 2..=max_m {
        for k in 2..=max_k {
            for d in 1..k {
                if let Ok(p) = CodeParams::new(m, k, d) {
                    grid.push(p);
                }
            }
        }
    }
    grid
}

pub fn default_grid() -> Vec<CodeParams> {
    let mut grid = small_grid(5, 4);
    for (m, k, d) in [(8, 3, 2), (8, 3, 1), (13, 7, 6), (13, 7, 5), (16, 3, 2)] {
        grid.push(CodeParams::new(m, k, d).expect("valid default grid point"));
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// First run took longer than the time budget.
    TimeBudget,
    /// Identity larger than the configured memory cap.
    Memory,
    /// Zech tables are only benchmarked for `mk ≤ 16`.
    ZechRegime,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::TimeBudget => "time-budget",
            SkipReason::Memory => "memory",
            SkipReason::ZechRegime => "zech-regime",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub params: CodeParams,
    pub backend: Backend,
    pub median_tag_seconds: f64,
    pub stddev_seconds: f64,
    pub identity_bits: BigUint,
    pub tx_seconds: f64,
    /// Sender and verifier each compute the tag once.
    pub end_to_end_seconds: f64,
    pub skipped: Option<SkipReason>,
}

impl BenchRow {
    fn new(params: CodeParams, backend: Backend, link_rate_bps: f64) -> Self {
        let identity_bits = params.identity_bits();
        let tx_seconds = identity_bits.to_f64().unwrap_or(f64::INFINITY) / link_rate_bps;
        BenchRow {
            params,
            backend,
            median_tag_seconds: f64::NAN,
            stddev_seconds: f64::NAN,
            identity_bits,
            tx_seconds,
            end_to_end_seconds: f64::NAN,
            skipped: None,
        }
    }

    fn set_timing(&mut self, median: f64, stddev: f64) {
        self.median_tag_seconds = median;
        self.stddev_seconds = stddev;
        self.end_to_end_seconds = 2.0 * median;
    }
}

pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Sample standard deviation.
pub fn stddev(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

fn time_point(cfg: &BenchConfig, params: CodeParams, backend: Backend) -> Result<BenchRow, BenchError> {
    let mut row = BenchRow::new(params, backend, cfg.link_rate_bps);
    if backend == Backend::Zech && !params.zech_regime() {
        row.skipped = Some(SkipReason::ZechRegime);
        return Ok(row);
    }
    if params.identity_symbols() > BigUint::from(cfg.max_identity_symbols) {
        row.skipped = Some(SkipReason::Memory);
        return Ok(row);
    }
    let code = IdCode::new(params, backend)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(params.m()) << 40);
    let id = Identity::random(params, &mut rng);
    let (r1, r2) = code.sample_randomness(&mut rng);

    // warm-up, also the single-run estimate
    let start = Instant::now();
    black_box(code.compute_tag(black_box(&id), black_box(&r1), black_box(r2))?);
    let single = start.elapsed();
    if single > cfg.time_budget {
        row.skipped = Some(SkipReason::TimeBudget);
        return Ok(row);
    }

    let mut batch = 1u64;
    loop {
        let start = Instant::now();
        for _ in 0..batch {
            black_box(code.compute_tag(black_box(&id), black_box(&r1), black_box(r2))?);
        }
        let elapsed = start.elapsed();
        if elapsed >= cfg.min_batch || batch >= 1 << 30 {
            break;
        }
        let scale = if elapsed.is_zero() {
            16.0
        } else {
            (cfg.min_batch.as_secs_f64() / elapsed.as_secs_f64() * 1.2).clamp(2.0, 16.0)
        };
        batch = ((batch as f64) * scale).ceil() as u64;
    }

    let mut samples = Vec::with_capacity(cfg.repetitions as usize);
    for _ in 0..cfg.repetitions {
        let start = Instant::now();
        for _ in 0..batch {
            black_box(code.compute_tag(black_box(&id), black_box(&r1), black_box(r2))?);
        }
        samples.push(start.elapsed().as_secs_f64() / batch as f64);
    }
    if samples.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(BenchError::Clock("non-monotone timer reading"));
    }
    row.set_timing(median(&samples), stddev(&samples));
    Ok(row)
}

/// Times every grid point and backend. Rows are sorted by
/// `(m, k, delta, backend)`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &params in &cfg.param_grid {
        for &backend in &cfg.backends {
            rows.push(time_point(cfg, params, backend)?);
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

fn sort_rows(rows: &mut [BenchRow]) {
    rows.sort_by_key(|r| (r.params, r.backend.as_str()));
}

pub const BENCH_CSV_HEADER: [&str; 10] = [
    "m",
    "k",
    "delta",
    "backend",
    "median_tag_s",
    "stddev_s",
    "identity_bits",
    "tx_s",
    "end_to_end_s",
    "skipped",
];

pub fn emit_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_CSV_HEADER)?;
    let num = |x: f64| if x.is_nan() { String::new() } else { format!("{x:e}") };
    for r in &rows {
        w.write_record([
            r.params.m().to_string(),
            r.params.k().to_string(),
            r.params.delta().to_string(),
            r.backend.to_string(),
            num(r.median_tag_seconds),
            num(r.stddev_seconds),
            r.identity_bits.to_string(),
            num(r.tx_seconds),
            num(r.end_to_end_seconds),
            r.skipped.map(|s| s.as_str()).unwrap_or("").to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(grid: Vec<CodeParams>) -> BenchConfig {
        BenchConfig {
            repetitions: 3,
            min_batch: Duration::from_micros(500),
            ..BenchConfig::with_grid(grid)
        }
    }

    #[test]
    fn config_errors() {
        assert!(matches!(run_bench(&quick(vec![])), Err(BenchError::Config(_))));
        let mut cfg = quick(vec![CodeParams::new(2, 2, 1).unwrap()]);
        cfg.repetitions = 0;
        assert!(matches!(run_bench(&cfg), Err(BenchError::Config(_))));
        cfg.repetitions = 3;
        cfg.link_rate_bps = 0.0;
        assert!(matches!(run_bench(&cfg), Err(BenchError::Config(_))));
    }

    #[test]
    fn transmission_time_at_13_7_6() {
        let p = CodeParams::new(13, 7, 6).unwrap();
        let row = BenchRow::new(p, Backend::Polynomial, DEFAULT_LINK_RATE_BPS);
        assert_eq!(row.identity_bits, BigUint::from(745_472u32));
        assert_eq!(row.tx_seconds, 745_472.0 / 20e6);
        assert!((row.tx_seconds - 0.0373).abs() < 1e-4);
    }

    #[test]
    fn skip_markers() {
        let mut cfg = quick(vec![CodeParams::new(13, 7, 6).unwrap()]);
        cfg.max_identity_symbols = 1000;
        let rows = run_bench(&cfg).unwrap();
        let reasons: Vec<_> = rows.iter().map(|r| (r.backend, r.skipped)).collect();
        assert_eq!(
            reasons,
            vec![
                (Backend::Polynomial, Some(SkipReason::Memory)),
                (Backend::Zech, Some(SkipReason::ZechRegime)),
            ]
        );
        let mut cfg = quick(vec![CodeParams::new(8, 3, 1).unwrap()]);
        cfg.backends = vec![Backend::Polynomial];
        cfg.time_budget = Duration::ZERO;
        assert_eq!(run_bench(&cfg).unwrap()[0].skipped, Some(SkipReason::TimeBudget));
    }

    #[test]
    fn definitions_and_ordering() {
        let grid = vec![
            CodeParams::new(3, 3, 2).unwrap(),
            CodeParams::new(2, 2, 1).unwrap(),
        ];
        let rows = run_bench(&quick(grid)).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].params, CodeParams::new(2, 2, 1).unwrap());
        assert_eq!(rows[0].backend, Backend::Polynomial);
        assert_eq!(rows[1].backend, Backend::Zech);
        for r in &rows {
            assert!(r.skipped.is_none());
            assert!(r.median_tag_seconds > 0.0);
            assert_eq!(r.end_to_end_seconds, 2.0 * r.median_tag_seconds);
        }
    }

    #[test]
    fn monotone_in_outer_degree() {
        for backend in Backend::ALL {
            let mut cfg = quick(vec![
                CodeParams::new(4, 3, 2).unwrap(),
                CodeParams::new(4, 3, 1).unwrap(),
            ]);
            cfg.backends = vec![backend];
            let rows = run_bench(&cfg).unwrap();
            assert!(rows[0].median_tag_seconds > rows[1].median_tag_seconds, "{rows:?}");
        }
    }

    #[test]
    fn csv_shapes() {
        let mut buf = Vec::new();
        emit_bench_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "m,k,delta,backend,median_tag_s,stddev_s,identity_bits,tx_s,end_to_end_s,skipped\n"
        );
        let p = CodeParams::new(13, 7, 6).unwrap();
        let mut row = BenchRow::new(p, Backend::Zech, DEFAULT_LINK_RATE_BPS);
        row.skipped = Some(SkipReason::ZechRegime);
        let mut buf = Vec::new();
        emit_bench_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "13,7,6,zech,,,745472,3.72736e-2,,zech-regime");
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), (32.0f64 / 7.0).sqrt());
    }
}
