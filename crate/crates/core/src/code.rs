//! The concatenated Reed-Solomon identification code `[q,k,δ]_RS2`.
//!
//! An identity is a polynomial `P` of degree `< q^(k-δ)` over GF(q^k). Its
//! tagging function takes randomness `(r1, r2) ∈ GF(q^k) × GF(q)`:
//!
//! 1. evaluate `P(r1)` in GF(q^k) (outer code, length `q^k`);
//! 2. read the `k` coefficients of `P(r1)` as a polynomial over GF(q) and
//!    evaluate it at `r2` (inner code, length `q`).
//!
//! A challenge is `(r1, r2, tag)`: `k + 2` symbols of GF(q).
//!
//! ```
//! use idcode::code::{CodeParams, IdCode, Identity};
//! use idcode::gf2m::Backend;
//! use rand::SeedableRng;
//!
//! let params = CodeParams::new(2, 2, 1).unwrap();
//! let code = IdCode::new(params, Backend::Zech).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let id = Identity::random(params, &mut rng);
//! let ch = code.generate_challenge(&id, &mut rng).unwrap();
//! assert!(code.verify_challenge(&id, &ch).unwrap().accepted);
//! assert_eq!(ch.to_bytes(&params).len(), 1);
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use thiserror::Error;

use crate::bits::{BitReader, BitWriter};
use crate::gf2m::{Backend, FieldElem, FieldError, FieldSpec, MAX_M};
use crate::gfext::{ExtElem, ExtError, ExtFieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid parameters (m={m}, k={k}, delta={delta}): {reason}")]
    InvalidParams {
        m: u32,
        k: u32,
        delta: u32,
        reason: &'static str,
    },
    #[error("parameter mismatch: expected {expected}, got {got}")]
    ParamsMismatch { expected: CodeParams, got: CodeParams },
    #[error("wrong length: expected {expected} bytes, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("nonzero padding bits after the last symbol")]
    TrailingGarbage,
    #[error("expected {expected} outer coefficients, got {got}")]
    WrongCoefficientCount { expected: usize, got: usize },
    #[error("{0} is too large to instantiate in memory")]
    TooLarge(CodeParams),
    #[error("malformed parameter string '{0}' (expected m,k,delta)")]
    Parse(String),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Code parameters `(m, k, δ)` with `q = 2^m > k > δ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeParams {
    m: u32,
    k: u32,
    delta: u32,
}

impl CodeParams {
    pub fn new(m: u32, k: u32, delta: u32) -> Result<Self, CodeError> {
        let invalid = |reason| CodeError::InvalidParams { m, k, delta, reason };
        if !(1..=MAX_M).contains(&m) {
            return Err(invalid("m must be in 1..=16"));
        }
        if delta < 1 {
            return Err(invalid("delta must be at least 1"));
        }
        if k <= delta {
            return Err(invalid("k must exceed delta"));
        }
        if (k as u64) >= 1u64 << m {
            return Err(invalid("q = 2^m must exceed k"));
        }
        Ok(CodeParams { m, k, delta })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    /// Base field size `q = 2^m`.
    pub fn q(&self) -> u32 {
        1 << self.m
    }

    /// log2 of the outer code length, `m·k`.
    pub fn outer_len_log2(&self) -> u64 {
        self.m as u64 * self.k as u64
    }

    /// log2 of the outer code dimension, `m·(k-δ)`.
    pub fn outer_dim_log2(&self) -> u64 {
        self.m as u64 * (self.k - self.delta) as u64
    }

    /// Outer code length `q^k`.
    pub fn outer_len(&self) -> BigUint {
        BigUint::one() << self.outer_len_log2()
    }

    /// Number of outer message coefficients `q^(k-δ)`.
    pub fn outer_dim(&self) -> BigUint {
        BigUint::one() << self.outer_dim_log2()
    }

    /// `q^(k-δ)` as a `usize`, for instantiating identities.
    pub fn outer_dim_usize(&self) -> Result<usize, CodeError> {
        // k·q^(k-δ) symbols must also be addressable
        if self.outer_dim_log2() + 8 >= usize::BITS as u64 {
            return Err(CodeError::TooLarge(*self));
        }
        Ok(1usize << self.outer_dim_log2())
    }

    /// Base-field symbols in one identity, `k·q^(k-δ)`.
    pub fn identity_symbols(&self) -> BigUint {
        self.outer_dim() * self.k
    }

    /// Identity size `m·k·2^(m(k-δ))` in bits.
    pub fn identity_bits(&self) -> BigUint {
        self.identity_symbols() * self.m
    }

    pub fn identity_bytes(&self) -> BigUint {
        (self.identity_bits() + 7u32) / 8u32
    }

    /// log2 of the number of identities; equal to [`identity_bits`](Self::identity_bits).
    pub fn num_identities_log2(&self) -> BigUint {
        self.identity_bits()
    }

    /// Challenge size `m·(k+2)` in bits.
    pub fn challenge_bits(&self) -> u64 {
        self.m as u64 * (self.k as u64 + 2)
    }

    pub fn challenge_bytes(&self) -> usize {
        self.challenge_bits().div_ceil(8) as usize
    }

    /// Worst-case fraction of randomness on which two distinct identities
    /// produce the same tag:
    /// `(q^(k-δ) - 1)/q^k + (k - 1)/q`.
    ///
    /// Distinct outer codewords agree on at most `q^(k-δ) - 1` of `q^k`
    /// positions; where they differ, the inner codewords agree on at most
    /// `k - 1` of `q` positions.
    pub fn epsilon2_bound(&self) -> Ratio<BigUint> {
        let q_k = self.outer_len();
        let outer = self.outer_dim() - 1u32;
        let inner = BigUint::from(self.k - 1) << (self.m as u64 * (self.k as u64 - 1));
        Ratio::new(outer + inner, q_k)
    }

    pub fn epsilon2_bound_f64(&self) -> f64 {
        let r = self.epsilon2_bound();
        let outer = (self.outer_dim_log2() as f64 - self.outer_len_log2() as f64).exp2();
        r.to_f64().unwrap_or(outer + (self.k - 1) as f64 / self.q() as f64)
    }

    /// Whether the code falls in the small-field regime `m·k ≤ 16` where
    /// table-based arithmetic is the natural choice.
    pub fn zech_regime(&self) -> bool {
        self.outer_len_log2() <= 16
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.m, self.k, self.delta)
    }
}

impl FromStr for CodeParams {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<u32> = s
            .trim()
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| CodeError::Parse(s.to_string()))?;
        match parts[..] {
            [m, k, delta] => CodeParams::new(m, k, delta),
            _ => Err(CodeError::Parse(s.to_string())),
        }
    }
}

/// An identity: the `q^(k-δ)` outer coefficients of `P_i`, stored flat as
/// `k` base-field symbols per coefficient (constant coefficient first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    params: CodeParams,
    symbols: Vec<FieldElem>,
    label: Option<String>,
}

impl Identity {
    pub fn zero(params: CodeParams) -> Result<Self, CodeError> {
        let n = params.outer_dim_usize()? * params.k as usize;
        Ok(Identity {
            params,
            symbols: vec![FieldElem::ZERO; n],
            label: None,
        })
    }

    /// Uniformly random identity (every symbol uniform over GF(q)).
    ///
    /// # Panics
    ///
    /// If the identity does not fit in memory; see [`CodeParams::outer_dim_usize`].
    pub fn random<R: Rng + ?Sized>(params: CodeParams, rng: &mut R) -> Self {
        let n = params.outer_dim_usize().expect("identity too large") * params.k as usize;
        let q = params.q();
        let symbols = (0..n).map(|_| FieldElem(rng.gen_range(0..q) as u16)).collect();
        Identity {
            params,
            symbols,
            label: None,
        }
    }

    /// Flat symbol list: coefficient `j` occupies `[j·k, (j+1)·k)`.
    pub fn from_symbols(params: CodeParams, symbols: Vec<FieldElem>) -> Result<Self, CodeError> {
        let expected = params.outer_dim_usize()? * params.k as usize;
        if symbols.len() != expected {
            return Err(CodeError::WrongCoefficientCount {
                expected: params.outer_dim_usize()?,
                got: symbols.len() / params.k as usize,
            });
        }
        if let Some(bad) = symbols.iter().find(|s| s.value() >= params.q()) {
            return Err(FieldError::ElementOutOfRange {
                value: bad.value(),
                m: params.m,
            }
            .into());
        }
        Ok(Identity {
            params,
            symbols,
            label: None,
        })
    }

    pub fn from_coefficients(params: CodeParams, coeffs: Vec<ExtElem>) -> Result<Self, CodeError> {
        let expected = params.outer_dim_usize()?;
        if coeffs.len() != expected {
            return Err(CodeError::WrongCoefficientCount {
                expected,
                got: coeffs.len(),
            });
        }
        let k = params.k as usize;
        let mut symbols = Vec::with_capacity(expected * k);
        for c in coeffs {
            if c.coeffs().len() != k {
                return Err(ExtError::WrongLength {
                    expected: k,
                    got: c.coeffs().len(),
                }
                .into());
            }
            symbols.extend_from_slice(c.coeffs());
        }
        Self::from_symbols(params, symbols)
    }

    /// The identity whose symbols are the base-q digits of `index`, symbol
    /// 0 least significant. Covers every identity when `identity_bits ≤ 64`.
    pub fn from_index(params: CodeParams, index: u64) -> Result<Self, CodeError> {
        let n = params.outer_dim_usize()? * params.k as usize;
        let m = params.m as u64;
        let mask = params.q() as u64 - 1;
        let symbols = (0..n as u64)
            .map(|j| {
                let shift = j * m;
                FieldElem(if shift >= 64 { 0 } else { ((index >> shift) & mask) as u16 })
            })
            .collect();
        Ok(Identity {
            params,
            symbols,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn symbols(&self) -> &[FieldElem] {
        &self.symbols
    }

    pub fn outer_dim(&self) -> usize {
        self.symbols.len() / self.params.k as usize
    }

    pub fn coefficient(&self, j: usize) -> ExtElem {
        let k = self.params.k as usize;
        ExtElem::from_coeffs(self.symbols[j * k..(j + 1) * k].to_vec())
    }

    pub fn coefficients(&self) -> impl Iterator<Item = ExtElem> + '_ {
        self.symbols
            .chunks_exact(self.params.k as usize)
            .map(|c| ExtElem::from_coeffs(c.to_vec()))
    }

    /// Coefficient-wise sum; the tag map is linear in the identity.
    pub fn add(&self, other: &Identity) -> Result<Identity, CodeError> {
        if self.params != other.params {
            return Err(CodeError::ParamsMismatch {
                expected: self.params,
                got: other.params,
            });
        }
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(a, b)| FieldElem(a.0 ^ b.0))
            .collect();
        Ok(Identity {
            params: self.params,
            symbols,
            label: None,
        })
    }

    /// Packed bitstream: symbols in order, `m` bits each, MSB-first,
    /// zero-padded to a byte boundary.
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = self.params.m;
        let mut w = BitWriter::with_capacity_bits(self.symbols.len() * m as usize);
        for s in &self.symbols {
            w.push(s.0 as u64, m);
        }
        w.into_bytes()
    }

    pub fn from_bytes(params: CodeParams, bytes: &[u8]) -> Result<Self, CodeError> {
        let n = params.outer_dim_usize()? * params.k as usize;
        let expected = (n * params.m as usize).div_ceil(8);
        if bytes.len() != expected {
            return Err(CodeError::WrongLength {
                expected,
                got: bytes.len(),
            });
        }
        let mut r = BitReader::new(bytes);
        let symbols = (0..n)
            .map(|_| FieldElem(r.read(params.m).expect("length checked") as u16))
            .collect();
        if !r.rest_is_zero() {
            return Err(CodeError::TrailingGarbage);
        }
        Ok(Identity {
            params,
            symbols,
            label: None,
        })
    }
}

/// `(r1, r2, tag)`: outer position, inner position, tag symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Challenge {
    pub r1: ExtElem,
    pub r2: FieldElem,
    pub tag: FieldElem,
}

impl Challenge {
    /// `r1` (k symbols, coefficient 0 first), `r2`, `tag`; `m` bits each.
    pub fn to_bytes(&self, params: &CodeParams) -> Vec<u8> {
        let m = params.m;
        let mut w = BitWriter::with_capacity_bits(params.challenge_bits() as usize);
        for c in self.r1.coeffs() {
            w.push(c.0 as u64, m);
        }
        w.push(self.r2.0 as u64, m);
        w.push(self.tag.0 as u64, m);
        w.into_bytes()
    }

    pub fn from_bytes(params: &CodeParams, bytes: &[u8]) -> Result<Self, CodeError> {
        let expected = params.challenge_bytes();
        if bytes.len() != expected {
            return Err(CodeError::WrongLength {
                expected,
                got: bytes.len(),
            });
        }
        let m = params.m;
        let mut r = BitReader::new(bytes);
        let mut next = || FieldElem(r.read(m).expect("length checked") as u16);
        let r1 = ExtElem::from_coeffs((0..params.k).map(|_| next()).collect());
        let r2 = next();
        let tag = next();
        let mut r = BitReader::new(bytes);
        r.seek(params.challenge_bits() as usize);
        if !r.rest_is_zero() {
            return Err(CodeError::TrailingGarbage);
        }
        Ok(Challenge { r1, r2, tag })
    }
}

impl fmt::Display for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r1={} r2={} tag={}", self.r1, self.r2, self.tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyResult {
    pub accepted: bool,
    pub recomputed_tag: FieldElem,
}

/// A `[q,k,δ]_RS2` code instance: parameters plus the field arithmetic.
/// Stack workspace for Horner evaluation when `4k` fits.
const INLINE_SCRATCH: usize = 64;

#[derive(Debug, Clone)]
pub struct IdCode {
    params: CodeParams,
    ext: ExtFieldSpec,
}

impl IdCode {
    pub fn new(params: CodeParams, backend: Backend) -> Result<Self, CodeError> {
        let base = FieldSpec::new(params.m, backend)?;
        Self::with_field(params, base)
    }

    pub fn with_field(params: CodeParams, base: FieldSpec) -> Result<Self, CodeError> {
        let ext = ExtFieldSpec::new(base, params.k as usize)?;
        Ok(IdCode { params, ext })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn ext(&self) -> &ExtFieldSpec {
        &self.ext
    }

    pub fn base(&self) -> &FieldSpec {
        self.ext.base()
    }

    fn check(&self, id: &Identity) -> Result<(), CodeError> {
        if id.params != self.params {
            return Err(CodeError::ParamsMismatch {
                expected: self.params,
                got: id.params,
            });
        }
        Ok(())
    }

    fn check_randomness(&self, r1: &ExtElem, r2: FieldElem) -> Result<(), CodeError> {
        if !self.ext.contains(r1) {
            self.ext.elem(r1.coeffs().to_vec())?;
        }
        self.base().elem(r2.value())?;
        Ok(())
    }

    /// Horner evaluation of the outer polynomial at `r1`.
    pub fn outer_eval(&self, id: &Identity, r1: &ExtElem) -> Result<ExtElem, CodeError> {
        self.check(id)?;
        self.check_randomness(r1, FieldElem::ZERO)?;
        Ok(ExtElem::from_coeffs(self.horner(id.symbols(), r1.coeffs())))
    }

    fn horner(&self, symbols: &[FieldElem], point: &[FieldElem]) -> Vec<FieldElem> {
        let k = self.ext.k();
        if 4 * k <= INLINE_SCRATCH {
            let mut buf = [FieldElem::ZERO; INLINE_SCRATCH];
            self.horner_into(symbols, point, &mut buf[..4 * k]);
            return buf[..k].to_vec();
        }
        let mut buf = vec![FieldElem::ZERO; 4 * k];
        self.horner_into(symbols, point, &mut buf);
        buf.truncate(k);
        buf
    }

    /// Result lands in `buf[..k]`; `buf` holds `4k` entries of workspace.
    fn horner_into(&self, symbols: &[FieldElem], point: &[FieldElem], buf: &mut [FieldElem]) {
        let k = self.ext.k();
        let (acc, rest) = buf.split_at_mut(k);
        let (tmp, scratch) = rest.split_at_mut(k);
        let mut chunks = symbols.chunks_exact(k).rev();
        match chunks.next() {
            Some(top) => acc.copy_from_slice(top),
            None => acc.fill(FieldElem::ZERO),
        }
        for c in chunks {
            self.ext.mul_slices(acc, point, tmp, scratch);
            for ((a, t), s) in acc.iter_mut().zip(tmp.iter()).zip(c) {
                a.0 = t.0 ^ s.0;
            }
        }
    }

    /// Evaluates the outer symbol's `k` coefficients, read as a polynomial
    /// over GF(q), at `r2`.
    pub fn inner_eval(&self, outer_symbol: &[FieldElem], r2: FieldElem) -> FieldElem {
        let f = self.base();
        outer_symbol
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| f.add(f.mul(acc, r2), c))
    }

    /// `t_i(r1, r2)`: outer Horner pass in GF(q^k), then inner Horner pass
    /// in GF(q).
    pub fn compute_tag(
        &self,
        id: &Identity,
        r1: &ExtElem,
        r2: FieldElem,
    ) -> Result<FieldElem, CodeError> {
        self.check(id)?;
        self.check_randomness(r1, r2)?;
        let k = self.ext.k();
        if 4 * k <= INLINE_SCRATCH {
            let mut buf = [FieldElem::ZERO; INLINE_SCRATCH];
            self.horner_into(id.symbols(), r1.coeffs(), &mut buf[..4 * k]);
            return Ok(self.inner_eval(&buf[..k], r2));
        }
        let outer = self.horner(id.symbols(), r1.coeffs());
        Ok(self.inner_eval(&outer, r2))
    }

    /// Tag of an identity supplied as a stream of outer coefficients in
    /// ascending power order, without holding the identity in memory.
    pub fn compute_tag_streaming<I>(
        &self,
        coeffs: I,
        r1: &ExtElem,
        r2: FieldElem,
    ) -> Result<FieldElem, CodeError>
    where
        I: IntoIterator<Item = ExtElem>,
    {
        let mut acc = StreamingTag::new(self, r1)?;
        for c in coeffs {
            acc.push(c.coeffs())?;
        }
        acc.finish(r2)
    }

    /// Uniform `(r1, r2)`: `r1` via `from_index` of a uniform draw in
    /// `[0, q^k)`, `r2` uniform over GF(q).
    pub fn sample_randomness<R: Rng + ?Sized>(&self, rng: &mut R) -> (ExtElem, FieldElem) {
        let bits = self.params.outer_len_log2();
        let r1 = if bits < 128 {
            let idx = rng.gen_range(0..1u128 << bits);
            self.ext.from_index(idx).expect("index in range")
        } else {
            let q = self.params.q();
            ExtElem::from_coeffs(
                (0..self.params.k)
                    .map(|_| FieldElem(rng.gen_range(0..q) as u16))
                    .collect(),
            )
        };
        let r2 = FieldElem(rng.gen_range(0..self.params.q()) as u16);
        (r1, r2)
    }

    pub fn challenge_at(
        &self,
        id: &Identity,
        r1: ExtElem,
        r2: FieldElem,
    ) -> Result<Challenge, CodeError> {
        let tag = self.compute_tag(id, &r1, r2)?;
        Ok(Challenge { r1, r2, tag })
    }

    pub fn generate_challenge<R: Rng + ?Sized>(
        &self,
        id: &Identity,
        rng: &mut R,
    ) -> Result<Challenge, CodeError> {
        self.check(id)?;
        let (r1, r2) = self.sample_randomness(rng);
        self.challenge_at(id, r1, r2)
    }

    pub fn verify_challenge(&self, id: &Identity, ch: &Challenge) -> Result<VerifyResult, CodeError> {
        let recomputed_tag = self.compute_tag(id, &ch.r1, ch.r2)?;
        Ok(VerifyResult {
            accepted: recomputed_tag == ch.tag,
            recomputed_tag,
        })
    }
}

/// Incremental outer evaluation for identities streamed in ascending
/// coefficient order: accumulates `sum c_j · r1^j`.
pub struct StreamingTag<'a> {
    code: &'a IdCode,
    point: Vec<FieldElem>,
    power: Vec<FieldElem>,
    acc: Vec<FieldElem>,
    tmp: Vec<FieldElem>,
    scratch: Vec<FieldElem>,
    pushed: usize,
}

impl<'a> StreamingTag<'a> {
    pub fn new(code: &'a IdCode, r1: &ExtElem) -> Result<Self, CodeError> {
        code.check_randomness(r1, FieldElem::ZERO)?;
        let ext = code.ext();
        Ok(StreamingTag {
            code,
            point: r1.coeffs().to_vec(),
            power: ext.one().into_coeffs(),
            acc: ext.zero().into_coeffs(),
            tmp: ext.zero().into_coeffs(),
            scratch: vec![FieldElem::ZERO; ext.scratch_len()],
            pushed: 0,
        })
    }

    pub fn push(&mut self, coeff: &[FieldElem]) -> Result<(), CodeError> {
        let ext = self.code.ext();
        if coeff.len() != ext.k() {
            return Err(ExtError::WrongLength {
                expected: ext.k(),
                got: coeff.len(),
            }
            .into());
        }
        ext.mul_slices(coeff, &self.power, &mut self.tmp, &mut self.scratch);
        for (a, t) in self.acc.iter_mut().zip(&self.tmp) {
            a.0 ^= t.0;
        }
        ext.mul_slices(&self.power, &self.point, &mut self.tmp, &mut self.scratch);
        std::mem::swap(&mut self.power, &mut self.tmp);
        self.pushed += 1;
        Ok(())
    }

    pub fn finish(self, r2: FieldElem) -> Result<FieldElem, CodeError> {
        let expected = self.code.params().outer_dim_usize()?;
        if self.pushed != expected {
            return Err(CodeError::WrongCoefficientCount {
                expected,
                got: self.pushed,
            });
        }
        self.code.base().elem(r2.value())?;
        Ok(self.code.inner_eval(&self.acc, r2))
    }
}
