//! Extension field GF(q^k) as polynomials of degree < k over GF(q), q = 2^m.
//!
//! The tower representation keeps every element as `k` base-field
//! coefficients, so an outer-code symbol splits into the inner-code message
//! without any change of basis. The modulus is the first monic irreducible
//! polynomial of degree `k` found when scanning candidates in index order
//! (see [`ExtFieldSpec::new`]).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::gf2m::{FieldElem, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtError {
    #[error("extension degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("index {idx} out of range for GF(2^{bits})")]
    IndexOutOfRange { idx: u128, bits: u64 },
    #[error("field of 2^{0} elements cannot be indexed with 128-bit integers")]
    IndexOverflow(u64),
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("coefficient {0} is not a base-field element")]
    BadCoefficient(u32),
    #[error("no irreducible polynomial of degree {0} found")]
    NoIrreducible(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An element of GF(q^k): `coeffs[j]` multiplies `x^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem {
    coeffs: Vec<FieldElem>,
}

impl ExtElem {
    /// Wraps coefficients without validating them against a field.
    pub fn from_coeffs(coeffs: Vec<FieldElem>) -> Self {
        ExtElem { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<FieldElem> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl fmt::Display for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Moduli already found, keyed by (m, base polynomial, k).
type ModulusCache = HashMap<(u32, u32, usize), Vec<FieldElem>>;

/// GF(q^k) over a given base field.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtFieldSpec {
    base: FieldSpec,
    k: usize,
    ext_poly: Vec<FieldElem>,
}

impl fmt::Debug for ExtFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtFieldSpec")
            .field("base", &self.base)
            .field("k", &self.k)
            .field("ext_poly", &self.ext_poly.iter().map(|c| c.0).collect::<Vec<_>>())
            .finish()
    }
}

impl ExtFieldSpec {
    /// Builds GF(q^k). The modulus is the first candidate `x^k + c(x)` that
    /// is irreducible, where `c` runs over `ext_from_index(0), (1), ...`.
    /// For `k = 1` the modulus is `x` and the arithmetic is the base field's.
    pub fn new(base: FieldSpec, k: usize) -> Result<Self, ExtError> {
        if k == 0 {
            return Err(ExtError::InvalidDegree(k));
        }
        if k == 1 {
            return Ok(ExtFieldSpec {
                base,
                k,
                ext_poly: vec![FieldElem::ZERO, FieldElem::ONE],
            });
        }
        let key = (base.m(), base.reduction_poly(), k);
        static FOUND: OnceLock<Mutex<ModulusCache>> = OnceLock::new();
        let found = FOUND.get_or_init(Default::default);
        if let Some(ext_poly) = found.lock().unwrap().get(&key).cloned() {
            return Ok(ExtFieldSpec { base, k, ext_poly });
        }
        let mut tail = vec![FieldElem::ZERO; k];
        loop {
            let irreducible = !tail[0].is_zero()
                && if tail[1..].iter().all(|c| c.is_zero()) {
                    poly::binomial_is_irreducible(&base, k, tail[0])
                } else {
                    let mut candidate = tail.clone();
                    candidate.push(FieldElem::ONE);
                    poly::is_irreducible(&base, &candidate)
                };
            if irreducible {
                let mut ext_poly = tail;
                ext_poly.push(FieldElem::ONE);
                found.lock().unwrap().insert(key, ext_poly.clone());
                return Ok(ExtFieldSpec { base, k, ext_poly });
            }
            if !increment_digits(&mut tail, base.size()) {
                return Err(ExtError::NoIrreducible(k));
            }
        }
    }

    /// GF(q^k) modulo an explicit monic polynomial, checked for irreducibility.
    pub fn with_poly(base: FieldSpec, ext_poly: Vec<FieldElem>) -> Result<Self, ExtError> {
        let k = ext_poly.len().checked_sub(1).ok_or(ExtError::InvalidDegree(0))?;
        if k == 0 || ext_poly[k] != FieldElem::ONE {
            return Err(ExtError::InvalidDegree(k));
        }
        if let Some(bad) = ext_poly.iter().find(|c| !base.contains(**c)) {
            return Err(ExtError::BadCoefficient(bad.value()));
        }
        if k > 1 && !poly::is_irreducible(&base, &ext_poly) {
            return Err(ExtError::NoIrreducible(k));
        }
        Ok(ExtFieldSpec { base, k, ext_poly })
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Monic modulus, `k + 1` coefficients, constant term first.
    pub fn ext_poly(&self) -> &[FieldElem] {
        &self.ext_poly
    }

    /// log2 of the field size, `m·k`.
    pub fn bits(&self) -> u64 {
        self.base.m() as u64 * self.k as u64
    }

    /// Field size `q^k`, when it fits in a `u128`.
    pub fn size(&self) -> Option<u128> {
        (self.bits() < 128).then(|| 1u128 << self.bits())
    }

    pub fn zero(&self) -> ExtElem {
        ExtElem::from_coeffs(vec![FieldElem::ZERO; self.k])
    }

    pub fn one(&self) -> ExtElem {
        let mut e = self.zero();
        e.coeffs[0] = FieldElem::ONE;
        e
    }

    /// Validates and wraps `k` base-field coefficients.
    pub fn elem(&self, coeffs: Vec<FieldElem>) -> Result<ExtElem, ExtError> {
        if coeffs.len() != self.k {
            return Err(ExtError::WrongLength {
                expected: self.k,
                got: coeffs.len(),
            });
        }
        if let Some(bad) = coeffs.iter().find(|c| !self.base.contains(**c)) {
            return Err(ExtError::BadCoefficient(bad.value()));
        }
        Ok(ExtElem::from_coeffs(coeffs))
    }

    pub fn contains(&self, a: &ExtElem) -> bool {
        a.coeffs.len() == self.k && a.coeffs.iter().all(|c| self.base.contains(*c))
    }

    /// Base-q digit expansion: digit `j` becomes `coeffs[j]`.
    pub fn from_index(&self, idx: u128) -> Result<ExtElem, ExtError> {
        let bits = self.bits();
        if bits < 128 && idx >> bits != 0 {
            return Err(ExtError::IndexOutOfRange { idx, bits });
        }
        let m = self.base.m();
        let mask = (self.base.size() - 1) as u128;
        let coeffs = (0..self.k)
            .map(|j| {
                let shift = m as u64 * j as u64;
                if shift >= 128 {
                    FieldElem::ZERO
                } else {
                    FieldElem(((idx >> shift) & mask) as u16)
                }
            })
            .collect();
        Ok(ExtElem::from_coeffs(coeffs))
    }

    pub fn to_index(&self, a: &ExtElem) -> Result<u128, ExtError> {
        if self.bits() > 128 {
            return Err(ExtError::IndexOverflow(self.bits()));
        }
        if !self.contains(a) {
            return Err(ExtError::WrongLength {
                expected: self.k,
                got: a.coeffs.len(),
            });
        }
        let m = self.base.m();
        Ok(a
            .coeffs
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, c)| acc | (c.0 as u128) << (m as usize * j)))
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| self.base.add(*x, *y))
            .collect();
        ExtElem::from_coeffs(coeffs)
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let mut out = vec![FieldElem::ZERO; self.k];
        let mut scratch = vec![FieldElem::ZERO; self.scratch_len()];
        self.mul_slices(&a.coeffs, &b.coeffs, &mut out, &mut scratch);
        ExtElem::from_coeffs(out)
    }

    pub fn square(&self, a: &ExtElem) -> ExtElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &ExtElem, mut e: u128) -> ExtElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.square(&base);
            e >>= 1;
        }
        acc
    }

    /// Minimum scratch length for [`mul_slices`](Self::mul_slices).
    pub fn scratch_len(&self) -> usize {
        2 * self.k - 1
    }

    /// `out = a · b mod ext_poly` on raw coefficient slices of length `k`.
    /// `scratch` must hold at least [`scratch_len`](Self::scratch_len) entries.
    #[inline]
    pub fn mul_slices(
        &self,
        a: &[FieldElem],
        b: &[FieldElem],
        out: &mut [FieldElem],
        scratch: &mut [FieldElem],
    ) {
        let k = self.k;
        let f = &self.base;
        let scratch = &mut scratch[..2 * k - 1];
        scratch.fill(FieldElem::ZERO);
        for (i, &ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                scratch[i + j].0 ^= f.mul(ai, bj).0;
            }
        }
        // x^k = sum ext_poly[j] x^j in characteristic 2
        for i in (k..2 * k - 1).rev() {
            let c = scratch[i];
            if c.is_zero() {
                continue;
            }
            for j in 0..k {
                scratch[i - k + j].0 ^= f.mul(c, self.ext_poly[j]).0;
            }
        }
        out[..k].copy_from_slice(&scratch[..k]);
    }
}

/// Base-q counter over a digit vector (least significant first).
/// Returns false on wrap-around.
fn increment_digits(digits: &mut [FieldElem], q: u32) -> bool {
    for d in digits.iter_mut() {
        if d.value() + 1 < q {
            d.0 += 1;
            return true;
        }
        d.0 = 0;
    }
    false
}

/// Polynomials over GF(q) as coefficient vectors, constant term first.
/// Results are trimmed (no trailing zeros; the zero polynomial is empty).
pub mod poly {
    use super::*;

    pub fn trim(mut p: Vec<FieldElem>) -> Vec<FieldElem> {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
        p
    }

    pub fn degree(p: &[FieldElem]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }

    pub fn sub(f: &FieldSpec, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        let n = a.len().max(b.len());
        let get = |p: &[FieldElem], i: usize| p.get(i).copied().unwrap_or_default();
        trim((0..n).map(|i| f.add(get(a, i), get(b, i))).collect())
    }

    pub fn mul(f: &FieldSpec, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![FieldElem::ZERO; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        trim(out)
    }

    /// Remainder of `a` modulo nonzero `b`.
    pub fn rem(f: &FieldSpec, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        let db = degree(b).expect("division by the zero polynomial");
        let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
        let mut r = trim(a.to_vec());
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let c = f.mul(r[dr], lead_inv);
            for j in 0..=db {
                r[dr - db + j] = f.add(r[dr - db + j], f.mul(c, b[j]));
            }
            r = trim(r);
        }
        r
    }

    pub fn mulmod(
        f: &FieldSpec,
        a: &[FieldElem],
        b: &[FieldElem],
        modulus: &[FieldElem],
    ) -> Vec<FieldElem> {
        rem(f, &mul(f, a, b), modulus)
    }

    /// Monic greatest common divisor.
    pub fn gcd(f: &FieldSpec, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(f, &a, &b);
            a = b;
            b = r;
        }
        if let Some(d) = degree(&a) {
            let inv = f.inv(a[d]).expect("nonzero leading coefficient");
            for c in a.iter_mut() {
                *c = f.mul(*c, inv);
            }
        }
        a
    }

    pub fn eval(f: &FieldSpec, p: &[FieldElem], x: FieldElem) -> FieldElem {
        p.iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    fn distinct_prime_factors(mut n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                out.push(p);
                while n.is_multiple_of(p) {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            out.push(n);
        }
        out
    }

    /// Irreducibility of `x^k + c` for `c ≠ 0` from the multiplicative
    /// order of `c`: every prime `r | k` must divide `ord(c)` but not
    /// `(q-1)/ord(c)`, and `4 | k` requires `q ≡ 1 (mod 4)`.
    pub fn binomial_is_irreducible(f: &FieldSpec, k: usize, c: FieldElem) -> bool {
        if c.is_zero() || k == 0 {
            return k == 1;
        }
        let q1 = f.size() as usize - 1;
        let mut ord = q1;
        for p in distinct_prime_factors(q1) {
            while ord.is_multiple_of(p) && f.pow(c, (ord / p) as u64) == FieldElem::ONE {
                ord /= p;
            }
        }
        if k.is_multiple_of(4) && (q1 + 1) % 4 != 1 {
            return false;
        }
        distinct_prime_factors(k)
            .into_iter()
            .all(|r| ord.is_multiple_of(r) && !(q1 / ord).is_multiple_of(r))
    }

    /// Rabin's test: a monic `p` of degree `k` is irreducible iff
    /// `x^(q^k) ≡ x (mod p)` and `gcd(x^(q^(k/r)) - x, p) = 1` for every
    /// prime `r | k`.
    pub fn is_irreducible_rabin(f: &FieldSpec, p: &[FieldElem]) -> bool {
        let Some(k) = degree(p) else {
            return false;
        };
        if k == 0 {
            return false;
        }
        let x = rem(f, &[FieldElem::ZERO, FieldElem::ONE], p);
        // frob[i] = x^(q^i) mod p; raising to the q-th power is m squarings
        let mut frob = Vec::with_capacity(k + 1);
        frob.push(x.clone());
        for i in 1..=k {
            let mut h = frob[i - 1].clone();
            for _ in 0..f.m() {
                h = mulmod(f, &h, &h, p);
            }
            frob.push(h);
        }
        if frob[k] != x {
            return false;
        }
        distinct_prime_factors(k).into_iter().all(|r| {
            let g = gcd(f, &sub(f, &frob[k / r], &x), p);
            degree(&g) == Some(0)
        })
    }

    /// Trial division by every monic polynomial of degree `1..=k/2`.
    pub fn is_irreducible_exhaustive(f: &FieldSpec, p: &[FieldElem]) -> bool {
        let Some(k) = degree(p) else {
            return false;
        };
        if k == 0 {
            return false;
        }
        for d in 1..=k / 2 {
            let mut tail = vec![FieldElem::ZERO; d];
            loop {
                let mut g = tail.clone();
                g.push(FieldElem::ONE);
                if rem(f, p, &g).is_empty() {
                    return false;
                }
                if !increment_digits(&mut tail, f.size()) {
                    break;
                }
            }
        }
        true
    }

    /// Exhaustive divisor search when there are at most 2^12 candidate
    /// divisors of the top degree, Rabin's test otherwise.
    pub fn is_irreducible(f: &FieldSpec, p: &[FieldElem]) -> bool {
        let Some(k) = degree(p) else {
            return false;
        };
        if (f.m() as usize) * (k / 2) <= 12 {
            is_irreducible_exhaustive(f, p)
        } else {
            is_irreducible_rabin(f, p)
        }
    }
}
