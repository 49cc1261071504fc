//! Arithmetic in the binary field GF(2^m), 1 ≤ m ≤ 16.
//!
//! Elements are stored as integers in `[0, 2^m)` read as polynomials over
//! GF(2) in the standard basis (bit `i` is the coefficient of `x^i`).
//! Addition is XOR in every backend. Multiplication is done either by a
//! carryless multiply followed by reduction ([`Backend::Polynomial`]) or in
//! the discrete-log domain using exp/log tables ([`Backend::Zech`]).
//!
//! ```
//! use idcode::gf2m::{Backend, FieldElem, FieldSpec};
//!
//! let gf8 = FieldSpec::new(3, Backend::Polynomial).unwrap();
//! assert_eq!(gf8.reduction_poly(), 0b1011);
//! assert_eq!(gf8.mul(FieldElem(0b010), FieldElem(0b100)), FieldElem(0b011));
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported base-field bit-width.
pub const MAX_M: u32 = 16;

/// Canonical reduction polynomial for each `m` (index = `m`).
///
/// For `m ≥ 2` this is the lexicographically smallest primitive polynomial
/// of degree `m`, so `x` generates the multiplicative group. GF(2) uses `x`
/// itself, which makes multiplication a plain AND.
pub const CANONICAL_POLYS: [u32; 17] = [
    0, 0b10, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b,
    0x402b, 0x8003, 0x1002d,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("unsupported field degree m = {0} (expected 1..={MAX_M})")]
    UnsupportedDegree(u32),
    #[error("polynomial {0:#x} is not irreducible of the requested degree")]
    Reducible(u32),
    #[error("generator is not primitive for polynomial {0:#x}")]
    NotPrimitive(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} is not an element of GF(2^{m})")]
    ElementOutOfRange { value: u32, m: u32 },
    #[error("exponent {n} out of range for group order {order}")]
    ExponentOutOfRange { n: u32, order: u32 },
}

/// Multiplication strategy for a [`FieldSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    /// exp/log/Zech tables built eagerly at construction.
    Zech,
    /// Carryless multiply and bitwise reduction.
    Polynomial,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::Zech, Backend::Polynomial];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Zech => "zech",
            Backend::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zech" => Ok(Backend::Zech),
            "polynomial" | "poly" => Ok(Backend::Polynomial),
            other => Err(format!("unknown backend '{other}' (expected zech or polynomial)")),
        }
    }
}

/// An element of GF(2^m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(transparent)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Discrete-log tables for GF(2^m) with respect to a primitive element `g`.
///
/// All three tables have exactly `2^m - 1` entries. `log` is indexed by
/// `a - 1` for nonzero `a`.
pub struct ZechTable {
    m: u32,
    generator: u16,
    log: Vec<u16>,
    exp: Vec<u16>,
    zech: Vec<u16>,
}

impl ZechTable {
    /// Marks `n` with `1 + g^n = 0`.
    pub const UNDEFINED: u16 = u16::MAX;

    fn build(m: u32, poly: u32) -> Result<Self, FieldError> {
        let order = (1u32 << m) - 1;
        let generator: u32 = if m == 1 { 1 } else { 0b10 };
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![u16::MAX; order as usize];
        let mut x = 1u32;
        for n in 0..order {
            if n > 0 && x == 1 {
                return Err(FieldError::NotPrimitive(poly));
            }
            exp.push(x as u16);
            log[(x - 1) as usize] = n as u16;
            x = poly_mul(x, generator, m, poly);
        }
        if x != 1 {
            return Err(FieldError::NotPrimitive(poly));
        }
        let zech = (0..order)
            .map(|n| {
                let v = exp[n as usize] as u32 ^ 1;
                if v == 0 {
                    Self::UNDEFINED
                } else {
                    log[(v - 1) as usize]
                }
            })
            .collect();
        Ok(ZechTable {
            m,
            generator: generator as u16,
            log,
            exp,
            zech,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem(self.generator)
    }

    /// Multiplicative group order, `2^m - 1`.
    pub fn order(&self) -> u32 {
        self.exp.len() as u32
    }

    pub fn len(&self) -> usize {
        self.exp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exp.is_empty()
    }

    pub fn log(&self, a: FieldElem) -> Option<u32> {
        if a.is_zero() || a.value() > self.order() {
            None
        } else {
            Some(self.log[(a.0 - 1) as usize] as u32)
        }
    }

    pub fn exp(&self, n: u32) -> FieldElem {
        FieldElem(self.exp[(n % self.order()) as usize])
    }

    /// `Z(n)` with `g^Z(n) = 1 + g^n`, or `None` when `1 + g^n = 0`.
    pub fn zech(&self, n: u32) -> Result<Option<u32>, FieldError> {
        let order = self.order();
        if n >= order {
            return Err(FieldError::ExponentOutOfRange { n, order });
        }
        let z = self.zech[n as usize];
        Ok((z != Self::UNDEFINED).then_some(z as u32))
    }

    /// Sum of two elements given by their logs, computed in the log domain.
    /// `None` stands for the zero element on input and output.
    pub fn add_logs(&self, a: Option<u32>, b: Option<u32>) -> Option<u32> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                let order = self.order();
                // g^a + g^b = g^a (1 + g^(b-a))
                let d = (b + order - a) % order;
                let z = self.zech[d as usize];
                if z == Self::UNDEFINED {
                    None
                } else {
                    Some((a + z as u32) % order)
                }
            }
        }
    }

    #[inline]
    fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let order = self.exp.len() as u32;
        let mut s = self.log[(a - 1) as usize] as u32 + self.log[(b - 1) as usize] as u32;
        if s >= order {
            s -= order;
        }
        self.exp[s as usize]
    }

    #[inline]
    fn inv(&self, a: u16) -> u16 {
        let order = self.exp.len() as u32;
        let l = self.log[(a - 1) as usize] as u32;
        self.exp[((order - l) % order) as usize]
    }
}

impl fmt::Debug for ZechTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZechTable")
            .field("m", &self.m)
            .field("entries", &self.exp.len())
            .finish()
    }
}

/// Description of GF(2^m): bit-width, reduction polynomial, backend.
///
/// Cloning is cheap; Zech tables are shared behind an `Arc`.
#[derive(Clone)]
pub struct FieldSpec {
    m: u32,
    poly: u32,
    backend: Backend,
    zech: Option<Arc<ZechTable>>,
}

impl FieldSpec {
    /// Builds GF(2^m) with the canonical reduction polynomial for `m`.
    pub fn new(m: u32, backend: Backend) -> Result<Self, FieldError> {
        if !(1..=MAX_M).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        Self::with_poly(m, CANONICAL_POLYS[m as usize], backend)
    }

    /// Builds GF(2^m) modulo an explicit polynomial (bit `m` must be set).
    pub fn with_poly(m: u32, poly: u32, backend: Backend) -> Result<Self, FieldError> {
        if !(1..=MAX_M).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        if gf2_degree(poly) != Some(m) || !gf2_is_irreducible(poly) {
            return Err(FieldError::Reducible(poly));
        }
        let zech = match backend {
            Backend::Zech => Some(Arc::new(ZechTable::build(m, poly)?)),
            Backend::Polynomial => None,
        };
        Ok(FieldSpec {
            m,
            poly,
            backend,
            zech,
        })
    }

    /// Same field, different multiplication backend.
    pub fn with_backend(&self, backend: Backend) -> Result<Self, FieldError> {
        if backend == self.backend {
            return Ok(self.clone());
        }
        Self::with_poly(self.m, self.poly, backend)
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size `q = 2^m`.
    #[inline]
    pub fn size(&self) -> u32 {
        1 << self.m
    }

    pub fn reduction_poly(&self) -> u32 {
        self.poly
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn zech_table(&self) -> Option<&ZechTable> {
        self.zech.as_deref()
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem, FieldError> {
        if value < self.size() {
            Ok(FieldElem(value as u16))
        } else {
            Err(FieldError::ElementOutOfRange { value, m: self.m })
        }
    }

    pub fn contains(&self, a: FieldElem) -> bool {
        a.value() < self.size()
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.size()).map(|v| FieldElem(v as u16))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match &self.zech {
            Some(t) => FieldElem(t.mul(a.0, b.0)),
            None => FieldElem(poly_mul(a.value(), b.value(), self.m, self.poly) as u16),
        }
    }

    #[inline]
    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.zech {
            Some(t) => FieldElem(t.inv(a.0)),
            // a^(q-2) = a^-1 in the multiplicative group of order q-1
            None => self.pow(a, self.size() as u64 - 2),
        })
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly && self.backend == other.backend
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .field("backend", &self.backend)
            .finish()
    }
}

/// Carryless product of `a` and `b` (both < 2^m) reduced modulo `poly`.
#[inline]
pub fn poly_mul(a: u32, b: u32, m: u32, poly: u32) -> u32 {
    let mut prod = 0u32;
    for i in 0..m {
        prod ^= (a << i) & 0u32.wrapping_sub((b >> i) & 1);
    }
    let mut i = 2 * m - 1;
    while i > m {
        i -= 1;
        prod ^= (poly << (i - m)) & 0u32.wrapping_sub((prod >> i) & 1);
    }
    prod
}

/// Unreduced carryless product over GF(2)[x].
pub fn clmul(a: u32, b: u32) -> u64 {
    let mut prod = 0u64;
    let mut b = b;
    let mut shifted = a as u64;
    while b != 0 {
        if b & 1 == 1 {
            prod ^= shifted;
        }
        shifted <<= 1;
        b >>= 1;
    }
    prod
}

pub fn gf2_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of `a` divided by `b` in GF(2)[x].
pub fn gf2_rem(mut a: u64, b: u32) -> u64 {
    let db = gf2_degree(b).expect("division by the zero polynomial");
    let b = b as u64;
    while a != 0 {
        let da = 63 - a.leading_zeros();
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree `1..=deg/2`.
pub fn gf2_is_irreducible(p: u32) -> bool {
    let Some(d) = gf2_degree(p) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    let half = d / 2;
    (2u32..(1 << (half + 1))).all(|f| gf2_rem(p as u64, f) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn fields() -> &'static Vec<(FieldSpec, FieldSpec)> {
        static FIELDS: OnceLock<Vec<(FieldSpec, FieldSpec)>> = OnceLock::new();
        FIELDS.get_or_init(|| {
            (1..=MAX_M)
                .map(|m| {
                    (
                        FieldSpec::new(m, Backend::Zech).unwrap(),
                        FieldSpec::new(m, Backend::Polynomial).unwrap(),
                    )
                })
                .collect()
        })
    }

    /// Brute-force primitive search, independent of the constant table.
    fn smallest_primitive(m: u32) -> u32 {
        let order = (1u64 << m) - 1;
        (1u32 << m..1 << (m + 1))
            .find(|&p| {
                if !gf2_is_irreducible(p) {
                    return false;
                }
                let mut x = 1u64;
                for n in 1..=order {
                    x = gf2_rem(x << 1, p);
                    if x == 1 {
                        return n == order;
                    }
                }
                false
            })
            .unwrap()
    }

    #[test]
    fn canonical_polys_are_smallest_primitive() {
        for m in 2..=MAX_M {
            assert_eq!(CANONICAL_POLYS[m as usize], smallest_primitive(m), "m = {m}");
        }
        assert_eq!(CANONICAL_POLYS[1], 0b10);
    }

    #[test]
    fn make_field_examples() {
        let gf8 = FieldSpec::new(3, Backend::Polynomial).unwrap();
        assert_eq!(gf8.reduction_poly(), 0b1011);
        let gf2 = FieldSpec::new(1, Backend::Polynomial).unwrap();
        assert_eq!(gf2.reduction_poly(), 0b10);
        for a in 0..2u16 {
            for b in 0..2u16 {
                assert_eq!(gf2.mul(FieldElem(a), FieldElem(b)), FieldElem(a & b));
                assert_eq!(gf2.add(FieldElem(a), FieldElem(b)), FieldElem(a ^ b));
            }
        }
        let gf8192 = FieldSpec::new(13, Backend::Zech).unwrap();
        assert_eq!(gf8192.zech_table().unwrap().len(), 8191);
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(
            FieldSpec::new(0, Backend::Zech).unwrap_err(),
            FieldError::UnsupportedDegree(0)
        );
        assert_eq!(
            FieldSpec::new(17, Backend::Polynomial).unwrap_err(),
            FieldError::UnsupportedDegree(17)
        );
    }

    #[test]
    fn reducible_and_non_primitive_polys_rejected() {
        // x^2 + 1 = (x + 1)^2
        assert_eq!(
            FieldSpec::with_poly(2, 0b101, Backend::Polynomial).unwrap_err(),
            FieldError::Reducible(0b101)
        );
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
        assert!(FieldSpec::with_poly(4, 0b11111, Backend::Polynomial).is_ok());
        assert_eq!(
            FieldSpec::with_poly(4, 0b11111, Backend::Zech).unwrap_err(),
            FieldError::NotPrimitive(0b11111)
        );
        // wrong degree
        assert!(FieldSpec::with_poly(3, 0b111, Backend::Polynomial).is_err());
    }

    #[test]
    fn add_examples() {
        let f = FieldSpec::new(3, Backend::Polynomial).unwrap();
        assert_eq!(f.add(FieldElem(5), FieldElem(5)), FieldElem(0));
        assert_eq!(f.add(FieldElem(5), FieldElem(0)), FieldElem(5));
        assert_eq!(f.add(FieldElem(3), FieldElem(6)), FieldElem(5));
    }

    #[test]
    fn mul_examples() {
        for backend in Backend::ALL {
            let f = FieldSpec::new(3, backend).unwrap();
            assert_eq!(f.mul(FieldElem(0b010), FieldElem(0b100)), FieldElem(0b011));
            for a in f.elements() {
                assert_eq!(f.mul(a, FieldElem::ONE), a);
                assert_eq!(f.mul(a, FieldElem::ZERO), FieldElem::ZERO);
            }
        }
    }

    #[test]
    fn inv_examples() {
        let gf8 = FieldSpec::new(3, Backend::Polynomial).unwrap();
        let gf4 = FieldSpec::new(2, Backend::Polynomial).unwrap();
        let search = |f: &FieldSpec, a: FieldElem| {
            f.elements().find(|&b| f.mul(a, b) == FieldElem::ONE).unwrap()
        };
        assert_eq!(search(&gf8, FieldElem(0b010)), FieldElem(0b101));
        assert_eq!(search(&gf4, FieldElem(0b10)), FieldElem(0b11));
        for backend in Backend::ALL {
            let gf8 = gf8.with_backend(backend).unwrap();
            let gf4 = gf4.with_backend(backend).unwrap();
            assert_eq!(gf8.inv(FieldElem(1)).unwrap(), FieldElem(1));
            assert_eq!(gf8.inv(FieldElem(0b010)).unwrap(), FieldElem(0b101));
            assert_eq!(gf4.inv(FieldElem(0b10)).unwrap(), FieldElem(0b11));
            assert_eq!(gf8.inv(FieldElem::ZERO), Err(FieldError::ZeroInverse));
        }
    }

    #[test]
    fn zech_lookup_examples() {
        let gf8 = FieldSpec::new(3, Backend::Zech).unwrap();
        let t = gf8.zech_table().unwrap();
        // powers of x mod x^3+x+1: 1, x, x^2, x+1, ...
        assert_eq!(t.exp(3), FieldElem(0b011));
        assert_eq!(t.zech(1).unwrap(), Some(3));
        assert_eq!(t.zech(0).unwrap(), None);
        assert_eq!(
            t.zech(7).unwrap_err(),
            FieldError::ExponentOutOfRange { n: 7, order: 7 }
        );

        let gf4 = FieldSpec::new(2, Backend::Zech).unwrap();
        let t = gf4.zech_table().unwrap();
        assert_eq!(t.zech(1).unwrap(), Some(2));
    }

    #[test]
    fn zech_tables_consistent_for_every_m() {
        for (zech, _) in fields() {
            let t = zech.zech_table().unwrap();
            assert_eq!(t.len() as u32, zech.size() - 1);
            for a in 1..zech.size() {
                let a = FieldElem(a as u16);
                assert_eq!(t.exp(t.log(a).unwrap()), a);
            }
            for n in 0..t.order() {
                match t.zech(n).unwrap() {
                    Some(z) => assert_eq!(t.exp(z).0, t.exp(n).0 ^ 1),
                    None => assert_eq!(t.exp(n), FieldElem::ONE),
                }
            }
        }
    }

    #[test]
    fn zech_log_domain_addition() {
        let f = FieldSpec::new(5, Backend::Zech).unwrap();
        let t = f.zech_table().unwrap();
        for a in f.elements() {
            for b in f.elements() {
                let sum = t.add_logs(t.log(a), t.log(b));
                assert_eq!(sum.map(|s| t.exp(s)).unwrap_or(FieldElem::ZERO), f.add(a, b));
            }
        }
    }

    #[test]
    fn backends_agree_exhaustively_up_to_m8() {
        for (zech, poly) in fields().iter().take(8) {
            for a in zech.elements() {
                for b in zech.elements() {
                    assert_eq!(zech.mul(a, b), poly.mul(a, b));
                }
                if !a.is_zero() {
                    assert_eq!(zech.inv(a), poly.inv(a));
                }
            }
        }
    }

    #[test]
    fn backends_agree_on_random_pairs_above_m8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (zech, poly) in fields().iter().skip(8) {
            for _ in 0..100_000 {
                let a = FieldElem(rng.gen_range(0..zech.size()) as u16);
                let b = FieldElem(rng.gen_range(0..zech.size()) as u16);
                assert_eq!(zech.mul(a, b), poly.mul(a, b));
            }
            for _ in 0..2_000 {
                let a = FieldElem(rng.gen_range(1..zech.size()) as u16);
                assert_eq!(zech.inv(a), poly.inv(a));
            }
        }
    }

    #[test]
    fn poly_mul_matches_clmul_then_rem() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=MAX_M {
            let p = CANONICAL_POLYS[m as usize];
            for _ in 0..2_000 {
                let a = rng.gen_range(0..1u32 << m);
                let b = rng.gen_range(0..1u32 << m);
                assert_eq!(poly_mul(a, b, m, p) as u64, gf2_rem(clmul(a, b), p));
            }
        }
    }

    fn field_and_triple() -> impl Strategy<Value = (usize, bool, u16, u16, u16)> {
        (0usize..MAX_M as usize, any::<bool>()).prop_flat_map(|(i, z)| {
            let q = 1u32 << (i + 1);
            (
                Just(i),
                Just(z),
                (0..q).prop_map(|v| v as u16),
                (0..q).prop_map(|v| v as u16),
                (0..q).prop_map(|v| v as u16),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn field_axioms((i, use_zech, a, b, c) in field_and_triple()) {
            let pair = &fields()[i];
            let f = if use_zech { &pair.0 } else { &pair.1 };
            let (a, b, c) = (FieldElem(a), FieldElem(b), FieldElem(c));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
            }
            // Frobenius
            prop_assert_eq!(f.square(f.add(a, b)), f.add(f.square(a), f.square(b)));
        }
    }
}
