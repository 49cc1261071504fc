//! Concatenated Reed-Solomon identification codes over binary fields.
//!
//! - [`gf2m`]: GF(2^m) with Zech-table and carryless-polynomial backends
//! - [`gfext`]: GF(q^k) as polynomials over GF(q)
//! - [`code`]: the `[q,k,δ]_RS2` code, challenges and verification
//! - [`analysis`]: collision statistics and break-even arithmetic
//! - [`bench`]: tag-computation timing against identity transmission time
//! - [`netdemo`]: framed sender/verifier protocol over TCP

pub mod analysis;
pub mod bench;
pub mod bits;
pub mod cli;
pub mod code;
pub mod gf2m;
pub mod gfext;
pub mod netdemo;

pub use code::{Challenge, CodeError, CodeParams, IdCode, Identity, VerifyResult};
pub use gf2m::{Backend, FieldElem, FieldSpec};
pub use gfext::{ExtElem, ExtFieldSpec};
