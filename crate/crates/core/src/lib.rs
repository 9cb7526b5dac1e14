//! Hasse-derivative calculus on the Ree curve over F_q, q = 3^(2s+1).
//!
//! The crate is organised bottom-up: finite-field arithmetic ([`field`]),
//! curve invariants ([`params`]), the coordinate ring ([`ring`]), symbolic
//! and numeric derivative engines ([`hasse`], [`series`]), and the order,
//! identity and Weierstrass machinery built on top of them.

pub mod algebra;
pub mod error;
pub mod field;
pub mod hasse;
pub mod identities;
pub mod orders;
pub mod params;
pub mod poly3;
pub mod ring;
pub mod series;
pub mod support;
pub mod weierstrass;

pub use error::{Error, Result};
pub use field::{FieldContext, FieldElement};
pub use params::{ReeParams, SymbolicIndex};
