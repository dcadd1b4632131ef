//! Effective model theory of products of finite structures.
//!
//! The crate provides, as separable pieces that compose into one pipeline:
//!
//! - [`formula`]: many-sorted first-order syntax, parsing, printing, and
//!   normal forms, plus relativization of ring formulas to idempotents;
//! - [`finite`]: finite structures (chiefly the rings `Z/n`), brute-force
//!   satisfaction, definable sets and counting measure, and the
//!   idempotent/stalk calculus of commutative rings;
//! - [`boolean`]: a computable model of the theory of infinite atomic
//!   Boolean algebras enriched with cardinality predicates (`C[j]`, `Fin`,
//!   `Res[n,r]`), with a quantifier-elimination decision procedure and an
//!   independent bounded-witness oracle;
//! - [`product`]: finite-index products of structures, Boolean values,
//!   supports, and stalks at atoms;
//! - [`fv`]: the effective Feferman-Vaught translation reducing truth in a
//!   (restricted) product to truth of a Boolean-sort formula over the index
//!   algebra, with the finite-index specialization and the rectangle
//!   decomposition of definable sets;
//! - [`zmod`]: a decision harness for ring sentences across all `Z/m`,
//!   exact up to a bound and structural via CRT stalk decomposition;
//! - [`hilbert`]: Hilbert symbols over the rationals, the product formula,
//!   and the even-parity kernel check.
//!
//! Every engine is cross-validated against an independent brute-force
//! oracle; a mismatch is reported as a hard error, never a warning.

pub mod boolean;
pub mod corpus;
pub mod error;
pub mod finite;
pub mod formula;
pub mod fv;
pub mod hilbert;
pub mod product;
pub mod zmod;

pub use error::{Error, ParseError, Result};
pub use formula::{parse_formula, render, Formula, PredSym, Signature, Term, Var};
