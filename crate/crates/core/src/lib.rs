//! System dynamics diagrams encoded as attributed C-sets.
//!
//! Causal loop diagrams (CLDs), system structure diagrams (SSDs) and stock &
//! flow diagrams (SFDs) are stored as instances of fixed schemas: one dense
//! table per object, one index column per morphism and one value column per
//! attribute. On top of that encoding the crate provides
//!
//! - homomorphism search ([`hom`]) for pattern finding and type assignment,
//! - open diagrams and their composition by pushout ([`compose`]),
//! - stratification by pullback ([`stratify`]),
//! - the SFD → SSD → CLD translations ([`translate`]),
//! - formula reconstruction ([`formula`]), ODE ([`ode`]) and stochastic
//!   ([`ssa`]) semantics for stock & flow diagrams,
//! - signed-graph analysis of CLDs: path polarity, feedback loops and
//!   edge-to-path pattern matching ([`signed`]).
//!
//! The [`model`] module defines the JSON model file format used by the
//! `catflow` command line tool.

pub mod compose;
pub mod cset;
pub mod dot;
pub mod error;
pub mod formula;
pub mod hom;
pub mod model;
pub mod models;
pub mod ode;
pub mod schemas;
pub mod signed;
pub mod ssa;
pub mod stratify;
pub mod translate;

pub use cset::{AttrValue, CSetInstance, Operator, PartId, Schema, Sign, ValueKind};
pub use error::{Error, Result};
pub use hom::Homomorphism;
