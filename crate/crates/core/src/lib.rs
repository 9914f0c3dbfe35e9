//! Partial order of cryptographic keys for multiset-rewriting protocol models.
//!
//! The crate parses protocol models written in a prover-compatible rule
//! language, extracts the secrecy/authenticity dependencies between keys,
//! ranks prover goals along the resulting key order, generates synthetic
//! key-chain benchmark models and validates models with a bounded
//! Dolev-Yao executor.

pub mod assets;
pub mod cli;
pub mod exec;
pub mod keydep;
pub mod model;
pub mod oracle;
pub mod synth;
pub mod term;

pub use keydep::{extract, ExtractOptions, KeyClassDag};
pub use model::{parse_model, serialize, Model};
pub use term::{Substitution, Term};
