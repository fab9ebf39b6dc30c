//! Activity grammars: induction from action-sequence corpora, breadth-first
//! Earley parsing of frame-level class probabilities, segment length
//! optimization and evaluation utilities.

pub mod baseline;
pub mod bench;
pub mod corpus;
pub mod error;
pub mod frames;
pub mod grammar;
pub mod kari;
pub mod logspace;
pub mod metrics;
pub mod parser;
pub mod refine;
pub mod segment;
pub mod synth;

pub use error::{Error, Result};
