//! Causal discovery by assumption-based argumentation over noisy
//! conditional-independence facts.
//!
//! The crate covers the full pipeline:
//!
//! - [`graph`] — DAGs and partially directed graphs, d-separation,
//!   CPDAGs/Markov equivalence, edge-list text format.
//! - [`citest`] — datasets and conditional-independence tests (Fisher-z on
//!   partial correlations, plus a graph oracle for controlled experiments).
//! - [`facts`] — weighted independence/dependence facts, the p-value/strength
//!   weighting scheme, and a stable majority-PC fact sourcer.
//! - [`aba`] — assumption-based argumentation kernel: frameworks, semantics
//!   enumeration, and the causal framework construction.
//! - [`solver`] — native constraint search enumerating all DAGs consistent
//!   with a fact set (hard or weighted-soft mode).
//! - [`abapc`] — the fact-dropping discovery loop with model scoring.
//! - [`eval`] — structural distances (SHD, SID) and precision/recall.
//! - [`data`] — discrete Bayesian networks (BIF subset), forward sampling,
//!   linear-Gaussian SEM simulation, CSV datasets.
//! - [`cli`] — the library face of the command-line interface.
//!
//! Every enumeration (models, extensions, paths, equivalence classes) is
//! emitted in a canonical sorted order, so identical inputs produce
//! byte-identical outputs.
//!
//! Start with the runnable examples in `examples/` — each major capability
//! has one, e.g. `cargo run --example discovery_pipeline`.

pub mod graph;

pub mod citest;

pub mod facts;

pub mod aba;
pub mod solver;
pub mod abapc;
pub mod data;
pub mod eval;
pub mod cli;
