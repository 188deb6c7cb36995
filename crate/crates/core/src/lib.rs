//! Evaluation of multi-object / cell tracking results as acyclic oriented
//! lineage graphs.
//!
//! The crate models tracking output as graphs whose vertices are per-frame
//! detections and whose edges are either same-track continuations or
//! mother-to-daughter division links. On top of that model it provides:
//!
//! - the weighted AOGM edit score ([`aogm`]),
//! - reference/computed vertex matching strategies ([`matching`]),
//! - event-level mitosis recall/precision ([`mitosis_metrics`]),
//! - a post-processor that links disappeared tracks to nearby newborn
//!   tracks as division events ([`linker`]),
//! - scenario builders and an exhaustive search for cases where AOGM ranks
//!   a prediction with correctly detected divisions *worse* than the same
//!   prediction with all division links removed ([`scenarios`]),
//! - strict parsers/writers for track records, detection tables, graph
//!   documents and reports ([`track_io`]).

pub mod aogm;
pub mod lineage_graph;
pub mod linker;
pub mod matching;
pub mod mitosis_metrics;
pub mod scenarios;
pub mod track_io;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
