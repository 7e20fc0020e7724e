//! Semantic transfer learning over EL++ ontologies.

pub mod boost;
pub mod domain;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod ontology;
pub mod reasoner;
pub mod synth;

pub use error::{Error, Result};
