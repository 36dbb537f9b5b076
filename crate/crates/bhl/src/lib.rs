//! Experiment runner and command-line front end for `bhl-core`.

pub mod cli;
pub mod config;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod lemmas;
pub mod parse;

pub use config::{ExperimentConfig, Resolved};
pub use equivalence::{run_equivalence, EquivalenceReport, Verdict};
pub use error::{HarnessError, HarnessResult};
pub use lemmas::{run_lemma_suite, LemmaReport};
