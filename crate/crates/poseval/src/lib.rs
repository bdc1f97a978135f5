//! Protein-ligand pose evaluation.
//!
//! Scores predicted protein-ligand complex structures against crystal
//! references: symmetry-corrected RMSD, centroid RMSD, lDDT and lDDT-PLI,
//! interaction-fingerprint Earth mover's distances (PLIF-EMD) with
//! cohort-normalized Wasserstein matching scores (PLIF-WM), and a
//! geometric validity battery. The [`harness`] module orchestrates
//! manifest-driven benchmark runs and report aggregation; [`cli`] exposes
//! everything as subcommands of the `poseval` binary.

pub mod cli;
pub mod elements;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod molgraph;
pub mod plif;
pub mod structio;
pub mod validity;

pub use error::{Error, Result};
