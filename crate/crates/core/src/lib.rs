//! Opcode-frequency malware triage for Android DEX binaries.
//!
//! The crate covers the whole path from raw `classes.dex` files to
//! detection reports: [`dex`] turns binaries into 256-bin opcode
//! histograms, [`dataset`] labels and persists them, [`clustering`]
//! partitions samples and scores the partitions, [`learn`] balances
//! classes and fits classifiers, and [`eval`] runs cross-validated plain
//! and cluster-then-classify pipelines. [`cli`] wires these into the
//! `droidlens` command.

mod atomic;
pub mod cli;
pub mod clustering;
pub mod dataset;
pub mod dex;
pub mod eval;
pub mod learn;
mod matrix;
pub mod rng;
