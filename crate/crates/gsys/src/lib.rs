//! Analysis and synthesis of strongly controllable group systems.
//!
//! A *group system* is a set of sequences over per-time alphabet groups that
//! is closed under componentwise products — equivalently a group code, a
//! group shift, or (on a finite window) a linear block code over groups.
//! This crate builds the canonic trellis of such a system, computes its
//! splitting/merging subgroup chains and controllability index, extracts a
//! generator basis, runs the time-domain encoder and its inverse, verifies
//! the signature-sequence and signature-group axioms, and constructs new
//! systems from scratch by completing partially specified component groups.

pub mod algebra;
pub mod chains;
pub mod encoder;
pub mod generators;
pub mod report;
pub mod signature;
pub mod synthesis;
pub mod system;

#[cfg(test)]
pub(crate) mod testutil;
