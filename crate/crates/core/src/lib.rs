//! Clustering of tagged bookmarks into candidate stacks.
//!
//! `tagstack-core` holds the algorithmic half of the toolkit: the bookmark
//! data model and its dataset statistics ([`corpus`]), per-user tag vector
//! spaces ([`vectorize`]), deterministic k-way repeated bisections with
//! global refinement ([`cluster`]), stack-recovery scoring and the K sweep
//! and benchmark protocols ([`eval`]), and a planted-topic corpus generator
//! ([`synth`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the parallel
//! driver and the command line live in the `tagstack` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod corpus;
pub mod eval;
pub mod seed;
pub mod synth;
pub mod vectorize;

pub use cluster::{rbr, ClusterConfig, ClusterError, Partition};
pub use corpus::{Dataset, DatasetBuilder, Stack, TagAssignment, UserView};
pub use eval::{BenchmarkReport, MacroScores, StackScore, SweepResult};
pub use vectorize::{PageVector, TagVocabulary};
