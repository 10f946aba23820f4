//! Mining fine-grained AST changes from Git history and aggregating them
//! into commit-level analytics.
//!
//! The pipeline has two halves. [`miner`] replays a repository's first-parent
//! history, diffs every changed source file with [`diff`], and writes one
//! pound-separated row per classified change. [`dataset`] and [`analytics`]
//! read those rows back through a lazy, partition-parallel plan and produce
//! per-commit aggregates and their author, project and global roll-ups.

pub mod analytics;
pub mod ast;
pub mod bench;
pub mod dataset;
pub mod diff;
pub mod miner;
pub mod synth;

#[doc(hidden)]
pub mod testkit;
