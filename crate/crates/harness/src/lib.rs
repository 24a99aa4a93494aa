//! Trace generation and replay for the adaptive structures.

pub mod generate;
pub mod run;
pub mod trace;

pub use generate::{generate, generate_ops, GenConfig};
pub use run::{annotate, run, RunError, RunOptions, RunSummary, StatsRow};
pub use trace::{Kind, Op, Pos, Trace};
