//! Configuration, report formats and pipelines on top of `degenelab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod suites;

pub use degenelab_core as core;
pub use error::Error;
