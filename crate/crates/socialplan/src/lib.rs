//! File formats, command line and HTTP service around `socialplan-core`.

pub mod cli;
pub mod formats;
pub mod pipeline;
pub mod service;
