//! File formats, batch orchestration and the command-line interface on top
//! of `step-parts-core`.

pub mod batch;
pub mod cli;
pub mod io;
pub mod report;

pub use step_parts_core as core;
