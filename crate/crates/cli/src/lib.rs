//! Reports and graph export for the `otnplan` command.

pub mod dot;
pub mod report;
