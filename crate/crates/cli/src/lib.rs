//! Configuration, run orchestration and CSV output for `dimer-ppwpi`.

pub mod config;
pub mod run;
