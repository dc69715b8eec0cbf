//! Experiment harness around `nomad-core`: configuration files, seeded
//! Monte Carlo sweeps, benchmark ingestion, and result files. The `nomad`
//! binary is a thin command-line front end over these modules.

pub mod config;
pub mod experiments;
pub mod sachs;
pub mod seeding;
