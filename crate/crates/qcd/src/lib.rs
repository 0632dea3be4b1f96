//! Command-line front end for the quantum circuit designer: configuration,
//! file formats, multi-seed training and the oracle runner.

pub mod cli;
pub mod commands;
pub mod config;
pub mod formats;
