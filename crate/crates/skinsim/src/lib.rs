//! File formats, run configuration and the `skinsim` command-line driver
//! built on [`skinsim_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
