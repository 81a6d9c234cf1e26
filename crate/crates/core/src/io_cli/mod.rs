//! Configuration, file formats and the command implementations behind the
//! `indentomo` binary.

pub mod commands;
pub mod config;
pub mod mapfile;
pub mod units;

pub use config::RunConfig;
pub use mapfile::{load_map, save_map};
