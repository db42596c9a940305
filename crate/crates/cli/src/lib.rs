//! Command implementations and the HTTP query service behind the
//! `sketchchain` binary.

pub mod commands;
pub mod config;
pub mod server;
