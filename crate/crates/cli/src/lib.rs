//! Command line tool and JSON/HTTP service over the `lgc` kernels.

pub mod api;
pub mod cli;
pub mod handlers;
pub mod server;

/// JSON schema for every request and response body.
pub const SCHEMA: &str = include_str!("../schema/api.v1.schema.json");
