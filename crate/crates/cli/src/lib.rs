//! Scenario runner for the `wgqed` library: TOML configs in, CSV tables and
//! a JSON manifest out.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod config;
pub mod output;
pub mod platforms;
pub mod run;

pub use config::{parse_config, parse_with_overrides, render, ConfigError, RunConfig, Scenario};
pub use output::{RunManifest, MANIFEST_SCHEMA};
pub use run::{run, RunError, RunOptions};
