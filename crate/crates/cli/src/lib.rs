//! Batch driver for the `cassini-stab` binary.

// `!(x > y)` is used on purpose to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use cassini_core::integrate::IntegrateError;
use cassini_core::pipeline::PipelineError;
use cassini_core::stab::StabError;
use config::ConfigError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("stab: {0}")]
    Stab(#[from] StabError),
    #[error("integrate: {0}")]
    Integrate(#[from] IntegrateError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

pub mod exit {
    pub const CONFIG: i32 = 3;
    pub const MODEL: i32 = 4;
    pub const EQUIL: i32 = 5;
    pub const BIRKHOFF: i32 = 6;
    pub const STAB: i32 = 7;
    pub const SERIES: i32 = 8;
    pub const INTEGRATE: i32 = 9;
    pub const OUTPUT: i32 = 10;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Pipeline(p) => match p {
                PipelineError::Model(_) => exit::MODEL,
                PipelineError::Equil(_) => exit::EQUIL,
                PipelineError::Birkhoff(_) => exit::BIRKHOFF,
                PipelineError::Stab(_) => exit::STAB,
                PipelineError::Series(_) => exit::SERIES,
            },
            CliError::Stab(_) => exit::STAB,
            CliError::Integrate(_) => exit::INTEGRATE,
            CliError::Output { .. } => exit::OUTPUT,
        }
    }
}
