//! Short-term load forecasting with variational mode decomposition, a
//! mutual-information frequency split, extreme learning machines and
//! chaos-initialized particle swarm search.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod cli;
pub mod config;
pub mod elm;
pub mod error;
pub mod metrics;
pub mod mi;
pub mod pipeline;
pub mod plot;
pub mod pso;
pub mod rng;
pub mod search;
pub mod series;
pub mod synthetic;
pub mod vmd;

pub use error::{Error, Result};
