//! Objectives: analytic benchmarks, pressure-recovery relations, the
//! desk-scale shape proxy, and the external-evaluator client.

mod benchmarks;
mod evaluator;
mod hydro;
mod proxy;

pub use benchmarks::{BenchmarkFn, BenchmarkKind, BenchmarkObjective};
pub use evaluator::{EvaluatorBinding, EvaluatorClient, ExternalObjective};
pub use hydro::{cprm, power_from_cprm, HydroState};
pub use proxy::{
    baseline_proxy_values, proxy_score_shape, shape_proxy_objective, ProxyObjective, ProxyParams,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjError {
    #[error("coordinate {dim} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("invalid hydro state: {0}")]
    InvalidHydro(String),
    #[error("failed to start evaluator: {0}")]
    EvaluatorSpawn(String),
    #[error("evaluator failed: {0}")]
    EvaluatorFailure(String),
}
