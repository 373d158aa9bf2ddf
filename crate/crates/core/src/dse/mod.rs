// SPDX-License-Identifier: Apache-2.0

//! Design-space explorations built on repeated simulation and aggregation.

mod amdahl;
mod budget;
mod compression;
mod fallback;
mod placement;
mod scaling;

use thiserror::Error;

use crate::power::{aggregate, PowerError, PowerReport};
use crate::scenario::Scenario;
use crate::sim::{run_with, SimError, SimOptions, SimTrace};

pub use amdahl::{amdahl_analysis, bound_by_zeroing, AmdahlRow, AmdahlTable, DEFAULT_THRESHOLDS};
pub use budget::{budget_check, BudgetCheck};
pub use compression::{compression_sweep, CompressionGrid, CompressionRow, DEFAULT_DIVISORS, DEFAULT_RATIOS};
pub use fallback::radio_fallback;
pub use placement::{placement_sweep, PlacementRow, SweepResult, BASELINE_LABEL, MAX_FREE_PRIMITIVES};
pub use scaling::{scaling_projection, PowerType, ScalingTable, YearProjection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DseError {
    #[error("combinatorial guard: {0} free primitives exceeds the limit of {MAX_FREE_PRIMITIVES}")]
    Guard(usize),
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("primitive `{0}` has a forced placement and cannot be swept")]
    ForcedPrimitive(String),
    #[error("primitive `{0}` has no on-device taskgraph")]
    NoOnDeviceGraph(String),
    #[error("demand of {demand_bps} b/s exceeds every radio profile")]
    NoRadioProfile { demand_bps: f64 },
    #[error("scenario has no radio")]
    NoRadio,
    #[error("device `{0}` has no power decomposition")]
    MissingDecomposition(String),
    #[error("invalid scaling table: {0}")]
    BadScalingTable(String),
    #[error("invalid sweep input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Power(#[from] PowerError),
}

/// Settings shared by every sweep point.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 uses every logical processor.
    pub jobs: usize,
    pub sim: SimOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub trace: SimTrace,
    pub report: PowerReport,
}

/// Simulates and aggregates one configuration.
pub fn evaluate(scenario: &Scenario, sim: SimOptions) -> Result<Evaluation, DseError> {
    let trace = run_with(scenario, sim)?;
    let report = aggregate(&trace, scenario)?;
    Ok(Evaluation { trace, report })
}

/// Maps `f` over `items` on a pool of `jobs` threads, keeping input order.
pub(crate) fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, DseError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, DseError> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| DseError::BadInput(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}
