pub mod branch;
pub mod eigen;
pub mod limits;
pub mod spectrum;
pub mod verify;

use anyhow::{anyhow, Result};
use qgsw_core::spectrum::find_threshold;
use qgsw_core::Threshold;
use serde::Serialize;
use serde_json::Value;

use crate::config::{IndexRange, RunConfig};
use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    VerificationFailure,
    PartialBranch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::VerificationFailure => 2,
            Status::PartialBranch => 3,
        }
    }
}

/// Everything a command produces, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// `(file stem, table)` in output order.
    pub tables: Vec<(String, Table)>,
    pub results: Value,
    pub status: Status,
}

/// `(λ, b)` cells in lexicographic order.
pub(crate) fn parameter_cells(config: &RunConfig) -> Vec<(f64, f64)> {
    let bs = config.b.values();
    config
        .lambda
        .values()
        .into_iter()
        .flat_map(|l| bs.iter().map(move |&b| (l, b)))
        .collect()
}

/// Threshold when the range needs it (or always, if `always`), and the
/// resolved indices.
pub(crate) fn resolve_indices(
    range: &IndexRange,
    lambda: f64,
    b: f64,
    window: u32,
    always: bool,
) -> Result<(Option<Threshold>, Vec<u32>)> {
    let threshold = if always || range.needs_threshold() {
        Some(find_threshold(lambda, b, window).map_err(|e| anyhow!("λ = {lambda}, b = {b}: {e}"))?)
    } else {
        None
    };
    let indices = range
        .resolve(threshold.map(|t| t.n))
        .map_err(|e| anyhow!("λ = {lambda}, b = {b}: {e}"))?;
    Ok((threshold, indices))
}
