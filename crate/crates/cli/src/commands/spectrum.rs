use anyhow::Result;
use qgsw_core::spectrum::{discriminant, eigenvalues, omega_limits};
use rayon::prelude::*;
use serde_json::json;

use super::{parameter_cells, resolve_indices, Outcome, Status};
use crate::config::RunConfig;
use crate::output::{Cell, Table};

pub const HEADER: &[&str] = &[
    "lambda",
    "b",
    "n",
    "discriminant",
    "omega_minus",
    "omega_plus",
    "omega_inf_minus",
    "omega_inf_plus",
    "n0",
    "n_threshold",
];

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let cells = parameter_cells(config);
    let per_cell: Vec<Result<(Vec<Vec<Cell>>, serde_json::Value)>> = cells
        .par_iter()
        .map(|&(lambda, b)| {
            let (threshold, ns) = resolve_indices(&config.n, lambda, b, config.window, true)?;
            let t = threshold.expect("threshold requested");
            let (inf_minus, inf_plus) = omega_limits(lambda, b);
            let rows = ns
                .iter()
                .map(|&n| {
                    let pair = eigenvalues(n, lambda, b);
                    vec![
                        Cell::Real(lambda),
                        Cell::Real(b),
                        Cell::from(n),
                        Cell::Real(discriminant(n, lambda, b)),
                        Cell::real(pair.as_ref().map(|p| p.omega_minus)),
                        Cell::real(pair.as_ref().map(|p| p.omega_plus)),
                        Cell::Real(inf_minus),
                        Cell::Real(inf_plus),
                        Cell::from(t.n0),
                        Cell::from(t.n),
                    ]
                })
                .collect();
            let summary = json!({
                "lambda": lambda,
                "b": b,
                "n0": t.n0,
                "n_threshold": t.n,
                "omega_inf_minus": inf_minus,
                "omega_inf_plus": inf_plus,
                "rows": ns.len(),
            });
            Ok((rows, summary))
        })
        .collect();

    let mut table = Table::new(HEADER);
    let mut summaries = Vec::with_capacity(cells.len());
    for cell in per_cell {
        let (rows, summary) = cell?;
        rows.into_iter().for_each(|r| table.push(r));
        summaries.push(summary);
    }
    Ok(Outcome {
        tables: vec![("spectrum".into(), table)],
        results: json!({ "cells": summaries }),
        status: Status::Pass,
    })
}
