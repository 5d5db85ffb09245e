use anyhow::Result;
use qgsw_core::spectrum::{
    discriminant, eigenvalues, harmonic_determinants, kernel_vector, spectral_matrix, transversality_check,
};
use qgsw_core::Sign;
use rayon::prelude::*;
use serde_json::json;

use super::{parameter_cells, resolve_indices, Outcome, Status};
use crate::config::RunConfig;
use crate::output::{Cell, Table};

pub const HEADER: &[&str] = &[
    "lambda",
    "b",
    "m",
    "discriminant",
    "omega_minus",
    "omega_plus",
    "kernel_minus_1",
    "kernel_minus_2",
    "kernel_plus_1",
    "kernel_plus_2",
    "transversal_minus",
    "transversal_plus",
    "harmonic_min_minus",
    "harmonic_min_plus",
];

/// Highest harmonic `k` checked in `det M_{km} ≠ 0`.
pub const HARMONIC_MAX: u32 = 10;

/// `min_k |det M_{km}| / ‖M_{km}‖²` over `k = 2..=HARMONIC_MAX`.
pub fn harmonic_margin(m: u32, lambda: f64, b: f64, omega: f64) -> f64 {
    harmonic_determinants(m, lambda, b, omega, HARMONIC_MAX)
        .into_iter()
        .map(|(k, det)| det.abs() / spectral_matrix(k * m, lambda, b, omega).norm().powi(2))
        .fold(f64::INFINITY, f64::min)
}

fn row(lambda: f64, b: f64, m: u32) -> Vec<Cell> {
    let mut cells = vec![Cell::Real(lambda), Cell::Real(b), Cell::from(m), Cell::Real(discriminant(m, lambda, b))];
    match eigenvalues(m, lambda, b).filter(|p| !p.degenerate && p.discriminant > 0.0) {
        Some(pair) => {
            cells.push(Cell::Real(pair.omega_minus));
            cells.push(Cell::Real(pair.omega_plus));
            let kernels = Sign::BOTH.map(|s| kernel_vector(m, lambda, b, s).ok());
            for k in &kernels {
                cells.push(Cell::real(k.map(|v| v[0])));
                cells.push(Cell::real(k.map(|v| v[1])));
            }
            for s in Sign::BOTH {
                cells.push(transversality_check(m, lambda, b, s).map_or(Cell::Missing, Cell::Bool));
            }
            for s in Sign::BOTH {
                cells.push(Cell::Real(harmonic_margin(m, lambda, b, pair.omega(s))));
            }
        }
        None => cells.extend(std::iter::repeat_n(Cell::Missing, HEADER.len() - 4)),
    }
    cells
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let cells = parameter_cells(config);
    let per_cell: Vec<Result<(Vec<Vec<Cell>>, serde_json::Value)>> = cells
        .par_iter()
        .map(|&(lambda, b)| {
            let (threshold, ms) = resolve_indices(&config.m, lambda, b, config.window, true)?;
            let t = threshold.expect("threshold requested");
            let rows: Vec<Vec<Cell>> = ms.iter().map(|&m| row(lambda, b, m)).collect();
            let transversal = rows.iter().all(|r| r[10] == Cell::Bool(true) && r[11] == Cell::Bool(true));
            let summary = json!({
                "lambda": lambda,
                "b": b,
                "n0": t.n0,
                "n_threshold": t.n,
                "rows": rows.len(),
                "all_transversal": transversal,
            });
            Ok((rows, summary))
        })
        .collect();

    let mut table = Table::new(HEADER);
    let mut summaries = Vec::new();
    for cell in per_cell {
        let (rows, summary) = cell?;
        rows.into_iter().for_each(|r| table.push(r));
        summaries.push(summary);
    }
    Ok(Outcome { tables: vec![("eigen".into(), table)], results: json!({ "cells": summaries }), status: Status::Pass })
}
