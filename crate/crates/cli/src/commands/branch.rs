use anyhow::{bail, Result};
use qgsw_core::contour::QuadratureGrid;
use qgsw_core::spectrum::discriminant;
use qgsw_core::{trace_branch, verify_vstate, BranchProblem, BranchTrace, Sign, Termination};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{parameter_cells, resolve_indices, Outcome, Status};
use crate::config::RunConfig;
use crate::output::{Cell, Table};

/// Points used for the linear extrapolation of Ω back to `s = 0`.
pub const EXTRAPOLATION_POINTS: usize = 3;

pub const SUMMARY_HEADER: &[&str] = &[
    "lambda",
    "b",
    "m",
    "sign",
    "pinned",
    "omega_bifurcation",
    "omega_extrapolated",
    "gap",
    "kernel_ratio",
    "tangent_ratio",
    "points",
    "max_residual",
    "max_residual_refined",
    "complete",
    "termination",
    "file",
];

#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    pub lambda: f64,
    pub b: f64,
    pub m: u32,
    pub sign: String,
    pub pinned: String,
    pub file: String,
    pub omega_bifurcation: f64,
    pub omega_extrapolated: Option<f64>,
    pub gap: Option<f64>,
    pub kernel: [f64; 2],
    pub kernel_ratio: f64,
    pub tangent_ratio: Option<f64>,
    pub points: usize,
    pub max_residual: Option<f64>,
    pub max_residual_refined: Option<f64>,
    pub complete: bool,
    pub termination: String,
}

struct Task {
    index: (usize, usize),
    lambda: f64,
    b: f64,
    m: u32,
    sign: Sign,
}

fn problem(config: &RunConfig, task: &Task) -> Result<BranchProblem> {
    let grid = QuadratureGrid::new(config.grid_size)?;
    let mut p = BranchProblem::new(task.lambda, task.b, task.m as usize, task.sign, config.trunc, grid);
    p.settings.tolerance = config.tol;
    p.pin = config.pin.pinned();
    Ok(p)
}

/// Resolves every `(λ, b, m, sign)` and refuses the whole run if any of them
/// has no eigenvalue pair or cannot be resolved by the grid.
fn tasks(config: &RunConfig) -> Result<Vec<Task>> {
    let nb = config.b.values().len();
    let mut out = Vec::new();
    for (cell, (lambda, b)) in parameter_cells(config).into_iter().enumerate() {
        let (_, ms) = resolve_indices(&config.m, lambda, b, config.window, false)?;
        for m in ms {
            let delta = discriminant(m, lambda, b);
            if !(delta > 0.0) {
                bail!("no eigenvalue pair at λ = {lambda}, b = {b}, m = {m}: discriminant Δ_{m} = {delta:e} is not positive");
            }
            if (config.grid_size / 2 - 1) / m as usize == 0 {
                bail!("grid of {} nodes cannot resolve m = {m}", config.grid_size);
            }
            for sign in config.sign.signs() {
                out.push(Task { index: (cell / nb, cell % nb), lambda, b, m, sign });
            }
        }
    }
    Ok(out)
}

fn branch_table(config: &RunConfig, task: &Task, trace: &BranchTrace) -> Result<(Table, Vec<f64>)> {
    let m = task.m as usize;
    let modes = trace.points.iter().map(|p| p.trunc).max().unwrap_or(0);
    let mut header: Vec<String> =
        ["s", "omega", "residual", "residual_refined", "iterations", "trunc", "pinned"].map(String::from).to_vec();
    for f in ["f1", "f2"] {
        header.extend((1..=modes).map(|k| format!("{f}_{}", m * k - 1)));
    }
    let grid = QuadratureGrid::new(config.grid_size)?;
    let mut table = Table { header, rows: Vec::new() };
    let mut refined = Vec::with_capacity(trace.points.len());
    for p in &trace.points {
        let report = verify_vstate(p, task.lambda, task.b, &grid)?;
        refined.push(report.residual);
        let mut row = vec![
            Cell::Real(p.s),
            Cell::Real(p.omega),
            Cell::Real(p.residual),
            Cell::Real(report.residual),
            Cell::from(p.iterations),
            Cell::from(p.trunc),
            Cell::from(p.pinned.name()),
        ];
        for f in [&p.f1, &p.f2] {
            row.extend((1..=modes).map(|k| Cell::Real(f.coefficient(m * k - 1))));
        }
        table.push(row);
    }
    Ok((table, refined))
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let tasks = tasks(config)?;
    let traced: Vec<Result<(String, Table, BranchSummary)>> = tasks
        .par_iter()
        .map(|task| {
            let p = problem(config, task)?;
            let pinned = p.pinned()?;
            let trace = trace_branch(&p, config.s_max, config.steps)?;
            let (table, refined) = branch_table(config, task, &trace)?;
            let stem = format!("branch_l{}_b{}_m{}_{}", task.index.0, task.index.1, task.m, task.sign.name());
            let file = format!("{stem}.{}", config.format.extension());
            let extrapolated = trace.extrapolated_omega(EXTRAPOLATION_POINTS);
            let summary = BranchSummary {
                lambda: task.lambda,
                b: task.b,
                m: task.m,
                sign: task.sign.name().into(),
                pinned: pinned.name().into(),
                file,
                omega_bifurcation: trace.omega_bifurcation,
                omega_extrapolated: extrapolated,
                gap: extrapolated.map(|o| (o - trace.omega_bifurcation).abs()),
                kernel: trace.kernel,
                kernel_ratio: trace.kernel[1] / trace.kernel[0],
                tangent_ratio: trace.tangent_ratio(),
                points: trace.points.len(),
                max_residual: max_of(trace.points.iter().map(|p| p.residual)),
                max_residual_refined: max_of(refined.into_iter()),
                complete: trace.is_complete(),
                termination: match &trace.termination {
                    Termination::Completed => "completed".into(),
                    Termination::Failed { s, reason } => format!("failed at s = {s:e}: {reason}"),
                },
            };
            Ok((stem, table, summary))
        })
        .collect();

    let mut tables = Vec::new();
    let mut summary_table = Table::new(SUMMARY_HEADER);
    let mut summaries = Vec::new();
    for item in traced {
        let (stem, table, s) = item?;
        summary_table.push(vec![
            Cell::Real(s.lambda),
            Cell::Real(s.b),
            Cell::from(s.m),
            Cell::from(s.sign.as_str()),
            Cell::from(s.pinned.as_str()),
            Cell::Real(s.omega_bifurcation),
            Cell::real(s.omega_extrapolated),
            Cell::real(s.gap),
            Cell::Real(s.kernel_ratio),
            Cell::real(s.tangent_ratio),
            Cell::from(s.points),
            Cell::real(s.max_residual),
            Cell::real(s.max_residual_refined),
            Cell::Bool(s.complete),
            Cell::from(s.termination.as_str()),
            Cell::from(s.file.as_str()),
        ]);
        tables.push((stem, table));
        summaries.push(s);
    }
    let status = if summaries.iter().all(|s| s.complete) { Status::Pass } else { Status::PartialBranch };
    tables.push(("branch_summary".into(), summary_table));
    Ok(Outcome { tables, results: json!({ "branches": summaries }), status })
}
