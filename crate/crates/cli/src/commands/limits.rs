use anyhow::{bail, Result};
use qgsw_core::spectrum::{
    eigenvalues, euler_eigenvalues, simply_connected_limit, simply_connected_lower_limit,
};
use serde::Serialize;
use serde_json::json;

use super::{Outcome, Status};
use crate::config::RunConfig;
use crate::output::{Cell, Table};

/// Parameter values approaching zero.
pub const SWEEP: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Modes per sweep.
pub const MODES: usize = 20;
pub const GAP_TOL: f64 = 1e-3;
pub const BURBEA_B: f64 = 1e-6;
pub const BURBEA_TOL: f64 = 1e-5;
const SEARCH_CAP: u32 = 1000;

pub const HEADER: &[&str] = &[
    "sweep", "fixed", "parameter", "n", "omega_minus", "omega_plus", "limit_minus", "limit_plus", "gap",
];

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub sweep: &'static str,
    pub fixed: f64,
    pub modes: Vec<u32>,
    /// Largest gap over the modes, one entry per sweep parameter.
    pub gaps: Vec<f64>,
    pub monotone: bool,
    pub final_gap: f64,
    pub within_tolerance: bool,
}

/// First `MODES` modes from the smallest `n ≥ start` for which `admissible`
/// holds.
fn modes(start: u32, admissible: impl Fn(u32) -> bool) -> Result<Vec<u32>> {
    let found: Vec<u32> = (start..SEARCH_CAP).filter(|&n| admissible(n)).take(MODES).collect();
    if found.len() < MODES {
        bail!("fewer than {MODES} admissible modes below {SEARCH_CAP}");
    }
    Ok(found)
}

type Limit = dyn Fn(u32) -> (f64, f64);

fn sweep(
    table: &mut Table,
    name: &'static str,
    fixed: f64,
    ns: Vec<u32>,
    pair_at: &dyn Fn(u32, f64) -> (f64, f64),
    limit: &Limit,
    compare_minus: bool,
) -> SweepSummary {
    let mut gaps = Vec::new();
    for &x in &SWEEP {
        let mut gap: f64 = 0.0;
        for &n in &ns {
            let (lo, hi) = pair_at(n, x);
            let (llo, lhi) = limit(n);
            let g = if compare_minus { (lo - llo).abs().max((hi - lhi).abs()) } else { (hi - lhi).abs() };
            gap = gap.max(g);
            table.push(vec![
                Cell::from(name),
                Cell::Real(fixed),
                Cell::Real(x),
                Cell::from(n),
                Cell::Real(lo),
                Cell::Real(hi),
                Cell::Real(llo),
                Cell::Real(lhi),
                Cell::Real(g),
            ]);
        }
        gaps.push(gap);
    }
    let final_gap = *gaps.last().expect("nonempty sweep");
    SweepSummary {
        sweep: name,
        fixed,
        modes: ns,
        monotone: gaps.windows(2).all(|w| w[1] < w[0]),
        within_tolerance: final_gap < GAP_TOL,
        final_gap,
        gaps,
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let mut table = Table::new(HEADER);
    let mut sweeps = Vec::new();

    for b in config.b.values() {
        let ns = modes(1, |n| {
            euler_eigenvalues(n, b).is_some() && SWEEP.iter().all(|&l| eigenvalues(n, l, b).is_some())
        })?;
        let pair = move |n: u32, lambda: f64| {
            let p = eigenvalues(n, lambda, b).expect("admissible");
            (p.omega_minus, p.omega_plus)
        };
        let limit = move |n: u32| euler_eigenvalues(n, b).expect("admissible");
        sweeps.push(sweep(&mut table, "lambda_to_zero", b, ns, &pair, &limit, true));
    }
    for lambda in config.lambda.values() {
        let ns = modes(2, |n| SWEEP.iter().all(|&b| eigenvalues(n, lambda, b).is_some()))?;
        let pair = move |n: u32, b: f64| {
            let p = eigenvalues(n, lambda, b).expect("admissible");
            (p.omega_minus, p.omega_plus)
        };
        let limit = move |n: u32| (simply_connected_lower_limit(n, lambda), simply_connected_limit(n, lambda));
        sweeps.push(sweep(&mut table, "b_to_zero", lambda, ns, &pair, &limit, false));
    }

    let mut burbea = Table::new(&["n", "omega_plus", "limit", "gap"]);
    let mut burbea_gap: f64 = 0.0;
    for n in 3..=10u32 {
        let (_, plus) = euler_eigenvalues(n, BURBEA_B).expect("pair exists for small b");
        let limit = f64::from(n - 1) / (2.0 * f64::from(n));
        burbea_gap = burbea_gap.max((plus - limit).abs());
        burbea.push(vec![Cell::from(n), Cell::Real(plus), Cell::Real(limit), Cell::Real((plus - limit).abs())]);
    }

    let all = sweeps.iter().all(|s| s.monotone && s.within_tolerance) && burbea_gap < BURBEA_TOL;
    Ok(Outcome {
        tables: vec![("limits".into(), table), ("limits_burbea".into(), burbea)],
        results: json!({
            "sweeps": sweeps,
            "burbea": { "b": BURBEA_B, "max_gap": burbea_gap, "within_tolerance": burbea_gap < BURBEA_TOL },
            "all_within_tolerance": all,
        }),
        status: Status::Pass,
    })
}
