use qgsw_core::contour::{g_functional_unreduced, FourierBoundary, QuadratureGrid};
use qgsw_core::spectrum::{eigenvalues, find_threshold, Sign};
use qgsw_core::*;

const LAMBDA: f64 = 1.0;
const B: f64 = 0.5;

fn problem(sign: Sign, nodes: usize, trunc: usize) -> BranchProblem {
    let t = find_threshold(LAMBDA, B, 50).unwrap();
    let m = (t.n + 2) as usize;
    BranchProblem::new(LAMBDA, B, m, sign, trunc, QuadratureGrid::new(nodes).unwrap())
}

fn off_lattice_is_zero(point: &BranchPoint) -> bool {
    [&point.f1, &point.f2].iter().all(|f| {
        f.coefficients()
            .iter()
            .enumerate()
            .all(|(n, &a)| (n + 1) % point.m == 0 || a == 0.0)
    })
}

#[test]
fn zero_amplitude_returns_annulus() {
    for sign in Sign::BOTH {
        let p = problem(sign, 128, 8);
        let point = newton_solve(&p, 0.0, &InitialGuess::Annulus).unwrap();
        let expected = eigenvalues(p.m as u32, LAMBDA, B).unwrap().omega(sign);
        assert_eq!(point.omega, expected);
        assert!(point.residual <= 1e-11);
        assert!(point.f1.coefficients().iter().chain(point.f2.coefficients()).all(|&a| a == 0.0));
    }
}

#[test]
fn small_amplitude_point() {
    for sign in Sign::BOTH {
        let p = problem(sign, 128, 8);
        let (omega_m, kernel) = p.bifurcation().unwrap();
        let s = 1e-4;
        let point = newton_solve(&p, s, &InitialGuess::Annulus).unwrap();
        assert!(point.residual < 1e-10);
        assert!((point.omega - omega_m).abs() < 1e-2);
        assert!(off_lattice_is_zero(&point));

        let lead = p.m - 1;
        let (a, c) = (point.f1.coefficient(lead), point.f2.coefficient(lead));
        match point.pinned {
            Pinned::Outer => assert_eq!(a, s),
            Pinned::Inner => assert_eq!(c, s),
        }
        let ratio = c / a;
        let expected = kernel[1] / kernel[0];
        assert!(((ratio - expected) / expected).abs() < 0.05, "{sign}: {ratio} vs {expected}");
    }
}

#[test]
fn plus_branch_pins_the_outer_interface() {
    let p = problem(Sign::Plus, 128, 8);
    assert_eq!(p.pinned().unwrap(), Pinned::Outer);
    let minus = problem(Sign::Minus, 128, 8);
    assert_eq!(minus.pinned().unwrap(), Pinned::Inner);
}

#[test]
fn forced_pin_is_respected() {
    let mut p = problem(Sign::Plus, 128, 8);
    p.pin = Some(Pinned::Inner);
    let (_, kernel) = p.bifurcation().unwrap();
    let s = 1e-4 * kernel[1] / kernel[0];
    let point = newton_solve(&p, s, &InitialGuess::Annulus).unwrap();
    assert_eq!(point.pinned, Pinned::Inner);
    assert_eq!(point.f2.coefficient(p.m - 1), s);
    assert!(point.residual <= 1e-10);
}

#[test]
fn short_branches_are_ordered_and_consistent() {
    let steps = 3;
    let s_max = 2e-3;
    let traces: Vec<BranchTrace> = Sign::BOTH
        .iter()
        .map(|&sign| trace_branch(&problem(sign, 128, 8), s_max, steps).unwrap())
        .collect();
    for trace in &traces {
        assert!(trace.is_complete(), "{:?}", trace.termination);
        assert_eq!(trace.points.len(), steps);
        for w in trace.points.windows(2) {
            assert!(w[1].s > w[0].s);
        }
        for point in &trace.points {
            assert!(point.residual <= 1e-10);
            assert!(off_lattice_is_zero(point));
        }
        // Linear extrapolation of the two smallest amplitudes back to s = 0.
        let (p0, p1) = (&trace.points[0], &trace.points[1]);
        let intercept = p0.omega - p0.s * (p1.omega - p0.omega) / (p1.s - p0.s);
        assert!((intercept - trace.omega_bifurcation).abs() < 1e-3);
    }
    assert!(traces[0].points[0].omega < traces[1].points[0].omega);
}

#[test]
fn failed_solves_end_the_trace() {
    let mut p = problem(Sign::Plus, 64, 4);
    p.settings.max_iterations = 0;
    let trace = trace_branch(&p, 1e-3, 4).unwrap();
    assert!(trace.points.is_empty());
    assert!(matches!(trace.termination, Termination::Failed { .. }));
    assert!(!trace.is_complete());
}

#[test]
fn invalid_requests() {
    let p = problem(Sign::Plus, 64, 4);
    assert!(matches!(trace_branch(&p, 0.0, 4), Err(ContinuationError::InvalidArgument(_))));
    assert!(matches!(trace_branch(&p, 1e-3, 0), Err(ContinuationError::InvalidArgument(_))));
    let too_big = BranchProblem::new(LAMBDA, B, 40, Sign::Plus, 4, QuadratureGrid::new(64).unwrap());
    assert!(newton_solve(&too_big, 1e-3, &InitialGuess::Annulus).is_err());
}

#[test]
fn verification_of_annulus() {
    let grid = QuadratureGrid::new(128).unwrap();
    let omega = eigenvalues(5, LAMBDA, B).unwrap().omega_plus;
    let report = verify_vstate(&BranchPoint::annulus(5, B, omega), LAMBDA, B, &grid).unwrap();
    assert!(report.residual <= 1e-11);
    assert_eq!(report.symmetry_defect, 0.0);
    assert_eq!(report.grid_size, 256);
}

#[test]
fn verification_of_converged_and_corrupted_points() {
    let p = problem(Sign::Plus, 128, 8);
    let point = newton_solve(&p, 1e-3, &InitialGuess::Annulus).unwrap();
    let report = verify_vstate(&point, LAMBDA, B, &p.grid).unwrap();
    assert!(report.residual <= 1e-9);
    assert!((report.residual - point.residual).abs() < 1e-9);
    assert_eq!(report.symmetry_defect, 0.0);

    // The reduced evaluation must agree with a full one on the doubled grid.
    let fine = p.grid.refined();
    let full = g_functional_unreduced(LAMBDA, B, point.omega, &point.f1, &point.f2, &fine).unwrap();
    let worst = full.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((worst - report.residual).abs() < 1e-12);

    let bumped = point.f1.coefficient(2 * p.m - 1) + 1e-3;
    let corrupted = BranchPoint { f1: point.f1.with_coefficient(2 * p.m - 1, bumped).unwrap(), ..point.clone() };
    let bad = verify_vstate(&corrupted, LAMBDA, B, &p.grid).unwrap();
    assert!(bad.residual > 1e-6);

    let off = BranchPoint { f2: FourierBoundary::new(B, vec![0.0, 1e-3]).unwrap(), ..point };
    let bad = verify_vstate(&off, LAMBDA, B, &p.grid).unwrap();
    assert!((bad.symmetry_defect - 1e-3).abs() < 1e-15);
}
