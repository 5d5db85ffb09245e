//! Branches of m-fold V-states bifurcating from the annulus.
//!
//! A branch is parametrised by an amplitude `s` pinned to the first m-fold
//! coefficient of one interface: normally the outer one,
//! `f_1 = s w̄^{m−1} + Σ_{k≥2} a_{mk−1} w̄^{mk−1}`. When the kernel direction
//! is dominated by the inner interface the inner coefficient is pinned
//! instead, since the outer one then stays tiny along the branch. The
//! remaining coefficients and the angular velocity `Ω` are found by Newton's
//! method on the sine projections of `G_1`, `G_2` onto the modes `mk`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::contour::{g_functional, sine_projection, ContourError, FourierBoundary, QuadratureGrid};
use crate::spectrum::{eigenvalues, kernel_vector, Sign, SpectrumError};

/// A coefficient this large in the last retained mode triggers doubling of
/// the truncation.
const TAIL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("Jacobian is numerically singular (condition estimate {condition:e})")]
    DegenerateJacobian { condition: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Target for the largest nodal value of `|G|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: u32,
    pub condition_limit: f64,
    /// Finite-difference step relative to `max(1, ‖x‖)`.
    pub relative_step: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 8,
            condition_limit: 1e14,
            relative_step: 1e-7,
        }
    }
}

/// Interface whose coefficient at index `m − 1` is held at the amplitude `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pinned {
    Outer,
    Inner,
}

impl Pinned {
    /// The interface carrying the larger kernel component; ties go to the
    /// outer interface.
    pub fn for_kernel(kernel: [f64; 2]) -> Self {
        if kernel[0].abs() >= kernel[1].abs() {
            Pinned::Outer
        } else {
            Pinned::Inner
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pinned::Outer => "outer",
            Pinned::Inner => "inner",
        }
    }
}

/// Everything fixed along one branch.
#[derive(Debug, Clone)]
pub struct BranchProblem {
    pub lambda: f64,
    pub b: f64,
    pub m: usize,
    pub sign: Sign,
    /// Requested number of m-fold modes per interface.
    pub trunc: usize,
    pub grid: QuadratureGrid,
    pub settings: NewtonSettings,
    /// Pinned interface; `None` picks it from the kernel direction.
    pub pin: Option<Pinned>,
}

impl BranchProblem {
    pub fn new(lambda: f64, b: f64, m: usize, sign: Sign, trunc: usize, grid: QuadratureGrid) -> Self {
        BranchProblem { lambda, b, m, sign, trunc, grid, settings: NewtonSettings::default(), pin: None }
    }

    /// The pinned interface for this branch.
    pub fn pinned(&self) -> Result<Pinned, ContinuationError> {
        match self.pin {
            Some(p) => Ok(p),
            None => Ok(Pinned::for_kernel(self.bifurcation()?.1)),
        }
    }

    /// Number of m-fold modes actually used: the request, capped so that every
    /// mode `mk` stays strictly below the grid's Nyquist index.
    pub fn effective_trunc(&self) -> usize {
        self.trunc.min(self.max_trunc())
    }

    fn max_trunc(&self) -> usize {
        (self.grid.node_count() / 2 - 1) / self.m
    }

    fn validate(&self) -> Result<(), ContinuationError> {
        if self.m < 1 {
            return Err(ContinuationError::InvalidArgument("fold m must be at least 1".into()));
        }
        if !(self.b > 0.0 && self.b < 1.0) || !(self.lambda > 0.0) {
            return Err(ContinuationError::InvalidArgument(format!(
                "need λ > 0 and 0 < b < 1 (got λ = {}, b = {})",
                self.lambda, self.b
            )));
        }
        if self.trunc < 1 || self.max_trunc() < 1 {
            return Err(ContinuationError::InvalidArgument(format!(
                "grid of {} nodes cannot resolve mode {}",
                self.grid.node_count(),
                self.m
            )));
        }
        Ok(())
    }

    /// `Ω_m^±` and the kernel direction `(v_1, v_2)`, refusing degenerate or
    /// absent eigenvalues.
    pub fn bifurcation(&self) -> Result<(f64, [f64; 2]), ContinuationError> {
        self.validate()?;
        let m = self.m as u32;
        let kernel = kernel_vector(m, self.lambda, self.b, self.sign)?;
        let pair = eigenvalues(m, self.lambda, self.b).expect("kernel_vector checked Δ_m > 0");
        Ok((pair.omega(self.sign), kernel))
    }
}

/// One converged point of a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub m: usize,
    /// Coefficient at index `m − 1` of the pinned interface.
    pub s: f64,
    pub pinned: Pinned,
    pub omega: f64,
    pub f1: FourierBoundary,
    pub f2: FourierBoundary,
    /// Largest nodal `|G|` on the solve grid.
    pub residual: f64,
    pub iterations: usize,
    /// m-fold modes per interface used in the solve.
    pub trunc: usize,
}

impl BranchPoint {
    /// The unperturbed annulus rotating at `omega`.
    pub fn annulus(m: usize, b: f64, omega: f64) -> Self {
        BranchPoint {
            m,
            s: 0.0,
            pinned: Pinned::Outer,
            omega,
            f1: FourierBoundary::circle(1.0),
            f2: FourierBoundary::circle(b),
            residual: 0.0,
            iterations: 0,
            trunc: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Annulus plus `s` times the kernel direction, at `Ω_m^±`.
    Annulus,
    /// Coefficients and `Ω` taken from a nearby point.
    Point(BranchPoint),
}

/// Unknowns: the coefficients at `mk − 1`, `k = 1..=trunc`, of both
/// interfaces except the pinned one, followed by `Ω`.
struct Layout {
    m: usize,
    trunc: usize,
    pinned: Pinned,
}

impl Layout {
    fn len(&self) -> usize {
        2 * self.trunc
    }

    fn index(&self, k: usize) -> usize {
        self.m * k - 1
    }

    /// `(interface, k)` for each coefficient unknown, in order.
    fn slots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let pinned = match self.pinned {
            Pinned::Outer => 0,
            Pinned::Inner => 1,
        };
        (0..2)
            .flat_map(move |j| (1..=self.trunc).map(move |k| (j, k)))
            .filter(move |&(j, k)| !(j == pinned && k == 1))
    }

    fn pack(&self, point: &BranchPoint) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        for (slot, (j, k)) in self.slots().enumerate() {
            let f = if j == 0 { &point.f1 } else { &point.f2 };
            x[slot] = f.coefficient(self.index(k));
        }
        x[self.len() - 1] = point.omega;
        x
    }

    fn unpack(&self, x: &DVector<f64>, s: f64, b: f64) -> Result<(FourierBoundary, FourierBoundary, f64), ContourError> {
        let size = self.index(self.trunc) + 1;
        let mut c = [vec![0.0; size], vec![0.0; size]];
        match self.pinned {
            Pinned::Outer => c[0][self.index(1)] = s,
            Pinned::Inner => c[1][self.index(1)] = s,
        }
        for (slot, (j, k)) in self.slots().enumerate() {
            c[j][self.index(k)] = x[slot];
        }
        let [c1, c2] = c;
        Ok((FourierBoundary::new(1.0, c1)?, FourierBoundary::new(b, c2)?, x[self.len() - 1]))
    }
}

struct System<'a> {
    problem: &'a BranchProblem,
    layout: Layout,
    s: f64,
}

impl System<'_> {
    /// Projected equations and the nodal residual.
    fn evaluate(&self, x: &DVector<f64>) -> Result<(DVector<f64>, f64), ContourError> {
        let p = self.problem;
        let (f1, f2, omega) = self.layout.unpack(x, self.s, p.b)?;
        let g = g_functional(p.lambda, p.b, omega, &f1, &f2, &p.grid)?;
        let k_max = self.layout.trunc;
        let mut f = DVector::zeros(self.layout.len());
        for (j, values) in g.iter().enumerate() {
            for k in 1..=k_max {
                f[j * k_max + k - 1] = sine_projection(values, &p.grid, p.m * k);
            }
        }
        let nodal = g.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()));
        Ok((f, nodal))
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, ContourError> {
        let n = x.len();
        let h = self.problem.settings.relative_step * x.norm().max(1.0);
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (fp, _) = self.evaluate(&xp)?;
            let (fm, _) = self.evaluate(&xm)?;
            jac.set_column(c, &((fp - fm) / (2.0 * h)));
        }
        Ok(jac)
    }
}

/// Solves for the branch point with outer amplitude `s`.
///
/// Damped Newton with a finite-difference Jacobian; the step is halved up to
/// `max_halvings` times while the projected residual fails to decrease. If
/// the last retained coefficient of the solution exceeds 1e-12, the
/// truncation is doubled (within the grid's resolution) and the solve
/// repeated from the current solution.
pub fn newton_solve(
    problem: &BranchProblem,
    s: f64,
    guess: &InitialGuess,
) -> Result<BranchPoint, ContinuationError> {
    let (omega_m, kernel) = problem.bifurcation()?;
    let pinned = problem.pinned()?;
    let start = match guess {
        InitialGuess::Annulus => {
            let annulus = BranchPoint::annulus(problem.m, problem.b, omega_m);
            let lead = problem.m - 1;
            match pinned {
                Pinned::Outer => BranchPoint {
                    f2: annulus.f2.with_coefficient(lead, s * kernel[1] / kernel[0])?,
                    ..annulus
                },
                Pinned::Inner => BranchPoint {
                    f1: annulus.f1.with_coefficient(lead, s * kernel[0] / kernel[1])?,
                    ..annulus
                },
            }
        }
        InitialGuess::Point(point) => point.clone(),
    };
    let mut trunc = problem.effective_trunc();
    let mut current = solve_fixed(problem, s, &start, trunc, pinned)?;
    while trunc < problem.max_trunc() {
        let tail = current.f1.coefficient(problem.m * trunc - 1).abs()
            .max(current.f2.coefficient(problem.m * trunc - 1).abs());
        if tail <= TAIL_THRESHOLD {
            break;
        }
        trunc = (2 * trunc).min(problem.max_trunc());
        current = solve_fixed(problem, s, &current, trunc, pinned)?;
    }
    Ok(current)
}

fn solve_fixed(
    problem: &BranchProblem,
    s: f64,
    start: &BranchPoint,
    trunc: usize,
    pinned: Pinned,
) -> Result<BranchPoint, ContinuationError> {
    let settings = problem.settings;
    let system = System { problem, layout: Layout { m: problem.m, trunc, pinned }, s };
    let mut x = system.layout.pack(start);
    let (mut f, mut nodal) = system.evaluate(&x)?;
    let mut iterations = 0;
    while nodal > settings.tolerance {
        if iterations == settings.max_iterations {
            return Err(ContinuationError::NonConvergence { iterations, residual: nodal });
        }
        iterations += 1;
        let jac = system.jacobian(&x)?;
        let singular = jac.clone().singular_values();
        let smallest = singular.min();
        let condition = if smallest > 0.0 { singular.max() / smallest } else { f64::INFINITY };
        if condition > settings.condition_limit {
            return Err(ContinuationError::DegenerateJacobian { condition });
        }
        let step = jac
            .lu()
            .solve(&(-&f))
            .ok_or(ContinuationError::DegenerateJacobian { condition })?;

        let norm0 = f.norm();
        let mut factor = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial = &x + factor * &step;
            if let Ok((ft, nt)) = system.evaluate(&trial) {
                if ft.norm() < norm0 || nt <= settings.tolerance {
                    accepted = Some((trial, ft, nt));
                    break;
                }
            }
            factor *= 0.5;
        }
        match accepted {
            Some((xt, ft, nt)) => {
                x = xt;
                f = ft;
                nodal = nt;
            }
            None => return Err(ContinuationError::NonConvergence { iterations, residual: nodal }),
        }
    }
    let (f1, f2, omega) = system.layout.unpack(&x, s, problem.b)?;
    Ok(BranchPoint { m: problem.m, s, pinned, omega, f1, f2, residual: nodal, iterations, trunc })
}

/// Why a trace ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// The solve at amplitude `s` failed; earlier points are kept.
    Failed { s: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrace {
    /// `Ω_m^±`, the bifurcation point.
    pub omega_bifurcation: f64,
    pub kernel: [f64; 2],
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

impl BranchTrace {
    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    /// Least-squares line through `(s, Ω)` of the `count` smallest-amplitude
    /// points, evaluated at `s = 0`. Needs at least two points.
    pub fn extrapolated_omega(&self, count: usize) -> Option<f64> {
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.s, p.omega)).collect();
        pts.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
        pts.truncate(count);
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let ms = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let mo = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - ms).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - ms) * (p.1 - mo)).sum();
        if sxx == 0.0 {
            return None;
        }
        Some(mo - ms * sxy / sxx)
    }

    /// `f_2/f_1` leading-coefficient ratio at the smallest amplitude, to be
    /// compared with `kernel[1] / kernel[0]`.
    pub fn tangent_ratio(&self) -> Option<f64> {
        let p = self.points.iter().min_by(|a, b| a.s.abs().total_cmp(&b.s.abs()))?;
        let lead = p.m - 1;
        Some(p.f2.coefficient(lead) / p.f1.coefficient(lead))
    }
}

/// Solves at `s_i = s_max·i/steps`, `i = 1..=steps`, each warm-started from
/// the previous point. Stops at the first failed solve and reports it in
/// [`BranchTrace::termination`].
pub fn trace_branch(problem: &BranchProblem, s_max: f64, steps: usize) -> Result<BranchTrace, ContinuationError> {
    if steps == 0 || !(s_max > 0.0 && s_max.is_finite()) {
        return Err(ContinuationError::InvalidArgument(format!(
            "need steps ≥ 1 and s_max > 0 (got {steps}, {s_max})"
        )));
    }
    let (omega_bifurcation, kernel) = problem.bifurcation()?;
    let mut points: Vec<BranchPoint> = Vec::with_capacity(steps);
    let mut termination = Termination::Completed;
    for i in 1..=steps {
        let s = s_max * i as f64 / steps as f64;
        let guess = match points.last() {
            Some(p) => InitialGuess::Point(p.clone()),
            None => InitialGuess::Annulus,
        };
        match newton_solve(problem, s, &guess) {
            Ok(point) => points.push(point),
            Err(e) => {
                termination = Termination::Failed { s, reason: e.to_string() };
                break;
            }
        }
    }
    Ok(BranchTrace { omega_bifurcation, kernel, points, termination })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VStateReport {
    /// Largest nodal `|G|` on the doubled grid.
    pub residual: f64,
    /// Euclidean norm of the coefficients at indices not of the form `mk − 1`.
    pub symmetry_defect: f64,
    pub omega: f64,
    pub grid_size: usize,
}

/// Re-evaluates `G` for `point` on a grid with twice the nodes of `grid`.
pub fn verify_vstate(
    point: &BranchPoint,
    lambda: f64,
    b: f64,
    grid: &QuadratureGrid,
) -> Result<VStateReport, ContinuationError> {
    let fine = grid.refined();
    let g = g_functional(lambda, b, point.omega, &point.f1, &point.f2, &fine)?;
    let residual = g.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    let m = point.m.max(1);
    let defect: f64 = [&point.f1, &point.f2]
        .iter()
        .flat_map(|f| f.coefficients().iter().enumerate())
        .filter(|(n, _)| (n + 1) % m != 0)
        .map(|(_, a)| a * a)
        .sum();
    Ok(VStateReport { residual, symmetry_defect: defect.sqrt(), omega: point.omega, grid_size: fine.node_count() })
}
