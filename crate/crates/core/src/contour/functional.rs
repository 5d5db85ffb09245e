use num_complex::Complex64;

use super::boundary::{gcd, Sampled};
use super::{ContourError, FourierBoundary, QuadratureGrid};
use crate::special_functions::{i0_and_regularized, k0, EULER_GAMMA};
use crate::spectrum::{spectral_matrix, SpectralMatrix};

/// Smallest admissible distance between the two interfaces.
const COLLISION_DISTANCE: f64 = 1e-8;

/// `S(λ, Φ_i, Φ_j)(w) = (1/2π) ∫ Φ_i'(τ) K_0(λ|Φ_j(w) − Φ_i(τ)|) τ dη`,
/// `τ = e^{iη}`, at the grid nodes `w`.
///
/// When `source == target` the logarithmic singularity of `K_0` is removed
/// analytically and integrated with the grid's log weights; otherwise the
/// integrand is smooth and the trapezoid rule is used.
pub fn s_integral(
    lambda: f64,
    source: &FourierBoundary,
    target: &FourierBoundary,
    grid: &QuadratureGrid,
) -> Result<Vec<Complex64>, ContourError> {
    check_lambda(lambda)?;
    let src = source.sample(grid);
    let all: Vec<usize> = (0..grid.node_count()).collect();
    if source == target {
        Ok(self_interaction(lambda, &src, grid, &all))
    } else {
        let tgt = target.sample(grid);
        cross_interaction(lambda, &src, &tgt, grid, &all)
    }
}

fn check_lambda(lambda: f64) -> Result<(), ContourError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(ContourError::InvalidArgument(format!("λ must be positive, got {lambda}")))
    }
}

/// Self-interaction at the given target nodes.
///
/// With `r = |Φ(w) − Φ(τ)|`,
/// `K_0(λr) = −log|w−τ| I_0(λr) − log(r/|w−τ|) I_0(λr) − log(λ/2) I_0(λr) + R(λr)`
/// where `R` is the regular part of `K_0`. Only the first term is singular.
fn self_interaction(lambda: f64, s: &Sampled, grid: &QuadratureGrid, targets: &[usize]) -> Vec<Complex64> {
    let p = grid.node_count();
    let nodes = grid.nodes();
    let weights = grid.log_weights();
    let chords = grid.chords();
    let log_half_lambda = (0.5 * lambda).ln();
    let inv_p = 1.0 / p as f64;
    let g: Vec<Complex64> = (0..p).map(|l| s.derivatives[l] * nodes[l]).collect();
    targets
        .iter()
        .map(|&j| {
            let zj = s.values[j];
            let mut singular = Complex64::new(0.0, 0.0);
            let mut smooth = Complex64::new(0.0, 0.0);
            for l in 0..p {
                let d = (j + p - l) % p;
                let (i0, smooth_kernel) = if l == j {
                    // r/|w−τ| → |Φ'(w)|, I_0(0) = 1, R(0) = −γ.
                    (1.0, -s.derivatives[j].norm().ln() - log_half_lambda - EULER_GAMMA)
                } else {
                    let r = (zj - s.values[l]).norm();
                    let (i0, reg) = i0_and_regularized(lambda * r);
                    (i0, -(r / chords[d]).ln() * i0 - log_half_lambda * i0 + reg)
                };
                singular += weights[d] * i0 * g[l];
                smooth += smooth_kernel * g[l];
            }
            singular + smooth * inv_p
        })
        .collect()
}

fn cross_interaction(
    lambda: f64,
    src: &Sampled,
    tgt: &Sampled,
    grid: &QuadratureGrid,
    targets: &[usize],
) -> Result<Vec<Complex64>, ContourError> {
    let p = grid.node_count();
    let nodes = grid.nodes();
    let inv_p = 1.0 / p as f64;
    let g: Vec<Complex64> = (0..p).map(|l| src.derivatives[l] * nodes[l]).collect();
    let mut out = Vec::with_capacity(targets.len());
    for &j in targets {
        let zj = tgt.values[j];
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..p {
            let r = (zj - src.values[l]).norm();
            if r < COLLISION_DISTANCE {
                return Err(ContourError::InterfaceCollision { distance: r });
            }
            sum += k0(lambda * r) * g[l];
        }
        out.push(sum * inv_p);
    }
    Ok(out)
}

/// `G_j(w) = Im{(ΩΦ_j + S(λ,Φ_2,Φ_j) − S(λ,Φ_1,Φ_j)) w̄ conj(Φ_j'(w))}`,
/// `j = 1, 2`, at every grid node.
///
/// When both interfaces share an `m`-fold symmetry with `m | P`, only one
/// sector of targets is evaluated and the rest filled in by rotation
/// invariance of `G`.
pub fn g_functional(
    lambda: f64,
    b: f64,
    omega: f64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    grid: &QuadratureGrid,
) -> Result<[Vec<f64>; 2], ContourError> {
    evaluate_g(lambda, b, omega, f1, f2, grid, symmetry_fold(f1, f2, grid), 1.0)
}

/// Number of grid sectors on which `G` repeats.
fn symmetry_fold(f1: &FourierBoundary, f2: &FourierBoundary, grid: &QuadratureGrid) -> usize {
    let p = grid.node_count();
    match (f1.symmetry_fold(), f2.symmetry_fold()) {
        (None, None) => p,
        (Some(a), None) | (None, Some(a)) => gcd(a, p),
        (Some(a), Some(c)) => gcd(gcd(a, c), p),
    }
}

/// As [`g_functional`] but evaluating every target node directly.
pub fn g_functional_unreduced(
    lambda: f64,
    b: f64,
    omega: f64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    grid: &QuadratureGrid,
) -> Result<[Vec<f64>; 2], ContourError> {
    evaluate_g(lambda, b, omega, f1, f2, grid, 1, 1.0)
}

/// [`g_functional_unreduced`] with the sign of the inner-interface integral
/// set to `inner_sign` instead of +1. Only used to check that verification
/// detects a wrong orientation.
#[doc(hidden)]
pub fn g_functional_with_orientation(
    lambda: f64,
    b: f64,
    omega: f64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    grid: &QuadratureGrid,
    inner_sign: f64,
) -> Result<[Vec<f64>; 2], ContourError> {
    evaluate_g(lambda, b, omega, f1, f2, grid, 1, inner_sign)
}

/// The outer interface must have scale 1 and the inner one scale `b`.
fn check_interfaces(b: f64, f1: &FourierBoundary, f2: &FourierBoundary) -> Result<(), ContourError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(ContourError::InvalidArgument(format!("b must lie in (0, 1), got {b}")));
    }
    if f1.scale() != 1.0 || f2.scale() != b {
        return Err(ContourError::InvalidArgument(format!(
            "interface scales must be 1 and b = {b}, got {} and {}",
            f1.scale(),
            f2.scale()
        )));
    }
    Ok(())
}

fn evaluate_g(
    lambda: f64,
    b: f64,
    omega: f64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    grid: &QuadratureGrid,
    fold: usize,
    inner_sign: f64,
) -> Result<[Vec<f64>; 2], ContourError> {
    check_lambda(lambda)?;
    check_interfaces(b, f1, f2)?;
    let p = grid.node_count();
    let sector = p / fold;
    let targets: Vec<usize> = (0..sector).collect();
    let s1 = f1.sample(grid);
    let s2 = f2.sample(grid);

    let s21 = cross_interaction(lambda, &s2, &s1, grid, &targets)?;
    let s11 = self_interaction(lambda, &s1, grid, &targets);
    let s22 = self_interaction(lambda, &s2, grid, &targets);
    let s12 = cross_interaction(lambda, &s1, &s2, grid, &targets)?;

    let nodes = grid.nodes();
    let mut out = [vec![0.0; p], vec![0.0; p]];
    for (j, (samples, inner, outer)) in [(&s1, &s21, &s11), (&s2, &s22, &s12)].into_iter().enumerate() {
        for k in 0..sector {
            let bracket = omega * samples.values[k] + inner_sign * inner[k] - outer[k];
            let value = (bracket * nodes[k].conj() * samples.derivatives[k].conj()).im;
            for r in 0..fold {
                out[j][k + r * sector] = value;
            }
        }
    }
    Ok(out)
}

/// Outcome of [`g_refined`].
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Finest grid evaluated.
    pub grid: QuadratureGrid,
    pub values: [Vec<f64>; 2],
    /// Largest change at shared nodes between the last two grids.
    pub change: f64,
    pub converged: bool,
}

/// Evaluates [`g_functional`] on `start`, then on successively doubled grids
/// until the values at shared nodes move by less than `tol` or the next grid
/// would exceed `max_nodes`.
pub fn g_refined(
    lambda: f64,
    b: f64,
    omega: f64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    start: &QuadratureGrid,
    tol: f64,
    max_nodes: usize,
) -> Result<Refinement, ContourError> {
    let mut grid = start.clone();
    let mut values = g_functional(lambda, b, omega, f1, f2, &grid)?;
    let mut change = f64::INFINITY;
    while grid.node_count() * 2 <= max_nodes {
        let fine = grid.refined();
        let next = g_functional(lambda, b, omega, f1, f2, &fine)?;
        change = (0..2)
            .flat_map(|j| (0..grid.node_count()).map(move |k| (j, k)))
            .map(|(j, k)| (values[j][k] - next[j][2 * k]).abs())
            .fold(0.0, f64::max);
        grid = fine;
        values = next;
        if change < tol {
            break;
        }
    }
    Ok(Refinement { grid, values, converged: change < tol, change })
}

/// `(2/P) Σ_k values_k sin(nθ_k)`: the coefficient of `e_n(w) = Im(wⁿ)`.
pub fn sine_projection(values: &[f64], grid: &QuadratureGrid, n: usize) -> f64 {
    let scale = 2.0 / grid.node_count() as f64;
    values
        .iter()
        .zip(grid.angles())
        .map(|(v, &t)| v * (n as f64 * t).sin())
        .sum::<f64>()
        * scale
}

/// `(2/P) Σ_k values_k cos(nθ_k)`, `n ≥ 1`.
pub fn cosine_projection(values: &[f64], grid: &QuadratureGrid, n: usize) -> f64 {
    let scale = 2.0 / grid.node_count() as f64;
    values
        .iter()
        .zip(grid.angles())
        .map(|(v, &t)| v * (n as f64 * t).cos())
        .sum::<f64>()
        * scale
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Finite-difference recovery of the multiplier `M_n` from [`g_functional`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationReport {
    /// Row-major recovered matrix.
    pub recovered: [[f64; 2]; 2],
    pub analytic: SpectralMatrix,
    /// Largest entrywise difference between `recovered` and `analytic`.
    pub deviation: f64,
    /// Largest response on sine modes other than `n`, in the same units.
    pub leakage: f64,
}

/// Perturbs `f_1` and `f_2` in turn by `±ε w̄^{n−1}` around the annulus,
/// projects the central difference of `G_j` onto `e_n` and divides by `n`.
pub fn linearization_check(
    n: usize,
    lambda: f64,
    b: f64,
    omega: f64,
    epsilon: f64,
    grid: &QuadratureGrid,
) -> Result<LinearizationReport, ContourError> {
    linearization_check_with_orientation(n, lambda, b, omega, epsilon, grid, 1.0)
}

/// [`linearization_check`] on top of [`g_functional_with_orientation`].
#[doc(hidden)]
pub fn linearization_check_with_orientation(
    n: usize,
    lambda: f64,
    b: f64,
    omega: f64,
    epsilon: f64,
    grid: &QuadratureGrid,
    inner_sign: f64,
) -> Result<LinearizationReport, ContourError> {
    if n == 0 || 2 * n >= grid.node_count() {
        return Err(ContourError::InvalidArgument(format!(
            "mode {n} is not resolved by {} nodes",
            grid.node_count()
        )));
    }
    if !(1e-8..=1e-4).contains(&epsilon) {
        return Err(ContourError::InvalidArgument(format!("step {epsilon} outside [1e-8, 1e-4]")));
    }
    let circle1 = FourierBoundary::circle(1.0);
    let circle2 = FourierBoundary::circle(b);
    let half = grid.node_count() / 2;
    let mut recovered = [[0.0; 2]; 2];
    let mut leakage: f64 = 0.0;
    for column in 0..2 {
        let perturbed = |sign: f64| -> Result<[Vec<f64>; 2], ContourError> {
            let (f1, f2) = if column == 0 {
                (circle1.with_coefficient(n - 1, sign * epsilon)?, circle2.clone())
            } else {
                (circle1.clone(), circle2.with_coefficient(n - 1, sign * epsilon)?)
            };
            evaluate_g(lambda, b, omega, &f1, &f2, grid, symmetry_fold(&f1, &f2, grid), inner_sign)
        };
        let plus = perturbed(1.0)?;
        let minus = perturbed(-1.0)?;
        let denominator = 2.0 * epsilon * n as f64;
        for row in 0..2 {
            let diff: Vec<f64> = plus[row].iter().zip(&minus[row]).map(|(a, c)| a - c).collect();
            recovered[row][column] = sine_projection(&diff, grid, n) / denominator;
            for k in (1..half).filter(|&k| k != n) {
                leakage = leakage.max(sine_projection(&diff, grid, k).abs() / denominator);
            }
        }
    }
    let analytic = spectral_matrix(n as u32, lambda, b, omega);
    let a = analytic.entries();
    let deviation = (0..4)
        .map(|i| (recovered[i / 2][i % 2] - a[i]).abs())
        .fold(0.0, f64::max);
    Ok(LinearizationReport { recovered, analytic, deviation, leakage })
}

/// Velocity `(1/2π)[∮_{∂D_1} − ∮_{∂D_2}] K_0(λ|z − ξ|) dξ` at `z`, with the
/// interfaces `Φ_1 = w + f_1`, `Φ_2 = bw + f_2`.
pub fn velocity_at(
    z: Complex64,
    f1: &FourierBoundary,
    f2: &FourierBoundary,
    lambda: f64,
    b: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64, ContourError> {
    check_lambda(lambda)?;
    check_interfaces(b, f1, f2)?;
    let p = grid.node_count();
    let nodes = grid.nodes();
    let mut total = Complex64::new(0.0, 0.0);
    for (phi, sign) in [(f1, 1.0), (f2, -1.0)] {
        let s = phi.sample(grid);
        for l in 0..p {
            let r = (z - s.values[l]).norm();
            if r < COLLISION_DISTANCE {
                return Err(ContourError::NearBoundary { distance: r });
            }
            total += sign * k0(lambda * r) * s.derivatives[l] * Complex64::i() * nodes[l];
        }
    }
    Ok(total / p as f64)
}
