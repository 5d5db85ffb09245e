//! Fourier multipliers of the linearised boundary operator at the annulus
//! `{b < |z| < 1}` and the angular velocities at which they become singular.
//!
//! Notation: `Λ_n(λ, b) = I_n(λb) K_n(λ)` couples the two interfaces and
//! `Ω_n(x) = I_1(x)K_1(x) − I_n(x)K_n(x)` is the Rankine-vortex multiplier.

use std::fmt;

use thiserror::Error;

use crate::special_functions::{
    assemble_product, bessel_k, coupling_ik, i_series_scaled, product_ik, ScaledK,
};

/// Default search cap for [`find_threshold`].
pub const THRESHOLD_CAP: u32 = 100_000;

/// Relative size of `Δ_n` below which the two eigenvalues are reported as
/// coincident.
const DEGENERACY_TOL: f64 = 1e-14;

/// Relative tolerance of the transversality test.
const TRANSVERSALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("discriminant Δ_{n} = {discriminant:e} is not positive")]
    NonPositiveDiscriminant { n: u32, discriminant: f64 },
    #[error("no threshold found below n = {cap}")]
    SearchExhausted { cap: u32 },
    #[error("window must be at least 10 (got {0})")]
    WindowTooSmall(u32),
}

/// Selects one of the two eigenvalue branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sign::Minus => "minus",
            Sign::Plus => "plus",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The 2×2 multiplier `M_n(λ, b, Ω)` acting on mode `n` of `(f_1, f_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMatrix {
    pub n: u32,
    pub lambda: f64,
    pub b: f64,
    pub omega: f64,
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl SpectralMatrix {
    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Largest entry in magnitude.
    pub fn max_entry(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc: f64, e| acc.max(e.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// Row-major `[m11, m12, m21, m22]`.
    pub fn entries(&self) -> [f64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }
}

/// The roots `Ω_n^- ≤ Ω_n^+` of `det M_n = bΩ² − B_nΩ + C_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub n: u32,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub discriminant: f64,
    pub b_coeff: f64,
    pub c_coeff: f64,
    /// `Δ_n` vanishes to rounding: the two roots coincide.
    pub degenerate: bool,
}

impl EigenPair {
    pub fn omega(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Minus => self.omega_minus,
            Sign::Plus => self.omega_plus,
        }
    }
}

/// Certified thresholds: `Δ_n > 0` from `n0` on, monotone branches from `n` on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub n0: u32,
    pub n: u32,
}

/// Per-mode ingredients: `Ω_n(λ)`, `Ω_n(λb)`, `Λ_n`, plus `Λ_1`.
#[derive(Debug, Clone, Copy)]
struct Mode {
    n: u32,
    outer: f64,
    inner: f64,
    coupling: f64,
    coupling_1: f64,
}

impl Mode {
    fn new(n: u32, lambda: f64, b: f64) -> Self {
        check_parameters(n, lambda, b);
        Mode {
            n,
            outer: omega_rankine(n, lambda),
            inner: omega_rankine(n, lambda * b),
            coupling: lambda_coupling(n, lambda, b),
            coupling_1: lambda_coupling(1, lambda, b),
        }
    }

    fn quadratic(&self, b: f64) -> (f64, f64) {
        let l1 = self.coupling_1;
        let big_b = (1.0 - b * b) * l1 + b * (self.outer - self.inner);
        let big_c = b * ((l1 - self.outer / b) * (b * self.inner - l1) + self.coupling * self.coupling);
        (big_b, big_c)
    }

    /// `(A, 2bΛ_n)` with `Δ_n = A² − (2bΛ_n)²`.
    fn discriminant_parts(&self, b: f64) -> (f64, f64) {
        let a = b * (self.outer + self.inner) - (1.0 + b * b) * self.coupling_1;
        (a, 2.0 * b * self.coupling)
    }

    fn discriminant(&self, b: f64) -> f64 {
        let (a, c) = self.discriminant_parts(b);
        (a - c) * (a + c)
    }

    fn eigenpair(&self, b: f64) -> Option<EigenPair> {
        let (a, c) = self.discriminant_parts(b);
        let delta = (a - c) * (a + c);
        if delta < 0.0 {
            return None;
        }
        let (big_b, big_c) = self.quadratic(b);
        let degenerate = delta <= DEGENERACY_TOL * a * a;
        let (lo, hi) = if degenerate {
            let r = big_b / (2.0 * b);
            (r, r)
        } else {
            // Avoid cancellation in the smaller root.
            let q = 0.5 * (big_b + big_b.signum() * delta.sqrt());
            let r1 = q / b;
            let r2 = if q != 0.0 { big_c / q } else { -r1 };
            (r1.min(r2), r1.max(r2))
        };
        Some(EigenPair {
            n: self.n,
            omega_minus: lo,
            omega_plus: hi,
            discriminant: delta,
            b_coeff: big_b,
            c_coeff: big_c,
            degenerate,
        })
    }
}

fn check_parameters(n: u32, lambda: f64, b: f64) {
    assert!(n >= 1, "mode index must be positive");
    assert!(lambda > 0.0 && lambda.is_finite(), "λ must be positive, got {lambda}");
    assert!(b > 0.0 && b < 1.0, "b must lie in (0, 1), got {b}");
}

/// `Λ_n(λ, b) = I_n(λb) K_n(λ)`, `0 < b ≤ 1`. Stable for orders in the
/// thousands; tends to `bⁿ/(2n)`.
pub fn lambda_coupling(n: u32, lambda: f64, b: f64) -> f64 {
    coupling_ik(n, lambda, b)
}

/// `Ω_n(x) = I_1(x)K_1(x) − I_n(x)K_n(x)`; zero for `n = 1`, positive otherwise.
pub fn omega_rankine(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "mode index must be positive");
    if n == 1 {
        return 0.0;
    }
    product_ik(1, x).expect("positive argument") - product_ik(n, x).expect("positive argument")
}

pub fn spectral_matrix(n: u32, lambda: f64, b: f64, omega: f64) -> SpectralMatrix {
    let mode = Mode::new(n, lambda, b);
    SpectralMatrix {
        n,
        lambda,
        b,
        omega,
        m11: mode.outer - omega - b * mode.coupling_1,
        m12: b * mode.coupling,
        m21: -mode.coupling,
        m22: mode.coupling_1 - b * (mode.inner + omega),
    }
}

/// Quadratic coefficients `(B_n, C_n)` of `det M_n = bΩ² − B_nΩ + C_n`.
pub fn quadratic_coefficients(n: u32, lambda: f64, b: f64) -> (f64, f64) {
    Mode::new(n, lambda, b).quadratic(b)
}

/// `Δ_n = (b[Ω_n(λ) + Ω_n(λb)] − (1+b²)Λ_1)² − 4b²Λ_n²`, possibly negative.
pub fn discriminant(n: u32, lambda: f64, b: f64) -> f64 {
    Mode::new(n, lambda, b).discriminant(b)
}

/// `δ_∞ = b[I_1K_1(λ) + I_1K_1(λb)] − (1+b²)Λ_1`.
pub fn delta_infinity(lambda: f64, b: f64) -> f64 {
    check_parameters(1, lambda, b);
    let p_outer = product_ik(1, lambda).expect("positive argument");
    let p_inner = product_ik(1, lambda * b).expect("positive argument");
    b * (p_outer + p_inner) - (1.0 + b * b) * lambda_coupling(1, lambda, b)
}

/// `Δ_∞ = δ_∞²`, the limit of `Δ_n` as `n → ∞`.
pub fn discriminant_limit(lambda: f64, b: f64) -> f64 {
    delta_infinity(lambda, b).powi(2)
}

/// The eigenvalue pair `Ω_n^±(λ, b)`, or `None` when `Δ_n < 0`.
pub fn eigenvalues(n: u32, lambda: f64, b: f64) -> Option<EigenPair> {
    Mode::new(n, lambda, b).eigenpair(b)
}

/// `(Ω_∞^-, Ω_∞^+) = (Λ_1/b − I_1K_1(λb), I_1K_1(λ) − bΛ_1)`.
pub fn omega_limits(lambda: f64, b: f64) -> (f64, f64) {
    check_parameters(1, lambda, b);
    let l1 = lambda_coupling(1, lambda, b);
    let minus = l1 / b - product_ik(1, lambda * b).expect("positive argument");
    let plus = product_ik(1, lambda).expect("positive argument") - b * l1;
    (minus, plus)
}

/// Incremental evaluation of consecutive modes, sharing the `K` recurrences.
struct ModeScanner {
    lambda: f64,
    b: f64,
    p1_outer: f64,
    p1_inner: f64,
    coupling_1: f64,
    k_outer: ScaledK,
    k_inner: ScaledK,
}

impl ModeScanner {
    fn new(lambda: f64, b: f64) -> Self {
        check_parameters(1, lambda, b);
        ModeScanner {
            lambda,
            b,
            p1_outer: product_ik(1, lambda).expect("positive argument"),
            p1_inner: product_ik(1, lambda * b).expect("positive argument"),
            coupling_1: lambda_coupling(1, lambda, b),
            k_outer: ScaledK::new(lambda),
            k_inner: ScaledK::new(lambda * b),
        }
    }

    /// Mode `n`; calls must use non-decreasing `n`.
    fn mode(&mut self, n: u32) -> Mode {
        while self.k_outer.order() < n {
            self.k_outer.advance();
            self.k_inner.advance();
        }
        if n == 1 {
            return Mode {
                n,
                outer: 0.0,
                inner: 0.0,
                coupling: self.coupling_1,
                coupling_1: self.coupling_1,
            };
        }
        let (x_out, x_in) = (self.lambda, self.lambda * self.b);
        let p_outer = assemble_product(n, 1.0, i_series_scaled(n, x_out), self.k_outer.value());
        let p_inner = assemble_product(n, 1.0, i_series_scaled(n, x_in), self.k_inner.value());
        let coupling = assemble_product(
            n,
            self.b.powi(n as i32),
            i_series_scaled(n, x_in),
            self.k_outer.value(),
        );
        Mode {
            n,
            outer: self.p1_outer - p_outer,
            inner: self.p1_inner - p_inner,
            coupling,
            coupling_1: self.coupling_1,
        }
    }
}

/// Empirical threshold `(N0, N)` with the default cap.
pub fn find_threshold(lambda: f64, b: f64, window: u32) -> Result<Threshold, SpectrumError> {
    find_threshold_with_cap(lambda, b, window, THRESHOLD_CAP)
}

/// Scans `n = 1, 2, …` for
///
/// - `N0`: the first `n` with `Δ_k > 0` on `[n, n + window]` and the tail
///   bound `4b²Λ_{n+window}² < δ_∞²/2`, which keeps `Δ_k` positive beyond the
///   window;
/// - `N ≥ N0`: the first `n` with `Ω_k^+` strictly increasing and `Ω_k^-`
///   strictly decreasing on `[n, n + window]`.
///
/// This certifies the thresholds numerically only.
pub fn find_threshold_with_cap(
    lambda: f64,
    b: f64,
    window: u32,
    cap: u32,
) -> Result<Threshold, SpectrumError> {
    if window < 10 {
        return Err(SpectrumError::WindowTooSmall(window));
    }
    let half_limit = 0.5 * discriminant_limit(lambda, b);
    let mut scanner = ModeScanner::new(lambda, b);
    let mut pairs: Vec<Option<EigenPair>> = vec![None]; // index 0 unused
    let mut last_nonpositive = 0u32;
    let mut last_nonmonotone = 0u32;
    let mut n0 = None;
    let mut k = 0u32;
    while k < cap.saturating_add(window) {
        k += 1;
        let mode = scanner.mode(k);
        let pair = mode.eigenpair(b).filter(|p| p.discriminant > 0.0);
        if pair.is_none() {
            last_nonpositive = k;
        }
        // Starts at or below `last_nonmonotone` cannot be monotone over a window.
        match (&pairs[(k - 1) as usize], &pair) {
            (_, None) => last_nonmonotone = k,
            (Some(prev), Some(cur)) => {
                if !(cur.omega_plus > prev.omega_plus && cur.omega_minus < prev.omega_minus) {
                    last_nonmonotone = last_nonmonotone.max(k - 1);
                }
            }
            (None, Some(_)) => {}
        }
        pairs.push(pair);

        if k <= window {
            continue;
        }
        let start = k - window;
        if n0.is_none()
            && last_nonpositive < start
            && 4.0 * (b * mode.coupling).powi(2) < half_limit
        {
            n0 = Some(start);
        }
        if let Some(n0) = n0 {
            if start >= n0 && last_nonmonotone < start {
                return Ok(Threshold { n0, n: start });
            }
        }
        if start >= cap {
            break;
        }
    }
    Err(SpectrumError::SearchExhausted { cap })
}

/// `1 + bⁿ − n(1−b²)/2`; negative exactly when the Euler pair exists.
pub fn euler_condition(n: u32, b: f64) -> f64 {
    1.0 + b.powi(n as i32) - f64::from(n) * (1.0 - b * b) / 2.0
}

/// Angular velocities `Ω_n^±(b)` of the Euler (`λ = 0`) annulus, returned as
/// `(minus, plus)` when the radicand is positive.
pub fn euler_eigenvalues(n: u32, b: f64) -> Option<(f64, f64)> {
    assert!(n >= 1, "mode index must be positive");
    let nf = f64::from(n);
    let radicand = (nf * (1.0 - b * b) / 2.0 - 1.0).powi(2) - b.powi(2 * n as i32);
    if !(radicand > 0.0 && euler_condition(n, b) < 0.0) {
        return None;
    }
    let centre = (1.0 - b * b) / 4.0;
    let half_width = radicand.sqrt() / (2.0 * nf);
    Some((centre - half_width, centre + half_width))
}

/// `b → 0` limit of `Ω_n^+(λ, b)`: the Rankine multiplier `Ω_n(λ)`.
pub fn simply_connected_limit(n: u32, lambda: f64) -> f64 {
    omega_rankine(n, lambda)
}

/// `b → 0` limit of `Ω_n^-(λ, b)`: `(λnK_1(λ) − n + 1)/(2n)`.
pub fn simply_connected_lower_limit(n: u32, lambda: f64) -> f64 {
    let nf = f64::from(n);
    let k1 = bessel_k(1, lambda).expect("positive argument");
    (lambda * nf * k1 - nf + 1.0) / (2.0 * nf)
}

fn positive_pair(m: u32, lambda: f64, b: f64) -> Result<(Mode, EigenPair), SpectrumError> {
    let mode = Mode::new(m, lambda, b);
    match mode.eigenpair(b) {
        Some(pair) if pair.discriminant > 0.0 && !pair.degenerate => Ok((mode, pair)),
        _ => Err(SpectrumError::NonPositiveDiscriminant {
            n: m,
            discriminant: mode.discriminant(b),
        }),
    }
}

/// Generator `(b[Ω_m(λb) + Ω_m^±] − Λ_1, −Λ_m)` of the kernel of `M_m` at `Ω_m^±`.
pub fn kernel_vector(m: u32, lambda: f64, b: f64, sign: Sign) -> Result<[f64; 2], SpectrumError> {
    let (mode, pair) = positive_pair(m, lambda, b)?;
    let omega = pair.omega(sign);
    Ok([b * (mode.inner + omega) - mode.coupling_1, -mode.coupling])
}

/// `(Λ_1 − b[Ω_m(λb) + Ω])² − b²Λ_m²`. The branch at `Ω` is transversal
/// exactly when this does not vanish.
pub fn transversality_obstruction(m: u32, lambda: f64, b: f64, omega: f64) -> f64 {
    let mode = Mode::new(m, lambda, b);
    (mode.coupling_1 - b * (mode.inner + omega)).powi(2) - (b * mode.coupling).powi(2)
}

/// True when the transversality obstruction at `Ω_m^±` is nonzero relative
/// to the size of its two terms.
pub fn transversality_check(m: u32, lambda: f64, b: f64, sign: Sign) -> Result<bool, SpectrumError> {
    let (mode, pair) = positive_pair(m, lambda, b)?;
    let omega = pair.omega(sign);
    let first = (mode.coupling_1 - b * (mode.inner + omega)).powi(2);
    let second = (b * mode.coupling).powi(2);
    let scale = first.max(second);
    Ok((first - second).abs() > TRANSVERSALITY_TOL * scale)
}

/// `det M_{km}(λ, b, Ω)` for `k = 2..=k_max`. All nonzero means the kernel at
/// `Ω` is one-dimensional on the m-fold subspace.
pub fn harmonic_determinants(m: u32, lambda: f64, b: f64, omega: f64, k_max: u32) -> Vec<(u32, f64)> {
    (2..=k_max)
        .map(|k| (k, spectral_matrix(k * m, lambda, b, omega).determinant()))
        .collect()
}
