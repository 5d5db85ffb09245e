use num_complex::Complex64;

use super::{ContourError, QuadratureGrid};

/// One interface `Φ(w) = scale·w + Σ_n a_n w̄ⁿ` with real coefficients.
///
/// Construction enforces `Σ (n+1)|a_n| < scale/2`, which keeps `Φ` injective
/// on the circle and `|Φ'| ≥ scale/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBoundary {
    scale: f64,
    coefficients: Vec<f64>,
}

/// Node values of `Φ` and `Φ'`.
#[derive(Debug, Clone)]
pub(crate) struct Sampled {
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
}

impl FourierBoundary {
    pub fn new(scale: f64, coefficients: Vec<f64>) -> Result<Self, ContourError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(ContourError::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        if let Some((index, &value)) = coefficients.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(ContourError::NonFinite { index, value });
        }
        let weight: f64 = coefficients.iter().enumerate().map(|(n, a)| (n as f64 + 1.0) * a.abs()).sum();
        let limit = 0.5 * scale;
        if weight >= limit {
            return Err(ContourError::BallGuard { weight, limit });
        }
        Ok(FourierBoundary { scale, coefficients })
    }

    /// The unperturbed circle of radius `scale`.
    pub fn circle(scale: f64) -> Self {
        Self::new(scale, Vec::new()).expect("positive scale")
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `a_n`, zero beyond the stored range.
    pub fn coefficient(&self, n: usize) -> f64 {
        self.coefficients.get(n).copied().unwrap_or(0.0)
    }

    /// Copy with `a_n` replaced, re-checking the ball guard.
    pub fn with_coefficient(&self, n: usize, value: f64) -> Result<Self, ContourError> {
        let mut coefficients = self.coefficients.clone();
        if coefficients.len() <= n {
            coefficients.resize(n + 1, 0.0);
        }
        coefficients[n] = value;
        Self::new(self.scale, coefficients)
    }

    /// Largest `m` such that every nonzero coefficient sits at an index
    /// `mk − 1`; `None` for the unperturbed circle.
    pub fn symmetry_fold(&self) -> Option<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(n, _)| n + 1)
            .reduce(gcd)
    }

    /// `Φ(w)` at an arbitrary point of the unit circle.
    pub fn value_at(&self, w: Complex64) -> Complex64 {
        let wbar = w.conj();
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = self.scale * w;
        for &a in &self.coefficients {
            sum += a * power;
            power *= wbar;
        }
        sum
    }

    /// `Φ'(w) = scale − Σ n a_n w̄^{n+1}` on the unit circle.
    pub fn derivative_at(&self, w: Complex64) -> Complex64 {
        let wbar = w.conj();
        let mut power = wbar * wbar;
        let mut sum = Complex64::new(self.scale, 0.0);
        for (n, &a) in self.coefficients.iter().enumerate().skip(1) {
            sum -= n as f64 * a * power;
            power *= wbar;
        }
        sum
    }

    /// `(Φ(w_k), Φ'(w_k))` at every grid node.
    pub fn conformal_eval(&self, grid: &QuadratureGrid) -> (Vec<Complex64>, Vec<Complex64>) {
        let s = self.sample(grid);
        (s.values, s.derivatives)
    }

    pub(crate) fn sample(&self, grid: &QuadratureGrid) -> Sampled {
        let values = grid.nodes().iter().map(|&w| self.value_at(w)).collect();
        let derivatives = grid.nodes().iter().map(|&w| self.derivative_at(w)).collect();
        Sampled { values, derivatives }
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
