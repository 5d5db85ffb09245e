use std::f64::consts::PI;

use num_complex::Complex64;

use super::ContourError;

/// Uniform nodes `w_k = exp(i(2πk/P + offset))` on the unit circle.
///
/// Besides the nodes it stores the Fourier moments of `log|1 − e^{iθ}|`,
/// `(1/2π)∫ log|1 − e^{iθ}| cos(nθ) dθ = −1/(2n)`, and the circulant weights
/// they induce: for a smooth periodic `h`,
/// `(1/2π)∫ −log|w_j − τ| h(τ) dη ≈ Σ_l weight[(j − l) mod P] h(τ_l)`
/// with spectral accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    offset: f64,
    angles: Vec<f64>,
    nodes: Vec<Complex64>,
    log_moments: Vec<f64>,
    log_weights: Vec<f64>,
    chords: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(node_count: usize) -> Result<Self, ContourError> {
        Self::with_offset(node_count, 0.0)
    }

    /// Grid rotated by `offset` radians.
    pub fn with_offset(node_count: usize, offset: f64) -> Result<Self, ContourError> {
        if node_count < 8 || node_count % 2 != 0 {
            return Err(ContourError::InvalidGridSize(node_count));
        }
        let p = node_count;
        let h = 2.0 * PI / p as f64;
        let angles: Vec<f64> = (0..p).map(|k| k as f64 * h + offset).collect();
        let nodes = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();

        // Index 0 unused; moments for n = 1..=P/2.
        let mut log_moments = vec![0.0; p / 2 + 1];
        for (n, m) in log_moments.iter_mut().enumerate().skip(1) {
            *m = -1.0 / (2.0 * n as f64);
        }
        let half = p / 2;
        let log_weights = (0..p)
            .map(|d| {
                let mut sum = 0.0;
                for k in 1..half {
                    sum -= 2.0 * log_moments[k] * (h * (k * d % p) as f64).cos();
                }
                let nyquist = if d % 2 == 0 { 1.0 } else { -1.0 };
                (sum - log_moments[half] * nyquist) / p as f64
            })
            .collect();
        let chords = (0..p).map(|d| 2.0 * (0.5 * h * d as f64).sin().abs()).collect();
        Ok(QuadratureGrid { offset, angles, nodes, log_moments, log_weights, chords })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    /// Polar angles of the nodes.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// `log_moments()[n] = −1/(2n)` for `1 ≤ n ≤ P/2`; entry 0 is unused.
    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `|w_j − w_l|` as a function of `(j − l) mod P`.
    pub(crate) fn chords(&self) -> &[f64] {
        &self.chords
    }

    /// Same offset, twice the nodes.
    pub fn refined(&self) -> Self {
        Self::with_offset(2 * self.node_count(), self.offset).expect("doubling keeps the size valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert_eq!(QuadratureGrid::new(7), Err(ContourError::InvalidGridSize(7)));
        assert_eq!(QuadratureGrid::new(4), Err(ContourError::InvalidGridSize(4)));
    }

    #[test]
    fn moments_match_closed_form() {
        let grid = QuadratureGrid::new(64).unwrap();
        for n in 1..=32 {
            assert_eq!(grid.log_moments()[n], -1.0 / (2.0 * n as f64));
        }
    }

    #[test]
    fn weights_integrate_log_against_trig_polynomials() {
        // (1/2π)∫ −log|w − τ| cos(nη) dη = cos(nθ)/(2n) at w = e^{iθ}.
        let grid = QuadratureGrid::new(32).unwrap();
        let p = grid.node_count();
        for n in 0..16usize {
            for j in [0usize, 5, 17] {
                let approx: f64 = (0..p)
                    .map(|l| grid.log_weights()[(j + p - l) % p] * (n as f64 * grid.angles()[l]).cos())
                    .sum();
                let exact = if n == 0 { 0.0 } else { (n as f64 * grid.angles()[j]).cos() / (2.0 * n as f64) };
                assert!((approx - exact).abs() < 1e-14, "n = {n}, j = {j}");
            }
        }
    }
}
