/// Stirling number of the second kind `S(m, k)`.
///
/// Built from `S(m, k) = S(m−1, k−1) + k S(m−1, k)` with `S(0, 0) = 1`.
/// Fits in a `u64` for `m ≤ 25`; larger arguments saturate.
pub fn stirling2(m: u32, k: u32) -> u64 {
    if k > m {
        return 0;
    }
    let k = k as usize;
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 1..=m as usize {
        let top = i.min(k);
        for j in (1..=top).rev() {
            row[j] = row[j - 1].saturating_add((j as u64).saturating_mul(row[j]));
        }
        row[0] = 0;
    }
    row[k]
}

/// Coefficients `b_m(x)` of the large-order expansion of `I_n K_n`:
///
/// `b_0 = 1`, `b_m(x) = Σ_{k=1}^{m} (−1)^{m−k} S(m,k)/k! (x²/4)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSeries {
    x: f64,
    coefficients: Vec<f64>,
}

impl AsymptoticSeries {
    pub fn new(x: f64, terms: usize) -> Self {
        let y = 0.25 * x * x;
        let coefficients = (0..=terms)
            .map(|m| {
                if m == 0 {
                    return 1.0;
                }
                let mut sum = 0.0;
                let mut power = 1.0;
                let mut factorial = 1.0;
                for k in 1..=m {
                    power *= y;
                    factorial *= k as f64;
                    let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
                    sum += sign * stirling2(m as u32, k as u32) as f64 / factorial * power;
                }
                sum
            })
            .collect();
        AsymptoticSeries { x, coefficients }
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    /// Number of correction terms after `b_0`.
    pub fn terms(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Σ_m σ^m b_m / n^m with `σ = ±1`.
    pub fn sum(&self, n: u32, alternate: bool) -> f64 {
        let inv = 1.0 / f64::from(n);
        let mut scale = 1.0;
        let mut total = 0.0;
        for (m, c) in self.coefficients.iter().enumerate() {
            let sign = if alternate && m % 2 == 1 { -1.0 } else { 1.0 };
            total += sign * c * scale;
            scale *= inv;
        }
        total
    }
}

/// Large-order approximation of `I_n(λb) K_n(λ)`:
/// `(bⁿ/2n) (Σ b_m(λb)/n^m) (Σ (−1)^m b_m(λ)/n^m)`, truncated after `terms`
/// corrections.
pub fn product_ik_asymptotic(n: u32, lambda: f64, b: f64, terms: usize) -> f64 {
    assert!(n >= 1, "order must be positive");
    let inner = AsymptoticSeries::new(lambda * b, terms);
    let outer = AsymptoticSeries::new(lambda, terms);
    b.powi(n as i32) / (2.0 * f64::from(n)) * inner.sum(n, false) * outer.sum(n, true)
}
