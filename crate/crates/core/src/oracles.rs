//! Independent reference computations used by the test suites.
//!
//! None of these share code paths with the production evaluators beyond the
//! kernel functions they integrate. They favour transparency over speed.

use std::f64::consts::PI;

use crate::special_functions::{bessel_j0, bessel_k, EULER_GAMMA};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Rule { nodes, weights }
    }

    fn apply(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn adaptive(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let whole = self.apply(f, a, b);
        let mid = 0.5 * (a + b);
        let left = self.apply(f, a, mid);
        let right = self.apply(f, mid, b);
        if (left + right - whole).abs() <= tol || depth == 0 {
            left + right
        } else {
            self.adaptive(f, a, mid, 0.5 * tol, depth - 1)
                + self.adaptive(f, mid, b, 0.5 * tol, depth - 1)
        }
    }
}

/// `I_n(x) K_n(x) = (1/2) ∫₀^∞ J_0(2x sinh(t/2)) e^{−nt} dt`, `n ≥ 1`.
///
/// After the substitution `u = 2x sinh(t/2)` the integrand becomes
/// `J_0(u) e^{−n t(u)} / √(4x² + u²)`, which decays algebraically. The
/// oscillatory tail is summed over π-length intervals and the partial sums are
/// accelerated by repeated averaging.
pub fn product_ik_integral(n: u32, x: f64) -> f64 {
    assert!(n >= 1 && x > 0.0);
    let nf = f64::from(n);
    let f = |u: f64| {
        let r = u / (2.0 * x);
        let decay = (-2.0 * nf * r.asinh()).exp();
        bessel_j0(u) * decay / (4.0 * x * x + u * u).sqrt()
    };
    let rule = Rule::new(20);
    let head_end = 20.0 * PI;
    // Grade the first panels towards the near-singularity at u = ±2ix.
    let mut head = 0.0;
    let mut a = 0.0;
    let mut b = (0.25 * x).min(head_end);
    while a < head_end {
        head += rule.adaptive(&f, a, b, 1e-14, 30);
        a = b;
        b = (2.0 * b).min(head_end);
    }
    let intervals = 48;
    let mut partial = Vec::with_capacity(intervals + 1);
    let mut total = head;
    partial.push(total);
    for k in 0..intervals {
        let lo = head_end + k as f64 * PI;
        total += rule.adaptive(&f, lo, lo + PI, 1e-15, 20);
        partial.push(total);
    }
    for _ in 0..intervals / 2 {
        partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    partial[partial.len() - 1]
}

/// `I_n(x)` from the explicit first `terms` terms of its power series.
pub fn bessel_i_direct_series(n: u32, x: f64, terms: u32) -> f64 {
    let mut sum = 0.0;
    for m in 0..terms {
        let log_term = f64::from(n + 2 * m) * (0.5 * x).ln() - ln_factorial(m) - ln_factorial(m + n);
        sum += log_term.exp();
    }
    sum
}

/// `K_1(x)` from `terms` terms of its power series, with ψ evaluated from
/// harmonic sums and Kahan-compensated accumulation.
pub fn bessel_k1_series(x: f64, terms: u32) -> f64 {
    let psi = |k: u32| (1..k).map(|j| 1.0 / f64::from(j)).sum::<f64>() - EULER_GAMMA;
    let mut i1 = Compensated::default();
    let mut tail = Compensated::default();
    for k in 0..terms {
        let weight = (f64::from(2 * k + 1) * (0.5 * x).ln() - ln_factorial(k) - ln_factorial(k + 1)).exp();
        i1.add(weight);
        tail.add(weight * (psi(k + 1) + psi(k + 2)));
    }
    1.0 / x + (0.5 * x).ln() * i1.value() - 0.5 * tail.value()
}

/// `J_0(x) = (1/π) ∫₀^π cos(x sin θ) dθ` by the midpoint rule with `nodes`
/// points, spectrally accurate for this periodic integrand.
pub fn bessel_j0_quadrature(x: f64, nodes: usize) -> f64 {
    let h = PI / nodes as f64;
    (0..nodes)
        .map(|k| (x * ((k as f64 + 0.5) * h).sin()).cos())
        .sum::<f64>()
        / nodes as f64
}

/// `(1/2π) ∫ K_0(λ|1 − b e^{iθ}|) cos(nθ) dθ`, which equals `I_n(λb) K_n(λ)`.
pub fn coupling_quadrature(n: u32, lambda: f64, b: f64, nodes: usize) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    (0..nodes)
        .map(|k| {
            let theta = k as f64 * h;
            let r = (1.0 + b * b - 2.0 * b * theta.cos()).sqrt();
            bessel_k(0, lambda * r).expect("positive distance") * (f64::from(n) * theta).cos()
        })
        .sum::<f64>()
        / nodes as f64
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| f64::from(k).ln()).sum()
}

#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((integral - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn product_integral_matches_tabulated_values() {
        // 30-digit references.
        let cases = [
            (1, 1.0, 0.340_173_350_904_867_519_078),
            (7, 1.3, 0.070_205_354_521_435_892_922),
            (1, 0.1, 0.493_308_361_006_343_100_058),
            (1, 10.0, 0.049_810_655_773_542_586_242),
            (30, 10.0, 0.015_810_696_517_232_328_828),
            (30, 0.1, 0.016_666_573_971_854_881_111),
        ];
        for (n, x, expected) in cases {
            let got = product_ik_integral(n, x);
            assert!((got / expected - 1.0).abs() < 1e-11, "n = {n}, x = {x}: {got}");
        }
    }
}
