use approx::assert_relative_eq;
use proptest::prelude::*;
use qgsw_core::special_functions::{bessel_k, product_ik};
use qgsw_core::spectrum::*;

// Eigenvalues and discriminants at (λ, b) = (1, 0.5), computed with 30-digit
// arithmetic directly from I_n and K_n.
const REFERENCE: &[(u32, f64, f64, f64)] = &[
    (3, 0.00047993134122788779626, 0.054370463107203117004, 0.098185133765688628266),
    (5, 0.0082556091697774928003, -0.01719760966565978649, 0.16452315601374728551),
    (12, 0.021924268332400822984, -0.07509954418463021667, 0.22103737234149844008),
];

#[test]
fn reference_eigenvalues() {
    for &(m, delta, minus, plus) in REFERENCE {
        let pair = eigenvalues(m, 1.0, 0.5).unwrap();
        assert_relative_eq!(pair.discriminant, delta, max_relative = 1e-10);
        assert!((pair.omega_minus - minus).abs() < 1e-12, "m = {m}");
        assert!((pair.omega_plus - plus).abs() < 1e-12, "m = {m}");
    }
}

#[test]
fn closed_form_at_twelve() {
    let (lambda, b, m) = (1.3, 0.4, 12);
    let l1 = lambda_coupling(1, lambda, b);
    let lm = lambda_coupling(m, lambda, b);
    let outer = omega_rankine(m, lambda);
    let inner = omega_rankine(m, lambda * b);
    let radicand = (b * (outer + inner) - (1.0 + b * b) * l1).powi(2) - 4.0 * b * b * lm * lm;
    let centre = (1.0 - b * b) / (2.0 * b) * l1 + 0.5 * (outer - inner);
    let half = radicand.sqrt() / (2.0 * b);
    let pair = eigenvalues(m, lambda, b).unwrap();
    assert!((pair.omega_minus - (centre - half)).abs() < 1e-13);
    assert!((pair.omega_plus - (centre + half)).abs() < 1e-13);
}

#[test]
fn threshold_at_reference_point() {
    let t = find_threshold(1.0, 0.5, 50).unwrap();
    assert_eq!(t, Threshold { n0: 3, n: 3 });
    assert!(discriminant(2, 1.0, 0.5) < 0.0);
    assert!(eigenvalues(2, 1.0, 0.5).is_none());
    for n in t.n0..t.n0 + 200 {
        assert!(discriminant(n, 1.0, 0.5) > 0.0, "n = {n}");
    }
}

#[test]
fn threshold_rejects_tiny_window() {
    assert!(matches!(find_threshold(1.0, 0.5, 0), Err(SpectrumError::WindowTooSmall(0))));
}

#[test]
fn discriminant_limit_is_positive_and_approached() {
    for lambda in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for b in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let limit = discriminant_limit(lambda, b);
            assert!(limit > 0.0, "λ = {lambda}, b = {b}");
            let near = (discriminant(200, lambda, b) - limit).abs();
            let far = (discriminant(2000, lambda, b) - limit).abs();
            assert!(far < near, "λ = {lambda}, b = {b}");
        }
    }
}

#[test]
fn discriminant_approach_rate() {
    // Δ_n ≈ Δ_∞ − 2bδ_∞/n, so the relative gap is about 2b/(nδ_∞): 2.6e-2 at
    // n = 200 for (λ, b) = (1, 0.5). High-precision value of the gap at 200:
    let (lambda, b) = (1.0, 0.5);
    let limit = discriminant_limit(lambda, b);
    let relative = |n: u32| (discriminant(n, lambda, b) - limit) / limit;
    assert_relative_eq!(relative(200), -0.026191139224403966511, max_relative = 1e-8);
    assert!(relative(600).abs() < 1e-2);
    let rate = -2.0 * b / delta_infinity(lambda, b);
    assert_relative_eq!(2000.0 * relative(2000), rate, max_relative = 1e-2);
}

#[test]
fn interlacing_chain() {
    let (lambda, b) = (1.0, 0.5);
    let t = find_threshold(lambda, b, 50).unwrap();
    let (inf_minus, inf_plus) = omega_limits(lambda, b);
    let pairs: Vec<EigenPair> = (t.n..=t.n + 50).map(|n| eigenvalues(n, lambda, b).unwrap()).collect();
    assert!(pairs[0].omega_minus < pairs[0].omega_plus);
    for w in pairs.windows(2) {
        assert!(w[1].omega_minus < w[0].omega_minus, "n = {}", w[1].n);
        assert!(w[0].omega_plus < w[1].omega_plus, "n = {}", w[1].n);
    }
    let last = pairs.last().unwrap();
    assert!(inf_minus < last.omega_minus && last.omega_plus < inf_plus);

    let far = eigenvalues(t.n + 500, lambda, b).unwrap();
    assert!(inf_plus - far.omega_plus < 1e-3 && inf_plus - far.omega_plus > 0.0);
    assert!(far.omega_minus - inf_minus < 1e-3 && far.omega_minus - inf_minus > 0.0);
}

#[test]
fn small_lambda_upper_limit() {
    let (_, plus) = omega_limits(1e-5, 0.5);
    assert!((plus - 0.375).abs() < 1e-3);
}

#[test]
fn continuity_in_lambda() {
    let b = 0.5;
    let mut previous = f64::INFINITY;
    for lambda in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut gap: f64 = 0.0;
        for n in 4..24 {
            let pair = eigenvalues(n, lambda, b).unwrap();
            let (lo, hi) = euler_eigenvalues(n, b).unwrap();
            gap = gap.max((pair.omega_minus - lo).abs()).max((pair.omega_plus - hi).abs());
        }
        assert!(gap < previous, "λ = {lambda}");
        previous = gap;
    }
    assert!(previous < 1e-3);
}

#[test]
fn continuity_in_b() {
    let lambda = 1.0;
    let mut previous = (f64::INFINITY, f64::INFINITY);
    for b in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut gap: (f64, f64) = (0.0, 0.0);
        for n in 2..22 {
            let pair = eigenvalues(n, lambda, b).unwrap();
            gap.0 = gap.0.max((pair.omega_plus - simply_connected_limit(n, lambda)).abs());
            gap.1 = gap.1.max((pair.omega_minus - simply_connected_lower_limit(n, lambda)).abs());
        }
        assert!(gap.0 < previous.0 && gap.1 < previous.1, "b = {b}");
        previous = gap;
    }
    assert!(previous.0 < 1e-3 && previous.1 < 1e-3);
}

#[test]
fn euler_small_b_limit() {
    for n in 3..=10 {
        let (_, plus) = euler_eigenvalues(n, 1e-6).unwrap();
        let expected = f64::from(n - 1) / (2.0 * f64::from(n));
        assert!((plus - expected).abs() < 1e-5, "n = {n}");
    }
}

#[test]
fn euler_pair_existence() {
    // At b = 0.5 the Euler pair first exists at n = 4.
    assert!(euler_condition(3, 0.5) > 0.0 || euler_eigenvalues(3, 0.5).is_none());
    assert!(euler_condition(4, 0.5) < 0.0);
    assert!(euler_eigenvalues(4, 0.5).is_some());
}

#[test]
fn kernel_vector_spans_null_space() {
    for sign in Sign::BOTH {
        for m in [3u32, 5, 9, 20] {
            let omega = eigenvalues(m, 1.0, 0.5).unwrap().omega(sign);
            let matrix = spectral_matrix(m, 1.0, 0.5, omega);
            let v = kernel_vector(m, 1.0, 0.5, sign).unwrap();
            let mv = matrix.apply(v);
            // The components of v are differences of quantities of size Λ_1.
            let scale = matrix.norm() * v[0].hypot(v[1]).max(lambda_coupling(1, 1.0, 0.5));
            assert!(mv[0].hypot(mv[1]) < 1e-12 * scale, "m = {m}, {sign}");
            // Parallel to the first adjugate column.
            let adj = [matrix.m12, -matrix.m11];
            let cross = v[0] * adj[1] - v[1] * adj[0];
            assert!(cross.abs() < 1e-12 * scale.max(1e-300));
        }
    }
}

#[test]
fn kernel_ratio_at_reference_point() {
    let minus = kernel_vector(5, 1.0, 0.5, Sign::Minus).unwrap();
    let plus = kernel_vector(5, 1.0, 0.5, Sign::Plus).unwrap();
    assert!((minus[1] / minus[0] + 122.476).abs() < 1e-2);
    assert!((plus[1] / plus[0] + 0.032659).abs() < 1e-5);
}

#[test]
fn simple_kernel_guard() {
    assert!(matches!(
        kernel_vector(2, 1.0, 0.5, Sign::Plus),
        Err(SpectrumError::NonPositiveDiscriminant { n: 2, .. })
    ));
    assert!(transversality_check(2, 1.0, 0.5, Sign::Minus).is_err());
}

#[test]
fn transversality_sweep() {
    for lambda in [0.5, 1.0, 2.0] {
        for b in [0.3, 0.5, 0.7] {
            let t = find_threshold(lambda, b, 50).unwrap();
            for m in t.n + 1..=t.n + 10 {
                for sign in Sign::BOTH {
                    assert!(transversality_check(m, lambda, b, sign).unwrap(), "λ = {lambda}, b = {b}, m = {m}, {sign}");
                }
            }
        }
    }
}

#[test]
fn harmonics_are_nonsingular() {
    let t = find_threshold(1.0, 0.5, 50).unwrap();
    let m = t.n + 2;
    for sign in Sign::BOTH {
        let omega = eigenvalues(m, 1.0, 0.5).unwrap().omega(sign);
        for (k, det) in harmonic_determinants(m, 1.0, 0.5, omega, 10) {
            let scale = spectral_matrix(k * m, 1.0, 0.5, omega).norm().powi(2);
            assert!(det.abs() > 1e-8 * scale, "k = {k}, {sign}: {det}");
        }
    }
}

#[test]
fn obstruction_vanishes_at_double_root() {
    // Δ_3(1, b) changes sign between b = 0.5 and b = 0.7; bisect for the root.
    let (mut lo, mut hi) = (0.5, 0.7);
    assert!(discriminant(3, 1.0, lo) > 0.0 && discriminant(3, 1.0, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if discriminant(3, 1.0, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = lo;
    let (big_b, _) = quadratic_coefficients(3, 1.0, b);
    let omega = big_b / (2.0 * b);
    let scale = lambda_coupling(1, 1.0, b).powi(2);
    assert!(transversality_obstruction(3, 1.0, b, omega).abs() < 1e-12 * scale);
    // Away from the crossing the obstruction at the vertex is Δ/4.
    let (big_b, _) = quadratic_coefficients(5, 1.0, 0.5);
    let vertex = transversality_obstruction(5, 1.0, 0.5, big_b);
    assert_relative_eq!(vertex, discriminant(5, 1.0, 0.5) / 4.0, max_relative = 1e-10);
}

fn params() -> impl Strategy<Value = (u32, f64, f64)> {
    (1u32..60, (-1.0f64..0.7).prop_map(|e| 10f64.powf(e)), 0.05f64..0.95)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vieta_and_determinant((n, lambda, b) in params()) {
        if let Some(pair) = eigenvalues(n, lambda, b) {
            let (big_b, big_c) = quadratic_coefficients(n, lambda, b);
            let size = big_b.abs().max(big_c.abs().sqrt()).max(1e-12);
            prop_assert!(pair.omega_minus <= pair.omega_plus);
            prop_assert!((pair.omega_minus + pair.omega_plus - big_b / b).abs() <= 1e-12 * size / b);
            prop_assert!((pair.omega_minus * pair.omega_plus - big_c / b).abs() <= 1e-12 * size * size / b);
            for sign in Sign::BOTH {
                let matrix = spectral_matrix(n, lambda, b, pair.omega(sign));
                prop_assert!(matrix.determinant().abs() <= 1e-12 * matrix.norm().powi(2));
            }
        }
    }

    #[test]
    fn determinant_is_quadratic((n, lambda, b) in params(), omega in -1.0f64..1.0) {
        let (big_b, big_c) = quadratic_coefficients(n, lambda, b);
        let det = spectral_matrix(n, lambda, b, omega).determinant();
        let expected = b * omega * omega - big_b * omega + big_c;
        prop_assert!((det - expected).abs() <= 1e-13 * (1.0 + big_b.abs() + big_c.abs()));
    }

    #[test]
    fn coupling_bounded_by_products((n, lambda, b) in params()) {
        let coupling = lambda_coupling(n, lambda, b);
        prop_assert!(coupling > 0.0);
        prop_assert!(coupling < product_ik(n, lambda).unwrap());
    }

    #[test]
    fn x_k1_in_unit_interval(x in 1e-3f64..30.0, dx in 1e-3f64..1.0) {
        let f = |x: f64| x * bessel_k(1, x).unwrap();
        prop_assert!(f(x) > 0.0 && f(x) < 1.0);
        prop_assert!(f(x + dx) < f(x));
    }
}
