use approx::assert_relative_eq;
use proptest::prelude::*;
use qgsw_core::oracles;
use qgsw_core::special_functions::*;

// Reference values computed with 30-digit arbitrary precision arithmetic.
const REFERENCE: &[(i32, f64, f64, f64)] = &[
    (0, 1.0, 1.2660658777520083356, 0.42102443824070833334),
    (1, 1.0, 0.56515910399248502721, 0.60190723019723457474),
    (5, 2.5, 0.032843475172023213389, 2.7168842907865433582),
    (20, 3.0, 1.5209660019426695221e-15, 16254643952204.365945),
    (50, 10.0, 4.7568945607268399126e-30, 2.0613737753892575337e+27),
    (100, 40.0, 6.6249380222596139035e-27, 7.0074023297775702069e+23),
    (0, 50.0, 2.9325537838493363267e+20, 3.4101677497894955139e-23),
    (3, 0.01, 2.0833463541992189253e-8, 7999900.0012498820461),
];

#[test]
fn reference_values() {
    for &(n, x, i, k) in REFERENCE {
        assert_relative_eq!(bessel_i(n, x).unwrap(), i, max_relative = 1e-12);
        assert_relative_eq!(bessel_k(n, x).unwrap(), k, max_relative = 1e-12);
    }
}

#[test]
fn j0_reference_values() {
    for (x, expected) in [(7.5, 0.26633965788037839687), (30.0, -0.086367983581040211336), (100.0, 0.019985850304223122424)] {
        assert!((bessel_j0(x) - expected).abs() < 1e-13, "x = {x}");
    }
}

#[test]
fn j0_matches_quadrature() {
    for x in [0.5, 2.4, 6.0, 15.0] {
        let expected = oracles::bessel_j0_quadrature(x, 256);
        assert!((bessel_j0(x) - expected).abs() < 1e-13, "x = {x}");
    }
}

#[test]
fn product_matches_integral_oracle() {
    for n in [1u32, 4, 11, 30] {
        for x in [0.1, 0.7, 3.0, 10.0] {
            let oracle = oracles::product_ik_integral(n, x);
            assert_relative_eq!(product_ik(n, x).unwrap(), oracle, max_relative = 1e-9);
        }
    }
}

#[test]
fn product_at_zero_order() {
    let x = 1.7;
    let expected = bessel_i(0, x).unwrap() * bessel_k(0, x).unwrap();
    assert_relative_eq!(product_ik(0, x).unwrap(), expected, max_relative = 1e-14);
}

#[test]
fn k1_matches_long_series() {
    for x in [0.2, 1.0, 1.9] {
        assert_relative_eq!(bessel_k(1, x).unwrap(), oracles::bessel_k1_series(x, 60), max_relative = 1e-13);
    }
}

#[test]
fn domain_errors() {
    assert!(matches!(bessel_k(0, 0.0), Err(BesselError::Domain { .. })));
    assert!(matches!(bessel_k(2, -1.0), Err(BesselError::Domain { .. })));
    assert!(matches!(product_ik(3, 0.0), Err(BesselError::Domain { .. })));
    assert!(matches!(beltrami_k0(0.5, 1.0, 0.0, 40), Err(BesselError::Precondition { .. })));
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(4, 0.0).unwrap(), 0.0);
}

#[test]
fn asymptotic_error_decreases_with_order() {
    let lambda = 1.5;
    let b = 0.8;
    let mut previous = f64::INFINITY;
    for n in [20u32, 40, 80] {
        let exact = coupling_ik(n, lambda, b);
        let error = ((product_ik_asymptotic(n, lambda, b, 3) - exact) / exact).abs();
        assert!(error < previous, "n = {n}: {error} ≥ {previous}");
        previous = error;
    }
}

#[test]
fn asymptotic_two_terms_at_unit_ratio() {
    let n = 60;
    let exact = product_ik(n, 1.0).unwrap();
    assert!((product_ik_asymptotic(n, 1.0, 1.0, 2) - exact).abs() < 5e-7);
}

#[test]
fn beltrami_reference_point() {
    let value = beltrami_k0(1.0, 0.5, 0.3, 60).unwrap();
    assert_relative_eq!(value, 0.857154868469963733588754757846, max_relative = 1e-13);
}

#[test]
fn coupling_matches_circle_quadrature() {
    for (n, lambda, b) in [(1u32, 1.0, 0.5), (6, 2.0, 0.3), (12, 0.5, 0.9)] {
        let expected = oracles::coupling_quadrature(n, lambda, b, 512);
        assert!((coupling_ik(n, lambda, b) - expected).abs() < 1e-10 * expected.max(1e-3));
    }
}

fn x_strategy() -> impl Strategy<Value = f64> {
    (-2.0f64..1.7).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn values_are_positive(n in 0i32..=100, x in x_strategy()) {
        let i = bessel_i(n, x);
        let k = bessel_k(n, x);
        if let Ok(i) = i { prop_assert!(i > 0.0); }
        if let Ok(k) = k { prop_assert!(k > 0.0); }
        prop_assert!(product_ik(n, x).unwrap() > 0.0);
    }

    #[test]
    fn negative_orders_agree(n in 0i32..=60, x in x_strategy()) {
        prop_assert_eq!(bessel_i(-n, x), bessel_i(n, x));
        prop_assert_eq!(bessel_k(-n, x), bessel_k(n, x));
        prop_assert_eq!(product_ik(-n, x), product_ik(n, x));
    }

    #[test]
    fn derivative_recurrences(n in 0i32..20, x in 0.5f64..20.0) {
        let nx = f64::from(n) / x;
        let i_n = bessel_i(n, x).unwrap();
        let k_n = bessel_k(n, x).unwrap();
        let di = bessel_derivative(BesselKind::I, n, x).unwrap();
        let dk = bessel_derivative(BesselKind::K, n, x).unwrap();
        let di_down = bessel_i(n - 1, x).unwrap() - nx * i_n;
        let di_up = bessel_i(n + 1, x).unwrap() + nx * i_n;
        let dk_down = -bessel_k(n - 1, x).unwrap() - nx * k_n;
        let dk_up = -bessel_k(n + 1, x).unwrap() + nx * k_n;
        for (a, b) in [(di, di_down), (di, di_up), (di_down, di_up)] {
            prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(b.abs()), "I: {} vs {}", a, b);
        }
        for (a, b) in [(dk, dk_down), (dk, dk_up), (dk_down, dk_up)] {
            prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(b.abs()), "K: {} vs {}", a, b);
        }
    }

    #[test]
    fn product_decays_in_order(n in 1u32..=199, x in x_strategy()) {
        prop_assert!(product_ik(n + 1, x).unwrap() < product_ik(n, x).unwrap());
    }

    #[test]
    fn logarithmic_derivative_bounds(n in 0i32..=40, x in 0.05f64..30.0) {
        let root = (x * x + f64::from(n * n)).sqrt();
        let i = bessel_i(n, x).unwrap();
        let k = bessel_k(n, x).unwrap();
        let di = bessel_derivative(BesselKind::I, n, x).unwrap();
        let dk = bessel_derivative(BesselKind::K, n, x).unwrap();
        prop_assert!(x * di / i < root);
        prop_assert!(x * dk / k < -root);
    }

    #[test]
    fn wronskian(n in 0i32..=30, x in 0.05f64..30.0) {
        let i = bessel_i(n, x).unwrap();
        let k = bessel_k(n, x).unwrap();
        let di = bessel_derivative(BesselKind::I, n, x).unwrap();
        let dk = bessel_derivative(BesselKind::K, n, x).unwrap();
        let w = i * dk - di * k;
        prop_assert!((w + 1.0 / x).abs() <= 1e-11 / x, "W = {}", w);
    }

    #[test]
    fn beltrami_matches_direct(theta in 0.0f64..std::f64::consts::TAU) {
        let (a, b) = (1.0, 0.5);
        let r = (a * a + b * b - 2.0 * a * b * theta.cos()).sqrt();
        let direct = bessel_k(0, r).unwrap();
        let sum = beltrami_k0(a, b, theta, 60).unwrap();
        prop_assert!((sum - direct).abs() <= 1e-10 * direct);
    }
}
