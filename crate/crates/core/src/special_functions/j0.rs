use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_LIMIT: f64 = 4.0;
const MILLER_LIMIT: f64 = 25.0;

/// Bessel function of the first kind `J_0(x)`, `x ≥ 0`.
///
/// Power series below 4, Miller's backward recurrence up to 25 and the
/// Hankel expansion beyond. Absolute error is around 1e-15 up to x = 100.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series(x)
    } else if x <= MILLER_LIMIT {
        miller(x)
    } else {
        hankel(x)
    }
}

fn series(x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term.abs() > 1e-18 {
        term *= y / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    j0 / norm
}

fn hankel(x: f64) -> f64 {
    // a_k = Π_{j=1}^{k} (2j−1)² / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (k as f64 * 8.0 * x);
        }
        if term > last || term < 1e-18 {
            break;
        }
        last = term;
        match k % 4 {
            0 => p += term,
            1 => q -= term,
            2 => p -= term,
            _ => q += term,
        }
    }
    // J_0 = √(2/πx)(P cos χ − Q sin χ), χ = x − π/4.
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}
