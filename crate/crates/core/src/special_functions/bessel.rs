use std::f64::consts::PI;

use super::{BesselError, BesselKind, BesselOrder, EULER_GAMMA};

/// Relative size below which a series term is dropped.
const SERIES_EPS: f64 = 1e-17;

/// `K_0`, `K_1` switch from the power series to Steed's continued fraction here.
const K_SERIES_LIMIT: f64 = 2.0;

const STEED_MAX_ITER: usize = 10_000;

/// Σ_k (x²/4)^k n! / (k! (n+k)!), i.e. `I_n(x)` divided by `(x/2)^n / n!`.
/// All terms are positive, so the sum carries full relative precision.
pub(crate) fn i_series_scaled(n: u32, x: f64) -> f64 {
    let y = 0.25 * x * x;
    let nf = f64::from(n);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= y / (k * (nf + k));
        sum += term;
        if term <= SERIES_EPS * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// `I_0(x)` together with the smooth part of `K_0`,
/// Σ (x/2)^{2m} / (m!)² ψ(m+1), so that `K_0(x) = reg − log(x/2) I_0(x)`.
pub(crate) fn i0_and_regularized(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut reg = -EULER_GAMMA;
    let mut harmonic = 0.0;
    let mut m = 1.0;
    loop {
        term *= y / (m * m);
        harmonic += 1.0 / m;
        i0 += term;
        reg += term * (harmonic - EULER_GAMMA);
        if term * (1.0 + harmonic) <= SERIES_EPS * i0 {
            return (i0, reg);
        }
        m += 1.0;
    }
}

fn k0_series(x: f64) -> f64 {
    let (i0, reg) = i0_and_regularized(x);
    reg - (0.5 * x).ln() * i0
}

fn k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    // H_k and H_{k+1} for k = 0.
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut sum_i = 1.0;
    let mut sum_psi = h_k + h_k1 - 2.0 * EULER_GAMMA;
    let mut k = 1.0;
    loop {
        term *= y / (k * (k + 1.0));
        h_k = h_k1;
        h_k1 += 1.0 / (k + 1.0);
        sum_i += term;
        let psi_term = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
        sum_psi += psi_term;
        if term * (1.0 + h_k1) <= SERIES_EPS * sum_i {
            break;
        }
        k += 1.0;
    }
    1.0 / x + (0.5 * x).ln() * (0.5 * x) * sum_i - 0.25 * x * sum_psi
}

/// Steed's method (continued fraction CF2 with Temme's normalisation) for
/// `K_0` and `K_1`, accurate for `x ≥ 2`.
fn k0_k1_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..STEED_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `K_0(x)` alone, for kernel loops.
pub(crate) fn k0(x: f64) -> f64 {
    if x < K_SERIES_LIMIT {
        k0_series(x)
    } else {
        k0_k1_steed(x).0
    }
}

pub(crate) fn k0_k1(x: f64) -> (f64, f64) {
    if x < K_SERIES_LIMIT {
        (k0_series(x), k1_series(x))
    } else {
        k0_k1_steed(x)
    }
}

/// Successive values of `t_n(x) = 2 (x/2)^n K_n(x) / (n-1)!`, `n = 1, 2, …`,
/// from the upward recurrence `K_{k+1} = K_{k-1} + (2k/x) K_k` rewritten for
/// the scaled values: `t_{k+1} = t_k + (x²/4) t_{k-1} / (k(k-1))`. Every term
/// is positive and the sequence tends to 1 as `n → ∞`.
#[derive(Debug, Clone)]
pub(crate) struct ScaledK {
    y: f64,
    k0: f64,
    order: u32,
    prev: f64,
    cur: f64,
}

impl ScaledK {
    /// Positioned at `n = 1`.
    pub(crate) fn new(x: f64) -> Self {
        let (k0, k1) = k0_k1(x);
        ScaledK { y: 0.25 * x * x, k0, order: 1, prev: 0.0, cur: x * k1 }
    }

    pub(crate) fn order(&self) -> u32 {
        self.order
    }

    pub(crate) fn value(&self) -> f64 {
        self.cur
    }

    pub(crate) fn advance(&mut self) {
        let next = if self.order == 1 {
            self.cur + 2.0 * self.y * self.k0
        } else {
            let k = f64::from(self.order);
            self.cur + self.y * self.prev / (k * (k - 1.0))
        };
        self.prev = self.cur;
        self.cur = next;
        self.order += 1;
    }
}

pub(crate) fn k_scaled(n: u32, x: f64) -> f64 {
    debug_assert!(n >= 1);
    let mut seq = ScaledK::new(x);
    while seq.order() < n {
        seq.advance();
    }
    seq.value()
}

/// `ratio_pow / (2n) · S_I · t_n`, the common final step of every product.
pub(crate) fn assemble_product(n: u32, ratio_pow: f64, s_i: f64, t_n: f64) -> f64 {
    ratio_pow / (2.0 * f64::from(n)) * s_i * t_n
}

/// mantissa · 2^exponent without intermediate overflow.
fn ldexp(mut mantissa: f64, mut exponent: i32) -> f64 {
    while exponent > 0 {
        let step = exponent.min(1000);
        mantissa *= 2f64.powi(step);
        exponent -= step;
    }
    while exponent < 0 {
        let step = (-exponent).min(1000);
        mantissa *= 2f64.powi(-step);
        exponent += step;
    }
    mantissa
}

/// `(x/2)^n / n!` as a mantissa/binary-exponent pair.
fn half_power_over_factorial(n: u32, x: f64) -> (f64, i32) {
    const BIG: f64 = 3.273_390_607_896_142e150; // 2^500
    let half = 0.5 * x;
    let mut mantissa = 1.0;
    let mut exponent = 0;
    for k in 1..=n {
        mantissa *= half / f64::from(k);
        if mantissa > BIG {
            mantissa /= BIG;
            exponent += 500;
        } else if mantissa != 0.0 && mantissa < 1.0 / BIG {
            mantissa *= BIG;
            exponent -= 500;
        }
    }
    (mantissa, exponent)
}

fn positive_finite(value: f64, function: &'static str, order: i32, x: f64) -> Result<f64, BesselError> {
    if value.is_finite() && value >= f64::MIN_POSITIVE {
        Ok(value)
    } else {
        Err(BesselError::Range { function, order, x })
    }
}

/// Modified Bessel function of the first kind `I_n(x)`.
///
/// Evaluated from the power series, which has only positive terms for real
/// `x`. `x = 0` is accepted and returns the series limit (1 for `n = 0`,
/// 0 otherwise). Results that overflow or underflow f64 are reported as
/// [`BesselError::Range`].
pub fn bessel_i(n: impl Into<BesselOrder>, x: f64) -> Result<f64, BesselError> {
    let order = n.into();
    let n = order.magnitude();
    if x.is_nan() || x < 0.0 {
        return Err(BesselError::Domain { function: "bessel_i", x });
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let (mantissa, exponent) = half_power_over_factorial(n, x);
    let value = ldexp(mantissa * i_series_scaled(n, x), exponent);
    positive_finite(value, "bessel_i", order.0, x)
}

/// Modified Bessel function of the second kind `K_n(x)`, `x > 0`.
///
/// `K_0` and `K_1` come from their power series for `x < 2` and from Steed's
/// continued fraction otherwise; higher orders use the upward recurrence,
/// which is stable for `K`.
pub fn bessel_k(n: impl Into<BesselOrder>, x: f64) -> Result<f64, BesselError> {
    let order = n.into();
    let n = order.magnitude();
    if x.is_nan() || x <= 0.0 {
        return Err(BesselError::Domain { function: "bessel_k", x });
    }
    let (k0, k1) = k0_k1(x);
    let value = match n {
        0 => k0,
        1 => k1,
        _ => {
            let mut prev = k0;
            let mut cur = k1;
            for k in 1..n {
                let next = prev + 2.0 * f64::from(k) / x * cur;
                prev = cur;
                cur = next;
                if !cur.is_finite() {
                    break;
                }
            }
            cur
        }
    };
    positive_finite(value, "bessel_k", order.0, x)
}

/// Derivative `Z_n'(x)` for `Z = I` or `K`.
///
/// Uses `I_n' = I_{n+1} + (n/x) I_n` and `K_n' = −K_{n−1} − (n/x) K_n`; in both
/// forms the two terms have the same sign, so no cancellation occurs.
pub fn bessel_derivative(kind: BesselKind, n: impl Into<BesselOrder>, x: f64) -> Result<f64, BesselError> {
    let order = n.into();
    let n = order.magnitude();
    if x.is_nan() || x <= 0.0 {
        return Err(BesselError::Domain { function: "bessel_derivative", x });
    }
    let nf = f64::from(n);
    let value = match kind {
        BesselKind::I => bessel_i(n + 1, x)? + nf / x * bessel_i(n, x)?,
        BesselKind::K if n == 0 => -bessel_k(1, x)?,
        BesselKind::K => -bessel_k(n - 1, x)? - nf / x * bessel_k(n, x)?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(BesselError::Range { function: "bessel_derivative", order: order.0, x })
    }
}

/// `I_n(x) K_n(x)`, finite for any order.
///
/// For `n ≥ 1` this is `S_I(n, x) · t_n(x) / (2n)` where `S_I` is the scaled
/// `I` series and `t_n` the scaled `K` recurrence; the factorial prefactors
/// of the two functions cancel exactly.
pub fn product_ik(n: impl Into<BesselOrder>, x: f64) -> Result<f64, BesselError> {
    let order = n.into();
    let n = order.magnitude();
    if x.is_nan() || x <= 0.0 {
        return Err(BesselError::Domain { function: "product_ik", x });
    }
    let value = if n == 0 {
        let (i0, reg) = i0_and_regularized(x);
        if x < K_SERIES_LIMIT {
            i0 * (reg - (0.5 * x).ln() * i0)
        } else {
            i0 * k0_k1_steed(x).0
        }
    } else {
        assemble_product(n, 1.0, i_series_scaled(n, x), k_scaled(n, x))
    };
    positive_finite(value, "product_ik", order.0, x)
}

/// `I_n(λb) K_n(λ)` for `0 < b ≤ 1`, `n ≥ 1`.
///
/// Equal to `bⁿ/(2n) · S_I(n, λb) · t_n(λ)`; underflows gracefully to zero
/// when `bⁿ` does. At `b = 1` it is bit-identical to [`product_ik`].
pub fn coupling_ik(n: u32, lambda: f64, b: f64) -> f64 {
    assert!(n >= 1 && lambda > 0.0 && b > 0.0 && b <= 1.0, "coupling needs n ≥ 1, λ > 0, 0 < b ≤ 1");
    assemble_product(n, b.powi(n as i32), i_series_scaled(n, lambda * b), k_scaled(n, lambda))
}

/// Smooth part of `K_0`: `K_0(x) + log(x/2) I_0(x) = Σ (x/2)^{2m}/(m!)² ψ(m+1)`.
/// Tends to `ψ(1) = −γ` as `x → 0⁺`.
pub fn k0_regularized(x: f64) -> f64 {
    i0_and_regularized(x).1
}

/// Truncated Beltrami sum Σ_{m=−M}^{M} I_m(b) K_m(a) cos(mθ), which converges
/// to `K_0(√(a² + b² − 2ab cos θ))` for `0 < b < a`.
pub fn beltrami_k0(a: f64, b: f64, theta: f64, terms: u32) -> Result<f64, BesselError> {
    if !(b > 0.0 && b < a) {
        return Err(BesselError::Precondition { a, b });
    }
    let mut sum = bessel_i(0, b)? * k0_k1(a).0;
    let mut t = ScaledK::new(a);
    let ratio = b / a;
    for m in 1..=terms {
        if m > 1 {
            t.advance();
        }
        let product = assemble_product(m, ratio.powi(m as i32), i_series_scaled(m, b), t.value());
        sum += 2.0 * product * (f64::from(m) * theta).cos();
    }
    Ok(sum)
}
