//! Modified Bessel functions of integer order and the identities built on them.
//!
//! All routines take real positive arguments. Products `I_n K_n` and the
//! coupling `I_n(λb) K_n(λ)` are evaluated in a factorised form in which the
//! large prefactors `(x/2)^n / n!` and `(n-1)! (2/x)^n / 2` cancel analytically,
//! so they stay finite for orders in the thousands.

mod asymptotic;
mod bessel;
mod j0;

use thiserror::Error;

pub use asymptotic::{product_ik_asymptotic, stirling2, AsymptoticSeries};
pub use bessel::{
    beltrami_k0, bessel_derivative, bessel_i, bessel_k, coupling_ik, k0_regularized, product_ik,
};
pub use j0::bessel_j0;

pub(crate) use bessel::{assemble_product, i0_and_regularized, i_series_scaled, k0, ScaledK};

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Integer order of a Bessel function. Negative orders are folded onto
/// positive ones through `I_{-n} = I_n`, `K_{-n} = K_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BesselOrder(pub i32);

impl BesselOrder {
    pub fn magnitude(self) -> u32 {
        self.0.unsigned_abs()
    }
}

impl From<i32> for BesselOrder {
    fn from(n: i32) -> Self {
        BesselOrder(n)
    }
}

impl From<u32> for BesselOrder {
    fn from(n: u32) -> Self {
        BesselOrder(i32::try_from(n).expect("Bessel order exceeds i32 range"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselKind {
    I,
    K,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("{function}: argument {x} is outside the domain")]
    Domain { function: &'static str, x: f64 },
    #[error("{function}: value at order {order}, argument {x} is not representable in f64")]
    Range {
        function: &'static str,
        order: i32,
        x: f64,
    },
    #[error("Beltrami summation needs 0 < b < a (got a = {a}, b = {b})")]
    Precondition { a: f64, b: f64 },
}
