//! Boundary integral formulation of rotating doubly-connected patches.
//!
//! The outer and inner interfaces are the images of the unit circle under
//! `Φ_1(w) = w + f_1(w)` and `Φ_2(w) = bw + f_2(w)`, with
//! `f_j(w) = Σ a_n w̄ⁿ`. A patch rotating rigidly with angular velocity `Ω`
//! is a zero of the functional `G = (G_1, G_2)` evaluated here on a uniform
//! grid of the unit circle.

mod boundary;
mod functional;
mod grid;

use thiserror::Error;

pub use boundary::FourierBoundary;
pub use functional::{
    cosine_projection, g_functional, g_functional_unreduced, g_functional_with_orientation,
    g_refined, linearization_check, linearization_check_with_orientation, mean, s_integral, sine_projection, velocity_at,
    LinearizationReport, Refinement,
};
pub use grid::QuadratureGrid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContourError {
    #[error("perturbation too large: Σ(n+1)|a_n| = {weight} must stay below {limit}")]
    BallGuard { weight: f64, limit: f64 },
    #[error("coefficient a_{index} = {value} is not finite")]
    NonFinite { index: usize, value: f64 },
    #[error("interfaces collide: node distance {distance:e}")]
    InterfaceCollision { distance: f64 },
    #[error("point lies within {distance:e} of an interface")]
    NearBoundary { distance: f64 },
    #[error("grid size must be even and at least 8 (got {0})")]
    InvalidGridSize(usize),
    #[error("{0}")]
    InvalidArgument(String),
}
