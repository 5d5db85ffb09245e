//! Bifurcation analysis of doubly-connected rotating vortex patches (V-states)
//! for the quasi-geostrophic shallow-water equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`special_functions`]: modified Bessel functions `I_n`, `K_n` of integer
//!   order, their products and the asymptotic identities used downstream.
//! - [`spectrum`]: the 2×2 Fourier multipliers of the linearised boundary
//!   operator, the eigenvalue pairs `Ω_n^±(λ, b)` and their limits.
//! - [`contour`]: spectrally accurate evaluation of the nonlinear boundary
//!   functional `G = (G_1, G_2)` for perturbed annuli.
//! - [`continuation`]: Newton tracing of the two bifurcating branches.

pub mod continuation;
pub mod contour;
pub mod special_functions;
pub mod spectrum;

#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

pub use continuation::{
    newton_solve, trace_branch, verify_vstate, BranchPoint, BranchProblem, BranchTrace,
    ContinuationError, InitialGuess, NewtonSettings, Pinned, Termination, VStateReport,
};
pub use contour::{ContourError, FourierBoundary, QuadratureGrid};
pub use special_functions::{BesselError, BesselKind, BesselOrder};
pub use spectrum::{EigenPair, Sign, SpectralMatrix, SpectrumError, Threshold};
