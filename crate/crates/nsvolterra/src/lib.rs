//! Spectral Green-function Volterra solver for the incompressible
//! Navier-Stokes system on a periodic box, together with a numerical
//! verification harness for the fractional-integral identities and the
//! integral-inequality chain that underpin the a priori estimate
//! `||w||_{L2(Q_T)} < sqrt(2) ||f||_{L2(Q_T)}`.
//!
//! The solver reformulates the momentum equation through an auxiliary
//! field `w = u_t - rho*Lap(u) - grad p`: the velocity is recovered by a
//! heat Green operator applied to the Leray projection of `w`, and `w`
//! itself satisfies a nonlinear Volterra fixed-point system that is
//! solved by damped Picard iteration with causal time-block marching.
//!
//! Module map:
//! - [`fields`] — spectral scalar/vector fields on the periodic box,
//!   differentiation, dealiased products, and all mixed space-time norms
//! - [`greenop`] — heat Green operator, heat semigroup, inverse
//!   Laplacian, heat-kernel estimate fitting, Sobolev potentials
//! - [`projection`] — Weyl/Leray decomposition and the pressure-gradient
//!   operator
//! - [`fraccalc`] — fractional integration, Abel inversion, the
//!   composition identity, and related transforms
//! - [`solver`] — the Volterra fixed-point solve and manufactured
//!   solutions
//! - [`inequalities`] — the inequality verification harness
//! - [`config`], [`report`], [`sampling`] — scenario configuration,
//!   report serialization, seeded random inputs

pub mod config;
pub mod error;
pub mod fft;
pub mod fields;
pub mod fraccalc;
pub mod greenop;
pub mod inequalities;
pub mod projection;
pub mod report;
pub mod sampling;
pub mod solver;

pub use error::Error;
