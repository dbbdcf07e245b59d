//! Elliptic boundary-value problems as dynamical systems on boundary Cauchy
//! data over a shrinking family of level-set domains.
//!
//! The library realizes the semilinear problem Δu + F(x, u) = 0 on a domain
//! Ω = {ψ < 1} as an evolution in the "time" t of the nested family
//! Ω_t = {ψ < t²}: the state is the Cauchy pair (f, g) = (u, ∂u/∂ν) on ∂Ω_t
//! pulled back to the reference boundary ∂Ω, and the evolution is ill-posed
//! in both directions. What makes it usable is the exponential-dichotomy
//! structure of the rescaled linear system: the subspace of data that stays
//! bounded at the shrink point can be propagated stably outward, which yields
//! both solution reconstruction and Dirichlet-eigenvalue detection (an
//! eigenvalue is a value of the spectral shift λ at which that subspace meets
//! the Dirichlet subspace {f = 0}).
//!
//! Module map:
//! - [`ode`]: embedded adaptive Runge–Kutta 5(4) with dense output and a
//!   norm-overflow guard (the designed failure mode of the ill-posed flow).
//! - [`geometry`]: the level function ψ, the autonomous generating field X̃,
//!   the domain flow φ_t and every induced quantity (normal speed σ, mean
//!   curvature H, area density a_t, Jacobians, t → 0 asymptotics, coarea
//!   integrals).
//! - [`spectral`]: Laplace–Beltrami eigenbases on the reference boundary
//!   (Fourier circle, real spherical harmonics), fractional Sobolev norms,
//!   and the assembled surface operators T_t, L_t.
//! - [`harmonic`]: closed-form harmonic Cauchy data and per-mode asymptotic
//!   blocks — the exact reference data for everything else.
//! - [`dynamics`]: the nonlinear, linear and rescaled boundary systems,
//!   subspace-frame propagation with re-orthonormalization, and dichotomy
//!   rate estimation.
//! - [`eigensolver`]: unstable-subspace seeding, Dirichlet/Neumann
//!   intersection measurement, and the eigenvalue sweep.
//! - [`reconstruct`]: traces of volumetric fields, reconstruction of u from
//!   boundary-data histories, the removable-singularity criterion, and weak
//!   residuals.

pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod numeric;
pub mod ode;
pub mod reconstruct;
pub mod spectral;

pub use error::{Error, Result};
