//! Standalone reference computations for validating the main library from the
//! outside.
//!
//! Everything here is deliberately independent of `shellflow-core`: the point
//! of an oracle is to reach a reference value by a *different* route than the
//! code under test. Bessel values come from power series, their zeros from
//! bisection, ring integrals from a direct 2-D area-element quadrature (no
//! level-set flow involved), and derivatives from finite differences. The
//! crate is consumed only as a dev-dependency of test targets.

pub mod bessel;
pub mod diff;
pub mod fit;
pub mod quad;

pub use bessel::{
    bessel_j, bessel_j_deriv, bessel_j_deriv_zero, bessel_j_zero, modified_bessel_i, spherical_j,
    spherical_j_zero,
};
pub use diff::{central_gradient, central_hessian, central_jacobian, derivative};
pub use fit::line_fit;
pub use quad::{elliptic_ring_integral, gauss_legendre};
