//! Eigenbases of the Laplace–Beltrami operator on the reference boundary and
//! the surface operators of the boundary evolution expressed in them.
//!
//! All boundary data lives as coefficient vectors in one of two orthonormal
//! bases: the Fourier basis on the circle (n = 2) or real spherical harmonics
//! on the sphere (n = 3, radial level functions only). Orthonormality is with
//! respect to the *parameter* measure — dθ on the circle, the area measure on
//! the unit sphere — and the quadrature rules are chosen so that analysis of
//! band-limited data is exact to roundoff.
//!
//! The basis quadrature nodes coincide with the domain-family cache's
//! boundary nodes (build the cache with [`BoundaryBasis::cache_angular`]),
//! so nodal multiplication by geometric factors composes directly with
//! synthesis and analysis.

pub mod basis;
pub mod operators;

pub use basis::{sphere_degree_order, sphere_index, BasisKind, BoundaryBasis};
pub use operators::{
    apply_advection, apply_tangential, assemble_surface_operators, SurfaceOperators,
};
