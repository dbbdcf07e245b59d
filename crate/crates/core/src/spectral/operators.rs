//! The surface operators of the boundary evolution in basis coordinates.
//!
//! On ∂Ω_t, pulled back to the reference boundary, the evolution involves two
//! tangential operators:
//!
//! - the advection T_t f = (γ_s/m_t) ∂_θ f along the tangential slip of the
//!   flow (γ = t⁻¹X̃ − σν, γ_s its signed length), and
//! - the second-order operator L_t f = (1/m_t) ∂_θ [σ (1/m_t) ∂_θ f], the
//!   σ-weighted Laplace–Beltrami operator of the moving boundary.
//!
//! On radial families both collapse to closed forms: T_t = 0 and
//! L_t = −μ/t² diagonally on the eigenbasis, in every dimension. For general
//! n = 2 families they are computed in nodal form — synthesize, multiply by
//! cached geometry, differentiate spectrally, analyze — which keeps them
//! exact on the resolved band up to the smoothness of the coefficients.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFrameData, DomainFamilyCache};
use crate::spectral::basis::{BasisKind, BoundaryBasis};
use nalgebra::{DMatrix, DVector};

/// T_t and L_t assembled as dense matrices on the basis at a fixed time.
#[derive(Debug, Clone)]
pub struct SurfaceOperators {
    pub t: f64,
    /// Advection T_t.
    pub advection: DMatrix<f64>,
    /// Second-order tangential operator L_t (negative semidefinite).
    pub tangential: DMatrix<f64>,
}

/// T_t applied to a coefficient vector, using the frame's cached geometry.
pub fn apply_advection(
    basis: &BoundaryBasis,
    frame: &BoundaryFrameData,
    coeffs: &DVector<f64>,
) -> DVector<f64> {
    match basis.kind() {
        BasisKind::Sphere { .. } => DVector::zeros(basis.dim()),
        BasisKind::Circle { .. } => {
            assert_eq!(
                frame.z.len(),
                basis.node_count(),
                "frame/basis node mismatch"
            );
            let df = basis.synthesize_deriv(coeffs);
            let nodal: Vec<f64> = df
                .iter()
                .enumerate()
                .map(|(q, d)| frame.gamma_s[q] / frame.m_t[q] * d)
                .collect();
            basis.analyze(&nodal)
        }
    }
}

/// L_t applied to a coefficient vector.
pub fn apply_tangential(
    basis: &BoundaryBasis,
    frame: &BoundaryFrameData,
    coeffs: &DVector<f64>,
) -> DVector<f64> {
    match basis.kind() {
        BasisKind::Sphere { .. } => {
            let t2 = frame.t * frame.t;
            DVector::from_fn(basis.dim(), |k, _| -basis.eigenvalue(k) / t2 * coeffs[k])
        }
        BasisKind::Circle { .. } => {
            assert_eq!(
                frame.z.len(),
                basis.node_count(),
                "frame/basis node mismatch"
            );
            let df = basis.synthesize_deriv(coeffs);
            let inner: Vec<f64> = df
                .iter()
                .enumerate()
                .map(|(q, d)| frame.sigma[q] / frame.m_t[q] * d)
                .collect();
            let ci = basis.analyze(&inner);
            let dinner = basis.synthesize_deriv(&ci);
            let outer: Vec<f64> = dinner
                .iter()
                .enumerate()
                .map(|(q, d)| d / frame.m_t[q])
                .collect();
            basis.analyze(&outer)
        }
    }
}

/// Assemble T_t and L_t as dense matrices at time t.
pub fn assemble_surface_operators(
    basis: &BoundaryBasis,
    cache: &DomainFamilyCache,
    t: f64,
) -> Result<SurfaceOperators> {
    match basis.kind() {
        BasisKind::Circle { .. } if cache.dimension() != 2 => {
            return Err(Error::InvalidInput(
                "circle basis requires a planar domain family".into(),
            ));
        }
        BasisKind::Sphere { .. } if cache.dimension() != 3 => {
            return Err(Error::InvalidInput(
                "sphere basis requires a three-dimensional domain family".into(),
            ));
        }
        _ => {}
    }
    if basis.node_count() != cache.node_count() {
        return Err(Error::InvalidInput(format!(
            "basis has {} quadrature nodes but the domain cache has {} — build the cache with \
             angular = basis.cache_angular()",
            basis.node_count(),
            cache.node_count()
        )));
    }
    let frame = cache.frame_at(t)?;
    let dim = basis.dim();
    let mut advection = DMatrix::zeros(dim, dim);
    let mut tangential = DMatrix::zeros(dim, dim);
    let mut e = DVector::zeros(dim);
    for k in 0..dim {
        e[k] = 1.0;
        advection.set_column(k, &apply_advection(basis, &frame, &e));
        tangential.set_column(k, &apply_tangential(basis, &frame, &e));
        e[k] = 0.0;
    }
    Ok(SurfaceOperators {
        t,
        advection,
        tangential,
    })
}
