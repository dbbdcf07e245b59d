//! Level-set domain family Ω_t = {ψ < t²}: the generating vector field, the
//! domain flow, and every induced geometric quantity.
//!
//! Points and matrices are fixed-size `[f64; 3]` / `[[f64; 3]; 3]` arrays
//! regardless of the working dimension n ∈ {2, 3}; for n = 2 the third
//! component is zero. Flow Jacobians keep a 1 in the padded diagonal slot so
//! that `det3` of the padded matrix equals the n-dimensional determinant.

pub mod cache;
pub mod flow;
pub mod level;
pub mod ops;

pub use cache::{BoundaryFrameData, DomainFamilyCache};
pub use flow::{flow_map, flow_with_jacobian, FlowField, TangentialMode};
pub use level::{
    boundary_radius, validate_level_function, CheckItem, LevelFunction, Mat3, Point, Shape,
    ValidationReport,
};
pub use ops::{
    area_density, asymptotic_profile, coarea_integrate, eval_mean_curvature, eval_sigma,
    AsymptoticProfile,
};

#[inline]
pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn matvec(m: &Mat3, v: &Point) -> Point {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[inline]
pub(crate) fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub(crate) fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Full 3×3 identity — the correct initial Jacobian in both dimensions
/// (padded slot carries 1 so determinants come out n-dimensional).
#[inline]
pub(crate) fn identity3() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Smallest eigenvalue of the leading n×n block of a symmetric matrix.
pub(crate) fn sym_min_eigenvalue(m: &Mat3, n: usize) -> f64 {
    if n == 2 {
        let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        0.5 * (tr - disc)
    } else {
        let mat = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
        mat.symmetric_eigenvalues().min()
    }
}
