//! H-orthonormal frames spanning subspaces of Cauchy-data space, and their
//! transport under the rescaled evolution.
//!
//! The dichotomy machinery never needs individual solutions — only the
//! subspaces they span (unstable families, boundary subspaces). A frame is
//! a 2·dim × k column matrix kept orthonormal in the H = H^{1/2} ⊕ H^{−1/2}
//! inner product; propagation integrates each column and re-orthonormalizes
//! every Δτ = 0.1 so the spread of growth rates never degrades the basis.
//! The span, not the columns, is the meaningful output.

use crate::dynamics::{BoundarySystem, RescaledState};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepStats};
use crate::spectral::basis::BoundaryBasis;
use nalgebra::{DMatrix, DVector};

/// Re-orthonormalization cadence of [`propagate_frame`].
pub const ORTH_STEP: f64 = 0.1;

/// Ratio below which a post-QR diagonal entry means the columns have
/// collapsed onto a lower-dimensional subspace.
const RANK_TOL: f64 = 1e-12;

/// Columns spanning a subspace of rescaled Cauchy-data space, orthonormal
/// in the H-inner product.
#[derive(Debug, Clone)]
pub struct SubspaceFrame {
    pub tau: f64,
    pub alpha: f64,
    /// 2·dim × k matrix; rows 0..dim are f̃ coefficients, rows dim.. are g̃.
    pub columns: DMatrix<f64>,
}

impl SubspaceFrame {
    /// Orthonormalize the given columns into a frame.
    pub fn new(basis: &BoundaryBasis, tau: f64, alpha: f64, columns: DMatrix<f64>) -> Result<Self> {
        if columns.nrows() != 2 * basis.dim() {
            return Err(Error::InvalidInput(format!(
                "frame rows ({}) must equal twice the basis dimension ({})",
                columns.nrows(),
                2 * basis.dim()
            )));
        }
        if columns.ncols() == 0 || columns.ncols() > basis.dim() {
            return Err(Error::InvalidInput(format!(
                "frame rank {} outside 1..={}",
                columns.ncols(),
                basis.dim()
            )));
        }
        let mut frame = SubspaceFrame {
            tau,
            alpha,
            columns,
        };
        frame.orthonormalize(basis)?;
        Ok(frame)
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    /// One column as a rescaled state.
    pub fn column_state(&self, j: usize) -> RescaledState {
        let d = self.columns.nrows() / 2;
        let col = self.columns.column(j);
        RescaledState {
            tau: self.tau,
            alpha: self.alpha,
            f: col.rows(0, d).into_owned(),
            g: col.rows(d, d).into_owned(),
        }
    }

    /// H-inner-product QR in place; deterministic sign convention.
    pub fn orthonormalize(&mut self, basis: &BoundaryBasis) -> Result<()> {
        let w = h_weights(basis);
        let k = self.columns.ncols();
        let mut b = self.columns.clone();
        for j in 0..k {
            for i in 0..b.nrows() {
                b[(i, j)] *= w[i];
            }
        }
        let qr = b.qr();
        let q = qr.q();
        let r = qr.r();
        let leading = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
        for i in 0..k {
            if r[(i, i)].abs() < RANK_TOL * leading {
                return Err(Error::RankCollapse {
                    tau: self.tau,
                    column: i,
                    scale: r[(i, i)].abs() / leading,
                });
            }
        }
        for j in 0..k {
            let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..q.nrows() {
                self.columns[(i, j)] = sign * q[(i, j)] / w[i];
            }
        }
        Ok(())
    }

    /// Gram matrix in the H-inner product (identity for a valid frame).
    pub fn h_gram(&self, basis: &BoundaryBasis) -> DMatrix<f64> {
        let wa = weighted(basis, &self.columns);
        wa.transpose() * &wa
    }
}

/// Diagonal Cholesky weights of the H-inner product: (1 + μ)^{1/4} on the
/// f̃ block, (1 + μ)^{−1/4} on the g̃ block, so Euclidean geometry of the
/// weighted vectors is H-geometry of the states.
pub fn h_weights(basis: &BoundaryBasis) -> DVector<f64> {
    let d = basis.dim();
    let mut w = DVector::zeros(2 * d);
    for k in 0..d {
        let base = 1.0 + basis.eigenvalue(k);
        w[k] = base.powf(0.25);
        w[d + k] = base.powf(-0.25);
    }
    w
}

fn weighted(basis: &BoundaryBasis, cols: &DMatrix<f64>) -> DMatrix<f64> {
    let w = h_weights(basis);
    let mut out = cols.clone();
    for j in 0..out.ncols() {
        for i in 0..out.nrows() {
            out[(i, j)] *= w[i];
        }
    }
    out
}

/// Principal angles (ascending, radians) between the spans of two frames
/// in the H-inner product. Both frames must be orthonormal.
pub fn principal_angles(basis: &BoundaryBasis, a: &SubspaceFrame, b: &SubspaceFrame) -> Vec<f64> {
    let m = weighted(basis, &a.columns).transpose() * weighted(basis, &b.columns);
    let mut cosines: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    cosines.sort_by(|x, y| y.partial_cmp(x).unwrap());
    cosines
        .into_iter()
        .map(|c| c.clamp(-1.0, 1.0).acos())
        .collect()
}

/// Transport a frame from its τ to `tau1` under the system's rescaled
/// evolution, re-orthonormalizing every [`ORTH_STEP`]. The returned frame
/// spans the image subspace; dichotomy filtering (decay of unwanted
/// components relative to the dominant ones) happens automatically in the
/// direction of propagation.
pub fn propagate_frame(
    system: &BoundarySystem,
    frame: &SubspaceFrame,
    tau1: f64,
    solver: &Dopri5,
) -> Result<(SubspaceFrame, StepStats)> {
    let mut stats = StepStats::default();
    let span = tau1 - frame.tau;
    let mut out = frame.clone();
    if span == 0.0 {
        return Ok((out, stats));
    }
    let legs = (span.abs() / ORTH_STEP).ceil().max(1.0) as usize;
    let dtau = span / legs as f64;
    let d = out.columns.nrows() / 2;
    for leg in 0..legs {
        let tau_next = frame.tau + dtau * (leg + 1) as f64;
        for j in 0..out.rank() {
            let rs = out.column_state(j);
            let (end, st) = system.integrate_rescaled(&rs, tau_next, solver)?;
            stats.absorb(st);
            for i in 0..d {
                out.columns[(i, j)] = end.f[i];
                out.columns[(d + i, j)] = end.g[i];
            }
        }
        out.tau = tau_next;
        out.orthonormalize(system.basis())?;
    }
    out.tau = tau1;
    Ok((out, stats))
}
