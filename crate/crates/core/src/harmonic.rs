//! Closed-form harmonic Cauchy data and per-mode asymptotic blocks — the
//! exact reference data the rest of the library is tested against.
//!
//! On radial families with V = λ = 0 the boundary evolution decouples into
//! one 2×2 system per angular mode, and every solution is a combination of
//! the regular and singular harmonic branches:
//!
//! - n = 3, mode (l, m): u = r^l Y and u = r^{−l−1} Y, with Cauchy traces
//!   (t^l, l t^{l−1}) and (t^{−l−1}, −(l+1) t^{−l−2});
//! - n = 2, frequency m ≥ 1: u = r^m trig and u = r^{−m} trig, traces
//!   (t^m, m t^{m−1}) and (t^{−m}, −m t^{−m−1});
//! - n = 2, m = 0: the degenerate pair {1, log r}, traces (1, 0) and
//!   (log t, t⁻¹) — a center direction with no exponential splitting.
//!
//! In the rescaled variables (f̃, g̃) = (t^α f, t^{1+α} g) the branches grow
//! like t^ν with ν⁺ = α + l, ν⁻ = α − l − 1 (n = 3) and ν = α ± m (n = 2),
//! which are exactly the eigenvalues of the τ → −∞ limit blocks
//! [[α, 1], [μ, α + 2 − n]].

use crate::error::{Error, Result};
use crate::spectral::basis::sphere_index;
use nalgebra::DVector;

/// Which of the two harmonic branches of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// u regular at the origin: r^l (resp. r^m, or the constant for m = 0).
    Regular,
    /// u singular at the origin: r^{−l−1} (resp. r^{−m}, or log r).
    Singular,
}

/// Angular index of a mode on the reference boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularIndex {
    /// n = 2: Fourier frequency with parity; `sine` is meaningless at m = 0.
    Planar { m: usize, sine: bool },
    /// n = 3: real spherical harmonic (l, m), |m| ≤ l.
    Spherical { l: usize, m: i64 },
}

/// One harmonic mode: dimension + angular index + branch + scaling exponent.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicMode {
    pub angular: AngularIndex,
    pub branch: Branch,
    pub alpha: f64,
}

/// The rescaled growth exponent of a mode, with the planar m = 0 degeneracy
/// made explicit.
#[derive(Debug, Clone, Copy)]
pub struct ModeRate {
    /// ν: (f̃, g̃) ~ t^ν along this branch.
    pub nu: f64,
    /// n = 2, m = 0: both branches share ν = α and the singular one carries
    /// a log t factor — no exponential dichotomy separates them.
    pub log_mode: bool,
}

impl HarmonicMode {
    pub fn planar(m: usize, sine: bool, branch: Branch, alpha: f64) -> Self {
        HarmonicMode {
            angular: AngularIndex::Planar { m, sine },
            branch,
            alpha,
        }
    }

    pub fn spherical(l: usize, m: i64, branch: Branch, alpha: f64) -> Self {
        assert!(m.unsigned_abs() as usize <= l, "|m| must not exceed l");
        HarmonicMode {
            angular: AngularIndex::Spherical { l, m },
            branch,
            alpha,
        }
    }

    pub fn dimension(&self) -> usize {
        match self.angular {
            AngularIndex::Planar { .. } => 2,
            AngularIndex::Spherical { .. } => 3,
        }
    }

    /// Laplace–Beltrami eigenvalue μ of the mode's angular part.
    pub fn mu(&self) -> f64 {
        match self.angular {
            AngularIndex::Planar { m, .. } => (m * m) as f64,
            AngularIndex::Spherical { l, .. } => (l * (l + 1)) as f64,
        }
    }

    /// Index of the mode's angular function in the matching boundary basis.
    pub fn basis_index(&self) -> usize {
        match self.angular {
            AngularIndex::Planar { m, sine } => {
                if m == 0 {
                    0
                } else if sine {
                    2 * m
                } else {
                    2 * m - 1
                }
            }
            AngularIndex::Spherical { l, m } => sphere_index(l, m),
        }
    }
}

/// Exact rescaled growth exponent of the mode: ν⁺ = α + l, ν⁻ = α − l − 1
/// for n = 3; ν = α ± m for n = 2, with the m = 0 log pair flagged.
pub fn spatial_eigenvalue(mode: &HarmonicMode) -> ModeRate {
    let alpha = mode.alpha;
    match mode.angular {
        AngularIndex::Spherical { l, .. } => ModeRate {
            nu: match mode.branch {
                Branch::Regular => alpha + l as f64,
                Branch::Singular => alpha - l as f64 - 1.0,
            },
            log_mode: false,
        },
        AngularIndex::Planar { m, .. } => ModeRate {
            nu: match mode.branch {
                Branch::Regular => alpha + m as f64,
                Branch::Singular => alpha - m as f64,
            },
            log_mode: m == 0,
        },
    }
}

/// Radial factors (f, g) = (u, ∂_ν u) of the branch on the boundary of
/// radius t, multiplying the unit-normalized angular function.
pub fn exact_trace_values(mode: &HarmonicMode, t: f64) -> Result<(f64, f64)> {
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "harmonic traces need t > 0, got {t}"
        )));
    }
    Ok(match mode.angular {
        AngularIndex::Spherical { l, .. } => {
            let lf = l as f64;
            match mode.branch {
                Branch::Regular => (t.powf(lf), lf * t.powf(lf - 1.0)),
                Branch::Singular => (t.powf(-lf - 1.0), -(lf + 1.0) * t.powf(-lf - 2.0)),
            }
        }
        AngularIndex::Planar { m, .. } => {
            let mf = m as f64;
            match (mode.branch, m) {
                (Branch::Regular, 0) => (1.0, 0.0),
                (Branch::Singular, 0) => (t.ln(), 1.0 / t),
                (Branch::Regular, _) => (t.powf(mf), mf * t.powf(mf - 1.0)),
                (Branch::Singular, _) => (t.powf(-mf), -mf * t.powf(-mf - 1.0)),
            }
        }
    })
}

/// The trace as basis coefficient vectors (f, g) of the given dimension,
/// supported on the mode's angular index.
pub fn exact_trace(
    mode: &HarmonicMode,
    t: f64,
    dim: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (fv, gv) = exact_trace_values(mode, t)?;
    let idx = mode.basis_index();
    if idx >= dim {
        return Err(Error::InvalidInput(format!(
            "mode sits at basis index {idx}, beyond the truncation dimension {dim}"
        )));
    }
    let mut f = DVector::zeros(dim);
    let mut g = DVector::zeros(dim);
    f[idx] = fv;
    g[idx] = gv;
    Ok((f, g))
}

/// The τ → −∞ limit of the rescaled per-mode system: [[α, 1], [μ, α + 2 − n]].
pub fn asymptotic_block(n: usize, mu: f64, alpha: f64) -> [[f64; 2]; 2] {
    assert!(n == 2 || n == 3, "dimension must be 2 or 3");
    [[alpha, 1.0], [mu, alpha + 2.0 - n as f64]]
}

/// Eigenvalues of [`asymptotic_block`]: the asymptotic dichotomy rates
/// (ν⁺, ν⁻), plus the degeneracy flag for the planar constant mode.
pub fn asymptotic_rates(n: usize, mu: f64, alpha: f64) -> (f64, f64, bool) {
    assert!(n == 2 || n == 3);
    let shift = (n - 2) as f64;
    // Trace 2α + 2 − n, discriminant (n − 2)² + 4μ.
    let half_tr = alpha + (2.0 - n as f64) / 2.0;
    let disc = shift * shift + 4.0 * mu;
    let root = disc.sqrt() / 2.0;
    (half_tr + root, half_tr - root, disc < 1e-14)
}
