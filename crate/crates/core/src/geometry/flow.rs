//! The autonomous generating field X̃ and the domain flow.
//!
//! X̃ is built so that ∇ψ·X̃ = 2ψ everywhere, which makes its time-τ flow
//! satisfy ψ(φ̃_τ(x)) = e^{2τ}ψ(x): level sets map onto level sets, and
//! φ_t = φ̃_{log t} carries ∂Ω onto ∂Ω_t. The purely normal choice
//! (2ψ/|∇ψ|²)∇ψ fails to be differentiable at the origin for non-spherical
//! ψ; adding the cutoff-damped tangential part χ(|x|)·(x − proj_∇ψ x)
//! repairs it: near the origin the combined field is x + O(|x|²), so
//! X̃(0) = 0 and ∇X̃(0) = I.
//!
//! All integration runs in τ = log t, where the field is autonomous and
//! smooth; the t-form field t⁻¹X̃ is never integrated directly.

use crate::error::{Error, Result};
use crate::geometry::level::{LevelFunction, Mat3, Point};
use crate::geometry::{dot, identity3, norm};
use crate::ode::Dopri5;
use nalgebra::DVector;

/// Whether the tangential correction (and with it differentiability at the
/// origin) is enabled. `WithCorrection` is the default everywhere; the
/// normal-only field exists to demonstrate *why* the correction is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentialMode {
    NormalOnly,
    WithCorrection,
}

/// The generating vector field X̃ of the domain flow.
#[derive(Debug, Clone, Copy)]
pub struct FlowField<'a> {
    pub level: &'a LevelFunction,
    pub mode: TangentialMode,
}

impl<'a> FlowField<'a> {
    pub fn new(level: &'a LevelFunction) -> Self {
        FlowField {
            level,
            mode: TangentialMode::WithCorrection,
        }
    }

    pub fn normal_only(level: &'a LevelFunction) -> Self {
        FlowField {
            level,
            mode: TangentialMode::NormalOnly,
        }
    }

    /// Smooth cutoff χ(r): 1 for r ≤ ρ/2, 0 for r ≥ ρ, and the classical
    /// exp(−1/s) bridge in between. Returns (χ, χ′).
    fn cutoff(&self, r: f64) -> (f64, f64) {
        let rho = self.level.rho_chi;
        if r <= 0.5 * rho {
            (1.0, 0.0)
        } else if r >= rho {
            (0.0, 0.0)
        } else {
            // s runs 1 → 0 as r runs ρ/2 → ρ.
            let s = (rho - r) / (0.5 * rho);
            let q = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
            let qp = |u: f64| {
                if u > 0.0 {
                    (-1.0 / u).exp() / (u * u)
                } else {
                    0.0
                }
            };
            let (a, b) = (q(s), q(1.0 - s));
            let h = a / (a + b);
            let hp = (qp(s) * b + a * qp(1.0 - s)) / ((a + b) * (a + b));
            (h, hp * (-2.0 / rho))
        }
    }

    /// X̃(x). Written as [(2ψ − χ⟨x,∇ψ⟩)/|∇ψ|²]∇ψ + χx, which groups the
    /// near-origin cancellation (2ψ ≈ ⟨x,∇ψ⟩ for almost-quadratic ψ) into
    /// one small numerator instead of a difference of O(|x|) vectors.
    pub fn x_tilde(&self, x: &Point) -> Point {
        let r = norm(x);
        if r == 0.0 {
            return [0.0; 3];
        }
        let psi = self.level.psi(x);
        let g = self.level.grad(x);
        let g2 = dot(&g, &g);
        if g2 == 0.0 {
            return [0.0; 3];
        }
        let chi = match self.mode {
            TangentialMode::NormalOnly => 0.0,
            TangentialMode::WithCorrection => self.cutoff(r).0,
        };
        let w = (2.0 * psi - chi * dot(x, &g)) / g2;
        let mut out = [0.0; 3];
        let n = self.level.dimension();
        for i in 0..n {
            out[i] = w * g[i] + chi * x[i];
        }
        out
    }

    /// ∇X̃(x), analytically. Rows/columns beyond the working dimension stay
    /// zero (the Jacobian padding convention supplies the diagonal 1).
    pub fn grad_x_tilde(&self, x: &Point) -> Mat3 {
        let n = self.level.dimension();
        let r = norm(x);
        let mut out = [[0.0; 3]; 3];
        if r == 0.0 {
            // Limit value: identity with the correction, and the correction
            // is what makes the limit exist at all.
            for (i, row) in out.iter_mut().enumerate().take(n) {
                row[i] = 1.0;
            }
            return out;
        }
        let psi = self.level.psi(x);
        let g = self.level.grad(x);
        let hs = self.level.hess(x);
        let g2 = dot(&g, &g);
        let s = dot(x, &g);
        let (chi, chi_p) = match self.mode {
            TangentialMode::NormalOnly => (0.0, 0.0),
            TangentialMode::WithCorrection => self.cutoff(r),
        };
        // Hs·∇ψ and Hs·x.
        let mut hg = [0.0; 3];
        let mut hx = [0.0; 3];
        for i in 0..n {
            for k in 0..n {
                hg[i] += hs[i][k] * g[k];
                hx[i] += hs[i][k] * x[k];
            }
        }
        let w = (2.0 * psi - chi * s) / g2;
        for j in 0..n {
            let dnum = 2.0 * g[j] - chi_p * (x[j] / r) * s - chi * (g[j] + hx[j]);
            let dw = dnum / g2 - w * 2.0 * hg[j] / g2;
            for i in 0..n {
                out[i][j] = dw * g[i] + w * hs[i][j] + chi_p * (x[j] / r) * x[i];
                if i == j {
                    out[i][j] += chi;
                }
            }
        }
        out
    }
}

/// φ̃_τ(x): flow the point for log-time τ (either sign). Radial ψ short-cuts
/// to the exact e^τ·x.
pub fn flow_map(field: &FlowField, x: &Point, tau: f64, solver: &Dopri5) -> Result<Point> {
    if field.level.is_radial() {
        let s = tau.exp();
        return Ok([s * x[0], s * x[1], s * x[2]]);
    }
    if tau == 0.0 {
        return Ok(*x);
    }
    let y0 = DVector::from_vec(vec![x[0], x[1], x[2]]);
    let rhs = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
        let p = [y[0], y[1], y[2]];
        let v = field.x_tilde(&p);
        dy[0] = v[0];
        dy[1] = v[1];
        dy[2] = v[2];
    };
    let (y1, _) = solver.integrate(rhs, 0.0, tau, &y0)?;
    Ok([y1[0], y1[1], y1[2]])
}

/// φ̃_τ(x) together with Dφ̃_τ(x) from the variational equation
/// dJ/dτ = ∇X̃(φ)·J. The returned Jacobian carries the n=2 padding (third
/// diagonal entry 1).
#[allow(clippy::needless_range_loop)] // diagonal write j[k][k] on the padded matrix
pub fn flow_with_jacobian(
    field: &FlowField,
    x: &Point,
    tau: f64,
    solver: &Dopri5,
) -> Result<(Point, Mat3)> {
    if field.level.is_radial() {
        let s = tau.exp();
        let n = field.level.dimension();
        let mut j = identity3();
        for k in 0..n {
            j[k][k] = s;
        }
        return Ok(([s * x[0], s * x[1], s * x[2]], j));
    }
    if tau == 0.0 {
        return Ok((*x, identity3()));
    }
    let mut y0v = vec![x[0], x[1], x[2]];
    let id = identity3();
    for row in &id {
        y0v.extend_from_slice(row);
    }
    let y0 = DVector::from_vec(y0v);
    let rhs = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
        let p = [y[0], y[1], y[2]];
        let v = field.x_tilde(&p);
        let gx = field.grad_x_tilde(&p);
        dy[0] = v[0];
        dy[1] = v[1];
        dy[2] = v[2];
        // dJ = ∇X̃·J, row-major.
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += gx[i][k] * y[3 + 3 * k + j];
                }
                dy[3 + 3 * i + j] = acc;
            }
        }
    };
    let (y1, _) = solver.integrate(rhs, 0.0, tau, &y0)?;
    let mut j = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            j[r][c] = y1[3 + 3 * r + c];
        }
    }
    Ok(([y1[0], y1[1], y1[2]], j))
}

/// Check that x lies far enough from the cutoff's outer edge that the field
/// equals the undamped formula — used by tests.
#[allow(dead_code)]
pub(crate) fn inside_cutoff_core(level: &LevelFunction, x: &Point) -> bool {
    norm(x) <= 0.5 * level.rho_chi
}

/// Shared helper: τ for a given t (guards the log).
pub fn log_time(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "time t must be positive, got {t}"
        )));
    }
    Ok(t.ln())
}
