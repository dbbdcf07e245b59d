//! The domain-defining level function ψ and its hypothesis checks.
//!
//! Ω = {ψ < 1} is the reference domain and Ω_t = {ψ < t²} the shrinking
//! family. Everything downstream assumes ψ has a nondegenerate minimum 0 at
//! the origin and no other critical points in Ω̄ — `validate_level_function`
//! checks exactly that on a polar/spherical sample grid and reports margins.

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sym_min_eigenvalue};

/// Spatial point, always length 3; for n = 2 the last component is 0.
pub type Point = [f64; 3];
/// Matrix, always 3×3; rows/columns beyond n are zero (Jacobians: see
/// module docs for the padded-diagonal convention).
pub type Mat3 = [[f64; 3]; 3];

/// Analytic catalog of level functions. Gradients and Hessians are exact —
/// no automatic or numerical differentiation anywhere in the geometry.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    /// ψ = |x|²: unit ball/disk with closed-form flow φ̃_τ = e^τ·id.
    Radial { n: usize },
    /// ψ = Σ (x_i/a_i)²: ellipse (n=2) or ellipsoid (n=3) with the given
    /// semi-axes.
    Quadric { n: usize, semi_axes: [f64; 3] },
    /// ψ = |x|² + ε Σ x_i⁴: smooth non-quadric star-shaped perturbation.
    QuarticPerturbed { n: usize, eps: f64 },
    /// n = 2 only: ψ = ⟨x, Qx⟩ + c₀x₁³ + c₁x₁²x₂ + c₂x₁x₂² + c₃x₂³.
    QuadraticCubic { q: [[f64; 2]; 2], cubic: [f64; 4] },
    /// Arbitrary analytic ψ through plain function pointers (test fixtures).
    Custom {
        n: usize,
        psi: fn(&Point) -> f64,
        grad: fn(&Point) -> Point,
        hess: fn(&Point) -> Mat3,
    },
}

/// The level function ψ together with the cutoff radius ρ_χ used by the
/// tangential correction of the generating field.
#[derive(Debug, Clone, Copy)]
pub struct LevelFunction {
    pub shape: Shape,
    /// Cutoff radius ρ_χ: the tangential correction is undamped for
    /// |x| ≤ ρ_χ/2 and switched off for |x| ≥ ρ_χ.
    pub rho_chi: f64,
}

impl LevelFunction {
    /// Unit ball/disk, ψ = |x|².
    pub fn ball(n: usize) -> Self {
        assert!(n == 2 || n == 3, "dimension must be 2 or 3");
        LevelFunction {
            shape: Shape::Radial { n },
            rho_chi: 0.25,
        }
    }

    /// Ellipse with semi-axes (a, b), ψ = x₁²/a² + x₂²/b².
    pub fn ellipse(a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b > 0.0);
        LevelFunction {
            shape: Shape::Quadric {
                n: 2,
                semi_axes: [a, b, 1.0],
            },
            rho_chi: 0.25 * a.min(b),
        }
    }

    /// Ellipsoid with semi-axes (a, b, c).
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        assert!(a > 0.0 && b > 0.0 && c > 0.0);
        LevelFunction {
            shape: Shape::Quadric {
                n: 3,
                semi_axes: [a, b, c],
            },
            rho_chi: 0.25 * a.min(b).min(c),
        }
    }

    /// ψ = |x|² + ε Σ x_i⁴ — star-shaped but not a quadric.
    pub fn quartic_perturbed(n: usize, eps: f64) -> Self {
        assert!(n == 2 || n == 3);
        let shape = Shape::QuarticPerturbed { n, eps };
        let rho = 0.25 * min_boundary_distance(&shape);
        LevelFunction {
            shape,
            rho_chi: rho,
        }
    }

    /// n = 2: positive-definite-intended quadratic plus cubic perturbation.
    /// Construction never rejects — degenerate choices are caught by
    /// [`validate_level_function`].
    pub fn quadratic_cubic(q: [[f64; 2]; 2], cubic: [f64; 4]) -> Self {
        let shape = Shape::QuadraticCubic { q, cubic };
        let rho = 0.25 * min_boundary_distance(&shape);
        LevelFunction {
            shape,
            rho_chi: rho,
        }
    }

    /// Arbitrary analytic ψ; the caller supplies the cutoff radius.
    pub fn custom(
        n: usize,
        psi: fn(&Point) -> f64,
        grad: fn(&Point) -> Point,
        hess: fn(&Point) -> Mat3,
        rho_chi: f64,
    ) -> Self {
        assert!(n == 2 || n == 3);
        LevelFunction {
            shape: Shape::Custom { n, psi, grad, hess },
            rho_chi,
        }
    }

    pub fn dimension(&self) -> usize {
        match self.shape {
            Shape::Radial { n }
            | Shape::Quadric { n, .. }
            | Shape::QuarticPerturbed { n, .. }
            | Shape::Custom { n, .. } => n,
            Shape::QuadraticCubic { .. } => 2,
        }
    }

    /// True exactly for ψ = |x|², which unlocks every closed-form fast path.
    pub fn is_radial(&self) -> bool {
        matches!(self.shape, Shape::Radial { .. })
    }

    pub fn psi(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Radial { .. } => dot(x, x),
            Shape::Quadric { n, semi_axes } => {
                let mut s = 0.0;
                for i in 0..*n {
                    s += (x[i] / semi_axes[i]) * (x[i] / semi_axes[i]);
                }
                s
            }
            Shape::QuarticPerturbed { n, eps } => {
                let mut s = 0.0;
                for xi in x.iter().take(*n) {
                    s += xi * xi + eps * xi * xi * xi * xi;
                }
                s
            }
            Shape::QuadraticCubic { q, cubic } => {
                let (u, v) = (x[0], x[1]);
                u * (q[0][0] * u + q[0][1] * v)
                    + v * (q[1][0] * u + q[1][1] * v)
                    + cubic[0] * u * u * u
                    + cubic[1] * u * u * v
                    + cubic[2] * u * v * v
                    + cubic[3] * v * v * v
            }
            Shape::Custom { psi, .. } => psi(x),
        }
    }

    pub fn grad(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Radial { n } => {
                let mut g = [0.0; 3];
                for i in 0..*n {
                    g[i] = 2.0 * x[i];
                }
                g
            }
            Shape::Quadric { n, semi_axes } => {
                let mut g = [0.0; 3];
                for i in 0..*n {
                    g[i] = 2.0 * x[i] / (semi_axes[i] * semi_axes[i]);
                }
                g
            }
            Shape::QuarticPerturbed { n, eps } => {
                let mut g = [0.0; 3];
                for i in 0..*n {
                    g[i] = 2.0 * x[i] + 4.0 * eps * x[i] * x[i] * x[i];
                }
                g
            }
            Shape::QuadraticCubic { q, cubic } => {
                let (u, v) = (x[0], x[1]);
                [
                    2.0 * (q[0][0] * u + q[0][1] * v)
                        + 3.0 * cubic[0] * u * u
                        + 2.0 * cubic[1] * u * v
                        + cubic[2] * v * v,
                    2.0 * (q[1][0] * u + q[1][1] * v)
                        + cubic[1] * u * u
                        + 2.0 * cubic[2] * u * v
                        + 3.0 * cubic[3] * v * v,
                    0.0,
                ]
            }
            Shape::Custom { grad, .. } => grad(x),
        }
    }

    #[allow(clippy::needless_range_loop)] // diagonal writes on the padded matrix
    pub fn hess(&self, x: &Point) -> Mat3 {
        match &self.shape {
            Shape::Radial { n } => {
                let mut h = [[0.0; 3]; 3];
                for i in 0..*n {
                    h[i][i] = 2.0;
                }
                h
            }
            Shape::Quadric { n, semi_axes } => {
                let mut h = [[0.0; 3]; 3];
                for i in 0..*n {
                    h[i][i] = 2.0 / (semi_axes[i] * semi_axes[i]);
                }
                h
            }
            Shape::QuarticPerturbed { n, eps } => {
                let mut h = [[0.0; 3]; 3];
                for i in 0..*n {
                    h[i][i] = 2.0 + 12.0 * eps * x[i] * x[i];
                }
                h
            }
            Shape::QuadraticCubic { q, cubic } => {
                let (u, v) = (x[0], x[1]);
                let mut h = [[0.0; 3]; 3];
                h[0][0] = 2.0 * q[0][0] + 6.0 * cubic[0] * u + 2.0 * cubic[1] * v;
                h[0][1] = q[0][1] + q[1][0] + 2.0 * cubic[1] * u + 2.0 * cubic[2] * v;
                h[1][0] = h[0][1];
                h[1][1] = 2.0 * q[1][1] + 2.0 * cubic[2] * u + 6.0 * cubic[3] * v;
                h
            }
            Shape::Custom { hess, .. } => hess(x),
        }
    }

    /// A = ∇²ψ(0), the matrix driving all t → 0 asymptotics.
    pub fn hessian_origin(&self) -> Mat3 {
        self.hess(&[0.0; 3])
    }
}

/// First radius r > 0 with ψ(r·dir) = 1 along the unit direction `dir`,
/// found by coarse scan + bisection. `None` if no crossing in (0, 8].
pub fn boundary_radius(level: &LevelFunction, dir: &Point) -> Option<f64> {
    let psi_at = |r: f64| {
        let x = [r * dir[0], r * dir[1], r * dir[2]];
        level.psi(&x) - 1.0
    };
    let mut lo = 0.0;
    let mut hi = None;
    let mut r = 0.05;
    while r <= 8.0 + 1e-12 {
        if psi_at(r) >= 0.0 {
            hi = Some(r);
            break;
        }
        lo = r;
        r += 0.05;
    }
    let mut hi = hi?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if psi_at(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Smallest boundary distance over a direction scan — used to size ρ_χ
/// conservatively for non-quadric shapes.
fn min_boundary_distance(shape: &Shape) -> f64 {
    let probe = LevelFunction {
        shape: *shape,
        rho_chi: 1.0,
    };
    let n = probe.dimension();
    let mut best = f64::INFINITY;
    if n == 2 {
        for k in 0..128 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
            if let Some(r) = boundary_radius(&probe, &[th.cos(), th.sin(), 0.0]) {
                best = best.min(r);
            }
        }
    } else {
        for i in 0..16 {
            let ct = -1.0 + 2.0 * (i as f64 + 0.5) / 16.0;
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..16 {
                let ph = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                let dir = [st * ph.cos(), st * ph.sin(), ct];
                if let Some(r) = boundary_radius(&probe, &dir) {
                    best = best.min(r);
                }
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0 // no boundary found — validation will reject this ψ anyway
    }
}

/// One hypothesis check with its worst-case margin.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    /// Worst-case margin; positive means safely inside the hypothesis.
    pub margin: f64,
    pub detail: String,
}

/// Outcome of `validate_level_function`: all hypothesis items with margins.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub items: Vec<CheckItem>,
    pub passed: bool,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for item in &self.items {
            writeln!(
                f,
                "[{}] {:<34} margin {:+.3e}  {}",
                if item.passed { "pass" } else { "FAIL" },
                item.name,
                item.margin,
                item.detail
            )?;
        }
        Ok(())
    }
}

/// Check the level-function hypotheses on a polar/spherical product grid
/// (`n_angular` directions × `n_radial` radii per direction, covering Ω̄
/// minus a small ball at the origin).
///
/// A singular Hessian at 0 or a detected interior critical point is a hard
/// rejection (`Error::Validation`); softer failures (properness proxy, ray
/// monotonicity) are reported in the returned report with `passed = false`.
pub fn validate_level_function(
    level: &LevelFunction,
    n_angular: usize,
    n_radial: usize,
) -> Result<ValidationReport> {
    let n = level.dimension();
    let mut items = Vec::new();

    // Nondegenerate minimum at the origin.
    let origin = [0.0; 3];
    let psi0 = level.psi(&origin).abs();
    let grad0 = norm(&level.grad(&origin));
    let origin_ok = psi0 <= 1e-12 && grad0 <= 1e-12;
    items.push(CheckItem {
        name: "minimum at origin",
        passed: origin_ok,
        margin: 1e-12 - psi0.max(grad0),
        detail: format!("|psi(0)| = {psi0:.3e}, |grad(0)| = {grad0:.3e}"),
    });
    if !origin_ok {
        return Err(Error::Validation(format!(
            "psi has no critical zero at the origin (psi(0) = {psi0:.3e}, |grad| = {grad0:.3e})"
        )));
    }

    let min_eig = sym_min_eigenvalue(&level.hessian_origin(), n);
    let hess_ok = min_eig > 1e-10;
    items.push(CheckItem {
        name: "Hessian at 0 positive definite",
        passed: hess_ok,
        margin: min_eig,
        detail: format!("min eigenvalue {min_eig:.6e}"),
    });
    if !hess_ok {
        return Err(Error::Validation(format!(
            "Hessian of psi at the origin is not positive definite (min eigenvalue {min_eig:.3e})"
        )));
    }

    // Build the direction set.
    let mut dirs: Vec<Point> = Vec::new();
    if n == 2 {
        for k in 0..n_angular {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_angular as f64;
            dirs.push([th.cos(), th.sin(), 0.0]);
        }
    } else {
        let na = (n_angular as f64).sqrt().ceil() as usize;
        for i in 0..na {
            let ct = -1.0 + 2.0 * (i as f64 + 0.5) / na as f64;
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..na {
                let ph = 2.0 * std::f64::consts::PI * k as f64 / na as f64;
                dirs.push([st * ph.cos(), st * ph.sin(), ct]);
            }
        }
    }

    // Sweep the grid: gradient lower bound, properness proxy, monotonicity.
    let mut min_grad = f64::INFINITY;
    let mut min_grad_at = [0.0; 3];
    let mut min_properness = f64::INFINITY;
    let mut monotone = true;
    let mut boundary_found = true;
    for dir in &dirs {
        let rad = match boundary_radius(level, dir) {
            Some(r) => r,
            None => {
                boundary_found = false;
                continue;
            }
        };
        let mut prev_psi = 0.0;
        for j in 1..=n_radial {
            let r = rad * j as f64 / n_radial as f64;
            let x = [r * dir[0], r * dir[1], r * dir[2]];
            let psi = level.psi(&x);
            let gn = norm(&level.grad(&x));
            if r >= 0.05 * rad && gn < min_grad {
                min_grad = gn;
                min_grad_at = x;
            }
            min_properness = min_properness.min(psi / (r * r));
            if psi <= prev_psi {
                monotone = false;
            }
            prev_psi = psi;
        }
    }

    let grad_ok = boundary_found && min_grad > 1e-8;
    items.push(CheckItem {
        name: "no interior critical points",
        passed: grad_ok,
        margin: min_grad,
        detail: if boundary_found {
            format!(
                "min |grad psi| = {min_grad:.3e} at ({:.3}, {:.3}, {:.3})",
                min_grad_at[0], min_grad_at[1], min_grad_at[2]
            )
        } else {
            "boundary not reached along some direction".into()
        },
    });
    if !grad_ok {
        return Err(Error::Validation(format!(
            "interior critical point detected: min |grad psi| = {min_grad:.3e} on the sample grid"
        )));
    }

    let proper_ok = min_properness > 1e-8;
    items.push(CheckItem {
        name: "properness proxy psi >= c|x|^2",
        passed: proper_ok,
        margin: min_properness,
        detail: format!("min psi/|x|^2 = {min_properness:.6e}"),
    });

    items.push(CheckItem {
        name: "ray monotonicity (star-shaped levels)",
        passed: monotone,
        margin: if monotone { 1.0 } else { -1.0 },
        detail: if monotone {
            "psi strictly increasing along every sampled ray".into()
        } else {
            "psi non-monotone along a sampled ray".into()
        },
    });

    let passed = items.iter().all(|i| i.passed);
    Ok(ValidationReport { items, passed })
}
