//! Central finite differences for derivative cross-checks.
//!
//! Used by property tests to confirm analytically-coded gradients, Hessians
//! and flow-field Jacobians from the outside. Step sizes default to h ≈ 1e−5
//! (first derivatives) and 1e−4 (second), balancing truncation against
//! roundoff for O(1) quantities.

/// Five-point central first derivative of a scalar function of one variable.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Central-difference gradient of f: Rⁿ → R at `x` (first `n` components).
pub fn central_gradient(f: impl Fn(&[f64; 3]) -> f64, x: &[f64; 3], n: usize, h: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for i in 0..n {
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of a vector field v: Rⁿ → Rⁿ at `x`;
/// entry [i][j] = ∂v_i/∂x_j.
pub fn central_jacobian(
    v: impl Fn(&[f64; 3]) -> [f64; 3],
    x: &[f64; 3],
    n: usize,
    h: f64,
) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for j in 0..n {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        let vp = v(&xp);
        let vm = v(&xm);
        for i in 0..n {
            jac[i][j] = (vp[i] - vm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Central-difference Hessian of f: Rⁿ → R at `x`.
pub fn central_hessian(
    f: impl Fn(&[f64; 3]) -> f64 + Copy,
    x: &[f64; 3],
    n: usize,
    h: f64,
) -> [[f64; 3]; 3] {
    let mut hess = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                let mut xp = *x;
                let mut xm = *x;
                xp[i] += h;
                xm[i] -= h;
                hess[i][i] = (f(&xp) - 2.0 * f(x) + f(&xm)) / (h * h);
            } else {
                let mut xpp = *x;
                let mut xpm = *x;
                let mut xmp = *x;
                let mut xmm = *x;
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                hess[i][j] = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
            }
        }
    }
    hess
}
