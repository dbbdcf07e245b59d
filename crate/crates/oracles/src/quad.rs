//! Quadrature oracles: Gauss–Legendre rules and a direct 2-D ring integral.
//!
//! The ring integral deliberately bypasses any level-set machinery: the region
//! {t_a² < x²/a² + y²/b² < t_b²} is mapped by x = a·r·cosθ, y = b·r·sinθ
//! (area element a·b·r dr dθ) and integrated by a tensor rule. This is the
//! independent route against which coarea-based volume integrals are judged.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on (−1, 1).
///
/// Newton iteration on the Legendre recurrence; accurate to machine precision
/// for the rule sizes used here (n ≤ 256).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root (descending order).
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0; // P_0
    let mut p1 = x; // P_1
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// ∫ w(x) dx over the elliptic ring {t_a² < x₁²/a² + x₂²/b² < t_b²},
/// by an (n_r × n_θ) tensor rule in stretched polar coordinates.
///
/// The circle is the a = b = 1 case. Accuracy for smooth w is spectral in n_θ
/// and Gauss-order in n_r; the defaults in the tests (64 × 256) deliver well
/// below 1e−10 relative error for the integrands involved.
pub fn elliptic_ring_integral(
    a: f64,
    b: f64,
    t_a: f64,
    t_b: f64,
    n_r: usize,
    n_theta: usize,
    mut w: impl FnMut(f64, f64) -> f64,
) -> f64 {
    assert!(0.0 < t_a && t_a < t_b);
    let (rn, rw) = gauss_legendre(n_r);
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut total = 0.0;
    for (ri, wi) in rn.iter().zip(&rw) {
        // Map (−1,1) to (t_a, t_b).
        let r = 0.5 * (t_b - t_a) * ri + 0.5 * (t_a + t_b);
        let jac_r = 0.5 * (t_b - t_a);
        let mut ring = 0.0;
        for j in 0..n_theta {
            let th = dtheta * j as f64;
            let x = a * r * th.cos();
            let y = b * r * th.sin();
            ring += w(x, y);
        }
        total += wi * jac_r * ring * dtheta * a * b * r;
    }
    total
}
