//! Small numerical utilities shared across modules: Gauss–Legendre rules,
//! least-squares line fits, and convergence-order estimation.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on (−1, 1),
/// by Newton iteration on the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Same rule mapped to (a, b).
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
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

/// Least-squares fit y ≈ slope·x + intercept; returns (slope, intercept, R²).
/// A constant y with zero residual reports R² = 1.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let e = yi - (slope * xi + intercept);
        ss_res += e * e;
        ss_tot += (yi - my) * (yi - my);
    }
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, intercept, r2)
}

/// Observed convergence order from errors on a dyadic sequence: fits
/// log|e_k| against log h_k. Entries with e below `floor` are dropped
/// (already at roundoff); returns None if fewer than two usable points.
pub fn observed_order(h: &[f64], e: &[f64], floor: f64) -> Option<f64> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (hi, ei) in h.iter().zip(e) {
        if ei.abs() > floor {
            lx.push(hi.ln());
            ly.push(ei.abs().ln());
        }
    }
    if lx.len() < 2 {
        return None;
    }
    Some(line_fit(&lx, &ly).0)
}
