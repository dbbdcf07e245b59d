//! Least-squares line fit with goodness measure, for decay/growth-order
//! analysis in tests.

/// Fit y ≈ slope·x + intercept; returns (slope, intercept, R²).
///
/// R² is 1 − SS_res/SS_tot; a constant y (SS_tot = 0) with zero residual
/// reports R² = 1.
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
