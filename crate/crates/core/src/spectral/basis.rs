//! Orthonormal Laplace–Beltrami eigenbases on the reference boundary.
//!
//! Circle (n = 2): index 0 is the constant 1/√(2π); indices 2m−1 and 2m are
//! cos(mθ)/√π and sin(mθ)/√π with eigenvalue μ = m². Quadrature: uniform,
//! exact for the band limit.
//!
//! Sphere (n = 3): real spherical harmonics Y_{l,m} = P̄_l^{|m|}(cos θ)·Φ_m(φ)
//! indexed k = l² + l + m with eigenvalue μ = l(l+1), where P̄ are the
//! L²-normalized associated Legendre functions (no Condon–Shortley phase) and
//! Φ₀ = 1/√(2π), Φ_m = cos(mφ)/√π, Φ_{−m} = sin(mφ)/√π. Quadrature:
//! Gauss–Legendre in cos θ × uniform in φ, exact for all products of basis
//! functions and for the Dirichlet-form integrands.

use crate::numeric::gauss_legendre;
use nalgebra::DVector;
use std::f64::consts::PI;

/// Which boundary the basis lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Fourier modes up to frequency `n_max` on the unit circle.
    Circle { n_max: usize },
    /// Real spherical harmonics up to degree `l_max` on the unit sphere.
    Sphere { l_max: usize },
}

/// A fixed eigenbasis with its quadrature rule and precomputed value tables.
#[derive(Debug, Clone)]
pub struct BoundaryBasis {
    kind: BasisKind,
    /// Laplace–Beltrami eigenvalue μ_k per basis index.
    mu: Vec<f64>,
    /// values[k][q] = B_k at node q.
    values: Vec<Vec<f64>>,
    /// Circle only: dvalues[k][q] = ∂_θ B_k at node q.
    dvalues: Vec<Vec<f64>>,
    /// Parameter-measure quadrature weights per node.
    weights: Vec<f64>,
    /// Circle only: θ coordinates of the nodes.
    thetas: Vec<f64>,
    /// Sphere only: Gauss–Legendre nodes in x = cos θ (cache node order:
    /// polar outer, azimuth inner).
    polar_x: Vec<f64>,
    /// Sphere only: azimuthal node count.
    q_phi: usize,
}

impl BoundaryBasis {
    /// Fourier basis on the circle with frequencies 0..=n_max
    /// (dimension 2·n_max + 1).
    pub fn circle(n_max: usize) -> Self {
        let q = (4 * n_max).max(16);
        let thetas: Vec<f64> = (0..q).map(|k| 2.0 * PI * k as f64 / q as f64).collect();
        let weights = vec![2.0 * PI / q as f64; q];
        let dim = 2 * n_max + 1;
        let mut mu = Vec::with_capacity(dim);
        let mut values = Vec::with_capacity(dim);
        let mut dvalues = Vec::with_capacity(dim);

        mu.push(0.0);
        values.push(thetas.iter().map(|_| 1.0 / (2.0 * PI).sqrt()).collect());
        dvalues.push(vec![0.0; q]);
        for m in 1..=n_max {
            let mf = m as f64;
            let s = 1.0 / PI.sqrt();
            mu.push(mf * mf);
            values.push(thetas.iter().map(|&th| s * (mf * th).cos()).collect());
            dvalues.push(thetas.iter().map(|&th| -s * mf * (mf * th).sin()).collect());
            mu.push(mf * mf);
            values.push(thetas.iter().map(|&th| s * (mf * th).sin()).collect());
            dvalues.push(thetas.iter().map(|&th| s * mf * (mf * th).cos()).collect());
        }

        BoundaryBasis {
            kind: BasisKind::Circle { n_max },
            mu,
            values,
            dvalues,
            weights,
            thetas,
            polar_x: Vec::new(),
            q_phi: 0,
        }
    }

    /// Real spherical harmonics up to degree l_max (dimension (l_max + 1)²).
    pub fn sphere(l_max: usize) -> Self {
        let q_theta = 2 * (l_max + 1);
        let q_phi = 4 * l_max + 4;
        let (polar_x, polar_w) = gauss_legendre(q_theta);
        let dim = (l_max + 1) * (l_max + 1);

        let mut mu = vec![0.0; dim];
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                mu[sphere_index(l, m)] = (l * (l + 1)) as f64;
            }
        }

        let node_count = q_theta * q_phi;
        let mut values = vec![vec![0.0; node_count]; dim];
        let mut weights = vec![0.0; node_count];
        for (i, (&x, &wx)) in polar_x.iter().zip(&polar_w).enumerate() {
            let plm = normalized_plm_table(l_max, x);
            for j in 0..q_phi {
                let phi = 2.0 * PI * j as f64 / q_phi as f64;
                let qn = i * q_phi + j;
                weights[qn] = wx * 2.0 * PI / q_phi as f64;
                for l in 0..=l_max {
                    for m in -(l as i64)..=(l as i64) {
                        values[sphere_index(l, m)][qn] = plm[m.unsigned_abs() as usize]
                            [l - m.unsigned_abs() as usize]
                            * azimuthal(m, phi);
                    }
                }
            }
        }

        BoundaryBasis {
            kind: BasisKind::Sphere { l_max },
            mu,
            values,
            dvalues: Vec::new(),
            weights,
            thetas: Vec::new(),
            polar_x,
            q_phi,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, BasisKind::Sphere { .. })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// μ_k: the Laplace–Beltrami eigenvalue of basis function k.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.mu[k]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.mu
    }

    /// Quadrature weights of the parameter measure at the nodes.
    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    /// θ coordinates of the circle nodes.
    pub fn thetas(&self) -> &[f64] {
        assert!(!self.is_sphere(), "thetas are a circle-basis concept");
        &self.thetas
    }

    /// The `angular` argument that makes [`DomainFamilyCache::build`] produce
    /// exactly this basis's node set (same points, same order).
    ///
    /// [`DomainFamilyCache::build`]: crate::geometry::DomainFamilyCache::build
    pub fn cache_angular(&self) -> usize {
        match self.kind {
            BasisKind::Circle { .. } => self.node_count(),
            BasisKind::Sphere { l_max } => 2 * (l_max + 1),
        }
    }

    /// Nodal values of the coefficient vector.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim());
        let mut out = vec![0.0; self.node_count()];
        for (k, row) in self.values.iter().enumerate() {
            let c = coeffs[k];
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(row) {
                    *o += c * v;
                }
            }
        }
        out
    }

    /// Nodal values of ∂_θ of the coefficient vector (circle only).
    pub fn synthesize_deriv(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        assert!(
            !self.is_sphere(),
            "parameter derivatives are only defined for the circle basis"
        );
        assert_eq!(coeffs.len(), self.dim());
        let mut out = vec![0.0; self.node_count()];
        for (k, row) in self.dvalues.iter().enumerate() {
            let c = coeffs[k];
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(row) {
                    *o += c * v;
                }
            }
        }
        out
    }

    /// Evaluate the coefficient vector at an arbitrary boundary direction
    /// (the angular part of `dir`; its length is ignored). Matches
    /// [`Self::synthesize`] at the quadrature nodes and extends the series
    /// off the node set, which is what field reconstruction needs after a
    /// backward flow lands between nodes.
    pub fn synthesize_at(&self, coeffs: &DVector<f64>, dir: &[f64; 3]) -> f64 {
        assert_eq!(coeffs.len(), self.dim());
        match self.kind {
            BasisKind::Circle { n_max } => {
                let th = dir[1].atan2(dir[0]);
                let mut acc = coeffs[0] / (2.0 * PI).sqrt();
                let s = 1.0 / PI.sqrt();
                for m in 1..=n_max {
                    let mth = m as f64 * th;
                    acc += s * (coeffs[2 * m - 1] * mth.cos() + coeffs[2 * m] * mth.sin());
                }
                acc
            }
            BasisKind::Sphere { l_max } => {
                let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
                assert!(r > 0.0, "cannot take the direction of the zero vector");
                let x = (dir[2] / r).clamp(-1.0, 1.0);
                let phi = dir[1].atan2(dir[0]);
                let plm = normalized_plm_table(l_max, x);
                let mut acc = 0.0;
                for l in 0..=l_max {
                    for m in -(l as i64)..=(l as i64) {
                        let c = coeffs[sphere_index(l, m)];
                        if c != 0.0 {
                            let ma = m.unsigned_abs() as usize;
                            acc += c * plm[ma][l - ma] * azimuthal(m, phi);
                        }
                    }
                }
                acc
            }
        }
    }

    /// Project nodal values onto the basis (exact for band-limited data).
    pub fn analyze(&self, nodal: &[f64]) -> DVector<f64> {
        assert_eq!(nodal.len(), self.node_count());
        let mut out = DVector::zeros(self.dim());
        for (k, row) in self.values.iter().enumerate() {
            let mut acc = 0.0;
            for ((v, w), b) in nodal.iter().zip(&self.weights).zip(row) {
                acc += v * w * b;
            }
            out[k] = acc;
        }
        out
    }

    /// Relative round-trip residual of nodal data: ‖P v − v‖ / ‖v‖ in the
    /// weighted nodal norm, where P = synthesize ∘ analyze. Zero (to
    /// roundoff) iff the data is band-limited to this basis; use it to flag
    /// aliasing before trusting coefficients.
    pub fn aliasing_residual(&self, nodal: &[f64]) -> f64 {
        let back = self.synthesize(&self.analyze(nodal));
        let mut num = 0.0;
        let mut den = 0.0;
        for ((v, b), w) in nodal.iter().zip(&back).zip(&self.weights) {
            num += w * (v - b) * (v - b);
            den += w * v * v;
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Fractional Sobolev norm ‖f‖_{H^s} = (Σ (1 + μ_k)^s c_k²)^{1/2}.
    pub fn sobolev_norm(&self, coeffs: &DVector<f64>, s: f64) -> f64 {
        assert_eq!(coeffs.len(), self.dim());
        let mut acc = 0.0;
        for (k, &mk) in self.mu.iter().enumerate() {
            acc += (1.0 + mk).powf(s) * coeffs[k] * coeffs[k];
        }
        acc.sqrt()
    }

    /// Dirichlet form ∫ |∇_S B_k|² against the quadrature rule — equals μ_k
    /// exactly up to roundoff, and is computed from independent derivative
    /// formulas, so it cross-checks tables, quadrature and eigenvalues at
    /// once.
    pub fn dirichlet_form(&self, k: usize) -> f64 {
        match self.kind {
            BasisKind::Circle { .. } => {
                let mut acc = 0.0;
                for (d, w) in self.dvalues[k].iter().zip(&self.weights) {
                    acc += w * d * d;
                }
                acc
            }
            BasisKind::Sphere { l_max } => {
                let (l, m) = sphere_degree_order(k);
                let ma = m.unsigned_abs() as usize;
                let mut acc = 0.0;
                for (i, &x) in self.polar_x.iter().enumerate() {
                    let sin_t = (1.0 - x * x).sqrt();
                    let plm = normalized_plm_table(l_max, x);
                    let p = plm[ma][l - ma];
                    let dp = normalized_plm_dtheta(l, ma, x, &plm);
                    for j in 0..self.q_phi {
                        let phi = 2.0 * PI * j as f64 / self.q_phi as f64;
                        let qn = i * self.q_phi + j;
                        let az = azimuthal(m, phi);
                        let daz = azimuthal_dphi(m, phi);
                        let g2 = (dp * az).powi(2) + (p * daz / sin_t).powi(2);
                        acc += self.weights[qn] * g2;
                    }
                }
                acc
            }
        }
    }
}

/// Flat index of the real spherical harmonic (l, m): k = l² + l + m.
pub fn sphere_index(l: usize, m: i64) -> usize {
    ((l * l) as i64 + l as i64 + m) as usize
}

/// Inverse of [`sphere_index`].
pub fn sphere_degree_order(k: usize) -> (usize, i64) {
    let l = (k as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= k { l + 1 } else { l };
    (l, k as i64 - (l * l + l) as i64)
}

fn azimuthal(m: i64, phi: f64) -> f64 {
    use std::cmp::Ordering;
    let mf = m.unsigned_abs() as f64;
    match m.cmp(&0) {
        Ordering::Equal => 1.0 / (2.0 * PI).sqrt(),
        Ordering::Greater => (mf * phi).cos() / PI.sqrt(),
        Ordering::Less => (mf * phi).sin() / PI.sqrt(),
    }
}

fn azimuthal_dphi(m: i64, phi: f64) -> f64 {
    use std::cmp::Ordering;
    let mf = m.unsigned_abs() as f64;
    match m.cmp(&0) {
        Ordering::Equal => 0.0,
        Ordering::Greater => -mf * (mf * phi).sin() / PI.sqrt(),
        Ordering::Less => mf * (mf * phi).cos() / PI.sqrt(),
    }
}

/// L²(dx)-normalized associated Legendre functions at x = cos θ:
/// table[m][l − m] = P̄_l^m(x) for 0 ≤ m ≤ l ≤ l_max, via the stable
/// diagonal-then-upward recurrences.
fn normalized_plm_table(l_max: usize, x: f64) -> Vec<Vec<f64>> {
    let sin_t = (1.0 - x * x).sqrt();
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(l_max + 1);
    // Diagonal seeds P̄_m^m.
    let mut diag = 1.0 / 2.0f64.sqrt();
    for m in 0..=l_max {
        if m > 0 {
            diag *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        table.push(vec![diag]);
    }
    // Upward in l at fixed m.
    for m in 0..=l_max {
        if m < l_max {
            let first = ((2 * m + 3) as f64).sqrt() * x * table[m][0];
            table[m].push(first);
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            let v = a * (x * table[m][l - 1 - m] - b * table[m][l - 2 - m]);
            table[m].push(v);
        }
    }
    table
}

/// dP̄_l^m/dθ at x = cos θ, from the degree-lowering identity
/// dP̄/dθ = [l·x·P̄_l^m − √((2l+1)(l²−m²)/(2l−1))·P̄_{l−1}^m] / sin θ.
fn normalized_plm_dtheta(l: usize, m: usize, x: f64, table: &[Vec<f64>]) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let sin_t = (1.0 - x * x).sqrt();
    let lf = l as f64;
    let mf = m as f64;
    let p = table[m][l - m];
    let lower = if l > m { table[m][l - 1 - m] } else { 0.0 };
    let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
    (lf * x * p - c * lower) / sin_t
}
