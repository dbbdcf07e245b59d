//! Precomputed flow samples over the whole domain family.
//!
//! Adaptive integration of the boundary systems needs σ_t, H_t, a_t, the
//! metric stretch m_t and the tangential speed γ_s at *arbitrary* t, many
//! thousands of times. Integrating the flow freshly per query would dominate
//! everything, so the cache integrates each boundary node once over
//! τ ∈ [log t_min, 0], stores (z, ż, J, J̇) on a fine τ-grid, and serves
//! queries by cubic Hermite interpolation (O(Δτ⁴) with Δτ = 0.01, far below
//! every tolerance in play). Scalars (σ, H, γ) are recomputed exactly from
//! the interpolated position, so interpolation error enters only through z
//! and J.
//!
//! Radial ψ bypasses storage entirely — every quantity has a closed form.
//! General ψ is supported for n = 2 (curve calculus); the general n = 3 case
//! would need genuine surface meshing and is rejected.

use crate::error::{Error, Result};
use crate::geometry::flow::{FlowField, TangentialMode};
use crate::geometry::level::{boundary_radius, LevelFunction, Mat3, Point};
use crate::geometry::{det3, dot, identity3, matmul, matvec, norm};
use crate::numeric::gauss_legendre;
use crate::ode::Dopri5;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
struct FlowSample {
    z: Point,
    zdot: Point,
    j: Mat3,
    jdot: Mat3,
}

/// Flow data for the whole family at one t, node-indexed.
#[derive(Debug, Clone)]
pub struct BoundaryFrameData {
    pub t: f64,
    /// φ_t(y_j).
    pub z: Vec<Point>,
    /// Normal speed σ at z_j.
    pub sigma: Vec<f64>,
    /// Mean curvature H_t at z_j.
    pub h: Vec<f64>,
    /// Area density a_t(y_j) relative to the reference boundary measure.
    pub a: Vec<f64>,
    /// n=2: metric stretch m_t = |∂_θ(φ_t∘y)|; n=3 radial: t² placeholder.
    pub m_t: Vec<f64>,
    /// n=2: tangential speed γ·τ̂ of the flow along ∂Ω_t; 0 for radial.
    pub gamma_s: Vec<f64>,
    /// det Dφ_t (n-dimensional).
    pub det_j: Vec<f64>,
}

/// Immutable precomputed family: boundary quadrature nodes on ∂Ω plus flow
/// samples down to t_min.
#[derive(Debug, Clone)]
pub struct DomainFamilyCache {
    level: LevelFunction,
    n: usize,
    radial: bool,
    t_min: f64,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    thetas: Vec<f64>,
    /// n=2: y′(θ_j) (parameter derivative along the reference curve).
    dy_dtheta: Vec<Point>,
    /// n=2: m₁(θ_j) = |y′(θ_j)|.
    m1: Vec<f64>,
    tau0: f64,
    dtau: f64,
    /// samples[j][k]: node j at τ = tau0 + k·dtau (empty when radial).
    samples: Vec<Vec<FlowSample>>,
}

impl DomainFamilyCache {
    /// Build the cache. `angular` controls the boundary rule: the number of
    /// uniform θ-nodes for n=2, or the Gauss–Legendre polar count for n=3
    /// radial (with 2·angular azimuthal nodes). Flow samples cover
    /// t ∈ [t_min, 1] at Δτ = 0.01.
    pub fn build(
        level: &LevelFunction,
        angular: usize,
        t_min: f64,
        solver: &Dopri5,
    ) -> Result<Self> {
        let n = level.dimension();
        let radial = level.is_radial();
        if n == 3 && !radial {
            return Err(Error::Unsupported(
                "general level functions are supported for n = 2 only (n = 3 requires radial psi)"
                    .into(),
            ));
        }
        if !(0.0 < t_min && t_min < 1.0) {
            return Err(Error::InvalidInput(format!(
                "t_min must lie in (0, 1), got {t_min}"
            )));
        }

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut thetas = Vec::new();
        let mut dy_dtheta = Vec::new();
        let mut m1 = Vec::new();

        if n == 2 {
            for k in 0..angular {
                let th = 2.0 * PI * k as f64 / angular as f64;
                let dir = [th.cos(), th.sin(), 0.0];
                let r = boundary_radius(level, &dir).ok_or_else(|| {
                    Error::Validation(format!(
                        "boundary not found along theta = {th:.4} — psi is not star-shaped"
                    ))
                })?;
                let y = [r * dir[0], r * dir[1], 0.0];
                let g = level.grad(&y);
                let dirp = [-dir[1], dir[0], 0.0];
                let denom = dot(&g, &dir);
                if denom <= 1e-10 {
                    return Err(Error::Validation(format!(
                        "psi not increasing along the ray theta = {th:.4}; cannot parameterize the boundary"
                    )));
                }
                // Implicit differentiation of ψ(R(θ)·dir(θ)) = 1.
                let rp = -r * dot(&g, &dirp) / denom;
                let yp = [rp * dir[0] + r * dirp[0], rp * dir[1] + r * dirp[1], 0.0];
                let m = norm(&yp);
                nodes.push(y);
                thetas.push(th);
                dy_dtheta.push(yp);
                m1.push(m);
                weights.push(m * 2.0 * PI / angular as f64);
            }
        } else {
            // Radial n=3: product rule on the unit sphere.
            let q_phi = 2 * angular;
            let (cts, wts) = gauss_legendre(angular);
            for (&ct, &wt) in cts.iter().zip(&wts) {
                let st = (1.0 - ct * ct).sqrt();
                for k in 0..q_phi {
                    let ph = 2.0 * PI * k as f64 / q_phi as f64;
                    nodes.push([st * ph.cos(), st * ph.sin(), ct]);
                    weights.push(wt * 2.0 * PI / q_phi as f64);
                }
            }
        }

        let tau0 = t_min.ln();
        let dtau = 0.01;
        let steps = (-tau0 / dtau).ceil() as usize;
        let dtau = -tau0 / steps as f64; // land exactly on τ = 0
        let tau_grid: Vec<f64> = (0..=steps).map(|k| tau0 + k as f64 * dtau).collect();

        let mut samples = Vec::new();
        if !radial {
            let field = FlowField::new(level);
            let descending: Vec<f64> = tau_grid.iter().rev().copied().collect();
            for y in &nodes {
                let mut y0v = vec![y[0], y[1], y[2]];
                for row in &identity3() {
                    y0v.extend_from_slice(row);
                }
                let y0 = nalgebra::DVector::from_vec(y0v);
                let rhs = |_t: f64, s: &nalgebra::DVector<f64>, ds: &mut nalgebra::DVector<f64>| {
                    let p = [s[0], s[1], s[2]];
                    let v = field.x_tilde(&p);
                    let gx = field.grad_x_tilde(&p);
                    ds[0] = v[0];
                    ds[1] = v[1];
                    ds[2] = v[2];
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut acc = 0.0;
                            for k in 0..3 {
                                acc += gx[i][k] * s[3 + 3 * k + j];
                            }
                            ds[3 + 3 * i + j] = acc;
                        }
                    }
                };
                let (states, _, _) = solver.integrate_sampled(rhs, 0.0, tau0, &y0, &descending)?;
                let mut row: Vec<FlowSample> = states
                    .iter()
                    .map(|st| {
                        let z = [st[0], st[1], st[2]];
                        let mut j = [[0.0; 3]; 3];
                        for r in 0..3 {
                            for c in 0..3 {
                                j[r][c] = st[3 + 3 * r + c];
                            }
                        }
                        let zdot = field.x_tilde(&z);
                        let jdot = matmul(&field.grad_x_tilde(&z), &j);
                        FlowSample { z, zdot, j, jdot }
                    })
                    .collect();
                row.reverse(); // ascending τ
                samples.push(row);
            }

            // Build-time invariant: every stored sample sits on its level set.
            for (jn, row) in samples.iter().enumerate() {
                for (k, s) in row.iter().enumerate() {
                    let tau = tau_grid[k];
                    let want = (2.0 * tau).exp();
                    let got = level.psi(&s.z);
                    if (got - want).abs() > 1e-8 * want.max(1.0) {
                        return Err(Error::Integration {
                            reason: format!(
                                "cached flow sample off its level set at node {jn}: psi = {got:.12e}, expected {want:.12e}"
                            ),
                            t: tau,
                        });
                    }
                }
            }
        }

        Ok(DomainFamilyCache {
            level: *level,
            n,
            radial,
            t_min,
            nodes,
            weights,
            thetas,
            dy_dtheta,
            m1,
            tau0,
            dtau,
            samples,
        })
    }

    pub fn level(&self) -> &LevelFunction {
        &self.level
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn boundary_nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Reference-measure quadrature weight of node j (arc length for n=2,
    /// solid angle for the radial sphere).
    pub fn node_weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// θ parameters of the boundary nodes (n=2).
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// m₁(θ_j) = |y′(θ_j)| on the reference boundary (n=2).
    pub fn m1(&self) -> &[f64] {
        &self.m1
    }

    /// Interpolated flow state of node j at log-time τ: (z, J).
    #[allow(clippy::needless_range_loop)] // Hermite blend couples z, zdot across the index
    fn sample_at(&self, j: usize, tau: f64) -> (Point, Mat3) {
        let row = &self.samples[j];
        let pos = (tau - self.tau0) / self.dtau;
        let k = (pos.floor() as usize).min(row.len() - 2);
        let s = pos - k as f64;
        let (h00, h10, h01, h11) = hermite_weights(s);
        let (a, b) = (&row[k], &row[k + 1]);
        let mut z = [0.0; 3];
        for i in 0..3 {
            z[i] = h00 * a.z[i]
                + h10 * self.dtau * a.zdot[i]
                + h01 * b.z[i]
                + h11 * self.dtau * b.zdot[i];
        }
        let mut jm = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                jm[r][c] = h00 * a.j[r][c]
                    + h10 * self.dtau * a.jdot[r][c]
                    + h01 * b.j[r][c]
                    + h11 * self.dtau * b.jdot[r][c];
            }
        }
        (z, jm)
    }

    /// All per-node geometric quantities at time t ∈ [t_min, 1].
    #[allow(clippy::needless_range_loop)] // Laplacian trace reads hs[i][i]
    pub fn frame_at(&self, t: f64) -> Result<BoundaryFrameData> {
        if !(t >= self.t_min * (1.0 - 1e-12) && t <= 1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "t = {t} outside the cached range [{}, 1]",
                self.t_min
            )));
        }
        let m = self.node_count();
        let mut out = BoundaryFrameData {
            t,
            z: Vec::with_capacity(m),
            sigma: Vec::with_capacity(m),
            h: Vec::with_capacity(m),
            a: Vec::with_capacity(m),
            m_t: Vec::with_capacity(m),
            gamma_s: Vec::with_capacity(m),
            det_j: Vec::with_capacity(m),
        };
        if self.radial {
            let hcurv = (self.n - 1) as f64 / t;
            let ap = t.powi(self.n as i32 - 1);
            let dj = t.powi(self.n as i32);
            for y in &self.nodes {
                out.z.push([t * y[0], t * y[1], t * y[2]]);
                out.sigma.push(1.0);
                out.h.push(hcurv);
                out.a.push(ap);
                out.m_t.push(if self.n == 2 { t } else { t * t });
                out.gamma_s.push(0.0);
                out.det_j.push(dj);
            }
            return Ok(out);
        }
        let tau = t.ln().clamp(self.tau0, 0.0);
        for j in 0..m {
            let (z, jm) = self.sample_at(j, tau);
            let g = self.level.grad(&z);
            let gn = norm(&g);
            let psi = self.level.psi(&z);
            let sigma = 2.0 * psi.max(0.0).sqrt() / gn;
            let hs = self.level.hess(&z);
            let mut lap = 0.0;
            for i in 0..self.n {
                lap += hs[i][i];
            }
            let nu = [g[0] / gn, g[1] / gn, g[2] / gn];
            let hnu = matvec(&hs, &nu);
            let hcurv = (lap - dot(&hnu, &nu)) / gn;

            let v = matvec(&jm, &self.dy_dtheta[j]);
            let m_t = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let that = [v[0] / m_t, v[1] / m_t, 0.0];
            // γ = t⁻¹X̃ − σν is purely tangential by construction; its
            // signed length along τ̂ is the advection speed.
            let field = FlowField {
                level: &self.level,
                mode: TangentialMode::WithCorrection,
            };
            let xt = field.x_tilde(&z);
            let gamma = [xt[0] / t - sigma * nu[0], xt[1] / t - sigma * nu[1], 0.0];
            out.z.push(z);
            out.sigma.push(sigma);
            out.h.push(hcurv);
            out.a.push(m_t / self.m1[j]);
            out.m_t.push(m_t);
            out.gamma_s.push(dot(&gamma, &that));
            out.det_j.push(det3(&jm));
        }
        Ok(out)
    }
}

#[inline]
fn hermite_weights(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_cache_closed_forms() {
        let lf = LevelFunction::ball(2);
        let cache = DomainFamilyCache::build(&lf, 16, 1e-3, &Dopri5::default()).unwrap();
        assert!(cache.is_radial());
        let f = cache.frame_at(0.25).unwrap();
        assert!((f.sigma[3] - 1.0).abs() < 1e-15);
        assert!((f.h[0] - 4.0).abs() < 1e-13);
        assert!((f.a[5] - 0.25).abs() < 1e-15);
        // Total boundary measure = 2π.
        let total: f64 = (0..cache.node_count()).map(|j| cache.node_weight(j)).sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn radial_sphere_weights_sum_to_4pi() {
        let lf = LevelFunction::ball(3);
        let cache = DomainFamilyCache::build(&lf, 12, 1e-2, &Dopri5::default()).unwrap();
        let total: f64 = (0..cache.node_count()).map(|j| cache.node_weight(j)).sum();
        assert!((total - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn general_n3_rejected() {
        let lf = LevelFunction::ellipsoid(1.0, 1.0, 2.0);
        let err = DomainFamilyCache::build(&lf, 8, 0.1, &Dopri5::default()).unwrap_err();
        assert!(err.to_string().contains("n = 2"), "{err}");
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn ellipse_cache_level_identity_and_interpolation() {
        let lf = LevelFunction::ellipse(2.0, 1.0);
        let cache = DomainFamilyCache::build(&lf, 24, 1e-2, &Dopri5::default()).unwrap();
        // Interpolated positions sit on the right level sets, including
        // between grid points.
        for &t in &[1.0, 0.5, 0.0371, 0.013, 0.01] {
            let f = cache.frame_at(t).unwrap();
            for z in &f.z {
                let psi = lf.psi(z);
                assert!(
                    (psi - t * t).abs() < 1e-8 * (t * t).max(1.0),
                    "t = {t}: psi = {psi}"
                );
            }
        }
        // At t = 1 the flow is the identity: a ≡ 1, z = y, det J = 1.
        let f1 = cache.frame_at(1.0).unwrap();
        for j in 0..cache.node_count() {
            assert!((f1.a[j] - 1.0).abs() < 1e-9);
            assert!((f1.det_j[j] - 1.0).abs() < 1e-9);
            let y = cache.boundary_nodes()[j];
            for i in 0..2 {
                assert!((f1.z[j][i] - y[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ellipse_area_density_matches_direct_computation() {
        let lf = LevelFunction::ellipse(2.0, 1.0);
        let solver = Dopri5::default();
        let cache = DomainFamilyCache::build(&lf, 12, 0.05, &solver).unwrap();
        let f = cache.frame_at(0.3).unwrap();
        for j in [0, 3, 7] {
            let y = cache.boundary_nodes()[j];
            let direct = crate::geometry::ops::area_density(&lf, &y, 0.3, &solver).unwrap();
            assert!(
                (f.a[j] - direct).abs() < 1e-7,
                "node {j}: cached a = {} vs direct {}",
                f.a[j],
                direct
            );
        }
    }
}
