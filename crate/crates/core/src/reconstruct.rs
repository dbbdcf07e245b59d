//! Volumetric fields from boundary-data histories, and back.
//!
//! Every point of the shell Ω_{a,b} = {a² < ψ < b²} sits on exactly one
//! level set and pulls back to the reference boundary along the domain
//! flow: t(x) = √ψ(x) and y = φ_{t(x)}⁻¹(x). A field u on the shell and
//! the history t ↦ (f(t), g(t)) of its Cauchy data therefore determine
//! each other, and this module moves in both directions:
//!
//! * [`trace_of_field`] restricts a field and its normal derivative to
//!   ∂Ω_t and projects them onto the boundary basis;
//! * [`reconstruct_field`] rebuilds u(x) = f(t(x)) ∘ φ_{t(x)}⁻¹(x) from an
//!   interpolated history, flowing queries backward to the reference
//!   boundary (radially scaled when the family is radial);
//! * [`removable_singularity_check`] evaluates the growth quantity
//!   t^p‖f‖_{H^{1/2}} + t^{n−p−1}‖g‖_{H^{−1/2}} whose boundedness as
//!   t → 0 makes a punctured-shell solution extend across the origin,
//!   and fits its divergence order over the lowest decade of the grid;
//! * [`weak_residual`] measures |∫∇u·∇v − ∫F(·,u)v| against compactly
//!   supported test bumps in (t, angle) coordinates, normalized by
//!   ‖v‖_{H¹}, integrating by the coarea rule of the family cache.
//!
//! Histories interpolate cubically in t, coefficient by coefficient
//! (four-point sliding Lagrange windows); the continuous theory has no
//! grid, so the interpolation rule is purely ours. Samplers without an
//! exact gradient fall back to fourth-order central differences, which
//! restricts traces of reconstructed fields to times at least two
//! difference steps inside the history span.

use nalgebra::DVector;
use std::f64::consts::PI;

use crate::dynamics::{BoundarySystem, CauchyPair, NonlinearityModel};
use crate::error::{Error, Result};
use crate::geometry::{
    coarea_integrate, dot, flow_map, norm, DomainFamilyCache, FlowField, LevelFunction, Point,
};
use crate::numeric::line_fit;
use crate::ode::Dopri5;
use crate::spectral::BoundaryBasis;

/// Relative step of the fallback finite-difference gradient.
const FD_STEP: f64 = 1e-4;

/// Gauss–Legendre node count per test-bump support in the t direction.
const COAREA_T_NODES: usize = 24;

/// A history's smallest time above this threshold cannot probe the t → 0
/// growth bound; reports carry the flag.
const SHORT_HISTORY_T: f64 = 1e-2;

type ValueFn<'a> = Box<dyn Fn(&Point) -> Result<f64> + Send + Sync + 'a>;
type GradientFn<'a> = Box<dyn Fn(&Point) -> Result<Point> + Send + Sync + 'a>;

/// A scalar field on a shell: an evaluator for u, and optionally one for
/// ∇u. Without an exact gradient, [`Self::gradient`] falls back to
/// fourth-order central differences in the first n coordinates.
pub struct FieldSampler<'a> {
    n: usize,
    value: ValueFn<'a>,
    gradient: Option<GradientFn<'a>>,
}

impl<'a> FieldSampler<'a> {
    /// A field given in closed form, with its exact gradient.
    pub fn analytic(
        n: usize,
        value: impl Fn(&Point) -> f64 + Send + Sync + 'a,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'a,
    ) -> Self {
        FieldSampler {
            n,
            value: Box::new(move |x| Ok(value(x))),
            gradient: Some(Box::new(move |x| Ok(gradient(x)))),
        }
    }

    /// A field known only through values; gradients are finite differences.
    pub fn from_values(n: usize, value: impl Fn(&Point) -> Result<f64> + Send + Sync + 'a) -> Self {
        FieldSampler {
            n,
            value: Box::new(value),
            gradient: None,
        }
    }

    /// Ambient dimension of the field's domain.
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Whether [`Self::gradient`] is exact rather than a finite difference.
    pub fn has_exact_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// u(x).
    pub fn value(&self, x: &Point) -> Result<f64> {
        (self.value)(x)
    }

    /// ∇u(x), padded with a zero third component for n = 2.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        if let Some(g) = &self.gradient {
            return g(x);
        }
        let h = FD_STEP * (1.0 + norm(x));
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let at = |s: f64| -> Result<f64> {
                let mut z = *x;
                z[i] += s;
                self.value(&z)
            };
            *o = (at(-2.0 * h)? - 8.0 * at(-h)? + 8.0 * at(h)? - at(2.0 * h)?) / (12.0 * h);
        }
        Ok(out)
    }
}

/// A sampled trace history: strictly increasing times, one Cauchy pair per
/// time, all on one basis. Between grid points, coefficients interpolate
/// by sliding four-point Lagrange windows (cubic in t).
#[derive(Debug, Clone)]
pub struct TraceHistory {
    ts: Vec<f64>,
    fs: Vec<DVector<f64>>,
    gs: Vec<DVector<f64>>,
    dim: usize,
}

impl TraceHistory {
    pub fn new(samples: Vec<CauchyPair>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a trace history needs at least two samples, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].dim();
        let mut ts = Vec::with_capacity(samples.len());
        let mut fs = Vec::with_capacity(samples.len());
        let mut gs = Vec::with_capacity(samples.len());
        for pair in samples {
            if pair.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "history samples disagree in dimension: {} vs {}",
                    pair.dim(),
                    dim
                )));
            }
            if let Some(&prev) = ts.last() {
                if pair.t <= prev {
                    return Err(Error::InvalidInput(format!(
                        "history times must increase strictly: {} after {prev}",
                        pair.t
                    )));
                }
            }
            ts.push(pair.t);
            fs.push(pair.f);
            gs.push(pair.g);
        }
        Ok(TraceHistory { ts, fs, gs, dim })
    }

    /// Coefficient count per trace block.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored time samples (always at least two).
    pub fn sample_count(&self) -> usize {
        self.ts.len()
    }

    pub fn t_min(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// The stored time grid.
    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    /// The stored pair at grid index `k`.
    pub fn pair(&self, k: usize) -> CauchyPair {
        CauchyPair {
            t: self.ts[k],
            f: self.fs[k].clone(),
            g: self.gs[k].clone(),
        }
    }

    /// Interpolate the history at time `t` (cubic in t per coefficient;
    /// exact at grid points). Queries outside the grid span are domain
    /// errors — the history asserts nothing beyond its samples.
    pub fn sample(&self, t: f64) -> Result<CauchyPair> {
        let slack = 1e-9 * (self.t_max() - self.t_min());
        if t < self.t_min() - slack || t > self.t_max() + slack {
            return Err(Error::Domain(format!(
                "t = {t} lies outside the history span [{}, {}]",
                self.t_min(),
                self.t_max()
            )));
        }
        let t = t.clamp(self.t_min(), self.t_max());
        let len = self.ts.len();
        let w = len.min(4);
        let first_ge = self.ts.partition_point(|&tk| tk < t);
        let lo = first_ge.saturating_sub(2).min(len - w);
        let mut f = DVector::zeros(self.dim);
        let mut g = DVector::zeros(self.dim);
        for j in lo..lo + w {
            let mut weight = 1.0;
            for k in lo..lo + w {
                if k != j {
                    weight *= (t - self.ts[k]) / (self.ts[j] - self.ts[k]);
                }
            }
            f.axpy(weight, &self.fs[j], 1.0);
            g.axpy(weight, &self.gs[j], 1.0);
        }
        Ok(CauchyPair { t, f, g })
    }
}

/// Integrate the semilinear boundary system from `seed` and record the
/// trajectory at the strictly increasing times `ts` as a history. The seed
/// may start at any system-admissible time; each leg continues from the
/// previous sample.
pub fn evolve_history(
    system: &BoundarySystem,
    model: &NonlinearityModel,
    seed: &CauchyPair,
    ts: &[f64],
    solver: &Dopri5,
) -> Result<TraceHistory> {
    if ts.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a history needs at least two sample times, got {}",
            ts.len()
        )));
    }
    let mut current = seed.clone();
    let mut pairs = Vec::with_capacity(ts.len());
    for &t in ts {
        if (t - current.t).abs() > 1e-14 * t.max(current.t) {
            let (next, _) = system.integrate_nonlinear(&current, model, t, solver)?;
            current = next;
        }
        pairs.push(current.clone());
    }
    TraceHistory::new(pairs)
}

fn trace_nodal(
    u: &FieldSampler,
    basis: &BoundaryBasis,
    cache: &DomainFamilyCache,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if u.dimension() != cache.dimension() {
        return Err(Error::InvalidInput(format!(
            "field lives in dimension {} but the family in {}",
            u.dimension(),
            cache.dimension()
        )));
    }
    if basis.node_count() != cache.node_count() {
        return Err(Error::InvalidInput(format!(
            "basis rule has {} nodes but the cache {} — build the cache with the basis's cache_angular()",
            basis.node_count(),
            cache.node_count()
        )));
    }
    let frame = cache.frame_at(t)?;
    let level = cache.level();
    let count = cache.node_count();
    let mut fv = vec![0.0; count];
    let mut gv = vec![0.0; count];
    for j in 0..count {
        let z = frame.z[j];
        fv[j] = u.value(&z)?;
        let grad_u = u.gradient(&z)?;
        let grad_psi = level.grad(&z);
        let len = norm(&grad_psi);
        if len <= 0.0 {
            return Err(Error::Domain(format!(
                "∇ψ vanishes at a boundary node of t = {t}"
            )));
        }
        gv[j] = dot(&grad_u, &grad_psi) / len;
    }
    Ok((fv, gv))
}

/// Restrict the field and its outward normal derivative to ∂Ω_t and
/// project both onto the boundary basis: f = u ∘ φ_t, g = ∂_ν u ∘ φ_t.
pub fn trace_of_field(
    u: &FieldSampler,
    basis: &BoundaryBasis,
    cache: &DomainFamilyCache,
    t: f64,
) -> Result<CauchyPair> {
    let (fv, gv) = trace_nodal(u, basis, cache, t)?;
    Ok(CauchyPair {
        t,
        f: basis.analyze(&fv),
        g: basis.analyze(&gv),
    })
}

/// Aliasing diagnostic of the trace at t: the larger of the two relative
/// round-trip residuals of the nodal f- and g-data. Near roundoff iff the
/// restricted field is resolved by the basis; check it before trusting
/// trace coefficients of fields with unknown angular content.
pub fn trace_aliasing(
    u: &FieldSampler,
    basis: &BoundaryBasis,
    cache: &DomainFamilyCache,
    t: f64,
) -> Result<f64> {
    let (fv, gv) = trace_nodal(u, basis, cache, t)?;
    Ok(basis
        .aliasing_residual(&fv)
        .max(basis.aliasing_residual(&gv)))
}

/// Rebuild the field of a history: u(x) = f(t(x)) evaluated at
/// φ_{t(x)}⁻¹(x), with t(x) = √ψ(x). Queries must satisfy
/// t(x) ∈ [history.t_min(), history.t_max()]; the pullback integrates the
/// flow backward (and is the exact radial scaling on radial families).
/// The sampler has no exact gradient — traces of it use finite
/// differences.
pub fn reconstruct_field<'a>(
    basis: &'a BoundaryBasis,
    cache: &'a DomainFamilyCache,
    history: &'a TraceHistory,
    solver: &'a Dopri5,
) -> Result<FieldSampler<'a>> {
    if history.dim() != basis.dim() {
        return Err(Error::InvalidInput(format!(
            "history carries {} coefficients but the basis {}",
            history.dim(),
            basis.dim()
        )));
    }
    if (cache.dimension() == 3) != basis.is_sphere() {
        return Err(Error::InvalidInput(
            "basis and domain family disagree in dimension".into(),
        ));
    }
    let radial = cache.is_radial();
    let level = cache.level();
    let n = cache.dimension();
    let value = move |x: &Point| -> Result<f64> {
        let psi = level.psi(x);
        if psi <= 0.0 {
            return Err(Error::Domain(format!(
                "ψ = {psi:.3e} at the query point — outside the punctured domain"
            )));
        }
        let t = psi.sqrt();
        let span = history.t_max() - history.t_min();
        if t < history.t_min() - 1e-9 * span || t > history.t_max() + 1e-9 * span {
            return Err(Error::Domain(format!(
                "query sits on level t = {t:.6}, outside the reconstructed shell [{:.6}, {:.6}]",
                history.t_min(),
                history.t_max()
            )));
        }
        let t = t.clamp(history.t_min(), history.t_max());
        let pair = history.sample(t)?;
        let y = if radial {
            // φ_t(y) = t·y, and the series evaluation only uses the
            // direction, so x itself stands in for its pullback.
            *x
        } else {
            flow_map(&FlowField::new(level), x, -t.ln(), solver)?
        };
        Ok(basis.synthesize_at(&pair.f, &y))
    };
    Ok(FieldSampler::from_values(n, value))
}

/// Outcome of the t → 0 growth-bound check on a history.
#[derive(Debug, Clone)]
pub struct RemovabilityReport {
    /// sup over the grid of t^p‖f‖_{H^{1/2}} + t^{n−p−1}‖g‖_{H^{−1/2}}.
    pub sup: f64,
    /// Fitted divergence order: d ln Q / d ln t over the lowest decade of
    /// the grid (negative = growth toward t = 0).
    pub order: f64,
    /// R² of the log-log fit behind `order`.
    pub fit_r2: f64,
    /// The bound holds on the grid: the fitted order is nonnegative.
    pub bounded: bool,
    /// The grid never reaches below 10⁻²; the fit says little about t → 0.
    pub short_history: bool,
}

/// Evaluate the removable-singularity quantity
/// Q(t) = t^p‖f(t)‖_{H^{1/2}} + t^{n−p−1}‖g(t)‖_{H^{−1/2}} on the
/// history grid for an admissible exponent 0 < p < n/2, and fit its
/// divergence order over the lowest decade. A bounded Q extends the
/// punctured-shell solution across the origin; a singular branch like
/// r^{2−n} diverges with order −(1 − p) (for p < 1/2).
pub fn removable_singularity_check(
    history: &TraceHistory,
    basis: &BoundaryBasis,
    p: f64,
) -> Result<RemovabilityReport> {
    if history.dim() != basis.dim() {
        return Err(Error::InvalidInput(format!(
            "history carries {} coefficients but the basis {}",
            history.dim(),
            basis.dim()
        )));
    }
    let n = if basis.is_sphere() { 3.0 } else { 2.0 };
    if !(0.0 < p && p < n / 2.0) {
        return Err(Error::InvalidInput(format!(
            "admissible exponents are 0 < p < n/2 = {}, got {p}",
            n / 2.0
        )));
    }
    let mut qs = Vec::with_capacity(history.sample_count());
    for (k, &t) in history.ts.iter().enumerate() {
        let q = t.powf(p) * basis.sobolev_norm(&history.fs[k], 0.5)
            + t.powf(n - p - 1.0) * basis.sobolev_norm(&history.gs[k], -0.5);
        qs.push(q);
    }
    let sup = qs.iter().cloned().fold(0.0, f64::max);
    let short_history = history.t_min() > SHORT_HISTORY_T;
    if sup == 0.0 {
        return Ok(RemovabilityReport {
            sup,
            order: 0.0,
            fit_r2: 1.0,
            bounded: true,
            short_history,
        });
    }
    let decade_top = 10.0 * history.t_min();
    let mut lts = Vec::new();
    let mut lqs = Vec::new();
    for (&t, &q) in history.ts.iter().zip(&qs) {
        if t <= decade_top && q > 0.0 {
            lts.push(t.ln());
            lqs.push(q.ln());
        }
    }
    if lts.len() < 2 {
        // The lowest decade carries no usable points (zeros, or a single
        // sample): Q vanishes toward the bottom of the grid, so nothing
        // diverges there.
        return Ok(RemovabilityReport {
            sup,
            order: 0.0,
            fit_r2: 0.0,
            bounded: true,
            short_history,
        });
    }
    let (order, _, fit_r2) = line_fit(&lts, &lqs);
    Ok(RemovabilityReport {
        sup,
        order,
        fit_r2,
        bounded: order >= 0.0,
        short_history,
    })
}

/// One tensor test bump v(x) = b((t(x) − t_c)/w_t) · b(angle/w_a) with
/// b(s) = (1 − s²)⁴ on |s| < 1: compactly supported in the shell, C³
/// across the support edge. The angle is the offset from θ_c on the
/// circle, the geodesic distance from a center direction on the sphere.
struct TestBump {
    n: usize,
    t_c: f64,
    w_t: f64,
    theta_c: f64,
    dir_c: Point,
    w_a: f64,
}

fn bump(s: f64) -> f64 {
    let w = 1.0 - s * s;
    w * w * w * w
}

fn bump_deriv(s: f64) -> f64 {
    let w = 1.0 - s * s;
    -8.0 * s * w * w * w
}

impl TestBump {
    /// (v, ∇v) at x, or None outside the support.
    fn eval(&self, level: &LevelFunction, x: &Point) -> Option<(f64, Point)> {
        let t = level.psi(x).sqrt();
        let st = (t - self.t_c) / self.w_t;
        if st.abs() >= 1.0 {
            return None;
        }
        let bt = bump(st);
        let dbt_dt = bump_deriv(st) / self.w_t;
        let grad_psi = level.grad(x);
        let grad_t = [
            grad_psi[0] / (2.0 * t),
            grad_psi[1] / (2.0 * t),
            grad_psi[2] / (2.0 * t),
        ];
        let (ba, dba, grad_a) = if self.n == 2 {
            let theta = x[1].atan2(x[0]);
            let mut d = theta - self.theta_c;
            d -= (d / (2.0 * PI)).round() * 2.0 * PI;
            let sa = d / self.w_a;
            if sa.abs() >= 1.0 {
                return None;
            }
            let r2 = x[0] * x[0] + x[1] * x[1];
            (
                bump(sa),
                bump_deriv(sa) / self.w_a,
                [-x[1] / r2, x[0] / r2, 0.0],
            )
        } else {
            let r = norm(x);
            let rho = (dot(x, &self.dir_c) / r).clamp(-1.0, 1.0);
            let gamma = rho.acos();
            let sa = gamma / self.w_a;
            if sa.abs() >= 1.0 {
                return None;
            }
            let grad_gamma = if gamma < 1e-8 {
                // ∇γ stays bounded but directionless at the center; the
                // chain-rule factor b'(γ/w)/w → 0 there, so drop the term.
                [0.0; 3]
            } else {
                let sin_g = gamma.sin();
                [
                    -(self.dir_c[0] - rho * x[0] / r) / (r * sin_g),
                    -(self.dir_c[1] - rho * x[1] / r) / (r * sin_g),
                    -(self.dir_c[2] - rho * x[2] / r) / (r * sin_g),
                ]
            };
            (bump(sa), bump_deriv(sa) / self.w_a, grad_gamma)
        };
        let v = bt * ba;
        let grad_v = [
            dbt_dt * ba * grad_t[0] + bt * dba * grad_a[0],
            dbt_dt * ba * grad_t[1] + bt * dba * grad_a[1],
            dbt_dt * ba * grad_t[2] + bt * dba * grad_a[2],
        ];
        Some((v, grad_v))
    }
}

/// Largest weak residual |∫∇u·∇v − ∫F(·,u)v| / ‖v‖_{H¹} over `m` tensor
/// test bumps compactly supported in the shell a < t < b (centers on a
/// (t, angle) grid, up to four angular positions per level). Vanishes to
/// quadrature accuracy iff u weakly solves Δu + F(x, u) = 0 on the shell.
pub fn weak_residual(
    u: &FieldSampler,
    model: &NonlinearityModel,
    cache: &DomainFamilyCache,
    a: f64,
    b: f64,
    m: usize,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("the test set must not be empty".into()));
    }
    if !(0.0 < a && a < b) {
        return Err(Error::InvalidInput(format!(
            "the shell needs 0 < a < b, got [{a}, {b}]"
        )));
    }
    if a < cache.t_min() || b > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "the shell [{a}, {b}] leaves the constructed family [{}, 1]",
            cache.t_min()
        )));
    }
    if u.dimension() != cache.dimension() {
        return Err(Error::InvalidInput(format!(
            "field lives in dimension {} but the family in {}",
            u.dimension(),
            cache.dimension()
        )));
    }
    let n = cache.dimension();
    let node_count = cache.node_count();
    let n_ang = m.min(4);
    let w_a = if n == 2 {
        2.0 * PI / n_ang as f64
    } else {
        PI / 2.0
    };
    // Every angular bump must see enough boundary nodes to resolve its C³
    // profile; otherwise the coarea sums are meaningless.
    let across = if n == 2 {
        node_count as f64 * w_a / PI
    } else {
        ((node_count / 2) as f64).sqrt() * 2.0 * w_a / PI
    };
    if across < 6.0 {
        return Err(Error::InvalidInput(format!(
            "only {across:.1} boundary nodes span one angular test bump — rebuild the cache with a finer angular rule"
        )));
    }
    let n_tc = m.div_ceil(n_ang);
    let w_t = (b - a) / (n_tc + 1) as f64;
    // Four directions of a regular tetrahedron; angular centers cycle
    // through them on the sphere.
    let s3 = 1.0 / 3.0f64.sqrt();
    let tetra: [Point; 4] = [[s3, s3, s3], [s3, -s3, -s3], [-s3, s3, -s3], [-s3, -s3, s3]];
    let level = cache.level();
    let mut worst = 0.0f64;
    for i in 0..m {
        let row = i / n_ang;
        let col = i % n_ang;
        let test = TestBump {
            n,
            t_c: a + (row + 1) as f64 * w_t,
            w_t,
            theta_c: 2.0 * PI * (col as f64 + 0.5 * (row % 2) as f64) / n_ang as f64,
            dir_c: tetra[col % 4],
            w_a,
        };
        let t_lo = test.t_c - w_t;
        let t_hi = test.t_c + w_t;
        let mut inner: Option<Error> = None;
        let mismatch = coarea_integrate(
            cache,
            |x| {
                let (v, grad_v) = match test.eval(level, x) {
                    Some(pair) => pair,
                    None => return 0.0,
                };
                let uv = match u.value(x) {
                    Ok(val) => val,
                    Err(e) => {
                        inner.get_or_insert(e);
                        return 0.0;
                    }
                };
                let grad_u = match u.gradient(x) {
                    Ok(gr) => gr,
                    Err(e) => {
                        inner.get_or_insert(e);
                        return 0.0;
                    }
                };
                dot(&grad_u, &grad_v) - model.value(x, uv) * v
            },
            t_lo,
            t_hi,
            COAREA_T_NODES,
        )?;
        if let Some(e) = inner {
            return Err(e);
        }
        let norm_sq = coarea_integrate(
            cache,
            |x| match test.eval(level, x) {
                Some((v, grad_v)) => dot(&grad_v, &grad_v) + v * v,
                None => 0.0,
            },
            t_lo,
            t_hi,
            COAREA_T_NODES,
        )?;
        worst = worst.max(mismatch.abs() / norm_sq.sqrt());
    }
    Ok(worst)
}
