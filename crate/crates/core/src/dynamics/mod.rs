//! Boundary Cauchy-data evolution across the shrinking family.
//!
//! A solution of Δu = (V − λ)u (or of the semilinear Δu + F(x, u) = 0) on
//! the full domain induces traces (f, g) = (u, ∂_ν u) on each ∂Ω_t, and
//! those traces satisfy a first-order system in t driven entirely by the
//! boundary geometry:
//!
//!   d/dt [f]   [ T_t                  σ_t          ] [f]
//!        [g] = [ σ_t(V_t − λ) − L_t   T_t − σ_t H_t ] [g]
//!
//! with T_t the tangential advection, L_t the weighted boundary Laplacian,
//! σ_t the normal speed, and H_t the mean curvature of ∂Ω_t. The nonlinear
//! version replaces σ_t(V_t − λ)f by −σ_t F_t(f).
//!
//! For long-time work the system is rewritten on log-time τ = ln t in the
//! rescaled variables (f̃, g̃) = (t^α f, t^{1+α} g):
//!
//!   d/dτ [f̃]   [ α + tT_t                  σ_t               ] [f̃]
//!        [g̃] = [ t²(σ_t(V_t − λ) − L_t)    1 + α + t(T_t − σ_t H_t) ] [g̃]
//!
//! which is asymptotically autonomous as τ → −∞ and avoids the t⁻²
//! stiffness of the unscaled form. Both right-hand sides share one nodal
//! evaluation path (synthesize → multiply by frame data → analyze), so the
//! linear system is exactly the nonlinear one with F(x, u) = −(V(x) − λ)u,
//! bit for bit, and the rescaled form is the exact chain-rule image of the
//! t-form.
//!
//! The evolution is ill-posed in both directions; integrating unfiltered
//! data the wrong way is expected to trip the overflow guard, and that
//! diagnostic (`Error::OverflowAbort`) is a designed outcome, not a bug.
//! Nodal products can alias once data fills the top of the truncation;
//! [`BoundarySystem::aliasing_diagnostic`] measures that before a long run
//! rather than per step.

pub mod frame;
pub mod rates;

pub use frame::{principal_angles, propagate_frame, SubspaceFrame};
pub use rates::{estimate_rates, ModeRateFit, RateOptions, RateReport};

use crate::error::{Error, Result};
use crate::geometry::cache::{BoundaryFrameData, DomainFamilyCache};
use crate::geometry::Point;
use crate::ode::{Dopri5, StepStats};
use crate::spectral::basis::BoundaryBasis;
use nalgebra::DVector;
use std::sync::Arc;

/// Nodal potential supplier: evaluated at physical points of ∂Ω_t.
pub type PotentialFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Nodal function of position and field value, as stored by
/// [`NonlinearityModel`].
pub type NodalFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

/// Scaling exponent used when none is requested: α = (n − 2)/2 clamped into
/// the admissible window (0, n/2 − 1] for n = 3, and 1/2 for n = 2 even
/// though no planar α is admissible in that strict sense (the m = 0 mode is
/// a center direction whatever the choice).
pub fn default_alpha(n: usize) -> f64 {
    assert!(n == 2 || n == 3, "dimension must be 2 or 3");
    0.5
}

/// The window of scaling exponents for which every mode splits off a
/// genuine dichotomy: (0, n/2 − 1] for n = 3, empty for n = 2.
pub fn alpha_window(n: usize) -> Option<(f64, f64)> {
    match n {
        3 => Some((0.0, 0.5)),
        2 => None,
        _ => panic!("dimension must be 2 or 3"),
    }
}

/// Whether α sits in [`alpha_window`] (always false for n = 2).
pub fn alpha_admissible(n: usize, alpha: f64) -> bool {
    alpha_window(n).is_some_and(|(lo, hi)| alpha > lo && alpha <= hi)
}

/// Dirichlet and Neumann traces of a field on ∂Ω_t, as coefficient vectors
/// on the matching boundary basis.
#[derive(Debug, Clone)]
pub struct CauchyPair {
    pub t: f64,
    /// u restricted to ∂Ω_t.
    pub f: DVector<f64>,
    /// Outward normal derivative ∂_ν u on ∂Ω_t.
    pub g: DVector<f64>,
}

impl CauchyPair {
    pub fn new(t: f64, f: DVector<f64>, g: DVector<f64>) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "trace time must be positive, got {t}"
            )));
        }
        if f.len() != g.len() {
            return Err(Error::InvalidInput(format!(
                "trace blocks disagree: f has {} coefficients, g has {}",
                f.len(),
                g.len()
            )));
        }
        Ok(CauchyPair { t, f, g })
    }

    pub fn zero(t: f64, dim: usize) -> Self {
        CauchyPair {
            t,
            f: DVector::zeros(dim),
            g: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }
}

/// The rescaled state (f̃, g̃) = (t^α f, t^{1+α} g) at log-time τ = ln t.
#[derive(Debug, Clone)]
pub struct RescaledState {
    pub tau: f64,
    pub alpha: f64,
    /// f̃ coefficients.
    pub f: DVector<f64>,
    /// g̃ coefficients.
    pub g: DVector<f64>,
}

impl RescaledState {
    pub fn t(&self) -> f64 {
        self.tau.exp()
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// H-norm ‖(f̃, g̃)‖ with the H^{1/2} ⊕ H^{−1/2} weights.
    pub fn h_norm(&self, basis: &BoundaryBasis) -> f64 {
        basis
            .sobolev_norm(&self.f, 0.5)
            .hypot(basis.sobolev_norm(&self.g, -0.5))
    }

    /// Flatten to a single vector [f̃; g̃] for the integrator.
    fn pack(&self) -> DVector<f64> {
        let d = self.dim();
        let mut y = DVector::zeros(2 * d);
        y.rows_mut(0, d).copy_from(&self.f);
        y.rows_mut(d, d).copy_from(&self.g);
        y
    }

    fn unpack(tau: f64, alpha: f64, y: &DVector<f64>) -> Self {
        let d = y.len() / 2;
        RescaledState {
            tau,
            alpha,
            f: y.rows(0, d).into_owned(),
            g: y.rows(d, d).into_owned(),
        }
    }
}

/// Exact algebraic map to the rescaled variables: f̃ = t^α f, g̃ = t^{1+α} g.
pub fn rescale_to_tau(state: &CauchyPair, alpha: f64) -> RescaledState {
    let t = state.t;
    RescaledState {
        tau: t.ln(),
        alpha,
        f: &state.f * t.powf(alpha),
        g: &state.g * t.powf(1.0 + alpha),
    }
}

/// Inverse of [`rescale_to_tau`].
pub fn unscale(rstate: &RescaledState) -> CauchyPair {
    let t = rstate.t();
    CauchyPair {
        t,
        f: &rstate.f * t.powf(-rstate.alpha),
        g: &rstate.g * t.powf(-1.0 - rstate.alpha),
    }
}

/// Pointwise nonlinearity F(x, u) with its u-derivative, applied nodally.
#[derive(Clone)]
pub struct NonlinearityModel {
    value: NodalFn,
    slope: NodalFn,
}

impl NonlinearityModel {
    pub fn new(
        value: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NonlinearityModel {
            value: Arc::new(value),
            slope: Arc::new(slope),
        }
    }

    /// F ≡ 0: the harmonic evolution.
    pub fn zero() -> Self {
        NonlinearityModel::new(|_, _| 0.0, |_, _| 0.0)
    }

    /// F(x, u) = u³.
    pub fn cubic() -> Self {
        NonlinearityModel::new(|_, u| u * u * u, |_, u| 3.0 * u * u)
    }

    /// F(x, u) = −(V(x) − λ)u: reduces the nonlinear evolution to the
    /// linear one, bit for bit.
    pub fn from_linear(potential: Option<PotentialFn>, lambda: f64) -> Self {
        let slope_v = potential.clone();
        NonlinearityModel {
            value: Arc::new(move |x: &Point, u: f64| {
                let v = potential.as_ref().map_or(0.0, |p| p(x));
                -((v - lambda) * u)
            }),
            slope: Arc::new(move |x: &Point, _u: f64| {
                let v = slope_v.as_ref().map_or(0.0, |p| p(x));
                -(v - lambda)
            }),
        }
    }

    pub fn value(&self, x: &Point, u: f64) -> f64 {
        (self.value)(x, u)
    }

    pub fn slope_at(&self, x: &Point, u: f64) -> f64 {
        (self.slope)(x, u)
    }
}

/// The boundary evolution over one domain family: geometry cache + basis +
/// potential + spectral shift λ, with the right-hand sides and integrators.
#[derive(Clone)]
pub struct BoundarySystem<'a> {
    basis: &'a BoundaryBasis,
    cache: &'a DomainFamilyCache,
    potential: Option<PotentialFn>,
    lambda: f64,
}

impl<'a> BoundarySystem<'a> {
    /// Pair a basis with a cache; the cache must have been built with
    /// `angular = basis.cache_angular()` so nodes coincide.
    pub fn new(basis: &'a BoundaryBasis, cache: &'a DomainFamilyCache) -> Result<Self> {
        let want_sphere = cache.dimension() == 3;
        if basis.is_sphere() != want_sphere {
            return Err(Error::InvalidInput(format!(
                "basis/geometry dimension mismatch: {} basis on an n = {} family",
                if basis.is_sphere() {
                    "sphere"
                } else {
                    "circle"
                },
                cache.dimension()
            )));
        }
        if basis.node_count() != cache.node_count() {
            return Err(Error::InvalidInput(format!(
                "quadrature mismatch: basis has {} nodes, cache has {}; build the cache with \
                 angular = basis.cache_angular()",
                basis.node_count(),
                cache.node_count()
            )));
        }
        Ok(BoundarySystem {
            basis,
            cache,
            potential: None,
            lambda: 0.0,
        })
    }

    pub fn with_potential(mut self, v: PotentialFn) -> Self {
        self.potential = Some(v);
        self
    }

    pub fn with_shift(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn basis(&self) -> &BoundaryBasis {
        self.basis
    }

    pub fn cache(&self) -> &DomainFamilyCache {
        self.cache
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The nonlinearity that reproduces this system's linear right-hand side.
    pub fn linear_model(&self) -> NonlinearityModel {
        NonlinearityModel::from_linear(self.potential.clone(), self.lambda)
    }

    /// d/dt (f, g) for the semilinear evolution at the state's own t.
    pub fn rhs_nonlinear(
        &self,
        state: &CauchyPair,
        model: &NonlinearityModel,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_dim(state.dim())?;
        let frame = self.cache.frame_at(state.t)?;
        Ok(self.rhs_at_frame(&frame, &state.f, &state.g, model))
    }

    /// d/dt (f, g) for the linear evolution Δu = (V − λ)u.
    pub fn rhs_linear(&self, state: &CauchyPair) -> Result<(DVector<f64>, DVector<f64>)> {
        self.rhs_nonlinear(state, &self.linear_model())
    }

    /// d/dτ (f̃, g̃): the rescaled linear evolution.
    pub fn rhs_rescaled(&self, rstate: &RescaledState) -> Result<(DVector<f64>, DVector<f64>)> {
        self.rhs_rescaled_nonlinear(rstate, &self.linear_model())
    }

    /// d/dτ (f̃, g̃) for the semilinear evolution; exact chain-rule image of
    /// [`Self::rhs_nonlinear`] under the scaling maps.
    pub fn rhs_rescaled_nonlinear(
        &self,
        rstate: &RescaledState,
        model: &NonlinearityModel,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let state = unscale(rstate);
        let (df, dg) = self.rhs_nonlinear(&state, model)?;
        let t = state.t;
        let alpha = rstate.alpha;
        let out_f = &rstate.f * alpha + df * t.powf(1.0 + alpha);
        let out_g = &rstate.g * (1.0 + alpha) + dg * t.powf(2.0 + alpha);
        Ok((out_f, out_g))
    }

    /// Shared nodal route: synthesize, multiply by frame data, analyze.
    fn rhs_at_frame(
        &self,
        frame: &BoundaryFrameData,
        f: &DVector<f64>,
        g: &DVector<f64>,
        model: &NonlinearityModel,
    ) -> (DVector<f64>, DVector<f64>) {
        let q = self.basis.node_count();
        let f_nodes = self.basis.synthesize(f);
        let g_nodes = self.basis.synthesize(g);

        // Plain (non-derivative) parts: σg in row 1, −σF(f) − σHg in row 2.
        let mut row1 = vec![0.0; q];
        let mut row2 = vec![0.0; q];
        for j in 0..q {
            let s = frame.sigma[j];
            row1[j] = s * g_nodes[j];
            row2[j] = -s * model.value(&frame.z[j], f_nodes[j]) - s * frame.h[j] * g_nodes[j];
        }

        if self.basis.is_sphere() {
            // Radial sphere family: no advection, and L_t is diagonal.
            let df_dt = self.basis.analyze(&row1);
            let mut dg_dt = self.basis.analyze(&row2);
            let t2 = frame.t * frame.t;
            for k in 0..f.len() {
                dg_dt[k] += self.basis.eigenvalue(k) / t2 * f[k];
            }
            (df_dt, dg_dt)
        } else {
            let df_nodes = self.basis.synthesize_deriv(f);
            let dg_nodes = self.basis.synthesize_deriv(g);
            // Advection T_t on both rows.
            for j in 0..q {
                let adv = frame.gamma_s[j] / frame.m_t[j];
                row1[j] += adv * df_nodes[j];
                row2[j] += adv * dg_nodes[j];
            }
            // −L_t f = −(1/m_t) ∂_θ (σ/m_t ∂_θ f), via a second derivative pass.
            let inner: Vec<f64> = (0..q)
                .map(|j| frame.sigma[j] / frame.m_t[j] * df_nodes[j])
                .collect();
            let inner_coeffs = self.basis.analyze(&inner);
            let d_inner = self.basis.synthesize_deriv(&inner_coeffs);
            for j in 0..q {
                row2[j] -= d_inner[j] / frame.m_t[j];
            }
            (self.basis.analyze(&row1), self.basis.analyze(&row2))
        }
    }

    /// Worst-case nodal-product aliasing of a state: the round-trip residual
    /// of σ_t·f at the state's t. Large values mean the truncation cannot
    /// represent the products the evolution needs.
    pub fn aliasing_diagnostic(&self, state: &CauchyPair) -> Result<f64> {
        self.check_dim(state.dim())?;
        let frame = self.cache.frame_at(state.t)?;
        let f_nodes = self.basis.synthesize(&state.f);
        let prod: Vec<f64> = (0..f_nodes.len())
            .map(|j| frame.sigma[j] * f_nodes[j])
            .collect();
        Ok(self.basis.aliasing_residual(&prod))
    }

    /// Integrate the linear t-form from the state's t to `t1`.
    pub fn integrate_linear(
        &self,
        state: &CauchyPair,
        t1: f64,
        solver: &Dopri5,
    ) -> Result<(CauchyPair, StepStats)> {
        self.integrate_nonlinear(state, &self.linear_model(), t1, solver)
    }

    /// Integrate the semilinear t-form from the state's t to `t1`.
    pub fn integrate_nonlinear(
        &self,
        state: &CauchyPair,
        model: &NonlinearityModel,
        t1: f64,
        solver: &Dopri5,
    ) -> Result<(CauchyPair, StepStats)> {
        self.check_dim(state.dim())?;
        self.check_t_range(state.t)?;
        self.check_t_range(t1)?;
        let d = state.dim();
        let y0 = CauchyPair::pack(state);
        let mut inner_err: Option<Error> = None;
        let rhs = |t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
            let pair = CauchyPair {
                t,
                f: y.rows(0, d).into_owned(),
                g: y.rows(d, d).into_owned(),
            };
            match self.rhs_nonlinear(&pair, model) {
                Ok((df, dg)) => {
                    dy.rows_mut(0, d).copy_from(&df);
                    dy.rows_mut(d, d).copy_from(&dg);
                }
                Err(e) => {
                    inner_err.get_or_insert(e);
                    dy.fill(f64::NAN);
                }
            }
        };
        let result = solver.integrate(rhs, state.t, t1, &y0);
        match result {
            Ok((y1, stats)) => Ok((
                CauchyPair {
                    t: t1,
                    f: y1.rows(0, d).into_owned(),
                    g: y1.rows(d, d).into_owned(),
                },
                stats,
            )),
            Err(e) => Err(inner_err.unwrap_or(e)),
        }
    }

    /// Integrate the rescaled form from the state's τ to `tau1`.
    pub fn integrate_rescaled(
        &self,
        rstate: &RescaledState,
        tau1: f64,
        solver: &Dopri5,
    ) -> Result<(RescaledState, StepStats)> {
        let (_, end, stats) = self.integrate_rescaled_sampled(rstate, tau1, &[], solver)?;
        Ok((end, stats))
    }

    /// Integrate the rescaled form, sampling the trajectory at `taus`
    /// (ordered in the direction of integration).
    pub fn integrate_rescaled_sampled(
        &self,
        rstate: &RescaledState,
        tau1: f64,
        taus: &[f64],
        solver: &Dopri5,
    ) -> Result<(Vec<RescaledState>, RescaledState, StepStats)> {
        self.check_dim(rstate.dim())?;
        self.check_tau_range(rstate.tau)?;
        self.check_tau_range(tau1)?;
        let d = rstate.dim();
        let alpha = rstate.alpha;
        let model = self.linear_model();
        let y0 = rstate.pack();
        let mut inner_err: Option<Error> = None;
        let rhs = |tau: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
            let rs = RescaledState::unpack(tau, alpha, y);
            match self.rhs_rescaled_nonlinear(&rs, &model) {
                Ok((df, dg)) => {
                    dy.rows_mut(0, d).copy_from(&df);
                    dy.rows_mut(d, d).copy_from(&dg);
                }
                Err(e) => {
                    inner_err.get_or_insert(e);
                    dy.fill(f64::NAN);
                }
            }
        };
        let result = solver.integrate_sampled(rhs, rstate.tau, tau1, &y0, taus);
        match result {
            Ok((sampled, y1, stats)) => {
                let states = sampled
                    .iter()
                    .zip(taus)
                    .map(|(y, &tau)| RescaledState::unpack(tau, alpha, y))
                    .collect();
                Ok((states, RescaledState::unpack(tau1, alpha, &y1), stats))
            }
            Err(e) => Err(inner_err.unwrap_or(e)),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.basis.dim() {
            return Err(Error::InvalidInput(format!(
                "state has {} coefficients but the basis has {}",
                dim,
                self.basis.dim()
            )));
        }
        Ok(())
    }

    fn check_t_range(&self, t: f64) -> Result<()> {
        let lo = self.cache.t_min();
        if !(t >= lo * (1.0 - 1e-12) && t <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "t = {t} outside the cached family range [{lo}, 1]"
            )));
        }
        Ok(())
    }

    fn check_tau_range(&self, tau: f64) -> Result<()> {
        let lo = self.cache.t_min().ln();
        if !(tau >= lo - 1e-12 && tau <= 1e-12) {
            return Err(Error::Domain(format!(
                "tau = {tau} outside the cached family range [{lo}, 0]"
            )));
        }
        Ok(())
    }
}

impl CauchyPair {
    fn pack(&self) -> DVector<f64> {
        let d = self.dim();
        let mut y = DVector::zeros(2 * d);
        y.rows_mut(0, d).copy_from(&self.f);
        y.rows_mut(d, d).copy_from(&self.g);
        y
    }
}
