//! Embedded adaptive Runge–Kutta integrator (Dormand–Prince 5(4)) with dense
//! output and a norm-overflow guard.
//!
//! All flow and boundary-system integration in this crate runs through this
//! one solver. Design points:
//!
//! - **FSAL**: the 7th stage of an accepted step seeds the next step's first
//!   stage, so an accepted step costs 6 fresh evaluations.
//! - **Step control**: the classical Hairer–Nørsett–Wanner controller with a
//!   β-stabilized exponent (`err^(1/5 − 0.75β) / err_prev^β`), safety factor
//!   and growth limits.
//! - **Dense output**: the standard quartic interpolant; `integrate_sampled`
//!   evaluates it on the fly at requested times so trajectories of any
//!   length need O(dim) memory.
//! - **Overflow guard**: when the sup-norm of the state crosses
//!   `overflow_limit` the solver aborts with [`Error::OverflowAbort`]
//!   carrying the time of failure. Integrating the ill-posed direction of
//!   the boundary system with unfiltered data is *supposed* to end here; the
//!   guard turns a silent inf/NaN cascade into a diagnostic.
//! - Direction-agnostic: `t1 < t0` integrates backward.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Butcher tableau of the Dormand–Prince 5(4) pair.
mod tableau {
    pub const C2: f64 = 1.0 / 5.0;
    pub const C3: f64 = 3.0 / 10.0;
    pub const C4: f64 = 4.0 / 5.0;
    pub const C5: f64 = 8.0 / 9.0;

    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;
    pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;
    pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0;
    pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0;
    pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;
    pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0;
    pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;
    pub const A71: f64 = 35.0 / 384.0;
    pub const A73: f64 = 500.0 / 1113.0;
    pub const A74: f64 = 125.0 / 192.0;
    pub const A75: f64 = -2187.0 / 6784.0;
    pub const A76: f64 = 11.0 / 84.0;

    // b − b̂: coefficients of the embedded error estimate.
    pub const E1: f64 = 71.0 / 57600.0;
    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;
    pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;
    pub const E7: f64 = -1.0 / 40.0;

    // Dense-output coefficients.
    pub const D1: f64 = -12715105075.0 / 11282082432.0;
    pub const D3: f64 = 87487479700.0 / 32700410799.0;
    pub const D4: f64 = -10690763975.0 / 1880347072.0;
    pub const D5: f64 = 701980252875.0 / 199316789632.0;
    pub const D6: f64 = -1453857185.0 / 822651844.0;
    pub const D7: f64 = 69997945.0 / 29380423.0;
}

/// Adaptive Dormand–Prince 5(4) solver configuration.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    /// Relative tolerance per step.
    pub rtol: f64,
    /// Absolute tolerance per step.
    pub atol: f64,
    /// Initial step magnitude; 0 selects one automatically.
    pub h_init: f64,
    /// Maximum step magnitude; 0 means the full interval.
    pub h_max: f64,
    /// Hard cap on total steps.
    pub max_steps: usize,
    /// Safety factor of the controller.
    pub safety: f64,
    /// Smallest allowed step-shrink factor per rejection (guard, not goal).
    pub fac_min: f64,
    /// Largest allowed step-growth factor per acceptance.
    pub fac_max: f64,
    /// Stabilization exponent of the step controller.
    pub beta: f64,
    /// Sup-norm guard: exceeding this aborts with `Error::OverflowAbort`.
    pub overflow_limit: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 0.0,
            h_max: 0.0,
            max_steps: 10_000_000,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 10.0,
            beta: 0.04,
            overflow_limit: 1e12,
        }
    }
}

impl Dopri5 {
    /// Solver with the given relative tolerance (absolute = rtol·10⁻²).
    pub fn with_tol(rtol: f64) -> Self {
        Dopri5 {
            rtol,
            atol: rtol * 1e-2,
            ..Dopri5::default()
        }
    }
}

/// Counters reported by an integration run.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl StepStats {
    /// Merge counters from another integration leg.
    pub fn absorb(&mut self, other: StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

/// One accepted step's dense-output segment: evaluates the quartic
/// interpolant anywhere inside [t, t + h].
struct DenseSegment<'a> {
    t: f64,
    h: f64,
    cont: &'a [DVector<f64>; 5],
}

impl DenseSegment<'_> {
    fn eval(&self, t: f64) -> DVector<f64> {
        let theta = (t - self.t) / self.h;
        let th1 = 1.0 - theta;
        let [c0, c1, c2, c3, c4] = self.cont;
        // c0 + θ(c1 + (1−θ)(c2 + θ(c3 + (1−θ)c4)))
        let mut out = c4 * th1;
        out += c3;
        out *= theta;
        out += c2;
        out *= th1;
        out += c1;
        out *= theta;
        out += c0;
        out
    }
}

impl Dopri5 {
    /// Integrate y' = f(t, y) from `t0` to `t1` (either direction) and
    /// return the final state.
    pub fn integrate<F>(
        &self,
        f: F,
        t0: f64,
        t1: f64,
        y0: &DVector<f64>,
    ) -> Result<(DVector<f64>, StepStats)>
    where
        F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    {
        let mut y_end = None;
        let stats = self.run(f, t0, t1, y0, false, |_seg| {}, |y| y_end = Some(y))?;
        Ok((y_end.expect("integration produced no final state"), stats))
    }

    /// Integrate and additionally evaluate the dense interpolant at the
    /// requested `samples`, which must be sorted in the direction of
    /// integration and lie within [t0, t1]. Returns (sampled states, final
    /// state, stats).
    pub fn integrate_sampled<F>(
        &self,
        f: F,
        t0: f64,
        t1: f64,
        y0: &DVector<f64>,
        samples: &[f64],
    ) -> Result<(Vec<DVector<f64>>, DVector<f64>, StepStats)>
    where
        F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    {
        let dir = (t1 - t0).signum();
        for w in samples.windows(2) {
            assert!(
                (w[1] - w[0]) * dir >= 0.0,
                "samples must be ordered in the integration direction"
            );
        }
        for &s in samples {
            assert!(
                (s - t0) * dir >= -1e-12 && (t1 - s) * dir >= -1e-12,
                "sample {s} outside [{t0}, {t1}]"
            );
        }
        let mut out: Vec<DVector<f64>> = Vec::with_capacity(samples.len());
        let mut next = 0usize;
        // Samples coinciding with t0 are served by the initial state.
        let mut y_end = None;
        let stats = self.run(
            f,
            t0,
            t1,
            y0,
            true,
            |seg| {
                while next < samples.len() {
                    let s = samples[next];
                    let inside =
                        (s - seg.t) * dir >= -1e-12 && (s - (seg.t + seg.h)) * dir <= 1e-12;
                    if !inside {
                        break;
                    }
                    out.push(seg.eval(s));
                    next += 1;
                }
            },
            |y| y_end = Some(y),
        )?;
        let y_end = y_end.expect("integration produced no final state");
        // Any stragglers sit at t1 up to roundoff.
        while next < samples.len() {
            out.push(y_end.clone());
            next += 1;
        }
        Ok((out, y_end, stats))
    }

    /// Core loop. `want_dense` controls whether interpolation coefficients
    /// are formed; `on_segment` sees every accepted step's dense segment.
    #[allow(clippy::too_many_arguments)]
    fn run<F, S, E>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y0: &DVector<f64>,
        want_dense: bool,
        mut on_segment: S,
        mut on_end: E,
    ) -> Result<StepStats>
    where
        F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
        S: FnMut(&DenseSegment),
        E: FnMut(DVector<f64>),
    {
        use tableau::*;
        let n = y0.len();
        let span = t1 - t0;
        if span == 0.0 {
            on_end(y0.clone());
            return Ok(StepStats::default());
        }
        let dir = span.signum();
        let h_max = if self.h_max > 0.0 {
            self.h_max
        } else {
            span.abs()
        };

        let mut stats = StepStats::default();
        let mut y = y0.clone();
        let mut t = t0;

        let mut k1 = DVector::zeros(n);
        let mut k2 = DVector::zeros(n);
        let mut k3 = DVector::zeros(n);
        let mut k4 = DVector::zeros(n);
        let mut k5 = DVector::zeros(n);
        let mut k6 = DVector::zeros(n);
        let mut k7 = DVector::zeros(n);
        let mut yst = DVector::zeros(n);
        let mut ynew = DVector::zeros(n);
        let mut cont: [DVector<f64>; 5] = std::array::from_fn(|_| DVector::zeros(n));

        f(t, &y, &mut k1);
        stats.rhs_evals += 1;
        self.check_finite(&y, t, t0)?;

        let mut h = if self.h_init > 0.0 {
            dir * self.h_init.min(h_max)
        } else {
            dir * self.initial_step(&mut f, t0, &y, &k1, dir, h_max, &mut stats)
        };

        let mut fac_old: f64 = 1e-4;
        let expo = 0.2 - self.beta * 0.75;
        let mut last = false;

        for _ in 0..self.max_steps {
            if (t + h - t1) * dir >= 0.0 {
                h = t1 - t;
                last = true;
            }

            // Six fresh stages (k1 carried over FSAL-style).
            for i in 0..n {
                yst[i] = y[i] + h * A21 * k1[i];
            }
            f(t + C2 * h, &yst, &mut k2);
            for i in 0..n {
                yst[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * h, &yst, &mut k3);
            for i in 0..n {
                yst[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * h, &yst, &mut k4);
            for i in 0..n {
                yst[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * h, &yst, &mut k5);
            for i in 0..n {
                yst[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + h, &yst, &mut k6);
            for i in 0..n {
                ynew[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t + h, &ynew, &mut k7);
            stats.rhs_evals += 6;

            // Weighted RMS error of the embedded difference.
            let mut err_sq = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let mut err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                err = 1e10; // force rejection; shrink and retry
            }

            let fac11 = err.powf(expo);
            if err <= 1.0 {
                // Accept.
                let fac = (fac11 / fac_old.powf(self.beta) / self.safety)
                    .clamp(1.0 / self.fac_max, 1.0 / self.fac_min);
                fac_old = err.max(1e-4);
                if want_dense {
                    let seg_h = h;
                    for i in 0..n {
                        let ydiff = ynew[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        cont[0][i] = y[i];
                        cont[1][i] = ydiff;
                        cont[2][i] = bspl;
                        cont[3][i] = ydiff - h * k7[i] - bspl;
                        cont[4][i] = h
                            * (D1 * k1[i]
                                + D3 * k3[i]
                                + D4 * k4[i]
                                + D5 * k5[i]
                                + D6 * k6[i]
                                + D7 * k7[i]);
                    }
                    on_segment(&DenseSegment {
                        t,
                        h: seg_h,
                        cont: &cont,
                    });
                }
                t += h;
                std::mem::swap(&mut y, &mut ynew);
                std::mem::swap(&mut k1, &mut k7); // FSAL
                stats.accepted += 1;

                self.check_finite(&y, t, t0)?;

                if last {
                    on_end(y);
                    return Ok(stats);
                }

                h = (h / fac).clamp(-h_max, h_max);
                if h == 0.0 {
                    h = dir * f64::MIN_POSITIVE * 1e4;
                }
            } else {
                // Reject: shrink and retry.
                stats.rejected += 1;
                last = false;
                h /= (fac11 / self.safety).min(1.0 / self.fac_min);
            }

            if (t + h) == t {
                return Err(Error::Integration {
                    reason: format!("step size underflow (h = {h:.3e})"),
                    t,
                });
            }
        }
        Err(Error::Integration {
            reason: format!("step limit {} exhausted", self.max_steps),
            t,
        })
    }

    /// Guard: clean overflow becomes `OverflowAbort` (with τ = t, since all
    /// long-running integrations in this crate run in log-time), any other
    /// non-finite state an `Integration` error.
    fn check_finite(&self, y: &DVector<f64>, t: f64, _t0: f64) -> Result<()> {
        let mut norm: f64 = 0.0;
        for &v in y.iter() {
            if !v.is_finite() {
                return Err(Error::Integration {
                    reason: "non-finite state component".into(),
                    t,
                });
            }
            norm = norm.max(v.abs());
        }
        if norm > self.overflow_limit {
            return Err(Error::OverflowAbort {
                tau: t,
                norm,
                limit: self.overflow_limit,
            });
        }
        Ok(())
    }

    /// Automatic initial step (Hairer–Nørsett–Wanner II.4): balance the
    /// scaled norms of y and f, then refine with one Euler probe.
    #[allow(clippy::too_many_arguments)]
    fn initial_step<F>(
        &self,
        f: &mut F,
        t0: f64,
        y0: &DVector<f64>,
        f0: &DVector<f64>,
        dir: f64,
        h_max: f64,
        stats: &mut StepStats,
    ) -> f64
    where
        F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    {
        let n = y0.len();
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let sc = self.atol + self.rtol * y0[i].abs();
            d0 += (y0[i] / sc) * (y0[i] / sc);
            d1 += (f0[i] / sc) * (f0[i] / sc);
        }
        d0 = (d0 / n as f64).sqrt();
        d1 = (d1 / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(h_max);

        let mut y1 = y0.clone();
        for i in 0..n {
            y1[i] += dir * h0 * f0[i];
        }
        let mut f1 = DVector::zeros(n);
        f(t0 + dir * h0, &y1, &mut f1);
        stats.rhs_evals += 1;
        let mut d2 = 0.0;
        for i in 0..n {
            let sc = self.atol + self.rtol * y0[i].abs();
            let df = (f1[i] - f0[i]) / sc;
            d2 += df * df;
        }
        d2 = (d2 / n as f64).sqrt() / h0;

        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        (100.0 * h0).min(h1).min(h_max)
    }
}
