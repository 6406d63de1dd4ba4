//! The stable Jacobi field J(t, x), the renormalization time tau(s, t, x),
//! and the normalizing time t* with tau(T, t*, x) = 1.
//!
//! In constant curvature everything is closed form: J(t) = e^{-t} and
//! tau(s, t, x) = e^{-t} s. For a curvature sampler K with range
//! [k_lo, k_hi] in (-inf, 0), the decaying Jacobi branch is produced by
//! integrating the Riccati equation u' = -K - u^2 backward from a horizon
//! where u has locked onto -sqrt(-K); forward integration of the
//! second-order equation would let the growing mode swamp the decaying one.
//!
//! Along a fixed orbit family the decaying solution anchored at offset sigma
//! is the global solution shifted by sigma, so one backward pass serves all
//! quadrature nodes of a tau computation:
//! J_t(anchor + sigma) = exp(C(sigma + t) - C(sigma)) with C the cumulative
//! integral of u.

use crate::cover::CoverPoint;
use crate::error::{Error, Result};
use crate::quad::{GL4_NODES, GL4_WEIGHTS};
use std::sync::OnceLock;

/// Riccati grid spacing; a power of two so requested times snap onto grid
/// nodes exactly.
const RICCATI_H: f64 = 1.0 / 256.0;

/// Horizon margin in units of 1/sqrt(-k_hi); the backward flow contracts
/// seed error by e^{-2 sqrt(-K) margin}.
const HORIZON_MARGIN: f64 = 30.0;

const STABILIZATION_TOL: f64 = 1e-8;

/// Sinusoidal curvature sampler K(t) = -(mean + amp sin(freq t + phase)).
#[derive(Clone, Debug)]
pub struct Sampler {
    pub mean: f64,
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
    h_top_cache: OnceLock<(f64, f64)>,
}

impl Sampler {
    pub fn new(mean: f64, amp: f64, freq: f64, phase: f64) -> Sampler {
        assert!(amp >= 0.0 && mean - amp > 0.0, "sampler range must stay negative");
        Sampler { mean, amp, freq, phase, h_top_cache: OnceLock::new() }
    }

    pub fn k(&self, t: f64) -> f64 {
        -(self.mean + self.amp * (self.freq * t + self.phase).sin())
    }

    /// Lower curvature bound (most negative).
    pub fn k_lo(&self) -> f64 {
        -(self.mean + self.amp)
    }

    /// Upper curvature bound, still negative.
    pub fn k_hi(&self) -> f64 {
        -(self.mean - self.amp)
    }

    fn shifted(&self, offset: f64) -> Sampler {
        Sampler::new(self.mean, self.amp, self.freq, self.phase + self.freq * offset)
    }
}

/// Constant-curvature model (K = -1) or a curvature sampler driving the
/// Jacobi/tau machinery.
#[derive(Clone, Debug)]
pub enum CurvatureModel {
    Constant,
    Sampler(Sampler),
}

impl CurvatureModel {
    pub fn sinusoidal(mean: f64, amp: f64, freq: f64, phase: f64) -> CurvatureModel {
        CurvatureModel::Sampler(Sampler::new(mean, amp, freq, phase))
    }

    pub fn k_bounds(&self) -> (f64, f64) {
        match self {
            CurvatureModel::Constant => (-1.0, -1.0),
            CurvatureModel::Sampler(s) => (s.k_lo(), s.k_hi()),
        }
    }

    /// Contraction bound lambda <= sqrt(-k_hi).
    pub fn lambda(&self) -> f64 {
        (-self.k_bounds().1).sqrt()
    }

    /// Topological entropy of the time-one geodesic map: 1 in constant
    /// curvature, estimated from the arc-growth slope for samplers.
    pub fn h_top(&self) -> f64 {
        match self {
            CurvatureModel::Constant => 1.0,
            CurvatureModel::Sampler(s) => s.h_top_cache.get_or_init(|| estimate_h_top(s)).0,
        }
    }

    /// Standard error of the h_top fit (0 for the constant model).
    pub fn h_top_std_error(&self) -> f64 {
        match self {
            CurvatureModel::Constant => 0.0,
            CurvatureModel::Sampler(s) => s.h_top_cache.get_or_init(|| estimate_h_top(s)).1,
        }
    }
}

/// One backward Riccati pass on a uniform grid [t_lo, horizon], with
/// 4th-order cumulative integrals of u anchored at 0. A companion state with
/// a perturbed horizon seed rides along to measure seed stabilization.
struct UPass {
    t_lo: f64,
    h: f64,
    u: Vec<f64>,
    /// cum[i] = integral of u from 0 to node i.
    cum: Vec<f64>,
}

impl UPass {
    fn run(s: &Sampler, t_lo: f64, t_hi: f64) -> Result<UPass> {
        let k_hi = s.k_hi();
        let horizon = t_hi + HORIZON_MARGIN / (-k_hi).sqrt();
        let h = RICCATI_H;
        let lo_idx = (t_lo / h).floor() as i64;
        let hi_idx = (horizon / h).ceil() as i64;
        let n = (hi_idx - lo_idx) as usize;
        let t0 = lo_idx as f64 * h;
        let node = |i: usize| t0 + i as f64 * h;
        let zero_idx = (-lo_idx) as usize;

        let f = |a: f64, v: f64| -s.k(a) - v * v;
        let rk4_down = |a_right: f64, v: f64| {
            let k1 = f(a_right, v);
            let k2 = f(a_right - h / 2.0, v - h / 2.0 * k1);
            let k3 = f(a_right - h / 2.0, v - h / 2.0 * k2);
            let k4 = f(a_right - h, v - h * k3);
            v - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        };

        let mut u = vec![0.0; n + 1];
        u[n] = -(-s.k(node(n))).sqrt();
        let mut shadow = 0.5 * u[n];
        let mut shadow_at_zero = shadow;
        for i in (0..n).rev() {
            let a = node(i + 1);
            u[i] = rk4_down(a, u[i + 1]);
            shadow = rk4_down(a, shadow);
            if i == zero_idx {
                shadow_at_zero = shadow;
            }
        }
        let stabilization = (u[zero_idx] - shadow_at_zero).abs();
        if stabilization > STABILIZATION_TOL {
            return Err(Error::HorizonTooShort {
                residual: stabilization,
                tol: STABILIZATION_TOL,
            });
        }

        // cumulative trapezoid with Euler-Maclaurin endpoint correction;
        // u' = -K - u^2 is analytic, giving 4th order at every node.
        let du = |i: usize| -s.k(node(i)) - u[i] * u[i];
        let mut cum = vec![0.0; n + 1];
        for i in 1..=n {
            cum[i] =
                cum[i - 1] + h / 2.0 * (u[i - 1] + u[i]) + h * h / 12.0 * (du(i - 1) - du(i));
        }
        let at_zero = cum[zero_idx];
        for c in cum.iter_mut() {
            *c -= at_zero;
        }
        Ok(UPass { t_lo: t0, h, u, cum })
    }

    /// integral of u from 0 to t, Hermite-corrected between nodes.
    fn integral_to(&self, t: f64, s: &Sampler) -> f64 {
        let fi = (t - self.t_lo) / self.h;
        let i = (fi.floor().max(0.0) as usize).min(self.u.len() - 2);
        let frac = fi - i as f64;
        if frac.abs() < 1e-12 {
            return self.cum[i];
        }
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let t0 = self.t_lo + i as f64 * self.h;
        let t1 = t0 + self.h;
        let (d0, d1) = (-s.k(t0) - u0 * u0, -s.k(t1) - u1 * u1);
        // cubic Hermite on [t0, t1], integrated over the partial subinterval
        let h = self.h;
        let x = frac;
        let x2 = x * x;
        let x3 = x * x2;
        let x4 = x2 * x2;
        let i00 = x - 1.5 * x3 + 0.75 * x4;
        let i10 = 0.5 * x2 - x3 + 0.375 * x4;
        let i01 = 1.5 * x3 - 0.75 * x4;
        let i11 = -0.5 * x3 + 0.375 * x4;
        self.cum[i] + h * (i00 * u0 + i01 * u1) + h * h * (i10 * d0 + i11 * d1)
    }

    /// J between offsets: exp(C(b) - C(a)).
    fn j_between(&self, a: f64, b: f64, s: &Sampler) -> f64 {
        (self.integral_to(b, s) - self.integral_to(a, s)).exp()
    }
}

/// The decaying Jacobi solution J(t) along the orbit anchored at `phase`:
/// J'' + K(phase + .) J = 0, J(0) = 1, J -> 0 at +infinity.
pub fn jacobi_field_at(model: &CurvatureModel, phase: f64, t: f64) -> Result<f64> {
    match model {
        CurvatureModel::Constant => Ok((-t).exp()),
        CurvatureModel::Sampler(s) => {
            let sh = s.shifted(phase);
            let pass = UPass::run(&sh, t.min(0.0), t.max(0.0))?;
            Ok(pass.integral_to(t, &sh).exp())
        }
    }
}

/// Jacobi field along the model's own orbit (phase 0).
pub fn jacobi_field(model: &CurvatureModel, t: f64) -> Result<f64> {
    jacobi_field_at(model, 0.0, t)
}

/// J(t_i) at several times from a single backward pass.
pub fn jacobi_profile(model: &CurvatureModel, phase: f64, ts: &[f64]) -> Result<Vec<f64>> {
    match model {
        CurvatureModel::Constant => Ok(ts.iter().map(|t| (-t).exp()).collect()),
        CurvatureModel::Sampler(s) => {
            let lo = ts.iter().cloned().fold(0.0, f64::min);
            let hi = ts.iter().cloned().fold(0.0, f64::max);
            let sh = s.shifted(phase);
            let pass = UPass::run(&sh, lo, hi)?;
            Ok(ts.iter().map(|&t| pass.integral_to(t, &sh).exp()).collect())
        }
    }
}

/// (J_t at `phase`, J_{-t} at `phase + t`), from one shared pass so the
/// inverse identity J_t(x) J_{-t}(g_t x) = 1 holds to roundoff.
pub fn jacobi_pair(model: &CurvatureModel, phase: f64, t: f64) -> Result<(f64, f64)> {
    match model {
        CurvatureModel::Constant => Ok(((-t).exp(), t.exp())),
        CurvatureModel::Sampler(s) => {
            let sh = s.shifted(phase);
            let pass = UPass::run(&sh, t.min(0.0), t.max(0.0))?;
            let c = pass.integral_to(t, &sh);
            Ok((c.exp(), (-c).exp()))
        }
    }
}

/// Record of one renormalization-time computation.
#[derive(Clone, Debug)]
pub struct RenormRecord {
    pub s: f64,
    pub t: f64,
    /// tau(s, t, x); closed form in constant curvature, quadrature otherwise.
    pub tau: f64,
    /// The J-quadrature route (equals `tau` for samplers).
    pub tau_quadrature: f64,
    /// Quadrature error estimate (step-halving difference).
    pub quad_error: f64,
    /// Samples of J_t along the arc, (sigma, J_t at h_sigma x).
    pub j_samples: Vec<(f64, f64)>,
}

/// tau(s, t, x) by quadrature of dtau/ds = J_t(h_s x) along the horocycle
/// arc anchored at `phase`; the horocycle flow advances the sampler phase.
pub fn tau_at_phase(
    model: &CurvatureModel,
    phase: f64,
    s: f64,
    t: f64,
    step: f64,
) -> Result<RenormRecord> {
    assert!(
        step > 0.0 && step <= 0.1f64.max(s.abs()),
        "tau step must be in (0, max(0.1, |s|)]"
    );
    if s == 0.0 {
        return Ok(RenormRecord {
            s,
            t,
            tau: 0.0,
            tau_quadrature: 0.0,
            quad_error: 0.0,
            j_samples: vec![],
        });
    }
    match model {
        CurvatureModel::Constant => {
            let j = (-t).exp();
            let quad = gl_quad(s, step / 2.0, |_| j);
            let coarse = gl_quad(s, step, |_| j);
            Ok(RenormRecord {
                s,
                t,
                tau: j * s,
                tau_quadrature: quad,
                quad_error: (quad - coarse).abs(),
                j_samples: vec![(0.0, j), (s, j)],
            })
        }
        CurvatureModel::Sampler(smp) => {
            let sh = smp.shifted(phase);
            let lo = [0.0, s, t, s + t].into_iter().fold(f64::INFINITY, f64::min);
            let hi = [0.0, s, t, s + t].into_iter().fold(f64::NEG_INFINITY, f64::max);
            let pass = UPass::run(&sh, lo, hi)?;
            let j_at = |sigma: f64| pass.j_between(sigma, sigma + t, &sh);
            let coarse = gl_quad(s, step, j_at);
            let fine = gl_quad(s, step / 2.0, j_at);
            let n_samp = 33;
            let j_samples = (0..n_samp)
                .map(|i| {
                    let sigma = s * i as f64 / (n_samp - 1) as f64;
                    (sigma, j_at(sigma))
                })
                .collect();
            Ok(RenormRecord {
                s,
                t,
                tau: fine,
                tau_quadrature: fine,
                quad_error: (fine - coarse).abs(),
                j_samples,
            })
        }
    }
}

/// tau at a cover point: deck-invariant by construction (the deck coordinate
/// is never read), anchored at phase 0 in sampler mode.
pub fn tau(
    model: &CurvatureModel,
    _x: &CoverPoint,
    s: f64,
    t: f64,
    step: f64,
) -> Result<RenormRecord> {
    tau_at_phase(model, 0.0, s, t, step)
}

fn gl_quad(s: f64, step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = (s.abs() / step).ceil().max(1.0) as usize;
    let h = s / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        let half = h / 2.0;
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

/// Default tau quadrature step.
pub const TAU_STEP: f64 = 0.05;

/// The normalizing time t* with tau(T, t*, x) = 1; log T exactly in constant
/// curvature, bisection otherwise.
pub fn normalizing_time(model: &CurvatureModel, x: &CoverPoint, big_t: f64) -> Result<f64> {
    let _ = x;
    normalizing_time_at_phase(model, 0.0, big_t)
}

pub fn normalizing_time_at_phase(
    model: &CurvatureModel,
    phase: f64,
    big_t: f64,
) -> Result<f64> {
    assert!(big_t >= 1.0, "normalizing time wants T >= 1");
    if let CurvatureModel::Constant = model {
        return Ok(big_t.ln());
    }
    let upper = 2.0 * big_t.ln() / model.h_top() + 50.0;
    let step = (big_t / 512.0).clamp(0.05, 0.5);
    let tau_of = |t: f64| -> Result<f64> { Ok(tau_at_phase(model, phase, big_t, t, step)?.tau) };
    let (mut lo, mut hi) = (0.0, upper);
    if tau_of(lo)? - 1.0 < 0.0 || tau_of(hi)? - 1.0 > 0.0 {
        return Err(Error::BracketFailure { upper });
    }
    let mut t_star = 0.5 * (lo + hi);
    for _ in 0..200 {
        t_star = 0.5 * (lo + hi);
        let v = tau_of(t_star)? - 1.0;
        if v.abs() <= 1e-9 || hi - lo < 1e-10 {
            break;
        }
        if v > 0.0 {
            lo = t_star;
        } else {
            hi = t_star;
        }
    }
    let residual = (tau_of(t_star)? - 1.0).abs();
    if residual > 1e-8 {
        return Err(Error::BracketFailure { upper });
    }
    Ok(t_star)
}

/// Slope fit of -log(mean_sigma J_t) against t; the sampler analogue of the
/// arc-growth entropy. Returns (h_top, standard error of the slope).
fn estimate_h_top(s: &Sampler) -> (f64, f64) {
    let ts = [2.0, 3.0, 4.0, 5.0, 6.0];
    let period = 2.0 * std::f64::consts::PI / s.freq.max(1e-6);
    let n_phase = 16;
    let mut ys = Vec::with_capacity(ts.len());
    for &t in &ts {
        let mut mean = 0.0;
        for i in 0..n_phase {
            let sh = s.shifted(period * i as f64 / n_phase as f64);
            let pass = UPass::run(&sh, 0.0, t).expect("h_top pass cannot fail at fixed margin");
            mean += pass.integral_to(t, &sh).exp();
        }
        ys.push(-(mean / n_phase as f64).ln());
    }
    linear_slope(&ts, &ys)
}

pub(crate) fn linear_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - my - slope * (x - mx);
            e * e
        })
        .sum();
    let se = (resid / (n - 2.0).max(1.0) / sxx).sqrt();
    (slope, se)
}
