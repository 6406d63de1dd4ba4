//! Horocycle ergodic integrals on the cover and the three experiment
//! pipelines: asymptotics with the oscillating factor, equidistribution of
//! geodesic-pushed horocycle arcs, and the compact-case power deviation.

use crate::cover::{CoverLattice, CoverPoint};
use crate::error::{Error, Result};
use crate::fourier::CoverObservable;
use crate::geometry::horocycle_step;
use crate::jacobi::{normalizing_time, CurvatureModel};
use crate::par::parallel_map;
use crate::quad::{GL4_NODES, GL4_WEIGHTS};
use crate::spectral::CovarianceMatrix;
use crate::stats;

/// Walks a horocycle orbit monotonically, keeping the point reduced and the
/// deck coordinate current. Advancing by more than a unit step is chunked.
pub struct HorocycleCursor<'a> {
    lat: &'a CoverLattice,
    point: CoverPoint,
    s: f64,
}

impl<'a> HorocycleCursor<'a> {
    pub fn new(lat: &'a CoverLattice, start: CoverPoint) -> HorocycleCursor<'a> {
        HorocycleCursor { lat, point: start, s: 0.0 }
    }

    pub fn advance_to(&mut self, target: f64) -> Result<&CoverPoint> {
        let mut remaining = target - self.s;
        while remaining != 0.0 {
            let ds = remaining.clamp(-1.0, 1.0);
            let raw = horocycle_step(&self.point.base, ds);
            let (base, word) = self.lat.group.reduce_retrying(&raw)?;
            for (v, w) in self.point.deck.iter_mut().zip(self.lat.word_deck(&word)) {
                *v -= w;
            }
            self.point.base = base;
            remaining -= ds;
        }
        self.s = target;
        Ok(&self.point)
    }

    pub fn point(&self) -> &CoverPoint {
        &self.point
    }
}

/// Composite Gauss-Legendre integral of `f` along the horocycle orbit of
/// `x`, one pass at the given panel width.
fn orbit_integral_pass<F: Fn(&CoverPoint) -> f64>(
    lat: &CoverLattice,
    f: &F,
    x: &CoverPoint,
    t_total: f64,
    step: f64,
) -> Result<f64> {
    if t_total == 0.0 {
        return Ok(0.0);
    }
    let n = (t_total.abs() / step).ceil().max(1.0) as usize;
    let h = t_total / n as f64;
    let mut cursor = HorocycleCursor::new(lat, x.clone());
    let mut total = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        let half = h / 2.0;
        for (node, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let p = cursor.advance_to(mid + half * node)?;
            total += w * half * f(p);
        }
    }
    Ok(total)
}

/// Horocycle ergodic integral with a step-halving error estimate; the
/// reported error bounds the change of a further halving to within a factor
/// of a few for smooth integrands.
pub fn horocycle_integral<F: Fn(&CoverPoint) -> f64>(
    lat: &CoverLattice,
    f: &F,
    x: &CoverPoint,
    t_total: f64,
    step: f64,
) -> Result<(f64, f64)> {
    let coarse = orbit_integral_pass(lat, f, x, t_total, step)?;
    let fine = orbit_integral_pass(lat, f, x, t_total, step / 2.0)?;
    Ok((fine, (fine - coarse).abs()))
}

/// Horocycle integral of a cover observable, enforcing the step
/// precondition tied to the bump scale.
pub fn observable_integral(
    lat: &CoverLattice,
    f: &CoverObservable,
    x: &CoverPoint,
    t_total: f64,
    step: f64,
) -> Result<(f64, f64)> {
    let limit = observable_scale(f) / 8.0;
    if step > limit {
        return Err(Error::StepTooCoarse { step, limit });
    }
    horocycle_integral(lat, &|p: &CoverPoint| f.eval(p), x, t_total, step)
}

/// Smallest length scale the bump varies on along an orbit: twice the
/// planar disk radius (a lower bound for its hyperbolic size) against the
/// fiber radius.
pub fn observable_scale(f: &CoverObservable) -> f64 {
    (2.0 * f.bump.r_xy).min(f.bump.r_angle)
}

/// Piecewise C^{1+Lip} ramp: 0 at the ends, 1 on [b, len - b], with
/// triangular derivative ramps on [b/2, b] and [len - b, len - b/2];
/// |psi''| <= (4/b)^2 where defined.
#[derive(Clone, Copy, Debug)]
pub struct SmoothingWindow {
    pub b: f64,
    pub len: f64,
}

impl SmoothingWindow {
    pub fn new(b: f64, len: f64) -> SmoothingWindow {
        assert!(b > 0.0 && len >= 2.0 * b, "window needs 0 < b <= len/2");
        SmoothingWindow { b, len }
    }

    /// Default ramp width for budget parameter delta at geodesic time t.
    pub fn default_b(delta: f64, t: f64) -> f64 {
        (-delta * t / 3.0).exp()
    }

    fn half_ramp(&self, r: f64) -> f64 {
        // 0 below b/2, 1 above b, quadratic smoothstep pieces between
        let b = self.b;
        if r <= b / 2.0 {
            0.0
        } else if r >= b {
            1.0
        } else {
            let u = (r - b / 2.0) / (b / 2.0);
            if u <= 0.5 {
                2.0 * u * u
            } else {
                1.0 - 2.0 * (1.0 - u) * (1.0 - u)
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= self.len {
            return 0.0;
        }
        self.half_ramp(r).min(self.half_ramp(self.len - r))
    }
}

/// Inputs of the leading-order prediction for one (x, T) cell.
#[derive(Clone, Debug)]
pub struct AsymptoticPrediction {
    pub t_big: f64,
    pub t_star: f64,
    pub f_star: Vec<f64>,
    pub phi: f64,
    pub a_of_t: f64,
    pub mu_f: f64,
}

impl AsymptoticPrediction {
    pub fn value(&self) -> f64 {
        self.a_of_t * self.phi * self.mu_f
    }
}

/// a(T) = h^{d/2} / ((2 pi)^{d/2} sqrt(det Sigma)) * T / (log T)^{d/2};
/// h_top = 1 on the constant-curvature surface.
pub fn a_of_t(t_big: f64, sigma: &CovarianceMatrix) -> f64 {
    let d = sigma.d() as f64;
    let log_t = t_big.ln();
    1.0 / ((2.0 * std::f64::consts::PI).powf(d / 2.0) * sigma.det().sqrt())
        * t_big
        / log_t.powf(d / 2.0)
}

/// Oscillating factor Phi_T(x) = exp(-1/2 || F*(x, t*) / sqrt(t*) ||_Sigma^2).
pub fn oscillating_factor(f_star: &[f64], t_star: f64, sigma: &CovarianceMatrix) -> f64 {
    (-0.5 * sigma.inv_quadratic(f_star) / t_star).exp()
}

#[derive(Clone, Debug)]
pub struct TheoremARow {
    pub x_index: usize,
    pub t_big: f64,
    pub integral: f64,
    pub quad_error: f64,
    pub prediction: AsymptoticPrediction,
    pub residual: f64,
    /// |residual| * (log T)^{(d+1)/2} / (T log log T).
    pub envelope_normalized: f64,
    /// integral / prediction.
    pub ratio: f64,
}

/// The Theorem-A pipeline: horocycle integrals against the
/// a(T) Phi_T(x) mu(f) prediction across a T-schedule, one row per (x, T),
/// evaluated in parallel with a deterministic row order.
pub fn theorem_a_experiment(
    lat: &CoverLattice,
    f: &CoverObservable,
    xs: &[CoverPoint],
    t_schedule: &[f64],
    sigma: &CovarianceMatrix,
    step: f64,
) -> Result<Vec<TheoremARow>> {
    let limit = observable_scale(f) / 8.0;
    if step > limit {
        return Err(Error::StepTooCoarse { step, limit });
    }
    let mu_f = f.mu(&lat.group);
    let model = CurvatureModel::Constant;
    let cells: Vec<(usize, f64)> = xs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| t_schedule.iter().map(move |&t| (i, t)))
        .collect();
    let rows = parallel_map(cells.len(), |c| -> Result<TheoremARow> {
        let (x_index, t_big) = cells[c];
        let x = &xs[x_index];
        let (integral, quad_error) =
            horocycle_integral(lat, &|p: &CoverPoint| f.eval(p), x, t_big, step)?;
        let t_star = normalizing_time(&model, x, t_big)?;
        let f_star = lat.frobenius_vector(x, t_star)?;
        let phi = oscillating_factor(&f_star, t_star, sigma);
        let pred = AsymptoticPrediction {
            t_big,
            t_star,
            f_star,
            phi,
            a_of_t: a_of_t(t_big, sigma),
            mu_f,
        };
        let residual = integral - pred.value();
        let d = lat.d() as f64;
        let envelope = t_big * t_big.ln().ln().max(1e-12) / t_big.ln().powf((d + 1.0) / 2.0);
        let ratio = if pred.value() != 0.0 { integral / pred.value() } else { f64::NAN };
        Ok(TheoremARow {
            x_index,
            t_big,
            integral,
            quad_error,
            prediction: pred,
            residual,
            envelope_normalized: residual.abs() / envelope,
            ratio,
        })
    });
    rows.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct TheoremBRow {
    pub x_index: usize,
    pub t: f64,
    /// integral of f . g_{-t} . h_s(x) J_{-t}(h_s x) over s in [0, sigma].
    pub pushed_integral: f64,
    /// (2 pi t)^{d/2} sqrt(det Sigma) / (e^t sigma) * pushed_integral.
    pub normalized: f64,
    pub mu_f: f64,
    pub residual: f64,
    /// |residual| sqrt(t) / log(t).
    pub scaled_residual: f64,
}

/// Overflow guard: beyond this the pushed arc needs more than ~10^7 panels.
pub const THEOREM_B_T_MAX: f64 = 14.0;

/// The Theorem-B pipeline: equidistribution of geodesic translates of a
/// fixed horocycle segment. The pushed point g_{-t} h_s(x) is maintained
/// incrementally through the renormalization identity, so each quadrature
/// node costs one bounded horocycle step.
pub fn theorem_b_experiment(
    lat: &CoverLattice,
    f: &CoverObservable,
    xs: &[CoverPoint],
    ts: &[f64],
    sigma: &CovarianceMatrix,
    arc_len: f64,
) -> Result<Vec<TheoremBRow>> {
    for &t in ts {
        if t > THEOREM_B_T_MAX {
            return Err(Error::Overflow { t, limit: THEOREM_B_T_MAX });
        }
    }
    let mu_f = f.mu(&lat.group);
    let d = lat.d() as f64;
    let cells: Vec<(usize, f64)> = xs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| ts.iter().map(move |&t| (i, t)))
        .collect();
    let rows = parallel_map(cells.len(), |c| -> Result<TheoremBRow> {
        let (x_index, t) = cells[c];
        let x = &xs[x_index];
        // s-step <= e^{-t} scale/8, equivalently unit steps on the pushed arc
        let step_s = (-t).exp() * observable_scale(f) / 8.0;
        let (x_pushed, _) = lat.geodesic_flow(x, -t)?;
        let et = t.exp();
        let mut pushed_cursor = HorocycleCursor::new(lat, x_pushed);
        let n = (arc_len / step_s).ceil() as usize;
        let h = arc_len / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let mid = (i as f64 + 0.5) * h;
            let half = h / 2.0;
            for (node, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                let s = mid + half * node;
                // g_{-t} h_s(x) = h_{s e^t} (g_{-t} x)
                let p = pushed_cursor.advance_to(s * et)?;
                integral += w * half * f.eval(p) * et;
            }
        }
        let normalized = (2.0 * std::f64::consts::PI * t).powf(d / 2.0) * sigma.det().sqrt()
            / (et * arc_len)
            * integral;
        let residual = normalized - mu_f;
        Ok(TheoremBRow {
            x_index,
            t,
            pushed_integral: integral,
            normalized,
            mu_f,
            residual,
            scaled_residual: residual.abs() * t.sqrt() / t.ln(),
        })
    });
    rows.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct TheoremCRow {
    pub x_index: usize,
    pub t_big: f64,
    pub average: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct TheoremCFit {
    pub rows: Vec<TheoremCRow>,
    /// median |deviation| per schedule entry.
    pub median_deviation: Vec<f64>,
    /// fitted exponent a in deviation ~ T^{-a}.
    pub exponent: f64,
    pub r2: f64,
}

/// The Theorem-C pipeline: power decay of horocycle ergodic averages of an
/// observable on the compact quotient (deck-independent).
pub fn theorem_c_experiment(
    lat: &CoverLattice,
    f: &CoverObservable,
    xs: &[CoverPoint],
    t_schedule: &[f64],
    step: f64,
) -> Result<TheoremCFit> {
    let limit = observable_scale(f) / 8.0;
    if step > limit {
        return Err(Error::StepTooCoarse { step, limit });
    }
    let mu_f = f.bump.mu_integral(&lat.group);
    let eval = |p: &CoverPoint| f.bump.eval(&p.base);
    let cells: Vec<(usize, f64)> = xs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| t_schedule.iter().map(move |&t| (i, t)))
        .collect();
    let rows: Result<Vec<TheoremCRow>> = parallel_map(cells.len(), |c| {
        let (x_index, t_big) = cells[c];
        let (integral, quad_err) = horocycle_integral(lat, &eval, &xs[x_index], t_big, step)?;
        let average = integral / t_big;
        let deviation = (average - mu_f).abs();
        let floor = (10.0 * quad_err + 1e-13) / t_big;
        if deviation < floor {
            return Err(Error::DegenerateFit { floor });
        }
        Ok(TheoremCRow { x_index, t_big, average, deviation })
    })
    .into_iter()
    .collect();
    let rows = rows?;

    let mut median_deviation = Vec::with_capacity(t_schedule.len());
    for &t in t_schedule {
        let mut devs: Vec<f64> =
            rows.iter().filter(|r| r.t_big == t).map(|r| r.deviation).collect();
        median_deviation.push(stats::median(&mut devs));
    }
    let log_t: Vec<f64> = t_schedule.iter().map(|t| t.ln()).collect();
    let log_dev: Vec<f64> = median_deviation.iter().map(|d| d.ln()).collect();
    let (_, slope, r2) = stats::linear_fit(&log_t, &log_dev);
    Ok(TheoremCFit { rows, median_deviation, exponent: -slope, r2 })
}

/// Both sides of the renormalized-integral identity
///   int_0^T f(h_s x) psi(tau(s,t,x)) ds
///     = e^t int_0^{tau(T,t,x)} Lhat_t(f)(h_s(g_t x)) psi(s) ds,
/// computed by independent quadratures. In constant curvature
/// Lhat_t(f) = f . g_{-t}.
pub fn renormalized_identity_sides(
    lat: &CoverLattice,
    f: &CoverObservable,
    x: &CoverPoint,
    t_big: f64,
    t: f64,
    window: &SmoothingWindow,
    step: f64,
) -> Result<(f64, f64)> {
    let emt = (-t).exp();
    let mut lhs_cursor = HorocycleCursor::new(lat, x.clone());
    let n = (t_big / step).ceil() as usize;
    let h = t_big / n as f64;
    let mut lhs = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        let half = h / 2.0;
        for (node, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let s = mid + half * node;
            let p = lhs_cursor.advance_to(s)?;
            lhs += w * half * f.eval(p) * window.eval(emt * s);
        }
    }

    let (x_t, _) = lat.geodesic_flow(x, t)?;
    let tau_len = emt * t_big;
    let mut rhs_cursor = HorocycleCursor::new(lat, x_t);
    let n = (tau_len / (step * emt)).ceil() as usize;
    let h = tau_len / n as f64;
    let mut rhs = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        let half = h / 2.0;
        for (node, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let s = mid + half * node;
            let p = rhs_cursor.advance_to(s)?;
            let (back, _) = lat.geodesic_flow(p, -t)?;
            rhs += w * half * f.eval(&back) * window.eval(s);
        }
    }
    Ok((lhs, rhs * t.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::Bump;
    use crate::geometry::{FuchsianGroup, Isometry};
    use crate::rng;

    fn lat1() -> CoverLattice {
        CoverLattice::rank_one(FuchsianGroup::validated())
    }

    fn test_bump(g: &FuchsianGroup) -> Bump {
        Bump::new(g, (0.08, -0.03), 1.0, 0.2, 1.0, 1.0)
    }

    fn base_obs(lat: &CoverLattice) -> CoverObservable {
        CoverObservable::base_copy(test_bump(&lat.group), lat.d())
    }

    fn volume_points(lat: &CoverLattice, n: usize, seed: u64) -> Vec<CoverPoint> {
        let mut r = rng::stream(seed, 0);
        (0..n)
            .map(|_| CoverPoint {
                base: lat.group.sample_volume(&mut r),
                deck: vec![0; lat.d()],
            })
            .collect()
    }

    #[test]
    fn integral_zero_cases() {
        let lat = lat1();
        let f = base_obs(&lat);
        let x = lat.base_point_at_center();
        let (v, _) = observable_integral(&lat, &f, &x, 0.0, 0.04).unwrap();
        assert_eq!(v, 0.0);
        // observable supported far away in deck: orbit of modest length
        // cannot reach copy 40
        let far = CoverObservable::new(test_bump(&lat.group), vec![(vec![40], 1.0)]);
        let (v, _) = observable_integral(&lat, &far, &x, 8.0, 0.04).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn integral_step_guard() {
        let lat = lat1();
        let f = base_obs(&lat);
        let x = lat.base_point_at_center();
        match observable_integral(&lat, &f, &x, 1.0, 0.2) {
            Err(Error::StepTooCoarse { .. }) => {}
            other => panic!("expected StepTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn integral_self_convergence() {
        let lat = lat1();
        let f = base_obs(&lat);
        let x = CoverPoint {
            base: Isometry::from_base_angle_disk((0.05, 0.0), 1.0),
            deck: vec![0],
        };
        let (a, err_a) = observable_integral(&lat, &f, &x, 1000.0, 0.01).unwrap();
        let (b, _) = observable_integral(&lat, &f, &x, 1000.0, 0.005).unwrap();
        assert!(
            (a - b).abs() <= 1e-4 * a.abs().max(1.0),
            "step halving moved the integral by {}",
            (a - b).abs()
        );
        assert!((a - b).abs() <= 4.0 * err_a.max(1e-12));
    }

    #[test]
    fn smoothing_window_shape() {
        let w = SmoothingWindow::new(0.5, 10.0);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(10.0), 0.0);
        assert_eq!(w.eval(0.25), 0.0);
        assert_eq!(w.eval(0.5), 1.0);
        assert_eq!(w.eval(5.0), 1.0);
        assert_eq!(w.eval(9.5), 1.0);
        assert!(w.eval(0.4) > 0.0 && w.eval(0.4) < 1.0);
        // symmetric ramps
        assert!((w.eval(0.4) - w.eval(9.6)).abs() < 1e-12);
    }

    #[test]
    fn smoothing_window_error_bound() {
        // |int f - int f psi(tau(s,t,x))| <= C ||f||_inf e^t B with C stable
        let lat = lat1();
        let f = base_obs(&lat);
        let xs = volume_points(&lat, 3, 2024);
        let t = 1.0f64;
        let t_big = 200.0;
        let mut cs = Vec::new();
        for x in &xs {
            let b = 0.05;
            let window = SmoothingWindow::new(b, (-t).exp() * t_big);
            let (plain, _) = observable_integral(&lat, &f, x, t_big, 0.02).unwrap();
            let mut cursor = HorocycleCursor::new(&lat, x.clone());
            let n = (t_big / 0.02).ceil() as usize;
            let h = t_big / n as f64;
            let mut windowed = 0.0;
            for i in 0..n {
                let mid = (i as f64 + 0.5) * h;
                let half = h / 2.0;
                for (node, wgt) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                    let s = mid + half * node;
                    let p = cursor.advance_to(s).unwrap();
                    windowed += wgt * half * f.eval(p) * window.eval((-t).exp() * s);
                }
            }
            let c = (plain - windowed).abs() / (f.sup_norm() * t.exp() * b);
            cs.push(c);
        }
        for &c in &cs {
            assert!(c <= 4.0, "window error constant {c} unexpectedly large");
        }
    }

    #[test]
    fn renormalized_identity_two_routes() {
        let lat = lat1();
        let f = base_obs(&lat);
        for (i, x) in volume_points(&lat, 2, 7).into_iter().enumerate() {
            let t_big = 120.0 + 40.0 * i as f64;
            let t = 1.3f64;
            let window = SmoothingWindow::new(0.4, (-t).exp() * t_big);
            let (lhs, rhs) =
                renormalized_identity_sides(&lat, &f, &x, t_big, t, &window, 0.02).unwrap();
            assert!(
                (lhs - rhs).abs() <= 2e-3 * lhs.abs().max(1.0),
                "renormalized identity mismatch: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn theorem_a_prediction_positivity_and_signed_case() {
        let lat = lat1();
        let f = base_obs(&lat);
        let sigma = CovarianceMatrix::from_parts(
            vec![vec![0.4]],
            vec![vec![0.0]],
            1,
            1.0,
            0.0,
        )
        .unwrap();
        let xs = volume_points(&lat, 2, 5);
        let rows =
            theorem_a_experiment(&lat, &f, &xs, &[100.0, 1000.0], &sigma, 0.02).unwrap();
        for r in &rows {
            assert!(r.prediction.value() > 0.0);
            assert!(r.prediction.phi > 0.0 && r.prediction.phi <= 1.0);
        }
        // signed observable: mu(f) = 0, prediction identically zero, and the
        // integral stays well under the leading scale T / sqrt(log T)
        let signed = CoverObservable::new(
            test_bump(&lat.group),
            vec![(vec![0], 1.0), (vec![1], -1.0)],
        );
        let rows =
            theorem_a_experiment(&lat, &signed, &xs, &[100.0, 1000.0], &sigma, 0.02).unwrap();
        for r in &rows {
            assert_eq!(r.prediction.value(), 0.0);
            let scale = r.t_big / r.t_big.ln().sqrt();
            assert!(r.integral.abs() < scale, "signed integral {} vs scale {scale}", r.integral);
        }
    }

    #[test]
    fn oscillating_factor_on_kernel_axis_tends_to_one() {
        // on the axis of a generator whose class the projection kills, the
        // winding stays bounded, so Phi_T -> 1
        let lat = lat1(); // projection (1,0,0,0); b1 = e2 is in the kernel
        let sigma = CovarianceMatrix::from_parts(
            vec![vec![0.22]],
            vec![vec![0.0]],
            1,
            1.0,
            0.0,
        )
        .unwrap();
        let (axis, _) = lat.axis_point(1);
        let mut last = 0.0;
        for &t_big in &[100.0f64, 10_000.0, 1_000_000.0] {
            let t_star = t_big.ln();
            let f_star = lat.frobenius_vector(&axis, t_star).unwrap();
            last = oscillating_factor(&f_star, t_star, &sigma);
        }
        assert!(last > 0.95, "Phi on the kernel axis is {last}, expected -> 1");
    }

    #[test]
    fn theorem_b_zero_time_normalization() {
        // at t = 0 the pushed integral is the plain arc average, which sits
        // within sup|f - mu(f)| of mu(f)
        let lat = lat1();
        let f = base_obs(&lat);
        let x = volume_points(&lat, 1, 33)[0].clone();
        let arc = 1.5;
        let step_s = observable_scale(&f) / 8.0;
        let mut cursor = HorocycleCursor::new(&lat, x);
        let n = (arc / step_s).ceil() as usize;
        let h = arc / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let mid = (i as f64 + 0.5) * h;
            let half = h / 2.0;
            for (node, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
                let p = cursor.advance_to(mid + half * node).unwrap();
                integral += w * half * f.eval(p);
            }
        }
        let mu = f.mu(&lat.group);
        let resid = (integral / arc - mu).abs();
        assert!(resid <= f.sup_norm() + mu.abs());
    }

    #[test]
    fn theorem_b_small_time_sanity() {
        let lat = lat1();
        let f = base_obs(&lat);
        let sigma = CovarianceMatrix::from_parts(
            vec![vec![0.4]],
            vec![vec![0.0]],
            1,
            1.0,
            0.0,
        )
        .unwrap();
        let xs = volume_points(&lat, 2, 9);
        let rows = theorem_b_experiment(&lat, &f, &xs, &[1.0, 2.0], &sigma, 1.0).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!(r.pushed_integral.is_finite());
            assert!(r.residual.abs() <= f.sup_norm() + r.mu_f.abs() + 1.0);
        }
        match theorem_b_experiment(&lat, &f, &xs, &[20.0], &sigma, 1.0) {
            Err(Error::Overflow { .. }) => {}
            other => panic!("expected Overflow guard, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn theorem_c_constant_observable_gate() {
        // f identical to its own average (the zero bump is the compactly
        // supported case of that): deviations vanish at every T and the fit
        // must refuse rather than regress on noise
        let lat = lat1();
        let zero = CoverObservable::base_copy(
            Bump::new(&lat.group, (0.08, -0.03), 1.0, 0.2, 1.0, 0.0),
            1,
        );
        let xs = volume_points(&lat, 1, 3);
        match theorem_c_experiment(&lat, &zero, &xs, &[100.0], 0.02) {
            Err(Error::DegenerateFit { .. }) => {}
            other => panic!("expected DegenerateFit, got {:?}", other.map(|v| v.exponent)),
        }
    }

    #[test]
    fn theorem_c_small_run_decays() {
        let lat = lat1();
        let f = base_obs(&lat);
        let xs = volume_points(&lat, 3, 21);
        let fit = theorem_c_experiment(
            &lat,
            &f,
            &xs,
            &[100.0, 316.227766, 1000.0, 3162.27766],
            0.02,
        )
        .unwrap();
        assert!(fit.exponent > 0.0, "deviations should decay; got a = {}", fit.exponent);
        assert!(
            fit.median_deviation.first().unwrap() > fit.median_deviation.last().unwrap(),
            "median deviations did not decrease"
        );
    }
}
