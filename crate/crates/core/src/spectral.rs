//! Covariance estimation for the winding cycle, CLT diagnostics, and the
//! Ulam discretization of the twisted transfer operators.
//!
//! The covariance quadratic form is the t -> infinity limit of
//! (1/t) E[F(., t) (x) F(., t)] under the measure of maximal entropy, which
//! in constant curvature is the normalized Liouville volume; the Ulam
//! eigenvalue curve lambda_hat(omega) realizes e^{t z(omega)} at grid
//! resolution, with -log|lambda_hat|/t ~ 2 pi^2 omega . Sigma omega near 0.

use crate::complex::C64;
use crate::cover::{CoverLattice, CoverPoint, Twist};
use crate::error::{Error, Result};
use crate::geometry::{FuchsianGroup, Isometry};
use crate::par::parallel_map;
use crate::rng;
use crate::stats;
use rand::RngExt;
use std::io::Write;

/// Stream-id domains, kept distinct so different consumers of the same
/// master seed never collide.
const DOMAIN_SIGMA: u64 = 0x5163;
const DOMAIN_CLT: u64 = 0xC117;
const DOMAIN_ULAM: u64 = 0x01a5;

/// Symmetric positive definite covariance with its Cholesky factor and the
/// Monte Carlo bookkeeping that produced it.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    pub sigma: Vec<Vec<f64>>,
    /// Lower-triangular L with L L^T = sigma.
    chol: Vec<Vec<f64>>,
    pub std_err: Vec<Vec<f64>>,
    pub n_samples: usize,
    pub flow_time: f64,
    /// max_k |mean F_k| / (per-coordinate standard error); should sit below
    /// 3 when the winding mean is genuinely zero.
    pub mean_drift_sigmas: f64,
}

impl CovarianceMatrix {
    pub fn from_parts(
        sigma: Vec<Vec<f64>>,
        std_err: Vec<Vec<f64>>,
        n_samples: usize,
        flow_time: f64,
        mean_drift_sigmas: f64,
    ) -> Result<CovarianceMatrix> {
        let chol = cholesky(&sigma).ok_or(Error::SingularEstimate)?;
        Ok(CovarianceMatrix { sigma, chol, std_err, n_samples, flow_time, mean_drift_sigmas })
    }

    pub fn d(&self) -> usize {
        self.sigma.len()
    }

    pub fn det(&self) -> f64 {
        self.chol.iter().enumerate().map(|(i, r)| r[i] * r[i]).product()
    }

    /// v . Sigma^{-1} v, the squared Sigma-norm of v.
    pub fn inv_quadratic(&self, v: &[f64]) -> f64 {
        let y = forward_solve(&self.chol, v);
        y.iter().map(|a| a * a).sum()
    }

    /// L^{-1} v: whitening transform (when v ~ N(0, Sigma), the result is
    /// standard normal).
    pub fn whiten(&self, v: &[f64]) -> Vec<f64> {
        forward_solve(&self.chol, v)
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

fn forward_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let d = l.len();
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    y
}

fn draw_winding(lat: &CoverLattice, t: f64, seed: u64, domain: u64, i: usize) -> Vec<f64> {
    let mut r = rng::stream2(seed, domain, i as u64);
    let base = lat.group.sample_volume(&mut r);
    let x = CoverPoint { base, deck: vec![0; lat.d()] };
    lat.frobenius_vector(&x, t).expect("winding flow hit the reduction guard")
}

/// Monte Carlo estimate of Sigma = lim (1/t) E[F F^T] over volume-random
/// starting points (the maximal-entropy measure in constant curvature).
pub fn estimate_sigma(lat: &CoverLattice, t: f64, n: usize, seed: u64) -> Result<CovarianceMatrix> {
    assert!(t >= 20.0, "sigma estimation wants t >= 20");
    assert!(n >= 1000, "sigma estimation wants n >= 1e3");
    let d = lat.d();
    let samples = parallel_map(n, |i| draw_winding(lat, t, seed, DOMAIN_SIGMA, i));

    let mut mean = vec![0.0; d];
    for f in &samples {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let mut sigma = vec![vec![0.0; d]; d];
    let mut sq = vec![vec![0.0; d]; d];
    for f in &samples {
        for i in 0..d {
            for j in 0..d {
                let v = f[i] * f[j] / t;
                sigma[i][j] += v;
                sq[i][j] += v * v;
            }
        }
    }
    let mut std_err = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            sigma[i][j] /= n as f64;
            let var = (sq[i][j] / n as f64 - sigma[i][j] * sigma[i][j]).max(0.0);
            std_err[i][j] = (var / n as f64).sqrt();
        }
    }

    let drift = (0..d)
        .map(|k| mean[k].abs() / (sigma[k][k].max(1e-300) * t / n as f64).sqrt())
        .fold(0.0, f64::max);

    CovarianceMatrix::from_parts(sigma, std_err, n, t, drift)
}

/// CLT diagnostic report for whitened winding samples.
#[derive(Clone, Debug)]
pub struct CltReport {
    pub t: f64,
    pub n: usize,
    /// Per-coordinate KS statistic and p-value with the lattice continuity
    /// correction (uniform jitter of half a deck cell before whitening).
    pub ks_stat: Vec<f64>,
    pub ks_p: Vec<f64>,
    /// Same without the jitter; windings are integers, so at moderate t the
    /// raw statistic reflects the lattice spacing rather than the CLT.
    pub ks_stat_raw: Vec<f64>,
    pub ks_p_raw: Vec<f64>,
    /// max-abs deviation of the whitened empirical covariance from identity.
    pub whitened_cov_dev: f64,
    /// Set when the input time is 0 (all windings vanish).
    pub degenerate: bool,
}

/// Whitened-winding CLT diagnostic: draws fresh samples, whitens them with
/// the supplied covariance, and runs per-coordinate KS tests against the
/// standard normal plus a covariance identity check.
pub fn clt_diagnostic(
    lat: &CoverLattice,
    t: f64,
    n: usize,
    sigma: &CovarianceMatrix,
    seed: u64,
) -> CltReport {
    let d = lat.d();
    if t == 0.0 {
        return CltReport {
            t,
            n,
            ks_stat: vec![0.0; d],
            ks_p: vec![0.0; d],
            ks_stat_raw: vec![0.0; d],
            ks_p_raw: vec![0.0; d],
            whitened_cov_dev: 1.0,
            degenerate: true,
        };
    }
    let samples = parallel_map(n, |i| draw_winding(lat, t, seed, DOMAIN_CLT, i));

    // the lattice continuity correction adds uniform jitter with variance
    // 1/12 per coordinate, so the jittered samples are whitened against
    // Sigma + I/(12 t)
    let mut sig_jit = sigma.sigma.clone();
    for (k, row) in sig_jit.iter_mut().enumerate() {
        row[k] += 1.0 / (12.0 * t);
    }
    let sigma_jit = CovarianceMatrix::from_parts(
        sig_jit,
        sigma.std_err.clone(),
        sigma.n_samples,
        sigma.flow_time,
        sigma.mean_drift_sigmas,
    )
    .expect("jitter-inflated covariance stays positive definite");

    let mut cov = vec![vec![0.0; d]; d];
    let mut whitened_raw: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let mut whitened_jit: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let sqrt_t = t.sqrt();
    for (i, f) in samples.iter().enumerate() {
        let scaled: Vec<f64> = f.iter().map(|v| v / sqrt_t).collect();
        let w = sigma.whiten(&scaled);
        for k in 0..d {
            cov[k].iter_mut().zip(&w).for_each(|(c, v)| *c += w[k] * v);
            whitened_raw[k].push(w[k]);
        }
        let mut r = rng::stream2(seed ^ 0x7177, DOMAIN_CLT, i as u64);
        let jittered: Vec<f64> =
            f.iter().map(|v| (v + r.random_range(-0.5..0.5)) / sqrt_t).collect();
        let wj = sigma_jit.whiten(&jittered);
        for k in 0..d {
            whitened_jit[k].push(wj[k]);
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let c = cov[i][j] / n as f64;
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((c - target).abs());
        }
    }

    let mut ks_stat = Vec::new();
    let mut ks_p = Vec::new();
    let mut ks_stat_raw = Vec::new();
    let mut ks_p_raw = Vec::new();
    for k in 0..d {
        let (s, p) = stats::ks_normal(&mut whitened_jit[k]);
        ks_stat.push(s);
        ks_p.push(p);
        let (s, p) = stats::ks_normal(&mut whitened_raw[k]);
        ks_stat_raw.push(s);
        ks_p_raw.push(p);
    }

    CltReport {
        t,
        n,
        ks_stat,
        ks_p,
        ks_stat_raw,
        ks_p_raw,
        whitened_cov_dev: dev,
        degenerate: false,
    }
}

/// Cell decomposition of the unit tangent bundle: the octagon's bounding
/// square in disk coordinates times the fiber circle.
#[derive(Clone, Copy, Debug)]
pub struct UlamGrid {
    pub n_xy: usize,
    pub n_theta: usize,
    pub half_width: f64,
}

impl UlamGrid {
    pub fn new(group: &FuchsianGroup, n_xy: usize, n_theta: usize) -> UlamGrid {
        UlamGrid { n_xy, n_theta, half_width: group.vertex_disk_radius() * 1.0001 }
    }

    pub fn cells(&self) -> usize {
        self.n_xy * self.n_xy * self.n_theta
    }

    pub fn cell_of(&self, x: &Isometry) -> usize {
        let (wx, wy) = x.disk_point();
        let theta = x.fiber_angle();
        let h = self.half_width;
        let fx = ((wx + h) / (2.0 * h) * self.n_xy as f64).floor();
        let fy = ((wy + h) / (2.0 * h) * self.n_xy as f64).floor();
        let ft = theta / (2.0 * std::f64::consts::PI) * self.n_theta as f64;
        let ix = (fx.max(0.0) as usize).min(self.n_xy - 1);
        let iy = (fy.max(0.0) as usize).min(self.n_xy - 1);
        let it = (ft.floor().max(0.0) as usize).min(self.n_theta - 1);
        (it * self.n_xy + iy) * self.n_xy + ix
    }

    /// Uniform sample within cell `i` in chart coordinates.
    pub fn sample_in_cell<R: RngExt>(&self, i: usize, rng: &mut R) -> ((f64, f64), f64) {
        let ix = i % self.n_xy;
        let iy = (i / self.n_xy) % self.n_xy;
        let it = i / (self.n_xy * self.n_xy);
        let h = self.half_width;
        let dx = 2.0 * h / self.n_xy as f64;
        let x = -h + (ix as f64 + rng.random::<f64>()) * dx;
        let y = -h + (iy as f64 + rng.random::<f64>()) * dx;
        let dt = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        let th = (it as f64 + rng.random::<f64>()) * dt;
        ((x, y), th)
    }
}

/// The omega-independent orbit data of an Ulam discretization: for each cell
/// i and accepted sample, the target cell of g_{-t} x and the backward
/// winding. The complex matrix for any omega is assembled from this.
pub struct UlamTransitions {
    pub grid: UlamGrid,
    pub t: f64,
    pub d: usize,
    row_ptr: Vec<u32>,
    targets: Vec<u32>,
    /// d-strided backward deck displacements per entry.
    windings: Vec<i32>,
}

/// Sample every cell and record backward-orbit transitions; row-parallel and
/// reproducible through (seed, cell, sample)-keyed streams.
pub fn ulam_transitions(
    lat: &CoverLattice,
    grid: UlamGrid,
    t: f64,
    samples_per_cell: usize,
    seed: u64,
) -> Result<UlamTransitions> {
    let d = lat.d();
    let n = grid.cells();
    let rows: Vec<Vec<(u32, Vec<i64>)>> = parallel_map(n, |i| {
        let mut out = Vec::new();
        for s in 0..samples_per_cell {
            let mut r = rng::stream2(seed ^ DOMAIN_ULAM, i as u64, s as u64);
            let (w, th) = grid.sample_in_cell(i, &mut r);
            if !lat.group.disk_in_domain(w, 0.0) {
                continue;
            }
            let x = CoverPoint {
                base: Isometry::from_base_angle_disk(w, th),
                deck: vec![0; d],
            };
            let (back, wind) = match lat.geodesic_flow(&x, -t) {
                Ok(v) => v,
                Err(_) => continue,
            };
            out.push((grid.cell_of(&back.base) as u32, wind.deck));
        }
        out
    });

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut targets = Vec::new();
    let mut windings = Vec::new();
    row_ptr.push(0u32);
    for row in &rows {
        for (tgt, wind) in row {
            targets.push(*tgt);
            for &v in wind {
                windings.push(v as i32);
            }
        }
        row_ptr.push(targets.len() as u32);
    }
    Ok(UlamTransitions { grid, t, d, row_ptr, targets, windings })
}

impl UlamTransitions {
    pub fn cells(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Number of accepted samples in row i.
    fn row_len(&self, i: usize) -> usize {
        (self.row_ptr[i + 1] - self.row_ptr[i]) as usize
    }

    /// Apply the twisted Ulam matrix to a vector:
    /// (A v)_i = average over samples of G_{t,omega} J_{-t} v_{target}.
    pub fn apply(&self, omega: &Twist, v: &[C64], out: &mut [C64]) {
        let jt = self.t.exp();
        for i in 0..self.cells() {
            let lo = self.row_ptr[i] as usize;
            let hi = self.row_ptr[i + 1] as usize;
            if lo == hi {
                out[i] = C64::ZERO;
                continue;
            }
            let mut acc = C64::ZERO;
            for e in lo..hi {
                let tgt = self.targets[e] as usize;
                let wind = &self.windings[e * self.d..(e + 1) * self.d];
                let phase: f64 = omega
                    .0
                    .iter()
                    .zip(wind)
                    .map(|(w, &n)| -w * n as f64)
                    .sum();
                acc += C64::unit_phase(phase) * v[tgt];
            }
            out[i] = acc.scale(jt / (hi - lo) as f64);
        }
    }

    /// Row-sum sanity value: the untwisted matrix applied to the indicator
    /// of the populated cells should return e^t on every populated row.
    pub fn populated(&self) -> Vec<bool> {
        (0..self.cells()).map(|i| self.row_len(i) > 0).collect()
    }
}

/// Leading eigenvalue of the twisted Ulam matrix by power iteration, plus a
/// raw (deflated, non-contractual) second-eigenvalue estimate.
pub struct UlamEigen {
    pub omega: Twist,
    pub lambda: C64,
    /// lambda * e^{-h_top t}.
    pub lambda_hat: C64,
    pub iterations: usize,
    pub second_estimate: f64,
}

pub fn leading_eigenvalue(
    trans: &UlamTransitions,
    omega: &Twist,
    max_iter: usize,
    tol: f64,
) -> Result<UlamEigen> {
    let n = trans.cells();
    let mut v: Vec<C64> = vec![C64::ONE; n];
    let mut w = vec![C64::ZERO; n];
    let mut lambda = C64::ZERO;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    let single_budget = max_iter.min(3000);
    for it in 0..single_budget {
        trans.apply(omega, &v, &mut w);
        // Rayleigh-style estimate <Av, v> / <v, v>
        let mut num = C64::ZERO;
        let mut den = 0.0;
        for (a, b) in w.iter().zip(&v) {
            num += *a * b.conj();
            den += b.abs_sq();
        }
        let new_lambda = num.scale(1.0 / den);
        change = (new_lambda - lambda).abs() / new_lambda.abs().max(1e-300);
        lambda = new_lambda;
        let norm: f64 = w.iter().map(|c| c.abs_sq()).sum::<f64>().sqrt();
        for (dst, src) in v.iter_mut().zip(&w) {
            *dst = src.scale(1.0 / norm);
        }
        iterations = it + 1;
        if change <= tol && it >= 8 {
            break;
        }
    }
    if change > 1e-8 {
        // two spectral branches with nearly tied moduli make single-vector
        // iteration oscillate; resolve them with a block-2 Rayleigh-Ritz
        let (lam, its2) = block2_leading(trans, omega, max_iter, tol)?;
        lambda = lam;
        iterations += its2;
        // reseed v with the dominant Ritz direction for the deflation below
        trans.apply(omega, &v, &mut w);
        std::mem::swap(&mut v, &mut w);
    }

    // one-shot deflated estimate of the subdominant modulus: power-iterate a
    // vector kept orthogonal to the leading one
    let mut r: Vec<C64> = (0..n)
        .map(|i| C64::new(((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5, 0.0))
        .collect();
    let mut second = 0.0;
    for _ in 0..200 {
        let vv: f64 = v.iter().map(|c| c.abs_sq()).sum();
        let proj = r
            .iter()
            .zip(&v)
            .fold(C64::ZERO, |acc, (a, b)| acc + *a * b.conj())
            .scale(1.0 / vv);
        for (a, b) in r.iter_mut().zip(&v) {
            *a = *a - proj * *b;
        }
        trans.apply(omega, &r, &mut w);
        let norm: f64 = w.iter().map(|c| c.abs_sq()).sum::<f64>().sqrt();
        second = norm;
        for (dst, src) in r.iter_mut().zip(&w) {
            *dst = src.scale(1.0 / norm);
        }
    }

    let h_top = 1.0; // constant curvature surface
    let lambda_hat = lambda.scale((-h_top * trans.t).exp());
    Ok(UlamEigen {
        omega: omega.clone(),
        lambda,
        lambda_hat,
        iterations,
        second_estimate: second * (-h_top * trans.t).exp(),
    })
}

/// Eigenvalue curve over a list of twists.
pub fn ulam_spectrum(
    trans: &UlamTransitions,
    omegas: &[Twist],
) -> Result<Vec<UlamEigen>> {
    omegas
        .iter()
        .map(|om| leading_eigenvalue(trans, om, 10_000, 1e-10))
        .collect()
}

/// Block-2 power iteration with a 2x2 Rayleigh-Ritz solve; returns the Ritz
/// value of largest modulus. Used when two branches have nearly tied moduli.
fn block2_leading(
    trans: &UlamTransitions,
    omega: &Twist,
    max_iter: usize,
    tol: f64,
) -> Result<(C64, usize)> {
    let n = trans.cells();
    let mut v1: Vec<C64> = vec![C64::ONE; n];
    let mut v2: Vec<C64> = (0..n)
        .map(|i| C64::new(((i * 1103515245 + 12345) % 1000) as f64 / 1000.0 - 0.5, 0.0))
        .collect();
    let mut w1 = vec![C64::ZERO; n];
    let mut w2 = vec![C64::ZERO; n];
    let dot = |a: &[C64], b: &[C64]| {
        a.iter().zip(b).fold(C64::ZERO, |acc, (x, y)| acc + *x * y.conj())
    };
    let normalize = |v: &mut [C64]| {
        let norm = v.iter().map(|c| c.abs_sq()).sum::<f64>().sqrt();
        for c in v.iter_mut() {
            *c = c.scale(1.0 / norm);
        }
    };
    let orth = |v2: &mut [C64], v1: &[C64]| {
        let proj = v2.iter().zip(v1).fold(C64::ZERO, |acc, (x, y)| acc + *x * y.conj());
        for (a, b) in v2.iter_mut().zip(v1) {
            *a = *a - proj * *b;
        }
    };
    normalize(&mut v1);
    orth(&mut v2, &v1);
    normalize(&mut v2);

    let mut lambda = C64::ZERO;
    for it in 0..max_iter {
        trans.apply(omega, &v1, &mut w1);
        trans.apply(omega, &v2, &mut w2);
        // Ritz matrix H = V* A V in the orthonormal basis (v1, v2)
        let h11 = dot(&w1, &v1);
        let h12 = dot(&w2, &v1);
        let h21 = dot(&w1, &v2);
        let h22 = dot(&w2, &v2);
        // eigenvalues of [[h11, h12], [h21, h22]]
        let tr = h11 + h22;
        let det = h11 * h22 - h12 * h21;
        let disc = tr * tr - det.scale(4.0);
        let root = complex_sqrt(disc);
        let e1 = (tr + root).scale(0.5);
        let e2 = (tr - root).scale(0.5);
        let lead = if e1.abs() >= e2.abs() { e1 } else { e2 };
        let change = (lead - lambda).abs() / lead.abs().max(1e-300);
        lambda = lead;
        std::mem::swap(&mut v1, &mut w1);
        std::mem::swap(&mut v2, &mut w2);
        normalize(&mut v1);
        orth(&mut v2, &v1);
        normalize(&mut v2);
        if change <= tol && it >= 8 {
            return Ok((lambda, it + 1));
        }
        if it + 1 == max_iter && change > 1e-8 {
            return Err(Error::PowerIterationStall { change, iters: it + 1 });
        }
    }
    Ok((lambda, max_iter))
}

fn complex_sqrt(z: C64) -> C64 {
    let r = z.abs();
    let theta = z.im.atan2(z.re);
    C64::new(r.sqrt() * (theta / 2.0).cos(), r.sqrt() * (theta / 2.0).sin())
}

/// Least-squares fit of -log(|lambda_hat(omega)| / |lambda_hat(0)|) / t
/// against the quadratic form 2 pi^2 omega . Q omega; returns Q. The zero
/// twist must be included in `points` to anchor the ratio.
pub fn fit_quadratic_decay(points: &[UlamEigen], t: f64) -> Vec<Vec<f64>> {
    let d = points
        .iter()
        .map(|p| p.omega.dim())
        .next()
        .expect("fit needs points");
    let lambda0 = points
        .iter()
        .find(|p| p.omega.0.iter().all(|&w| w == 0.0))
        .expect("fit needs the zero twist")
        .lambda_hat
        .abs();
    // unknowns: upper triangle of Q
    let mut unknowns = Vec::new();
    for i in 0..d {
        for j in i..d {
            unknowns.push((i, j));
        }
    }
    let m = unknowns.len();
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for p in points {
        if p.omega.0.iter().all(|&w| w == 0.0) {
            continue;
        }
        let y = -(p.lambda_hat.abs() / lambda0).ln() / t / (2.0 * std::f64::consts::PI.powi(2));
        let row: Vec<f64> = unknowns
            .iter()
            .map(|&(i, j)| {
                let c = if i == j { 1.0 } else { 2.0 };
                c * p.omega.0[i] * p.omega.0[j]
            })
            .collect();
        for a in 0..m {
            for b in 0..m {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * y;
        }
    }
    let sol = solve_dense(&mut ata, &mut atb);
    let mut q = vec![vec![0.0; d]; d];
    for (k, &(i, j)) in unknowns.iter().enumerate() {
        q[i][j] = sol[k];
        q[j][i] = sol[k];
    }
    q
}

fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for i in col + 1..n {
            let f = a[i][col] / p;
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

/// Frobenius-relative distance between two symmetric matrices.
pub fn frobenius_rel(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            num += (x - y) * (x - y);
            den += y * y;
        }
    }
    (num / den).sqrt()
}

/// Dense binary dump of the twisted Ulam matrix: dims as little-endian u64
/// (rows, cols), then row-major (re, im) pairs as little-endian f64.
pub fn write_ulam_matrix(
    out: &mut dyn Write,
    trans: &UlamTransitions,
    omega: &Twist,
) -> std::io::Result<()> {
    let n = trans.cells();
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(n as u64).to_le_bytes())?;
    let mut basis = vec![C64::ZERO; n];
    let mut col = vec![C64::ZERO; n];
    let mut dense: Vec<Vec<C64>> = vec![vec![C64::ZERO; n]; n];
    for j in 0..n {
        basis[j] = C64::ONE;
        trans.apply(omega, &basis, &mut col);
        basis[j] = C64::ZERO;
        for i in 0..n {
            dense[i][j] = col[i];
        }
    }
    for row in &dense {
        for c in row {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}
