//! The experiment subcommands. Each writes CSV outputs plus a manifest into
//! the output directory; all randomness flows through (seed, stream-id) keys
//! so outputs are byte-identical across re-runs and worker counts.

use crate::config::Config;
use crate::output::{fmt_float, CsvWriter, Manifest};
use horoflow_core::cover::{CoverPoint, Twist};
use horoflow_core::ergodic::{
    renormalized_identity_sides, theorem_a_experiment, theorem_b_experiment,
    theorem_c_experiment, SmoothingWindow,
};
use horoflow_core::fourier::{project_twist, reconstruct};
use horoflow_core::geometry::{geodesic_step, FuchsianGroup, Isometry, Letter};
use horoflow_core::jacobi::{normalizing_time_at_phase, tau_at_phase, TAU_STEP};
use horoflow_core::rng;
use horoflow_core::spectral::{
    estimate_sigma, clt_diagnostic, fit_quadratic_decay, frobenius_rel, leading_eigenvalue,
    ulam_transitions, write_ulam_matrix, CovarianceMatrix, UlamGrid,
};
use horoflow_core::stats;
use horoflow_core::CoverLattice;
use rand::RngExt;
use std::fs;
use std::path::Path;

pub enum CmdError {
    /// Config or precondition problems; exit code 2.
    Validation(String),
    /// Numeric guard failures; exit code 3.
    Numeric(String),
}

impl From<horoflow_core::Error> for CmdError {
    fn from(e: horoflow_core::Error) -> CmdError {
        CmdError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> CmdError {
        CmdError::Validation(format!("io error: {e}"))
    }
}

type CmdResult = Result<(), CmdError>;

const DOMAIN_POINTS: u64 = 0x9017;

/// The volume-random experiment points for a given seed; shared by every
/// subcommand so results can be cross-referenced by x_index.
fn experiment_points(lat: &CoverLattice, n: usize, seed: u64) -> Vec<CoverPoint> {
    let mut r = rng::stream(seed, DOMAIN_POINTS);
    (0..n)
        .map(|_| CoverPoint { base: lat.group.sample_volume(&mut r), deck: vec![0; lat.d()] })
        .collect()
}

fn begin(out: &Path, cfg: &Config, sub: &str) -> Result<Manifest, CmdError> {
    fs::create_dir_all(out)?;
    let m = Manifest::begin(out, sub, cfg.content_hash(), cfg.seed);
    m.check_resume().map_err(CmdError::Validation)?;
    Ok(m)
}

pub fn validate_geometry(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "validate-geometry")?;
    let g = FuchsianGroup::bolza_octagon();

    // side pairing residual, sampled along every side
    let mut side_residual: f64 = 0.0;
    for k in 0..8 {
        for i in 0..16 {
            let frac = -0.95 + 1.9 * i as f64 / 15.0;
            let z = g.side_point((k + 4) % 8, frac);
            let img = g.pairing(Letter(k as u8)).apply(z);
            side_residual = side_residual.max(g.side_residual(k, img));
        }
    }

    // flow-deck commutation over seeded random triples: left deck action vs
    // right flow action, compared as raw triple products
    let mut r = rng::stream(cfg.seed, 0xbeef);
    let mut commutation: f64 = 0.0;
    for _ in 0..1000 {
        let x = g.sample_volume(&mut r);
        let t = r.random_range(-5.0..5.0);
        let s = r.random_range(-5.0..5.0);
        let k = r.random_range(0..8u8);
        let dmat = *g.pairing(Letter(k));
        for step in [
            Isometry::translation(t),
            Isometry { a: 1.0, b: s, c: 0.0, d: 1.0 },
        ] {
            let left = dmat.mul(&x.mul(&step));
            let right = dmat.mul(&x).mul(&step);
            commutation = commutation.max(left.dist_proj(&right));
        }
    }

    // determinant drift over 1e6 chained flow steps with renormalization
    let mut x = Isometry::from_base_angle(0.11, 0.93, 0.7);
    let mut det_drift: f64 = 0.0;
    for i in 0..1_000_000u32 {
        x = if i % 2 == 0 {
            geodesic_step(&x, 0.37)
        } else {
            horoflow_core::geometry::horocycle_step(&x, -0.21)
        };
        if i % 64 == 0 {
            det_drift = det_drift.max((x.det() - 1.0).abs());
            if !g.contains_base(&x) {
                let (red, _) = g.reduce_retrying(&x)?;
                x = red;
            }
        }
    }
    det_drift = det_drift.max((x.det() - 1.0).abs());

    let mut csv = CsvWriter::create(
        out.join("geometry.csv"),
        &["metric", "value"],
    );
    let rows = [
        ("relation_residual", g.relation_residual),
        ("commutator_residual", g.commutator_residual),
        ("side_pairing_residual", side_residual),
        ("flow_deck_commutation", commutation),
        ("det_drift_1e6_steps", det_drift),
        ("dist_side", g.dist_side),
        ("dist_vertex", g.dist_vertex),
    ];
    for (k, v) in rows {
        csv.row(&[k.to_string(), fmt_float(v)]);
    }
    csv.finish()?;

    for (k, v) in rows {
        manifest.put_float(k, v);
    }
    manifest.finish()?;

    if g.relation_residual > 1e-8 || g.commutator_residual > 1e-8 {
        return Err(CmdError::Validation(format!(
            "surface-group relation residual too large: {} / {}",
            g.relation_residual, g.commutator_residual
        )));
    }
    if commutation > 1e-12 {
        return Err(CmdError::Validation(format!(
            "flow-deck commutation residual {commutation} exceeds 1e-12"
        )));
    }
    if det_drift > 1e-8 {
        return Err(CmdError::Validation(format!(
            "determinant drift {det_drift} exceeds 1e-8"
        )));
    }
    Ok(())
}

pub fn tau_tables(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "tau-tables")?;
    let model = cfg.model();
    let mut csv = CsvWriter::create(
        out.join("tau_tables.csv"),
        &["s", "t", "tau", "tau_quadrature", "quad_error"],
    );
    let s_grid: Vec<f64> = (1..=8).map(|i| cfg.tau_smax * i as f64 / 8.0).collect();
    let t_grid = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    for &s in &s_grid {
        for &t in &t_grid {
            let r = tau_at_phase(&model, 0.0, s, t, TAU_STEP)?;
            csv.row(&[
                fmt_float(s),
                fmt_float(t),
                fmt_float(r.tau),
                fmt_float(r.tau_quadrature),
                fmt_float(r.quad_error),
            ]);
        }
    }
    csv.finish()?;

    // windowed renormalization identity on the surface: both routes of
    //   int f(h_s x) psi(tau(s,t,x)) ds = e^t int Lhat_t f (h_s g_t x) psi ds
    // with the ramp width b = e^{-delta t / 3}
    let lat = cfg.lattice();
    let f = cfg.observable(&lat.group);
    let x = experiment_points(&lat, 1, cfg.seed)[0].clone();
    let mut csv = CsvWriter::create(
        out.join("renorm_identity.csv"),
        &["big_t", "t", "b", "lhs", "rhs", "residual"],
    );
    for &(big_t, t) in &[(120.0, 1.0), (200.0, 1.5)] {
        let b = SmoothingWindow::default_b(cfg.window_delta, t);
        let window = SmoothingWindow::new(b, (-t).exp() * big_t);
        let (lhs, rhs) =
            renormalized_identity_sides(&lat, &f, &x, big_t, t, &window, cfg.quad_step)?;
        csv.row(&[
            fmt_float(big_t),
            fmt_float(t),
            fmt_float(b),
            fmt_float(lhs),
            fmt_float(rhs),
            fmt_float((lhs - rhs).abs()),
        ]);
    }
    csv.finish()?;

    let mut csv = CsvWriter::create(
        out.join("t_star.csv"),
        &["big_t", "t_star", "tau_residual", "envelope"],
    );
    for &big_t in &cfg.big_t_schedule {
        let t_star = normalizing_time_at_phase(&model, 0.0, big_t)?;
        let step = (big_t / 512.0).clamp(0.05, 0.5);
        let residual = (tau_at_phase(&model, 0.0, big_t, t_star, step)?.tau - 1.0).abs();
        let envelope = (big_t - (model.h_top() * t_star).exp()).abs() / big_t.powf(0.8);
        csv.row(&[
            fmt_float(big_t),
            fmt_float(t_star),
            fmt_float(residual),
            fmt_float(envelope),
        ]);
    }
    csv.finish()?;
    manifest.put_float("h_top", cfg.model().h_top());
    manifest.finish()?;
    Ok(())
}

pub fn winding_orbit(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "winding-orbit")?;
    let lat = cfg.lattice();
    let xs = experiment_points(&lat, cfg.n_points, cfg.seed);
    let t_max = cfg.t_schedule.iter().cloned().fold(12.0, f64::max);
    let deck_cols: Vec<String> = (0..lat.d()).map(|i| format!("deck_{i}")).collect();
    let mut header: Vec<&str> = vec!["x_index", "t", "word_len"];
    header.extend(deck_cols.iter().map(String::as_str));
    let mut csv = CsvWriter::create(out.join("winding_orbit.csv"), &header);

    // word-length growth doubles as the reduction-slope diagnostic
    let mut slope_acc = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let mut point = x.clone();
        let mut letters = 0usize;
        let mut ts = Vec::new();
        let mut lens = Vec::new();
        for step in 1..=(t_max.ceil() as usize) {
            let raw = geodesic_step(&point.base, 1.0);
            let (base, word) = lat.group.reduce_retrying(&raw)?;
            letters += word.len();
            for (v, w) in point.deck.iter_mut().zip(lat.word_deck(&word)) {
                *v -= w;
            }
            point.base = base;
            let t = step as f64;
            let mut row = vec![i.to_string(), fmt_float(t), letters.to_string()];
            row.extend(point.deck.iter().map(|v| v.to_string()));
            csv.row(&row);
            ts.push(t);
            lens.push(letters as f64);
        }
        let (_, slope, _) = stats::linear_fit(&ts, &lens);
        slope_acc.push(slope);
    }
    csv.finish()?;
    let mean_slope = slope_acc.iter().sum::<f64>() / slope_acc.len() as f64;
    manifest.put_float("word_length_slope", mean_slope);
    manifest.put_float("domain_diameter", lat.group.domain_diameter());
    manifest.finish()?;
    Ok(())
}

fn sigma_path(out: &Path) -> std::path::PathBuf {
    out.join("sigma.csv")
}

fn save_sigma(path: &Path, cov: &CovarianceMatrix) -> Result<(), CmdError> {
    let mut csv = CsvWriter::create(
        path.to_path_buf(),
        &["i", "j", "sigma", "std_err", "n_samples", "flow_time", "mean_drift_sigmas"],
    );
    for i in 0..cov.d() {
        for j in 0..cov.d() {
            csv.row(&[
                i.to_string(),
                j.to_string(),
                fmt_float(cov.sigma[i][j]),
                fmt_float(cov.std_err[i][j]),
                cov.n_samples.to_string(),
                fmt_float(cov.flow_time),
                fmt_float(cov.mean_drift_sigmas),
            ]);
        }
    }
    csv.finish()?;
    Ok(())
}

pub fn load_sigma(path: &Path) -> Result<CovarianceMatrix, CmdError> {
    let text = fs::read_to_string(path).map_err(|_| {
        CmdError::Validation(format!(
            "covariance file {} not found; run estimate-sigma first",
            path.display()
        ))
    })?;
    let mut entries = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(CmdError::Validation("malformed sigma.csv".into()));
        }
        let parse = |s: &str| -> Result<f64, CmdError> {
            s.parse()
                .map_err(|_| CmdError::Validation("malformed sigma.csv number".into()))
        };
        entries.push((
            f[0].parse::<usize>().map_err(|_| CmdError::Validation("bad index".into()))?,
            f[1].parse::<usize>().map_err(|_| CmdError::Validation("bad index".into()))?,
            parse(f[2])?,
            parse(f[3])?,
            f[4].parse::<usize>().unwrap_or(0),
            parse(f[5])?,
            parse(f[6])?,
        ));
    }
    let d = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let mut sigma = vec![vec![0.0; d]; d];
    let mut std_err = vec![vec![0.0; d]; d];
    let (mut n, mut t, mut drift) = (0usize, 0.0, 0.0);
    for (i, j, s, se, nn, tt, dr) in entries {
        sigma[i][j] = s;
        std_err[i][j] = se;
        n = nn;
        t = tt;
        drift = dr;
    }
    CovarianceMatrix::from_parts(sigma, std_err, n, t, drift)
        .map_err(|e| CmdError::Numeric(e.to_string()))
}

pub fn cmd_estimate_sigma(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "estimate-sigma")?;
    let lat = cfg.lattice();
    let cov = estimate_sigma(&lat, cfg.sigma_t, cfg.sigma_n, cfg.seed)?;
    save_sigma(&sigma_path(out), &cov)?;
    manifest.put_float("mean_drift_sigmas", cov.mean_drift_sigmas);
    manifest.put_float("det", cov.det());
    manifest.finish()?;
    Ok(())
}

pub fn clt_test(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "clt-test")?;
    let lat = cfg.lattice();
    let cov = load_sigma(&sigma_path(out))?;
    let report = clt_diagnostic(&lat, cfg.clt_t, cfg.clt_n, &cov, cfg.seed);
    let mut csv = CsvWriter::create(
        out.join("clt.csv"),
        &["coord", "ks", "p", "ks_raw", "p_raw"],
    );
    for k in 0..lat.d() {
        csv.row(&[
            k.to_string(),
            fmt_float(report.ks_stat[k]),
            fmt_float(report.ks_p[k]),
            fmt_float(report.ks_stat_raw[k]),
            fmt_float(report.ks_p_raw[k]),
        ]);
    }
    csv.finish()?;
    manifest.put_float("whitened_cov_dev", report.whitened_cov_dev);
    manifest.put("degenerate", report.degenerate.to_string());
    manifest.finish()?;
    Ok(())
}

/// Axis (and for d = 2, diagonal) twists out to omega_max, plus zero.
fn omega_grid(d: usize, omega_max: f64, count: usize) -> Vec<Twist> {
    let mut out = vec![Twist::zero(d)];
    for i in 1..=count {
        let r = omega_max * i as f64 / count as f64;
        for axis in 0..d {
            for sign in [1.0, -1.0] {
                let mut w = vec![0.0; d];
                w[axis] = sign * r;
                out.push(Twist(w));
            }
        }
        if d == 2 {
            let c = r / std::f64::consts::SQRT_2;
            out.push(Twist(vec![c, c]));
            out.push(Twist(vec![c, -c]));
        }
    }
    out
}

pub fn ulam_spectrum_cmd(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "ulam-spectrum")?;
    let lat = cfg.lattice();
    let grid = UlamGrid::new(&lat.group, cfg.ulam_cells_xy, cfg.ulam_cells_theta);
    let trans = ulam_transitions(&lat, grid, cfg.ulam_t, cfg.ulam_samples, cfg.seed)?;
    let omegas = omega_grid(lat.d(), cfg.ulam_omega_max, cfg.ulam_omega_count);

    let mut header: Vec<String> = (0..lat.d()).map(|i| format!("omega_{i}")).collect();
    header.extend(
        ["lambda_re", "lambda_im", "lambda_hat_abs", "iterations", "second_estimate"]
            .iter()
            .map(|s| s.to_string()),
    );
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvWriter::create(out.join("spectrum.csv"), &header_refs);

    let mut eigens = Vec::new();
    for omega in &omegas {
        let e = leading_eigenvalue(&trans, omega, 10_000, 1e-10)?;
        let mut row: Vec<String> = omega.0.iter().map(|w| fmt_float(*w)).collect();
        row.push(fmt_float(e.lambda.re));
        row.push(fmt_float(e.lambda.im));
        row.push(fmt_float(e.lambda_hat.abs()));
        row.push(e.iterations.to_string());
        row.push(fmt_float(e.second_estimate));
        csv.row(&row);
        eigens.push(e);
    }
    csv.finish()?;

    let q = fit_quadratic_decay(&eigens, cfg.ulam_t);
    for i in 0..lat.d() {
        for j in 0..lat.d() {
            manifest.put_float(&format!("fit_q_{i}{j}"), q[i][j]);
        }
    }
    let lambda0 = eigens[0].lambda_hat.abs();
    manifest.put_float("lambda_hat_zero", lambda0);
    if let Ok(cov) = load_sigma(&sigma_path(out)) {
        manifest.put_float("sigma_frobenius_rel", frobenius_rel(&q, &cov.sigma));
    }
    if cfg.ulam_dump_matrix {
        let mut f = fs::File::create(out.join("ulam_matrix.bin"))?;
        write_ulam_matrix(&mut f, &trans, &Twist::zero(lat.d()))?;
    }
    manifest.finish()?;
    Ok(())
}

pub fn theorem_a(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "theorem-a")?;
    let lat = cfg.lattice();
    let cov = load_sigma(&sigma_path(out))?;
    let f = cfg.observable(&lat.group);
    let xs = experiment_points(&lat, cfg.n_points, cfg.seed);
    let rows = theorem_a_experiment(&lat, &f, &xs, &cfg.big_t_schedule, &cov, cfg.quad_step)?;

    let mut csv = CsvWriter::create(
        out.join("theorem_a.csv"),
        &[
            "x_index",
            "big_t",
            "integral",
            "quad_error",
            "t_star",
            "phi",
            "a_of_t",
            "mu_f",
            "prediction",
            "residual",
            "envelope_normalized",
            "ratio",
        ],
    );
    for r in &rows {
        csv.row(&[
            r.x_index.to_string(),
            fmt_float(r.t_big),
            fmt_float(r.integral),
            fmt_float(r.quad_error),
            fmt_float(r.prediction.t_star),
            fmt_float(r.prediction.phi),
            fmt_float(r.prediction.a_of_t),
            fmt_float(r.prediction.mu_f),
            fmt_float(r.prediction.value()),
            fmt_float(r.residual),
            fmt_float(r.envelope_normalized),
            fmt_float(r.ratio),
        ]);
    }
    csv.finish()?;
    manifest.put("rows", rows.len().to_string());
    manifest.finish()?;
    Ok(())
}

pub fn theorem_b(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "theorem-b")?;
    let lat = cfg.lattice();
    let cov = load_sigma(&sigma_path(out))?;
    let f = cfg.observable(&lat.group);
    let xs = experiment_points(&lat, cfg.n_points, cfg.seed);
    let rows = theorem_b_experiment(&lat, &f, &xs, &cfg.t_schedule, &cov, cfg.arc_len)?;
    let mut csv = CsvWriter::create(
        out.join("theorem_b.csv"),
        &[
            "x_index",
            "t",
            "pushed_integral",
            "normalized",
            "mu_f",
            "residual",
            "scaled_residual",
        ],
    );
    for r in &rows {
        csv.row(&[
            r.x_index.to_string(),
            fmt_float(r.t),
            fmt_float(r.pushed_integral),
            fmt_float(r.normalized),
            fmt_float(r.mu_f),
            fmt_float(r.residual),
            fmt_float(r.scaled_residual),
        ]);
    }
    csv.finish()?;
    manifest.put("rows", rows.len().to_string());
    manifest.finish()?;
    Ok(())
}

pub fn theorem_c(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "theorem-c")?;
    let lat = cfg.lattice();
    let f = cfg.observable(&lat.group);
    let xs = experiment_points(&lat, cfg.n_points, cfg.seed);
    let fit = theorem_c_experiment(&lat, &f, &xs, &cfg.big_t_schedule, cfg.quad_step)?;
    let mut csv = CsvWriter::create(
        out.join("theorem_c.csv"),
        &["x_index", "big_t", "average", "deviation"],
    );
    for r in &fit.rows {
        csv.row(&[
            r.x_index.to_string(),
            fmt_float(r.t_big),
            fmt_float(r.average),
            fmt_float(r.deviation),
        ]);
    }
    csv.finish()?;
    manifest.put_float("exponent", fit.exponent);
    manifest.put_float("r2", fit.r2);
    manifest.finish()?;
    Ok(())
}

pub fn reconstruct_check(cfg: &Config, out: &Path) -> CmdResult {
    let mut manifest = begin(out, cfg, "reconstruct-check")?;
    let lat = cfg.lattice();
    let f = cfg.observable(&lat.group);
    let needed = (2 * f.max_support_coord() + 1) as usize;
    let n_grid = cfg.reconstruct_grid.max(needed);
    let xs = experiment_points(&lat, cfg.n_points, cfg.seed);
    let mut csv = CsvWriter::create(
        out.join("reconstruct.csv"),
        &["x_index", "grid_n", "residual_abs", "pi_zero_re"],
    );
    let mut worst: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        for n in [n_grid, n_grid + 2] {
            let rec = reconstruct(&f, x, n)?;
            let direct = f.eval(x);
            let resid = (rec - horoflow_core::C64::real(direct)).abs();
            worst = worst.max(resid);
            let pi0 = project_twist(&f, &Twist::zero(lat.d()), x);
            csv.row(&[
                i.to_string(),
                n.to_string(),
                fmt_float(resid),
                fmt_float(pi0.re),
            ]);
        }
    }
    csv.finish()?;
    manifest.put_float("worst_residual", worst);
    manifest.finish()?;
    if worst > 1e-12 {
        return Err(CmdError::Numeric(format!(
            "reconstruction residual {worst} above the exactness budget 1e-12"
        )));
    }
    Ok(())
}

/// Smoothing-window demonstration shares the theorem-c machinery; exposed
/// through tau-tables and the library, not a separate subcommand.
pub fn run(sub: &str, cfg: &Config, out: &Path) -> CmdResult {
    match sub {
        "validate-geometry" => validate_geometry(cfg, out),
        "tau-tables" => tau_tables(cfg, out),
        "winding-orbit" => winding_orbit(cfg, out),
        "estimate-sigma" => cmd_estimate_sigma(cfg, out),
        "clt-test" => clt_test(cfg, out),
        "ulam-spectrum" => ulam_spectrum_cmd(cfg, out),
        "theorem-a" => theorem_a(cfg, out),
        "theorem-b" => theorem_b(cfg, out),
        "theorem-c" => theorem_c(cfg, out),
        "reconstruct-check" => reconstruct_check(cfg, out),
        other => Err(CmdError::Validation(format!("unknown subcommand `{other}`"))),
    }
}
