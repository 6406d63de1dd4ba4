//! Flat key-value experiment configuration.
//!
//! Format: one `key = value` per line, `#` starts a comment, keys are
//! dot-namespaced. Serialization is canonical (fixed key order, shortest
//! round-trip float formatting), so serialize . parse . serialize is the
//! identity on bytes.

use horoflow_core::fourier::{Bump, CoverObservable};
use horoflow_core::geometry::FuchsianGroup;
use horoflow_core::jacobi::CurvatureModel;
use horoflow_core::CoverLattice;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub d: usize,
    /// d rows of 4 integers: homology classes selecting the cover.
    pub projection: Vec<[i64; 4]>,
    pub curvature: CurvatureSpec,
    pub bump_center: (f64, f64),
    pub bump_angle: f64,
    pub bump_r_xy: f64,
    pub bump_r_angle: f64,
    pub bump_amp: f64,
    /// (deck vector, coefficient) support window of the observable.
    pub support: Vec<(Vec<i64>, f64)>,
    /// Horocycle-time schedule for theorem-a / theorem-c (values of T).
    pub big_t_schedule: Vec<f64>,
    /// Geodesic-time schedule for theorem-b.
    pub t_schedule: Vec<f64>,
    pub arc_len: f64,
    pub n_points: usize,
    pub quad_step: f64,
    pub sigma_t: f64,
    pub sigma_n: usize,
    pub clt_t: f64,
    pub clt_n: usize,
    pub ulam_cells_xy: usize,
    pub ulam_cells_theta: usize,
    pub ulam_t: f64,
    pub ulam_samples: usize,
    pub ulam_omega_max: f64,
    pub ulam_omega_count: usize,
    pub ulam_dump_matrix: bool,
    pub reconstruct_grid: usize,
    pub tau_smax: f64,
    pub window_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurvatureSpec {
    Constant,
    Sinusoidal { mean: f64, amp: f64, freq: f64, phase: f64 },
}

impl Default for Config {
    fn default() -> Config {
        Config {
            seed: 1,
            d: 1,
            projection: vec![[1, 0, 0, 0]],
            curvature: CurvatureSpec::Constant,
            bump_center: (0.08, -0.03),
            bump_angle: 1.0,
            bump_r_xy: 0.2,
            bump_r_angle: 1.0,
            bump_amp: 1.0,
            support: vec![(vec![0], 1.0)],
            big_t_schedule: vec![100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0],
            t_schedule: vec![6.0, 8.0, 10.0, 12.0],
            arc_len: 1.0,
            n_points: 5,
            quad_step: 0.02,
            sigma_t: 40.0,
            sigma_n: 10_000,
            clt_t: 40.0,
            clt_n: 10_000,
            ulam_cells_xy: 24,
            ulam_cells_theta: 24,
            ulam_t: 2.0,
            ulam_samples: 32,
            ulam_omega_max: 0.25,
            ulam_omega_count: 6,
            ulam_dump_matrix: false,
            reconstruct_grid: 5,
            tau_smax: 5.0,
            window_delta: 0.3,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> CResult<Config> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Config::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> CResult<Config> {
        let mut c = Config::default();
        let get = |key: &str| map.get(key);
        let req = |key: &str| {
            map.get(key)
                .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
        };

        c.seed = req("seed")?
            .parse()
            .map_err(|_| ConfigError("key `seed` must be a u64".into()))?;

        if let Some(v) = get("d") {
            c.d = parse_num(v, "d")?;
        }
        if let Some(v) = get("projection") {
            c.projection = parse_projection(v)?;
        } else if c.d == 2 {
            c.projection = vec![[1, 0, 0, 0], [0, 1, 0, 0]];
        }
        if c.projection.len() != c.d {
            return Err(ConfigError(format!(
                "key `projection` has {} rows but d = {}",
                c.projection.len(),
                c.d
            )));
        }
        match get("curvature").map(|s| s.as_str()) {
            None | Some("constant") => c.curvature = CurvatureSpec::Constant,
            Some("sinusoidal") => {
                c.curvature = CurvatureSpec::Sinusoidal {
                    mean: parse_num(req("curvature.mean")?, "curvature.mean")?,
                    amp: parse_num(req("curvature.amp")?, "curvature.amp")?,
                    freq: parse_num(req("curvature.freq")?, "curvature.freq")?,
                    phase: get("curvature.phase")
                        .map(|v| parse_num(v, "curvature.phase"))
                        .transpose()?
                        .unwrap_or(0.0),
                };
            }
            Some(other) => {
                return Err(ConfigError(format!(
                    "key `curvature` must be constant|sinusoidal, got `{other}`"
                )))
            }
        }
        macro_rules! opt_num {
            ($field:expr, $key:literal) => {
                if let Some(v) = get($key) {
                    $field = parse_num(v, $key)?;
                }
            };
        }
        opt_num!(c.bump_center.0, "bump.center_x");
        opt_num!(c.bump_center.1, "bump.center_y");
        opt_num!(c.bump_angle, "bump.angle");
        opt_num!(c.bump_r_xy, "bump.r_xy");
        opt_num!(c.bump_r_angle, "bump.r_angle");
        opt_num!(c.bump_amp, "bump.amp");
        if let Some(v) = get("support") {
            c.support = parse_support(v, c.d)?;
        } else {
            c.support = vec![(vec![0; c.d], 1.0)];
        }
        if let Some(v) = get("big_t_schedule") {
            c.big_t_schedule = parse_list(v, "big_t_schedule")?;
        }
        if let Some(v) = get("t_schedule") {
            c.t_schedule = parse_list(v, "t_schedule")?;
        }
        opt_num!(c.arc_len, "arc_len");
        opt_num!(c.n_points, "n_points");
        opt_num!(c.quad_step, "quad_step");
        opt_num!(c.sigma_t, "sigma.t");
        opt_num!(c.sigma_n, "sigma.n");
        opt_num!(c.clt_t, "clt.t");
        opt_num!(c.clt_n, "clt.n");
        opt_num!(c.ulam_cells_xy, "ulam.cells_xy");
        opt_num!(c.ulam_cells_theta, "ulam.cells_theta");
        opt_num!(c.ulam_t, "ulam.t");
        opt_num!(c.ulam_samples, "ulam.samples");
        opt_num!(c.ulam_omega_max, "ulam.omega_max");
        opt_num!(c.ulam_omega_count, "ulam.omega_count");
        if let Some(v) = get("ulam.dump_matrix") {
            c.ulam_dump_matrix = v == "true";
        }
        opt_num!(c.reconstruct_grid, "reconstruct.grid");
        opt_num!(c.tau_smax, "tau.s_max");
        opt_num!(c.window_delta, "window.delta");

        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CResult<()> {
        if self.d == 0 || self.d > 4 {
            return Err(ConfigError("key `d` must be in 1..=4".into()));
        }
        if self.quad_step <= 0.0 || self.quad_step > 0.1 {
            return Err(ConfigError("key `quad_step` must be in (0, 0.1]".into()));
        }
        if self.sigma_t < 20.0 {
            return Err(ConfigError("key `sigma.t` must be >= 20".into()));
        }
        if self.sigma_n < 1000 {
            return Err(ConfigError("key `sigma.n` must be >= 1000".into()));
        }
        if self.ulam_cells_xy < 2 || self.ulam_cells_theta < 2 {
            return Err(ConfigError("ulam cell counts must be >= 2".into()));
        }
        if self.ulam_samples < 1 {
            return Err(ConfigError("key `ulam.samples` must be >= 1".into()));
        }
        if !(self.ulam_t >= 0.5 && self.ulam_t <= 3.0) {
            return Err(ConfigError("key `ulam.t` must be in [0.5, 3]".into()));
        }
        if let CurvatureSpec::Sinusoidal { mean, amp, .. } = self.curvature {
            if !(mean - amp > 0.0) {
                return Err(ConfigError(
                    "sinusoidal curvature must satisfy mean - amp > 0".into(),
                ));
            }
        }
        if self.support.iter().any(|(v, _)| v.len() != self.d) {
            return Err(ConfigError("support deck vectors must have length d".into()));
        }
        Ok(())
    }

    /// Canonical serialization; parse(serialize(c)) == c and
    /// serialize(parse(s)) is byte-stable.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("d", self.d.to_string());
        kv(
            "projection",
            self.projection
                .iter()
                .map(|r| r.map(|x| x.to_string()).join(" "))
                .collect::<Vec<_>>()
                .join(" ; "),
        );
        match &self.curvature {
            CurvatureSpec::Constant => kv("curvature", "constant".into()),
            CurvatureSpec::Sinusoidal { mean, amp, freq, phase } => {
                kv("curvature", "sinusoidal".into());
                kv("curvature.mean", fmt_f64(*mean));
                kv("curvature.amp", fmt_f64(*amp));
                kv("curvature.freq", fmt_f64(*freq));
                kv("curvature.phase", fmt_f64(*phase));
            }
        }
        kv("bump.center_x", fmt_f64(self.bump_center.0));
        kv("bump.center_y", fmt_f64(self.bump_center.1));
        kv("bump.angle", fmt_f64(self.bump_angle));
        kv("bump.r_xy", fmt_f64(self.bump_r_xy));
        kv("bump.r_angle", fmt_f64(self.bump_r_angle));
        kv("bump.amp", fmt_f64(self.bump_amp));
        kv(
            "support",
            self.support
                .iter()
                .map(|(d, c)| {
                    format!(
                        "{}:{}",
                        d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                        fmt_f64(*c)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ; "),
        );
        kv("big_t_schedule", join_f64(&self.big_t_schedule));
        kv("t_schedule", join_f64(&self.t_schedule));
        kv("arc_len", fmt_f64(self.arc_len));
        kv("n_points", self.n_points.to_string());
        kv("quad_step", fmt_f64(self.quad_step));
        kv("sigma.t", fmt_f64(self.sigma_t));
        kv("sigma.n", self.sigma_n.to_string());
        kv("clt.t", fmt_f64(self.clt_t));
        kv("clt.n", self.clt_n.to_string());
        kv("ulam.cells_xy", self.ulam_cells_xy.to_string());
        kv("ulam.cells_theta", self.ulam_cells_theta.to_string());
        kv("ulam.t", fmt_f64(self.ulam_t));
        kv("ulam.samples", self.ulam_samples.to_string());
        kv("ulam.omega_max", fmt_f64(self.ulam_omega_max));
        kv("ulam.omega_count", self.ulam_omega_count.to_string());
        kv("ulam.dump_matrix", self.ulam_dump_matrix.to_string());
        kv("reconstruct.grid", self.reconstruct_grid.to_string());
        kv("tau.s_max", fmt_f64(self.tau_smax));
        kv("window.delta", fmt_f64(self.window_delta));
        s
    }

    /// FNV-1a over the canonical serialization.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.serialize().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        h
    }

    pub fn lattice(&self) -> CoverLattice {
        CoverLattice::new(FuchsianGroup::validated(), self.projection.clone())
    }

    pub fn model(&self) -> CurvatureModel {
        match &self.curvature {
            CurvatureSpec::Constant => CurvatureModel::Constant,
            CurvatureSpec::Sinusoidal { mean, amp, freq, phase } => {
                CurvatureModel::sinusoidal(*mean, *amp, *freq, *phase)
            }
        }
    }

    pub fn observable(&self, group: &FuchsianGroup) -> CoverObservable {
        let bump = Bump::new(
            group,
            self.bump_center,
            self.bump_angle,
            self.bump_r_xy,
            self.bump_r_angle,
            self.bump_amp,
        );
        CoverObservable::new(bump, self.support.clone())
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that round-trips
    format!("{v:?}")
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> CResult<T> {
    v.parse()
        .map_err(|_| ConfigError(format!("key `{key}` has malformed value `{v}`")))
}

fn parse_list(v: &str, key: &str) -> CResult<Vec<f64>> {
    v.split(',')
        .map(|s| parse_num(s.trim(), key))
        .collect()
}

fn parse_projection(v: &str) -> CResult<Vec<[i64; 4]>> {
    let mut rows = Vec::new();
    for row in v.split(';') {
        let nums: Vec<i64> = row
            .split_whitespace()
            .map(|s| parse_num(s, "projection"))
            .collect::<CResult<_>>()?;
        if nums.len() != 4 {
            return Err(ConfigError(
                "key `projection` rows must have 4 integers".into(),
            ));
        }
        rows.push([nums[0], nums[1], nums[2], nums[3]]);
    }
    Ok(rows)
}

fn parse_support(v: &str, d: usize) -> CResult<Vec<(Vec<i64>, f64)>> {
    let mut out = Vec::new();
    for item in v.split(';') {
        let (deck, coeff) = item
            .trim()
            .split_once(':')
            .ok_or_else(|| ConfigError("key `support` items are `deck..:coeff`".into()))?;
        let deck: Vec<i64> = deck
            .split_whitespace()
            .map(|s| parse_num(s, "support"))
            .collect::<CResult<_>>()?;
        if deck.len() != d {
            return Err(ConfigError(format!(
                "key `support` deck vector `{}` must have {d} entries",
                item.trim()
            )));
        }
        out.push((deck, parse_num(coeff.trim(), "support")?));
    }
    Ok(out)
}
