//! Run configuration: flat TOML with unit-suffixed keys.
//!
//! Every dimensioned quantity is given either as `<name>_db` or
//! `<name>_lin`, never both and never bare. Variances of the mobility model
//! follow `variance_convention`: `relative` (default) scales them by the
//! squared mean, `absolute` takes them as given.

use std::fmt;
use std::str::FromStr;

use coopsense::analytic::MeasurementModel;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("`{key}`: give exactly one of `{key}_db` or `{key}_lin`")]
    Ambiguous { key: String },
    #[error("`{key}` needs a unit suffix: `{key}_db` or `{key}_lin`")]
    Untagged { key: String },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Exact for integer dB inputs up to the rounding of `powf`.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Optimize,
    Tradeoff,
    Mc,
    Bound,
    Scaling,
    QuietPeriod,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Optimize,
        Command::Tradeoff,
        Command::Mc,
        Command::Bound,
        Command::Scaling,
        Command::QuietPeriod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Optimize => "optimize",
            Self::Tradeoff => "tradeoff",
            Self::Mc => "mc",
            Self::Bound => "bound",
            Self::Scaling => "scaling",
            Self::QuietPeriod => "quiet-period",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| bad("command", format!("unknown command `{s}`")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(bad("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Sweep used by the `scaling` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Nodes,
    Report,
    Sense,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nodes => "nodes",
            Self::Report => "report",
            Self::Sense => "sense",
        }
    }
}

/// Fully resolved configuration, linear units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub nodes: usize,
    pub samples: u32,
    pub beta: f64,
    pub measurement: MeasurementModel,
    pub p_pu: f64,
    pub budget: f64,
    pub lambda_r: f64,
    /// Absolute variance of the reporting gain.
    pub sigma_r: f64,
    pub lambda_s: f64,
    /// Absolute variance of the sensing gain.
    pub sigma_s: f64,
    /// Common AF gain used to label `bound` output.
    pub af_gain: f64,
    /// At most `i64::MAX` so that it fits a TOML integer.
    pub seed: u64,
    pub trials: u64,
    pub static_periods: usize,
    pub betas: Vec<f64>,
    pub node_grid: Vec<usize>,
    pub scaling: Scaling,
    /// Mean SNRs for the link-quality sweeps; `None` picks a low-SNR default.
    pub snr_grid: Option<Vec<f64>>,
    pub report_snr_var: f64,
    pub sense_snr_cv2: f64,
    pub perturb: bool,
    pub p_pu_spread_db: f64,
    pub noise_spread_db: f64,
    pub target_p_md: f64,
    pub target_p_fa: f64,
    pub max_samples: u32,
    pub quiet_trials: u64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub schemes: Vec<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lr = db_to_lin(-80.0);
        let ls = db_to_lin(-30.0);
        Self {
            command: None,
            nodes: 20,
            samples: 1,
            beta: 1.0,
            measurement: MeasurementModel::Split,
            p_pu: db_to_lin(30.0),
            budget: db_to_lin(90.0),
            lambda_r: lr,
            sigma_r: db_to_lin(5.0) * lr * lr,
            lambda_s: ls,
            sigma_s: db_to_lin(5.0) * ls * ls,
            af_gain: 1.0,
            seed: 1,
            trials: 100_000,
            static_periods: 20,
            betas: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            node_grid: vec![10, 20, 30, 40, 50, 60],
            scaling: Scaling::Nodes,
            snr_grid: None,
            report_snr_var: 0.1,
            sense_snr_cv2: db_to_lin(5.0),
            perturb: false,
            p_pu_spread_db: 10.0,
            noise_spread_db: 5.0,
            target_p_md: 0.1,
            target_p_fa: 0.1,
            max_samples: 256,
            quiet_trials: 4_000,
            solver_tol: 1e-3,
            solver_max_iter: 1000,
            schemes: ["proposed", "constant_gain", "local", "polled_majority", "or_rule"]
                .map(String::from)
                .to_vec(),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    nodes: Option<usize>,
    samples: Option<u32>,
    beta: Option<f64>,
    measurement: Option<MeasurementModel>,
    p_pu_db: Option<f64>,
    p_pu_lin: Option<f64>,
    budget_db: Option<f64>,
    budget_lin: Option<f64>,
    lambda_r_db: Option<f64>,
    lambda_r_lin: Option<f64>,
    sigma_r_db: Option<f64>,
    sigma_r_lin: Option<f64>,
    lambda_s_db: Option<f64>,
    lambda_s_lin: Option<f64>,
    sigma_s_db: Option<f64>,
    sigma_s_lin: Option<f64>,
    variance_convention: Option<String>,
    af_gain_db: Option<f64>,
    af_gain_lin: Option<f64>,
    seed: Option<u64>,
    trials: Option<u64>,
    static_periods: Option<usize>,
    betas: Option<Vec<f64>>,
    node_grid: Option<Vec<usize>>,
    scaling: Option<String>,
    snr_grid_db: Option<Vec<f64>>,
    snr_grid_lin: Option<Vec<f64>>,
    report_snr_var_db: Option<f64>,
    report_snr_var_lin: Option<f64>,
    sense_snr_cv2_db: Option<f64>,
    sense_snr_cv2_lin: Option<f64>,
    perturb: Option<bool>,
    p_pu_spread_db: Option<f64>,
    noise_spread_db: Option<f64>,
    target_p_md: Option<f64>,
    target_p_fa: Option<f64>,
    max_samples: Option<u32>,
    quiet_trials: Option<u64>,
    solver_tol: Option<f64>,
    solver_max_iter: Option<usize>,
    schemes: Option<Vec<String>>,
    format: Option<String>,
}

/// Keys that carry a unit and so must appear with a suffix.
const UNIT_KEYS: [&str; 10] = [
    "p_pu",
    "budget",
    "lambda_r",
    "sigma_r",
    "lambda_s",
    "sigma_s",
    "af_gain",
    "snr_grid",
    "report_snr_var",
    "sense_snr_cv2",
];

fn unit(key: &str, db: Option<f64>, lin: Option<f64>) -> Result<Option<f64>, ConfigError> {
    match (db, lin) {
        (Some(_), Some(_)) => Err(ConfigError::Ambiguous { key: key.into() }),
        (Some(d), None) => Ok(Some(db_to_lin(d))),
        (None, l) => Ok(l),
    }
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, format!("must be positive and finite, got {x}")))
    }
}

fn probability(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(bad(key, format!("must lie in (0, 1), got {x}")))
    }
}

/// Parses and resolves a configuration. Missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    // Syntax errors and duplicate keys surface here with line diagnostics.
    let table: Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    for key in UNIT_KEYS {
        if table.contains_key(key) {
            return Err(ConfigError::Untagged { key: key.into() });
        }
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let d = RunConfig::default();
    let relative = match raw.variance_convention.as_deref() {
        None | Some("relative") => true,
        Some("absolute") => false,
        Some(other) => return Err(bad("variance_convention", format!("expected relative or absolute, got `{other}`"))),
    };
    let lambda_r = positive("lambda_r", unit("lambda_r", raw.lambda_r_db, raw.lambda_r_lin)?.unwrap_or(d.lambda_r))?;
    let lambda_s = positive("lambda_s", unit("lambda_s", raw.lambda_s_db, raw.lambda_s_lin)?.unwrap_or(d.lambda_s))?;
    let spread = |key: &str, given: Option<f64>, mean: f64, default: f64| -> Result<f64, ConfigError> {
        let v = match given {
            Some(v) if relative => v * mean * mean,
            Some(v) => v,
            None => default * mean * mean,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(bad(key, "variance must be non-negative"))
        }
    };
    // Defaults are 5 dB relative to the squared mean whatever the convention.
    let rel_default = db_to_lin(5.0);
    let sigma_r = spread("sigma_r", unit("sigma_r", raw.sigma_r_db, raw.sigma_r_lin)?, lambda_r, rel_default)?;
    let sigma_s = spread("sigma_s", unit("sigma_s", raw.sigma_s_db, raw.sigma_s_lin)?, lambda_s, rel_default)?;

    let command = raw.command.as_deref().map(Command::from_str).transpose()?;
    let scaling = match raw.scaling.as_deref() {
        None => d.scaling,
        Some("nodes") => Scaling::Nodes,
        Some("report") => Scaling::Report,
        Some("sense") => Scaling::Sense,
        Some(other) => return Err(bad("scaling", format!("expected nodes, report or sense, got `{other}`"))),
    };
    let snr_grid = match (raw.snr_grid_db, raw.snr_grid_lin) {
        (Some(_), Some(_)) => return Err(ConfigError::Ambiguous { key: "snr_grid".into() }),
        (Some(g), None) => Some(g.into_iter().map(db_to_lin).collect::<Vec<_>>()),
        (None, g) => g,
    };
    if let Some(g) = &snr_grid {
        if g.is_empty() {
            return Err(bad("snr_grid", "must not be empty"));
        }
        for &x in g {
            positive("snr_grid", x)?;
        }
    }
    let betas = raw.betas.unwrap_or(d.betas);
    if betas.is_empty() {
        return Err(bad("betas", "must not be empty"));
    }
    for &b in &betas {
        positive("betas", b)?;
    }
    let node_grid = raw.node_grid.unwrap_or(d.node_grid);
    if node_grid.is_empty() || node_grid.contains(&0) {
        return Err(bad("node_grid", "must be non-empty positive node counts"));
    }
    let schemes = raw.schemes.unwrap_or(d.schemes);
    for s in &schemes {
        coopsense::phy::Scheme::from_str(s).map_err(|e| bad("schemes", e.to_string()))?;
    }
    let nodes = raw.nodes.unwrap_or(d.nodes);
    if nodes == 0 {
        return Err(bad("nodes", "at least one node required"));
    }
    let nonzero = |key: &str, x: u64| if x == 0 { Err(bad(key, "must be at least 1")) } else { Ok(x) };
    let cfg = RunConfig {
        command,
        nodes,
        samples: nonzero("samples", raw.samples.unwrap_or(d.samples) as u64)? as u32,
        beta: positive("beta", raw.beta.unwrap_or(d.beta))?,
        measurement: raw.measurement.unwrap_or(d.measurement),
        p_pu: {
            let p = unit("p_pu", raw.p_pu_db, raw.p_pu_lin)?.unwrap_or(d.p_pu);
            if !(p >= 0.0 && p.is_finite()) {
                return Err(bad("p_pu", "must be non-negative and finite"));
            }
            p
        },
        budget: positive("budget", unit("budget", raw.budget_db, raw.budget_lin)?.unwrap_or(d.budget))?,
        lambda_r,
        sigma_r,
        lambda_s,
        sigma_s,
        af_gain: positive("af_gain", unit("af_gain", raw.af_gain_db, raw.af_gain_lin)?.unwrap_or(d.af_gain))?,
        seed: raw.seed.unwrap_or(d.seed),
        trials: nonzero("trials", raw.trials.unwrap_or(d.trials))?,
        static_periods: nonzero("static_periods", raw.static_periods.unwrap_or(d.static_periods) as u64)? as usize,
        betas,
        node_grid,
        scaling,
        snr_grid,
        report_snr_var: {
            let v = unit("report_snr_var", raw.report_snr_var_db, raw.report_snr_var_lin)?.unwrap_or(d.report_snr_var);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad("report_snr_var", "must be non-negative"));
            }
            v
        },
        sense_snr_cv2: {
            let v = unit("sense_snr_cv2", raw.sense_snr_cv2_db, raw.sense_snr_cv2_lin)?.unwrap_or(d.sense_snr_cv2);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad("sense_snr_cv2", "must be non-negative"));
            }
            v
        },
        perturb: raw.perturb.unwrap_or(d.perturb),
        p_pu_spread_db: raw.p_pu_spread_db.unwrap_or(d.p_pu_spread_db),
        noise_spread_db: raw.noise_spread_db.unwrap_or(d.noise_spread_db),
        target_p_md: probability("target_p_md", raw.target_p_md.unwrap_or(d.target_p_md))?,
        target_p_fa: probability("target_p_fa", raw.target_p_fa.unwrap_or(d.target_p_fa))?,
        max_samples: nonzero("max_samples", raw.max_samples.unwrap_or(d.max_samples) as u64)? as u32,
        quiet_trials: nonzero("quiet_trials", raw.quiet_trials.unwrap_or(d.quiet_trials))?,
        solver_tol: positive("solver_tol", raw.solver_tol.unwrap_or(d.solver_tol))?,
        solver_max_iter: nonzero("solver_max_iter", raw.solver_max_iter.unwrap_or(d.solver_max_iter) as u64)? as usize,
        schemes,
        format: raw.format.as_deref().map(Format::from_str).transpose()?.unwrap_or(d.format),
    };
    for (key, x) in [("p_pu_spread_db", cfg.p_pu_spread_db), ("noise_spread_db", cfg.noise_spread_db)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(bad(key, "spread must be non-negative"));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Canonical TOML of the resolved configuration: linear units, absolute
    /// variances, every key present. Parsing it yields an equal config.
    pub fn to_toml(&self) -> String {
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_string(), v);
        };
        let floats = |xs: &[f64]| Value::Array(xs.iter().map(|&x| Value::Float(x)).collect());
        if let Some(c) = self.command {
            put("command", Value::String(c.name().into()));
        }
        put("nodes", Value::Integer(self.nodes as i64));
        put("samples", Value::Integer(self.samples as i64));
        put("beta", Value::Float(self.beta));
        put(
            "measurement",
            Value::String(
                match self.measurement {
                    MeasurementModel::Split => "split",
                    MeasurementModel::SampleAverage => "sample_average",
                }
                .into(),
            ),
        );
        put("p_pu_lin", Value::Float(self.p_pu));
        put("budget_lin", Value::Float(self.budget));
        put("lambda_r_lin", Value::Float(self.lambda_r));
        put("sigma_r_lin", Value::Float(self.sigma_r));
        put("lambda_s_lin", Value::Float(self.lambda_s));
        put("sigma_s_lin", Value::Float(self.sigma_s));
        put("variance_convention", Value::String("absolute".into()));
        put("af_gain_lin", Value::Float(self.af_gain));
        // TOML integers are signed, so seeds are capped at i64::MAX.
        put("seed", Value::Integer(self.seed as i64));
        put("trials", Value::Integer(self.trials as i64));
        put("static_periods", Value::Integer(self.static_periods as i64));
        put("betas", floats(&self.betas));
        put(
            "node_grid",
            Value::Array(self.node_grid.iter().map(|&k| Value::Integer(k as i64)).collect()),
        );
        put("scaling", Value::String(self.scaling.name().into()));
        if let Some(g) = &self.snr_grid {
            put("snr_grid_lin", floats(g));
        }
        put("report_snr_var_lin", Value::Float(self.report_snr_var));
        put("sense_snr_cv2_lin", Value::Float(self.sense_snr_cv2));
        put("perturb", Value::Boolean(self.perturb));
        put("p_pu_spread_db", Value::Float(self.p_pu_spread_db));
        put("noise_spread_db", Value::Float(self.noise_spread_db));
        put("target_p_md", Value::Float(self.target_p_md));
        put("target_p_fa", Value::Float(self.target_p_fa));
        put("max_samples", Value::Integer(self.max_samples as i64));
        put("quiet_trials", Value::Integer(self.quiet_trials as i64));
        put("solver_tol", Value::Float(self.solver_tol));
        put("solver_max_iter", Value::Integer(self.solver_max_iter as i64));
        put(
            "schemes",
            Value::Array(self.schemes.iter().map(|s| Value::String(s.clone())).collect()),
        );
        put("format", Value::String(self.format.name().into()));
        toml::to_string(&t).expect("plain table serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::to_toml`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
