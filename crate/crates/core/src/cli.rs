//! Run configuration and the command implementations behind the
//! `kerr-revival` binary.
//!
//! A run is described by [`Overrides`] (every field optional, filled from a
//! JSON file and then from flags) which [`Overrides::resolve`] turns into a
//! fully explicit [`RunConfig`]. The resolved config is embedded in every
//! output header and parses back to itself.

use std::fmt::Write as _;
use std::str::FromStr;

use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{check_wigner_grid, linspace, truncation_for, wigner_exact, ExactKerr, GridSpec, DEFAULT_TAIL_TOL};
use crate::tdwkb::{self, TdwkbOptions};
use crate::theta::{self, DEFAULT_TOL};
use crate::vanvleck::{self, Expansion, WavefunctionOptions, DEFAULT_WEIGHT_CUTOFF};
use crate::{ModelParams, Picture, Timescales};

const CONFIG_PREFIX: &str = "# config = ";
const WIGNER_SPACING: f64 = 0.25;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Numerical(crate::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) | CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Numerical(other),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Correlation,
    Wavefunction,
    Wigner,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Vanvleck,
    ThetaQuantum,
    ThetaSemiclassical,
    Tdwkb,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Vanvleck => "vanvleck",
            Method::ThetaQuantum => "theta-quantum",
            Method::ThetaSemiclassical => "theta-semiclassical",
            Method::Tdwkb => "tdwkb",
        }
    }

    fn supports(self, quantity: Quantity) -> bool {
        match quantity {
            Quantity::Correlation => !matches!(self, Method::Tdwkb),
            Quantity::Wavefunction => matches!(self, Method::Exact | Method::Vanvleck | Method::Tdwkb),
        }
    }

    /// The picture a method is formulated in, if it is tied to one.
    fn native_picture(self) -> Option<Picture> {
        match self {
            Method::Exact => None,
            Method::Tdwkb => Some(Picture::Interaction),
            _ => Some(Picture::Lab),
        }
    }
}

/// Quantity compared by the `compare` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    #[default]
    Correlation,
    Wavefunction,
}

/// Pointwise error used by `compare`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `|a - b|` on complex values.
    #[default]
    Complex,
    /// `||a| - |b||`, insensitive to global phase.
    Modulus,
}

/// A time given as a number or as a multiple of `T1` / `T2`, such as
/// `2.5T2`, `T2/3` or `-4*T1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeValue {
    Number(f64),
    Expr(String),
}

impl FromStr for TimeValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().parse::<f64>() {
            Ok(x) => Ok(TimeValue::Number(x)),
            Err(_) => Ok(TimeValue::Expr(s.trim().to_string())),
        }
    }
}

impl TimeValue {
    pub fn eval(&self, times: &Timescales) -> Result<f64, CliError> {
        let expr = match self {
            TimeValue::Number(x) => return Ok(*x),
            TimeValue::Expr(e) => e.replace(' ', ""),
        };
        let bad = || config_err(format!("cannot read time {expr:?} (expected e.g. 1.5, 2T2, T2/3, 0.5*T1)"));
        let (num, den) = match expr.split_once('/') {
            Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
            None => (expr.as_str(), 1.0),
        };
        let (coef, unit) = if let Some(c) = num.strip_suffix("T1") {
            (c, times.t1)
        } else if let Some(c) = num.strip_suffix("T2") {
            (c, times.t2)
        } else {
            return Err(bad());
        };
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let value = c * unit / den;
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(value)
    }
}

fn parse_time(s: &str) -> Result<TimeValue, String> {
    s.parse()
}

/// Partially specified run. Every field may come from the `--config` file or
/// from a flag of the same name; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Propagation method.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// Second method for `compare` (the reference is `--method`).
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub against: Option<Method>,
    /// What `compare` evaluates.
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picture: Option<Picture>,

    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    /// Interaction-picture pivot quantum number (default `I0/hbar - 1/2`).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,

    /// Single time; sets `t_min = t_max`.
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<TimeValue>,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<TimeValue>,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<TimeValue>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_steps: Option<usize>,

    /// Primary tolerance of the method(s): tail norm (exact), weight cutoff
    /// (vanvleck), series tolerance (theta), caustic threshold (tdwkb).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Fock truncation (default from the photon number).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_tol: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_cutoff: Option<f64>,
    /// Use the Gaussian orbit weight instead of the exact one (vanvleck correlation).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_weight: Option<bool>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Expansion>,
    /// Include the half-periodic (negative final momentum) orbit family.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_momentum: Option<bool>,
    /// Seed time of the TDWKB manifold (default `T2/320`).
    #[arg(long, value_parser = parse_time)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_i: Option<TimeValue>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caustic_eps: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_floor: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_spacing: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_s: Option<f64>,

    /// Output file (stdout when absent).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Fully resolved run. Serialized into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub against: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    pub picture: Picture,
    pub gamma: f64,
    pub hbar: f64,
    pub q0: f64,
    pub p0: f64,
    pub n0: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_steps: Option<usize>,
    pub n_max: usize,
    pub tail_tol: f64,
    pub theta_tol: f64,
    pub weight_cutoff: f64,
    pub gaussian_weight: bool,
    pub expansion: Expansion,
    pub negative_momentum: bool,
    pub t_i: f64,
    pub resolution: f64,
    pub caustic_eps: f64,
    pub amplitude_floor: f64,
    pub sample_spacing: f64,
    pub delta_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl Overrides {
    /// Read a JSON config file, or the embedded config of a previous output.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let json = match text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)) {
            Some(line) => line,
            None if text.trim_start().starts_with('#') => {
                return Err(config_err("output header holds no config line"));
            }
            None => text,
        };
        serde_json::from_str(json).map_err(|e| config_err(format!("bad config: {e}")))
    }

    /// `other` wins wherever it is set. A single time in `other` displaces a
    /// range in `self` (and vice versa), and a generic `tol` in `other`
    /// displaces the per-method tolerances of `self`.
    pub fn merge(mut self, other: Overrides) -> Overrides {
        if other.t.is_some() {
            (self.t_min, self.t_max, self.steps) = (None, None, None);
        }
        if other.t_min.is_some() || other.t_max.is_some() {
            self.t = None;
        }
        if other.tol.is_some() {
            (self.tail_tol, self.theta_tol, self.weight_cutoff, self.caustic_eps) = (None, None, None, None);
        }
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            command, method, against, quantity, metric, picture, gamma, hbar, q0, p0, n0, t, t_min, t_max, steps,
            q_min, q_max, q_steps, p_min, p_max, p_steps, tol, n_max, tail_tol, theta_tol, weight_cutoff,
            gaussian_weight, expansion, negative_momentum, t_i, resolution, caustic_eps, amplitude_floor,
            sample_spacing, delta_s, out
        )
    }

    /// Fill defaults and validate. Configuration mistakes are `Config`
    /// errors; times outside a method's domain and unusable grids are
    /// `Domain` errors.
    pub fn resolve(&self, command: Command) -> Result<RunConfig, CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(config_err(format!("config was written for `{c:?}`, not `{command:?}`").to_lowercase()));
            }
        }
        let reference = ModelParams::reference();
        let mut params = ModelParams::new(
            self.gamma.unwrap_or(reference.gamma()),
            self.hbar.unwrap_or(reference.hbar()),
            self.q0.unwrap_or(reference.q0()),
            self.p0.unwrap_or(reference.p0()),
        )?;
        if let Some(n0) = self.n0 {
            params = params.with_n0(n0)?;
        }
        let times = params.times();

        let method = self.method.unwrap_or(Method::Exact);
        let quantity = match command {
            Command::Correlation => Quantity::Correlation,
            Command::Wavefunction | Command::Wigner => Quantity::Wavefunction,
            Command::Compare => self.quantity.unwrap_or_default(),
        };
        let against = match command {
            Command::Compare => {
                Some(self.against.ok_or_else(|| config_err("compare needs --against <METHOD>"))?)
            }
            _ if self.against.is_some() => return Err(config_err("--against is only used by compare")),
            _ => None,
        };
        let methods: Vec<Method> = std::iter::once(method).chain(against).collect();
        for &m in &methods {
            let ok = match command {
                Command::Wigner => m == Method::Exact,
                _ => m.supports(quantity),
            };
            if !ok {
                return Err(config_err(format!("method {} cannot compute {command:?}/{quantity:?}", m.name())
                    .to_lowercase()));
            }
        }
        let native: Vec<Picture> = methods.iter().filter_map(|m| m.native_picture()).collect();
        let picture = match (self.picture, native.first()) {
            (Some(p), _) => p,
            (None, Some(&p)) => p,
            (None, None) => Picture::Lab,
        };
        if let Some(m) = methods.iter().find(|m| m.native_picture().is_some_and(|p| p != picture)) {
            return Err(config_err(format!("method {} is only available in its own picture, not {picture:?}", m.name())
                .to_lowercase()));
        }

        let tol_for = |m: Method| methods.contains(&m).then_some(self.tol).flatten();
        let tail_tol = self.tail_tol.or(tol_for(Method::Exact)).unwrap_or(DEFAULT_TAIL_TOL);
        let theta_tol = self
            .theta_tol
            .or(tol_for(Method::ThetaQuantum))
            .or(tol_for(Method::ThetaSemiclassical))
            .unwrap_or(DEFAULT_TOL);
        let weight_cutoff = self.weight_cutoff.or(tol_for(Method::Vanvleck)).unwrap_or(DEFAULT_WEIGHT_CUTOFF);
        let tdwkb_defaults = TdwkbOptions::default();
        let caustic_eps = self.caustic_eps.or(tol_for(Method::Tdwkb)).unwrap_or(tdwkb_defaults.caustic_eps);
        for (name, v) in [("tail_tol", tail_tol), ("theta_tol", theta_tol), ("weight_cutoff", weight_cutoff)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(config_err(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        let resolution = self.resolution.unwrap_or(tdwkb_defaults.resolution);
        let amplitude_floor = self.amplitude_floor.unwrap_or(tdwkb_defaults.amplitude_floor);
        let sample_spacing = self.sample_spacing.unwrap_or(tdwkb_defaults.sample_spacing);
        let delta_s = self.delta_s.unwrap_or(tdwkb_defaults.delta_s);
        for (name, v) in [
            ("caustic_eps", caustic_eps),
            ("resolution", resolution),
            ("amplitude_floor", amplitude_floor),
            ("sample_spacing", sample_spacing),
            ("delta_s", delta_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("{name} must be > 0, got {v}")));
            }
        }
        let t_i = match &self.t_i {
            Some(v) => v.eval(&times)?,
            None => tdwkb_defaults.initial_time(&params),
        };
        if !(t_i > 0.0) {
            return Err(config_err(format!("t_i must be > 0, got {t_i}")));
        }
        let n_max = self.n_max.unwrap_or_else(|| truncation_for(params.nu()));
        if n_max == 0 {
            return Err(config_err("n_max must be >= 1"));
        }

        // time samples
        let domain_min = methods.iter().map(|&m| domain_min(m, &times, t_i)).fold(f64::NEG_INFINITY, f64::max);
        let (t_min, t_max, steps) = if let Some(t) = &self.t {
            if self.t_min.is_some() || self.t_max.is_some() {
                return Err(config_err("--t conflicts with --t-min/--t-max"));
            }
            let t = t.eval(&times)?;
            (t, t, 1)
        } else {
            let (default_lo, default_hi, default_steps) = match quantity {
                Quantity::Correlation => (domain_min.max(0.0), 2.5 * times.t2, 1001),
                Quantity::Wavefunction if command == Command::Wigner => (0.0, 0.0, 1),
                Quantity::Wavefunction => (times.t2, times.t2, 1),
            };
            let lo = self.t_min.as_ref().map(|v| v.eval(&times)).transpose()?.unwrap_or(default_lo);
            let hi = self.t_max.as_ref().map(|v| v.eval(&times)).transpose()?.unwrap_or(default_hi.max(lo));
            let steps = if lo == hi { 1 } else { self.steps.unwrap_or(default_steps) };
            (lo, hi, steps)
        };
        if !(t_min.is_finite() && t_max.is_finite()) || t_min > t_max {
            return Err(config_err(format!("time range [{t_min}, {t_max}] is empty")));
        }
        if steps == 0 || (steps == 1 && t_min != t_max) {
            return Err(config_err("steps must be >= 2 for a non-degenerate time range"));
        }
        if quantity == Quantity::Wavefunction && steps != 1 {
            return Err(config_err(format!("{command:?} takes a single time (--t)").to_lowercase()));
        }
        for &m in &methods {
            check_domain(m, &linspace(t_min, t_max, steps), &times, t_i)?;
        }

        // position / phase-space grid
        let wigner = command == Command::Wigner;
        let default_half = if wigner {
            (2.0 * params.hbar() * params.nu()).sqrt() + 7.0 * params.hbar().sqrt()
        } else {
            5.0
        };
        let q_min = self.q_min.unwrap_or(-default_half);
        let q_max = self.q_max.unwrap_or(default_half);
        let default_q_steps = if wigner { ((q_max - q_min) / WIGNER_SPACING).ceil() as usize + 1 } else { 201 };
        let q_steps = if q_min == q_max { 1 } else { self.q_steps.unwrap_or(default_q_steps) };
        check_axis("q", q_min, q_max, q_steps)?;
        let (p_min, p_max, p_steps) = if wigner {
            let lo = self.p_min.unwrap_or(-default_half);
            let hi = self.p_max.unwrap_or(default_half);
            let n = if lo == hi { 1 } else { self.p_steps.unwrap_or(((hi - lo) / WIGNER_SPACING).ceil() as usize + 1) };
            check_axis("p", lo, hi, n)?;
            let grid = GridSpec { q_min, q_max, q_steps, p_min: lo, p_max: hi, p_steps: n };
            check_wigner_grid(&grid, params.hbar(), params.nu()).map_err(|e| CliError::Domain(e.to_string()))?;
            (Some(lo), Some(hi), Some(n))
        } else {
            if self.p_min.is_some() || self.p_max.is_some() || self.p_steps.is_some() {
                return Err(config_err("--p-min/--p-max/--p-steps are only used by wigner"));
            }
            (None, None, None)
        };

        let is_compare = command == Command::Compare;
        Ok(RunConfig {
            command,
            method,
            against,
            quantity: is_compare.then_some(quantity),
            metric: is_compare.then(|| self.metric.unwrap_or_default()),
            picture,
            gamma: params.gamma(),
            hbar: params.hbar(),
            q0: params.q0(),
            p0: params.p0(),
            n0: params.n0(),
            t_min,
            t_max,
            steps,
            q_min,
            q_max,
            q_steps,
            p_min,
            p_max,
            p_steps,
            n_max,
            tail_tol,
            theta_tol,
            weight_cutoff,
            gaussian_weight: self.gaussian_weight.unwrap_or(false),
            expansion: self.expansion.unwrap_or_default(),
            negative_momentum: self.negative_momentum.unwrap_or(false),
            t_i,
            resolution,
            caustic_eps,
            amplitude_floor,
            sample_spacing,
            delta_s,
            out: self.out.clone(),
        })
    }
}

fn check_axis(name: &str, lo: f64, hi: f64, n: usize) -> Result<(), CliError> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(config_err(format!("{name} range [{lo}, {hi}] is empty")));
    }
    if n == 0 || (n == 1 && lo != hi) {
        return Err(config_err(format!("{name}_steps must be >= 2 for a non-degenerate range")));
    }
    Ok(())
}

fn domain_min(method: Method, times: &Timescales, t_i: f64) -> f64 {
    match method {
        Method::Exact | Method::ThetaQuantum => f64::NEG_INFINITY,
        Method::Vanvleck => times.t1,
        Method::ThetaSemiclassical => 2.0 * times.t1,
        Method::Tdwkb => t_i,
    }
}

fn check_domain(method: Method, samples: &[f64], times: &Timescales, t_i: f64) -> Result<(), CliError> {
    let min = domain_min(method, times, t_i);
    // tdwkb needs t strictly after the seed time
    let outside = |t: f64| if method == Method::Tdwkb { t <= min } else { t < min };
    let bad: Vec<f64> = samples.iter().copied().filter(|&t| outside(t)).collect();
    if bad.is_empty() {
        return Ok(());
    }
    let shown: Vec<String> = bad.iter().take(8).map(|t| format!("{t}")).collect();
    let more = if bad.len() > shown.len() { ", ..." } else { "" };
    Err(CliError::Domain(format!(
        "{} requires t {} {min}; {} of {} samples violate it: {}{more}",
        method.name(),
        if method == Method::Tdwkb { ">" } else { ">=" },
        bad.len(),
        samples.len(),
        shown.join(", ")
    )))
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.gamma, self.hbar, self.q0, self.p0)?.with_n0(self.n0)?)
    }

    pub fn times(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.steps)
    }

    pub fn q_grid(&self) -> Vec<f64> {
        linspace(self.q_min, self.q_max, self.q_steps)
    }

    fn tdwkb_options(&self) -> TdwkbOptions {
        TdwkbOptions {
            t_i: Some(self.t_i),
            resolution: self.resolution,
            caustic_eps: self.caustic_eps,
            amplitude_floor: self.amplitude_floor,
            sample_spacing: self.sample_spacing,
            delta_s: self.delta_s,
        }
    }

    fn exact(&self) -> Result<ExactKerr, CliError> {
        Ok(ExactKerr::with_tolerance(&self.params()?, self.picture, self.n_max, self.tail_tol)?)
    }

    /// `#`-prefixed header lines: tool version, the resolved config as one
    /// JSON line, and derived scales for reference.
    pub fn header(&self) -> Result<String, CliError> {
        let p = self.params()?;
        let t = p.times();
        let json = serde_json::to_string(self).map_err(|e| config_err(e.to_string()))?;
        Ok(format!(
            "# kerr-revival {}\n{CONFIG_PREFIX}{json}\n# T1 = {}, T2 = {}, nu = {}\n",
            env!("CARGO_PKG_VERSION"),
            num(t.t1),
            num(t.t2),
            num(p.nu())
        ))
    }
}

/// Fixed 17-significant-digit formatting for every number written.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn correlation(cfg: &RunConfig, method: Method, times: &[f64]) -> Result<Vec<Complex64>, CliError> {
    let p = cfg.params()?;
    let values: crate::Result<Vec<Complex64>> = match method {
        Method::Exact => {
            let ex = cfg.exact()?;
            Ok(times.par_iter().map(|&t| ex.autocorrelation(t)).collect())
        }
        Method::Vanvleck => times
            .par_iter()
            .map(|&t| vanvleck::correlation_vanvleck_with(&p, t, cfg.weight_cutoff, !cfg.gaussian_weight))
            .collect(),
        Method::ThetaQuantum => {
            times.par_iter().map(|&t| theta::correlation_theta_quantum_with(&p, t, cfg.theta_tol)).collect()
        }
        Method::ThetaSemiclassical => times
            .par_iter()
            .map(|&t| theta::correlation_theta_semiclassical_with(&p, t, cfg.theta_tol))
            .collect(),
        Method::Tdwkb => return Err(config_err("tdwkb does not compute correlations")),
    };
    Ok(values?)
}

/// Wavefunction values and any caustic intervals.
fn wavefunction(cfg: &RunConfig, method: Method, t: f64, q: &[f64]) -> Result<(Vec<Complex64>, Vec<(f64, f64)>), CliError> {
    let p = cfg.params()?;
    match method {
        Method::Exact => Ok((cfg.exact()?.wavefunction(t, q)?, Vec::new())),
        Method::Vanvleck => {
            let opts = WavefunctionOptions {
                include_negative_momentum: cfg.negative_momentum,
                expansion: cfg.expansion,
                weight_cutoff: cfg.weight_cutoff,
            };
            Ok((vanvleck::wavefunction_vanvleck_grid(&p, t, q, &opts)?, Vec::new()))
        }
        Method::Tdwkb => {
            let w = tdwkb::wavefunction_tdwkb_with(&p, t, q, &cfg.tdwkb_options())?;
            Ok((w.values, w.caustic_intervals))
        }
        _ => Err(config_err(format!("{} does not compute wavefunctions", method.name()))),
    }
}

pub fn cmd_correlation(cfg: &RunConfig) -> Result<String, CliError> {
    let t1 = cfg.params()?.times().t1;
    let times = cfg.times();
    let values = correlation(cfg, cfg.method, &times)?;
    let mut out = cfg.header()?;
    out.push_str("t,t/T1,re,im,abs\n");
    for (t, c) in times.iter().zip(&values) {
        let _ = writeln!(out, "{},{},{},{},{}", num(*t), num(t / t1), num(c.re), num(c.im), num(c.norm()));
    }
    Ok(out)
}

pub fn cmd_wavefunction(cfg: &RunConfig) -> Result<String, CliError> {
    let q = cfg.q_grid();
    let (values, caustics) = wavefunction(cfg, cfg.method, cfg.t_min, &q)?;
    let mut out = cfg.header()?;
    out.push_str("q,re,im,abs\n");
    for (x, v) in q.iter().zip(&values) {
        let _ = writeln!(out, "{},{},{},{}", num(*x), num(v.re), num(v.im), num(v.norm()));
    }
    for (lo, hi) in caustics {
        let _ = writeln!(out, "# caustic {},{}", num(lo), num(hi));
    }
    Ok(out)
}

pub fn cmd_wigner(cfg: &RunConfig) -> Result<String, CliError> {
    let grid = GridSpec {
        q_min: cfg.q_min,
        q_max: cfg.q_max,
        q_steps: cfg.q_steps,
        p_min: cfg.p_min.unwrap_or(cfg.q_min),
        p_max: cfg.p_max.unwrap_or(cfg.q_max),
        p_steps: cfg.p_steps.unwrap_or(cfg.q_steps),
    };
    let w = wigner_exact(&cfg.exact()?.state(cfg.t_min), &grid)?;
    let mut out = cfg.header()?;
    out.push_str("q,p,W\n");
    for (i, q) in w.q_axis.iter().enumerate() {
        for (j, p) in w.p_axis.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(*q), num(*p), num(w.at(i, j)));
        }
    }
    Ok(out)
}

/// Error statistics inside `[m T2 - T1, m T2 + T1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowError {
    pub revival: u32,
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: RunConfig,
    pub samples: usize,
    pub max_abs: f64,
    /// `sqrt(sum |e|^2 h)` with `h` the sample spacing (plain root-sum-square
    /// for a single sample).
    pub l2: f64,
    /// Largest magnitude of the reference (`--method`) values.
    pub reference_max: f64,
    /// `max_abs / reference_max`.
    pub max_rel: f64,
    pub windows: Vec<WindowError>,
    /// Window error around `T2` over that around `2 T2`, when both are sampled.
    pub time_independence_ratio: Option<f64>,
}

pub fn compare(cfg: &RunConfig) -> Result<CompareReport, CliError> {
    let against = cfg.against.ok_or_else(|| config_err("compare needs --against"))?;
    let quantity = cfg.quantity.unwrap_or_default();
    let (axis, a, b) = match quantity {
        Quantity::Correlation => {
            let times = cfg.times();
            let a = correlation(cfg, cfg.method, &times)?;
            let b = correlation(cfg, against, &times)?;
            (times, a, b)
        }
        Quantity::Wavefunction => {
            let q = cfg.q_grid();
            let (a, _) = wavefunction(cfg, cfg.method, cfg.t_min, &q)?;
            let (b, _) = wavefunction(cfg, against, cfg.t_min, &q)?;
            (q, a, b)
        }
    };
    let errors: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| match cfg.metric.unwrap_or_default() {
            Metric::Complex => (x - y).norm(),
            Metric::Modulus => (x.norm() - y.norm()).abs(),
        })
        .collect();
    let h = if axis.len() > 1 { axis[1] - axis[0] } else { 1.0 };
    let max_abs = errors.iter().copied().fold(0.0, f64::max);
    let reference_max = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let l2 = (errors.iter().map(|e| e * e).sum::<f64>() * h).sqrt();

    let mut windows = Vec::new();
    if quantity == Quantity::Correlation {
        let times = cfg.params()?.times();
        let mut m = 1u32;
        while m as f64 * times.t2 - times.t1 <= cfg.t_max {
            let (lo, hi) = (m as f64 * times.t2 - times.t1, m as f64 * times.t2 + times.t1);
            let inside: Vec<f64> =
                axis.iter().zip(&errors).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, e)| *e).collect();
            if !inside.is_empty() {
                windows.push(WindowError {
                    revival: m,
                    t_lo: lo,
                    t_hi: hi,
                    samples: inside.len(),
                    max_abs: inside.iter().copied().fold(0.0, f64::max),
                });
            }
            m += 1;
        }
    }
    let window = |m: u32| windows.iter().find(|w| w.revival == m).map(|w| w.max_abs);
    let time_independence_ratio = match (window(1), window(2)) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(CompareReport {
        config: cfg.clone(),
        samples: errors.len(),
        max_abs,
        l2,
        reference_max,
        max_rel: if reference_max > 0.0 { max_abs / reference_max } else { 0.0 },
        windows,
        time_independence_ratio,
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<String, CliError> {
    let report = compare(cfg)?;
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| config_err(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Resolve and run one command, returning the file contents.
pub fn run(command: Command, overrides: &Overrides) -> Result<(RunConfig, String), CliError> {
    let cfg = overrides.resolve(command)?;
    let text = match command {
        Command::Correlation => cmd_correlation(&cfg)?,
        Command::Wavefunction => cmd_wavefunction(&cfg)?,
        Command::Wigner => cmd_wigner(&cfg)?,
        Command::Compare => cmd_compare(&cfg)?,
    };
    Ok((cfg, text))
}

/// Parse the config embedded in an output header and resolve it again.
pub fn config_from_output(text: &str) -> Result<RunConfig, CliError> {
    let overrides = Overrides::from_text(text)?;
    let command = overrides.command.ok_or_else(|| config_err("embedded config names no command"))?;
    overrides.resolve(command)
}

impl From<&RunConfig> for Overrides {
    fn from(c: &RunConfig) -> Self {
        Overrides {
            command: Some(c.command),
            method: Some(c.method),
            against: c.against,
            quantity: c.quantity,
            metric: c.metric,
            picture: Some(c.picture),
            gamma: Some(c.gamma),
            hbar: Some(c.hbar),
            q0: Some(c.q0),
            p0: Some(c.p0),
            n0: Some(c.n0),
            t: None,
            t_min: Some(TimeValue::Number(c.t_min)),
            t_max: Some(TimeValue::Number(c.t_max)),
            steps: Some(c.steps),
            q_min: Some(c.q_min),
            q_max: Some(c.q_max),
            q_steps: Some(c.q_steps),
            p_min: c.p_min,
            p_max: c.p_max,
            p_steps: c.p_steps,
            tol: None,
            n_max: Some(c.n_max),
            tail_tol: Some(c.tail_tol),
            theta_tol: Some(c.theta_tol),
            weight_cutoff: Some(c.weight_cutoff),
            gaussian_weight: Some(c.gaussian_weight),
            expansion: Some(c.expansion),
            negative_momentum: Some(c.negative_momentum),
            t_i: Some(TimeValue::Number(c.t_i)),
            resolution: Some(c.resolution),
            caustic_eps: Some(c.caustic_eps),
            amplitude_floor: Some(c.amplitude_floor),
            sample_spacing: Some(c.sample_spacing),
            delta_s: Some(c.delta_s),
            out: c.out.clone(),
        }
    }
}
