//! Run configuration: command-line flags merged over an optional
//! `key=value` file, merged over defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use jdlattice::{Exercise, MarketParams, OptionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Merton,
    Full,
    TruncatedTheoretical,
    TruncatedNumerical,
    TypeA,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    /// ε = 1/n.
    Auto,
    Value(f64),
}

impl FromStr for Epsilon {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Epsilon::Auto);
        }
        let v: f64 = s.parse().map_err(|_| format!("epsilon must be 'auto' or a number, got '{s}'"))?;
        Ok(Epsilon::Value(v))
    }
}

impl Epsilon {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Epsilon::Auto => 1.0 / n as f64,
            Epsilon::Value(v) => v,
        }
    }
}

/// Contract, model and lattice flags of `price`. Every flag is optional so
/// that file values can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct PriceArgs {
    /// key=value parameter file; '#' starts a comment line. Flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<std::path::PathBuf>,
    /// Spot price [default: 40]
    #[arg(long = "S0", value_name = "X")]
    pub s0: Option<f64>,
    /// Strike [default: 40]
    #[arg(long = "K", value_name = "X")]
    pub k: Option<f64>,
    /// Risk-free rate, continuous [default: 0.08]
    #[arg(long, value_name = "X")]
    pub r: Option<f64>,
    /// Dividend yield, continuous [default: 0]
    #[arg(long, value_name = "X")]
    pub d: Option<f64>,
    /// Diffusion variance per year [default: 0.05]
    #[arg(long, value_name = "X")]
    pub sigma2: Option<f64>,
    /// Jump intensity per year [default: 5]
    #[arg(long, value_name = "X")]
    pub lambda: Option<f64>,
    /// Mean of ln(1+J) [default: 0]
    #[arg(long, value_name = "X", conflicts_with = "gamma")]
    pub gammap: Option<f64>,
    /// ln(1+E[J]); sets gammap = gamma - delta2/2
    #[arg(long, value_name = "X")]
    pub gamma: Option<f64>,
    /// Variance of ln(1+J) [default: 0.05]
    #[arg(long, value_name = "X")]
    pub delta2: Option<f64>,
    /// Time to maturity in years [default: 1]
    #[arg(long, value_name = "X")]
    pub tau: Option<f64>,
    /// Option type [default: put]
    #[arg(long, value_name = "call|put")]
    pub kind: Option<OptionKind>,
    /// Exercise style [default: european]
    #[arg(long, value_name = "european|american")]
    pub exercise: Option<Exercise>,
    /// Time steps [default: 400]
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    /// Jump half-width; 2nu+1 jump branches per step [default: 3]
    #[arg(long, value_name = "N")]
    pub nu: Option<usize>,
    /// Jump step scale in (0, 1] [default: 1]
    #[arg(long, value_name = "X")]
    pub c: Option<f64>,
    /// Pricing method [default: truncated-numerical]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Truncation tolerance, 'auto' = 1/n [default: auto]
    #[arg(long, value_name = "auto|X")]
    pub epsilon: Option<Epsilon>,
    /// Output format [default: text]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: MarketParams,
    pub kind: OptionKind,
    pub exercise: Exercise,
    pub n: usize,
    pub nu: usize,
    pub c: f64,
    pub method: Method,
    pub epsilon: Epsilon,
    pub format: Format,
}

const KEYS: &[&str] = &[
    "S0", "K", "r", "d", "sigma2", "lambda", "gammap", "gamma", "delta2", "tau", "kind",
    "exercise", "n", "nu", "c", "method", "epsilon", "format",
];

/// Parses `key=value` lines; blank lines and lines starting with '#' are
/// skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value, got '{line}'", no + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            bail!("config line {}: unknown key '{k}'", no + 1);
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn file_value<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key {key}='{v}': {e}")))
        .transpose()
}

fn file_enum<T: ValueEnum>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| T::from_str(v, true).map_err(|e| anyhow!("config key {key}='{v}': {e}")))
        .transpose()
}

impl PriceArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        macro_rules! pick {
            ($flag:expr, $key:literal, $default:expr) => {
                match $flag.clone() {
                    Some(v) => v,
                    None => file_value(&file, $key)?.unwrap_or($default),
                }
            };
        }
        let s0: f64 = pick!(self.s0, "S0", 40.0);
        let k: f64 = pick!(self.k, "K", 40.0);
        let r: f64 = pick!(self.r, "r", 0.08);
        let d: f64 = pick!(self.d, "d", 0.0);
        let sigma2: f64 = pick!(self.sigma2, "sigma2", 0.05);
        let lambda: f64 = pick!(self.lambda, "lambda", 5.0);
        let delta2: f64 = pick!(self.delta2, "delta2", 0.05);
        let tau: f64 = pick!(self.tau, "tau", 1.0);
        let n: usize = pick!(self.n, "n", 400);
        let nu: usize = pick!(self.nu, "nu", 3);
        let c: f64 = pick!(self.c, "c", 1.0);
        let epsilon: Epsilon = pick!(self.epsilon, "epsilon", Epsilon::Auto);
        let kind: OptionKind = pick!(self.kind, "kind", OptionKind::Put);
        let exercise: Exercise = pick!(self.exercise, "exercise", Exercise::European);
        let method = match self.method {
            Some(m) => m,
            None => file_enum(&file, "method")?.unwrap_or(Method::TruncatedNumerical),
        };
        let format = match self.format {
            Some(f) => f,
            None => file_enum(&file, "format")?.unwrap_or(Format::Text),
        };

        if delta2 < 0.0 || sigma2 <= 0.0 {
            bail!("sigma2 must be > 0 and delta2 >= 0");
        }
        // A flag of either jump-mean form beats the file; within one source
        // giving both is ambiguous.
        let gamma_prime = match (self.gammap, self.gamma) {
            (Some(g), _) => g,
            (None, Some(g)) => g - 0.5 * delta2,
            (None, None) => match (file_value::<f64>(&file, "gammap")?, file_value::<f64>(&file, "gamma")?) {
                (Some(_), Some(_)) => bail!("config gives both gammap and gamma; use one"),
                (Some(g), None) => g,
                (None, Some(g)) => g - 0.5 * delta2,
                (None, None) => 0.0,
            },
        };
        let params = MarketParams::from_variances(s0, k, r, d, sigma2, lambda, gamma_prime, delta2, tau);
        params.validate()?;
        if n == 0 {
            bail!("n must be >= 1");
        }
        if nu == 0 || nu > jdlattice::lattice::MAX_NU {
            bail!("nu must be in 1..={}", jdlattice::lattice::MAX_NU);
        }
        if !(c > 0.0 && c <= 1.0) {
            bail!("c must be in (0, 1]");
        }
        if let Epsilon::Value(e) = epsilon {
            if !(e > 0.0 && e.is_finite()) {
                bail!("epsilon must be a positive finite number or 'auto'");
            }
        }
        if exercise == Exercise::American && matches!(method, Method::Merton | Method::TypeA) {
            bail!("method {method} prices European options only");
        }
        Ok(RunConfig { params, kind, exercise, n, nu, c, method, epsilon, format })
    }
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config_text(&text)
}
