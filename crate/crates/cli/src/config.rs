use std::path::{Path, PathBuf};

use pipeflow::geometry::SectionSpec;
use pipeflow::poiseuille::log_grid;
use pipeflow::{CrossSection, SolverOptions};
use serde::Deserialize;

use crate::error::CliError;

pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-6;
pub const MAX_LEVEL: u32 = 7;
pub const MAX_ORDER: usize = 64;

/// The JSON run configuration. Every field is optional; command-line flags
/// take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub section: Option<SectionSpec>,
    pub n_rings: Option<usize>,
    pub n_sectors: Option<usize>,
    pub level: Option<u32>,
    pub alpha: Option<AlphaSpec>,
    pub order: Option<usize>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    List(Vec<f64>),
    Single(f64),
    Text(String),
}

impl AlphaSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let values = match self {
            AlphaSpec::List(v) => v.clone(),
            AlphaSpec::Single(a) => vec![*a],
            AlphaSpec::Text(s) => parse_alpha(s)?,
        };
        if values.is_empty() {
            return Err(CliError::Config("alpha list is empty".into()));
        }
        if let Some(bad) = values.iter().find(|a| a.is_nan() || **a < 0.0) {
            return Err(CliError::Config(format!("alpha must be nonnegative, got {bad}")));
        }
        Ok(values)
    }
}

/// Parses `a,b,c` or `min:max:count[:log|lin]`. `inf` selects the no-slip
/// limit where a command supports it.
pub fn parse_alpha(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::Config("alpha list is empty".into()));
    }
    let bad = |what: &str| CliError::Config(format!("bad alpha spec `{text}`: {what}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected min:max:count[:log|lin]"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad("min is not a number"))?;
        let hi: f64 = parts[1].parse().map_err(|_| bad("max is not a number"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("count is not a nonnegative integer"))?;
        if count == 0 {
            return Err(CliError::Config("alpha list is empty".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad("need finite min <= max"));
        }
        match parts.get(3).copied().unwrap_or("log") {
            "log" => {
                if lo <= 0.0 {
                    return Err(bad("log spacing needs min > 0"));
                }
                Ok(log_grid(lo, hi, count))
            }
            "lin" => Ok(if count == 1 {
                vec![lo]
            } else {
                (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
            }),
            other => Err(bad(&format!("unknown spacing `{other}`"))),
        }
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", s.trim()))))
            .collect()
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("key `{path}`: {}", e.inner())
        }
    })
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub alpha: Option<String>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub section: CrossSection,
    pub n_rings: usize,
    pub n_sectors: usize,
    pub level: u32,
    pub alphas: Option<Vec<f64>>,
    pub order: usize,
    pub out: PathBuf,
    pub opts: SolverOptions,
}

impl Settings {
    pub fn resolve(config: RunConfig, overrides: &Overrides) -> Result<Self, CliError> {
        let section = match &config.section {
            Some(spec) => spec.build()?,
            None => CrossSection::unit_disk(),
        };
        let alphas = match (&overrides.alpha, &config.alpha) {
            (Some(text), _) => Some(parse_alpha(text).and_then(|v| AlphaSpec::List(v).values())?),
            (None, Some(spec)) => Some(spec.values()?),
            (None, None) => None,
        };
        let tol = overrides.tol.or(config.tol).unwrap_or(pipeflow::saddle::DEFAULT_TOLERANCE);
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(CliError::Config(format!("tol must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {tol:e}")));
        }
        let order = overrides.order.or(config.order).unwrap_or(8);
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(CliError::Config(format!("order must lie in [1, {MAX_ORDER}], got {order}")));
        }
        let level = config.level.unwrap_or(2);
        if level > MAX_LEVEL {
            return Err(CliError::Config(format!("level must be at most {MAX_LEVEL}, got {level}")));
        }
        Ok(Settings {
            section,
            n_rings: config.n_rings.unwrap_or(4),
            n_sectors: config.n_sectors.unwrap_or(16),
            level,
            alphas,
            order,
            out: overrides.out.clone().or(config.out).unwrap_or_else(|| PathBuf::from(".")),
            opts: SolverOptions::with_tol(tol),
        })
    }
}
