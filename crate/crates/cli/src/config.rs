//! Run configuration: flags over config file over defaults.

use crate::InvalidInput;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s}")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamValues {
    pub m: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub p: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlValues {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub s_max: f64,
    pub radius_max: f64,
    pub max_step: f64,
    pub bisect_tol: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minima: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint_hi: Option<f64>,
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub params: ParamValues,
    pub controls: ControlValues,
    pub options: CommandOptions,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
}

/// Values given on the command line; `None` means not given.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Flat key = value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long = "N", global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub s_max: Option<f64>,
    #[arg(long, global = true)]
    pub radius_max: Option<f64>,
    #[arg(long, global = true)]
    pub max_step: Option<f64>,
    /// Relative bracket width where bisection stops
    #[arg(long, global = true)]
    pub bisect_tol: Option<f64>,
    /// Shooting family: P0_C, Q5_theta or P3_p
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Family parameter for a single shot
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub param: Option<f64>,
    /// Sweep grid start
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Sweep grid end
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Sweep grid size
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Number of profile minima of the sought connection
    #[arg(long, global = true)]
    pub minima: Option<usize>,
    /// Lower end of the search interval
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hint_lo: Option<f64>,
    /// Upper end of the search interval
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hint_hi: Option<f64>,
    /// Directory for output files; stdout when absent
    #[arg(long = "out", global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

const KEYS: &[&str] = &[
    "m", "N", "p", "sigma", "rel_tol", "abs_tol", "s_max", "radius_max", "max_step", "bisect_tol", "family",
    "param", "lo", "hi", "points", "minima", "hint_lo", "hint_hi", "output_dir", "format",
];

/// Parse the flat config format: one `key = value` per line, `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(InvalidInput(format!("config line {}: expected key = value", i + 1)).into());
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(InvalidInput(format!("config line {}: unknown key {key}", i + 1)).into());
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(InvalidInput(format!("config line {}: duplicate key {key}", i + 1)).into());
        }
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text)
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| InvalidInput(format!("config key {key}: cannot parse {v:?}")).into()),
    }
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let f = flags.clone();
        let controls = blowup::integrate::Controls::default();
        Ok(RunConfig {
            command: command.to_string(),
            params: ParamValues {
                m: pick(f.m, &file, "m")?,
                n: pick(f.n, &file, "N")?,
                p: pick(f.p, &file, "p")?,
                sigma: pick(f.sigma, &file, "sigma")?,
            },
            controls: ControlValues {
                rel_tol: pick(f.rel_tol, &file, "rel_tol")?.unwrap_or(controls.rel_tol),
                abs_tol: pick(f.abs_tol, &file, "abs_tol")?.unwrap_or(controls.abs_tol),
                s_max: pick(f.s_max, &file, "s_max")?.unwrap_or(controls.s_max),
                radius_max: pick(f.radius_max, &file, "radius_max")?.unwrap_or(controls.radius_max),
                max_step: pick(f.max_step, &file, "max_step")?.unwrap_or(controls.max_step),
                bisect_tol: pick(f.bisect_tol, &file, "bisect_tol")?
                    .unwrap_or(blowup::shooter::ShooterConfig::default().bisect_tol),
            },
            options: CommandOptions {
                family: pick(f.family, &file, "family")?,
                param: pick(f.param, &file, "param")?,
                lo: pick(f.lo, &file, "lo")?,
                hi: pick(f.hi, &file, "hi")?,
                points: pick(f.points, &file, "points")?,
                minima: pick(f.minima, &file, "minima")?,
                hint_lo: pick(f.hint_lo, &file, "hint_lo")?,
                hint_hi: pick(f.hint_hi, &file, "hint_hi")?,
            },
            output_dir: pick(f.output_dir, &file, "output_dir")?,
            format: pick(f.format, &file, "format")?.unwrap_or(Format::Csv),
        })
    }

    fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| InvalidInput(format!("missing required parameter --{name}")).into())
    }

    /// Shooting parameters; `p` must be given.
    pub fn params(&self) -> Result<blowup::Params> {
        let v = &self.params;
        Ok(blowup::Params::new(
            Self::require(v.m, "m")?,
            Self::require(v.n, "N")?,
            Self::require(v.p, "p")?,
            Self::require(v.sigma, "sigma")?,
        )?)
    }

    /// Parameters for tables; `p` defaults to `m`.
    pub fn inspection_params(&self) -> Result<blowup::Params> {
        let v = &self.params;
        let m = Self::require(v.m, "m")?;
        Ok(blowup::Params::inspection(
            m,
            Self::require(v.n, "N")?,
            v.p.unwrap_or(m),
            Self::require(v.sigma, "sigma")?,
        )?)
    }

    pub fn shooter(&self) -> blowup::shooter::ShooterConfig {
        let mut cfg = blowup::shooter::ShooterConfig::default();
        let c = &self.controls;
        cfg.controls.rel_tol = c.rel_tol;
        cfg.controls.abs_tol = c.abs_tol;
        cfg.controls.s_max = c.s_max;
        cfg.controls.radius_max = c.radius_max;
        cfg.controls.max_step = c.max_step;
        cfg.bisect_tol = c.bisect_tol;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_format() {
        let map = parse_config_text("# comment\nm = 2\n\nN=5 # trailing\nformat = json\n").unwrap();
        assert_eq!(map["m"], "2");
        assert_eq!(map["N"], "5");
        assert_eq!(map["format"], "json");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("m 2").is_err());
        assert!(parse_config_text("m=2\nm=3").is_err());
    }

    #[test]
    fn flags_beat_file() {
        let file = parse_config_text("m = 3\nsigma = 0.5").unwrap();
        assert_eq!(pick(Some(2.0), &file, "m").unwrap(), Some(2.0));
        assert_eq!(pick::<f64>(None, &file, "m").unwrap(), Some(3.0));
        assert_eq!(pick::<f64>(None, &file, "p").unwrap(), None);
    }
}
