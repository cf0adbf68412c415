//! Run configuration: command-line flags layered over an optional JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use mhessian::solver::Rhs;
use mhessian::{Domain, Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Flags shared by `solve` and `verify`. Every field is optional so that a
/// config file can fill in what the command line leaves out.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RunFlags {
    /// ball, disc or ellipse
    #[arg(long)]
    pub domain: Option<String>,
    /// Space dimension (balls only)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ellipse semi-axes as "a,b"
    #[arg(long)]
    pub axes: Option<String>,
    /// Intervals per radius (k gives k+1 radial nodes and k angles), or NRxNTHETA
    #[arg(long)]
    pub grid: Option<String>,
    /// Newton residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file mirroring these flags; explicit flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Right-hand side (config file only)
    #[arg(skip)]
    pub rhs: Option<Rhs>,
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    schema_version: u32,
    #[serde(flatten)]
    flags: RunFlags,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: Domain,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub nr: usize,
    pub ntheta: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub out: PathBuf,
    pub rhs: Rhs,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

fn read_config(path: &Path) -> Result<RunFlags> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported config schema_version {}", file.schema_version)));
    }
    Ok(file.flags)
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || usage(format!("bad --grid {s:?}; expected K or NRxNTHETA"));
    if let Some((a, b)) = s.split_once('x') {
        let nr = a.trim().parse().map_err(|_| bad())?;
        let nt = b.trim().parse().map_err(|_| bad())?;
        Ok((nr, nt))
    } else {
        let k: usize = s.trim().parse().map_err(|_| bad())?;
        Ok((k + 1, k))
    }
}

fn parse_axes(s: &str) -> Result<(f64, f64)> {
    let bad = || usage(format!("bad --axes {s:?}; expected a,b"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl RunFlags {
    /// Fills unset fields from the config file, then from defaults.
    pub fn resolve(&self, default_samples: usize) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => read_config(p)?,
            None => RunFlags::default(),
        };
        macro_rules! pick {
            ($f:ident) => {
                self.$f.clone().or(file.$f.clone())
            };
        }
        let kind = pick!(domain).unwrap_or_else(|| "ball".into());
        let radius = pick!(radius).unwrap_or(1.0);
        let domain = match kind.as_str() {
            "ball" => Domain::ball(pick!(n).unwrap_or(3), radius)?,
            "disc" => {
                if let Some(n) = pick!(n).filter(|&n| n != 2) {
                    return Err(usage(format!("a disc is two-dimensional, got --n {n}")));
                }
                Domain::disc(radius)?
            }
            "ellipse" => {
                let (a, b) = parse_axes(&pick!(axes).ok_or_else(|| usage("--domain ellipse needs --axes a,b"))?)?;
                Domain::ellipse(a, b)?
            }
            other => return Err(usage(format!("unknown domain {other:?} (ball, disc, ellipse)"))),
        };
        let (nr, ntheta) = parse_grid(&pick!(grid).unwrap_or_else(|| "128".into()))?;
        let tol = pick!(tol);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(usage(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(RunConfig {
            domain,
            m: pick!(m),
            l: pick!(l),
            nr,
            ntheta,
            tol,
            seed: pick!(seed).unwrap_or(0),
            samples: pick!(samples).unwrap_or(default_samples),
            out: pick!(out).unwrap_or_else(|| PathBuf::from(".")),
            rhs: pick!(rhs).unwrap_or(Rhs::constant(1.0)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("64").unwrap(), (65, 64));
        assert_eq!(parse_grid("33x16").unwrap(), (33, 16));
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("mhessian-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        fs::write(&path, r#"{"schema_version": 1, "domain": "disc", "m": 2, "l": 1, "seed": 9}"#).unwrap();
        let flags = RunFlags { config: Some(path.clone()), seed: Some(3), ..Default::default() };
        let c = flags.resolve(100).unwrap();
        assert_eq!(c.domain, Domain::Disc { radius: 1.0 });
        assert_eq!((c.m, c.l, c.seed), (Some(2), Some(1), 3));
        fs::write(&path, r#"{"schema_version": 7}"#).unwrap();
        assert!(flags.resolve(100).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
