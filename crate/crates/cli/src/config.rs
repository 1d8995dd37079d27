use crate::error::CliError;
use clap::{Args, ValueEnum};
use dyck::geodesic::DEFAULT_BUDGET;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Flags shared by every subcommand; unset flags fall back to the config
/// file, then to the defaults.
#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Significant digits of reported constants (at least 15)
    #[arg(long, global = true)]
    pub digits: Option<usize>,
    /// Length bound for closed geodesic enumeration
    #[arg(long, global = true)]
    pub lmax: Option<f64>,
    /// Mesh size for distance fields and finite elements
    #[arg(long = "mesh-h", global = true)]
    pub mesh_h: Option<f64>,
    /// Quadrature and certificate tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Node budget of the geodesic search
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Seed of the randomized property checks
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Shorthand for --format json
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the output to a file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key = value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Adds this amount to h before building (negative control)
    #[arg(long = "perturb-h", global = true, hide = true)]
    pub perturb_h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub digits: usize,
    pub lmax: f64,
    pub mesh_h: f64,
    pub tol: f64,
    pub budget: usize,
    pub seed: u64,
    pub format: Format,
    pub perturb_h: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            digits: 15,
            lmax: 1.2,
            mesh_h: 0.01,
            tol: 1e-8,
            budget: DEFAULT_BUDGET,
            seed: 20,
            format: Format::Text,
            perturb_h: 0.0,
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::BadInput(format!("bad value for {key}: {v:?}")))
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::BadInput(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::BadInput(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let mut c = Self::default();
        if let Some(path) = &args.config {
            for (k, v) in read_config_file(path)? {
                match k.as_str() {
                    "digits" => c.digits = parse(&k, &v)?,
                    "lmax" => c.lmax = parse(&k, &v)?,
                    "mesh_h" => c.mesh_h = parse(&k, &v)?,
                    "tol" => c.tol = parse(&k, &v)?,
                    "budget" => c.budget = parse(&k, &v)?,
                    "seed" => c.seed = parse(&k, &v)?,
                    "format" => {
                        c.format = Format::from_str(&v, true).map_err(|_| CliError::BadInput(format!("bad format {v:?}")))?
                    }
                    "out" => c.out = Some(PathBuf::from(v)),
                    _ => return Err(CliError::BadInput(format!("unknown config key {k:?}"))),
                }
            }
        }
        c.digits = args.digits.unwrap_or(c.digits);
        c.lmax = args.lmax.unwrap_or(c.lmax);
        c.mesh_h = args.mesh_h.unwrap_or(c.mesh_h);
        c.tol = args.tol.unwrap_or(c.tol);
        c.budget = args.budget.unwrap_or(c.budget);
        c.seed = args.seed.unwrap_or(c.seed);
        c.perturb_h = args.perturb_h.unwrap_or(c.perturb_h);
        if let Some(f) = args.format {
            c.format = f;
        }
        if args.json {
            c.format = Format::Json;
        }
        if args.out.is_some() {
            c.out = args.out.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::BadInput(m));
        if !(15..=1000).contains(&self.digits) {
            return bad(format!("--digits must be between 15 and 1000, got {}", self.digits));
        }
        if !(self.lmax > 0.0 && self.lmax.is_finite()) {
            return bad(format!("--lmax must be positive, got {}", self.lmax));
        }
        if !(self.mesh_h > 0.0 && self.mesh_h <= 0.5) {
            return bad(format!("--mesh-h must be in (0, 0.5], got {}", self.mesh_h));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("--tol must be in (0, 1), got {}", self.tol));
        }
        if self.budget == 0 {
            return bad("--budget must be positive".into());
        }
        if !self.perturb_h.is_finite() {
            return bad("--perturb-h must be finite".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the settings that affect results.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
