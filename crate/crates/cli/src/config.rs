//! Run configuration: defaults, a flat `key = value` file, then flags.
//!
//! Config file keys match the long flag names, with `-` or `_` accepted
//! interchangeably:
//!
//! ```text
//! # comment
//! lattice = honeycomb     # honeycomb | chain
//! L = 20,40               # one or more linear sizes
//! boundary = periodic     # periodic | open
//! seed = 1                # required
//! warmup = 1000
//! sweeps = 10000
//! interval = 10
//! chains = 1
//! mode = site             # site | bond
//! p-grid = 0,0.1,0.2      # or uniform:20
//! replicates = 16
//! l-const = 2.5
//! instance = chain        # chain | star | dimer | hexagon | all
//! out = results
//! format = csv            # csv | jsonl
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use aklt_core::percolation::{uniform_grid, DilutionMode, DEFAULT_REPLICATES};
use aklt_core::reduction::DEFAULT_SCALE_CONSTANT;
use aklt_core::{Boundary, LatticeKind};
use clap::Args;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Instance {
    Chain,
    Star,
    Dimer,
    Hexagon,
    All,
}

/// Every flag is optional here so that unset flags fall back to the file.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Flat key = value file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// honeycomb or chain.
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Linear size(s), comma separated.
    #[arg(long = "L", global = true)]
    pub sizes: Option<String>,
    /// periodic or open.
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub warmup: Option<String>,
    #[arg(long, global = true)]
    pub sweeps: Option<String>,
    /// Sweeps between recorded samples.
    #[arg(long, global = true)]
    pub interval: Option<String>,
    /// Independent chains per size.
    #[arg(long, global = true)]
    pub chains: Option<String>,
    /// Dilution mode: site or bond.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Deletion probabilities, comma separated, or uniform:STEPS.
    #[arg(long = "p-grid", global = true)]
    pub p_grid: Option<String>,
    /// Dilutions per sampled configuration.
    #[arg(long, global = true)]
    pub replicates: Option<String>,
    /// c in l = ceil(c ln L).
    #[arg(long = "l-const", global = true)]
    pub l_const: Option<String>,
    /// Oracle instance: chain, star, dimer, hexagon or all.
    #[arg(long, global = true)]
    pub instance: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub lattice: LatticeKind,
    pub sizes: Vec<usize>,
    pub boundary: Boundary,
    pub seed: u64,
    pub warmup: usize,
    pub sweeps: usize,
    pub interval: usize,
    pub chains: usize,
    pub mode: DilutionMode,
    pub p_grid: Vec<f64>,
    pub replicates: usize,
    pub l_const: f64,
    pub instance: Instance,
    pub out: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const KEYS: [&str; 15] = [
    "lattice",
    "L",
    "boundary",
    "seed",
    "warmup",
    "sweeps",
    "interval",
    "chains",
    "mode",
    "p_grid",
    "replicates",
    "l_const",
    "instance",
    "out",
    "format",
];

const MAX_CHAINS: usize = 1024;

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key {:?}", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError(format!("{key}: cannot parse {v:?}")))
}

fn at_least(key: &str, v: &str, min: usize) -> Result<usize, ConfigError> {
    let x: usize = number(key, v)?;
    if x < min {
        return Err(ConfigError(format!("{key} must be >= {min}, got {x}")));
    }
    Ok(x)
}

pub fn parse_grid(v: &str) -> Result<Vec<f64>, ConfigError> {
    let v = v.trim();
    if v.is_empty() {
        return Err(ConfigError("p-grid is empty".into()));
    }
    let grid = match v.strip_prefix("uniform:") {
        Some(steps) => uniform_grid(at_least("p-grid", steps, 1)?),
        None => v.split(',').map(|s| number::<f64>("p-grid", s.trim())).collect::<Result<_, _>>()?,
    };
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError("p-grid must be strictly increasing inside [0, 1]".into()));
    }
    Ok(grid)
}

impl RunConfig {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(flags: &Flags) -> Result<Self, ConfigError> {
        let mut map = match &flags.config {
            Some(path) => parse_file(&read(path)?)?,
            None => BTreeMap::new(),
        };
        let given = [
            ("lattice", &flags.lattice),
            ("L", &flags.sizes),
            ("boundary", &flags.boundary),
            ("seed", &flags.seed),
            ("warmup", &flags.warmup),
            ("sweeps", &flags.sweeps),
            ("interval", &flags.interval),
            ("chains", &flags.chains),
            ("mode", &flags.mode),
            ("p_grid", &flags.p_grid),
            ("replicates", &flags.replicates),
            ("l_const", &flags.l_const),
            ("instance", &flags.instance),
            ("format", &flags.format),
        ];
        for (k, v) in given {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if let Some(out) = &flags.out {
            map.insert("out".into(), out.to_string_lossy().into_owned());
        }
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let lattice = match get("lattice").unwrap_or("honeycomb") {
            "honeycomb" => LatticeKind::Honeycomb,
            "chain" => LatticeKind::Chain,
            other => return Err(ConfigError(format!("lattice: unknown kind {other:?} (honeycomb or chain)"))),
        };
        let sizes = get("L")
            .unwrap_or("20")
            .split(',')
            .map(|s| at_least("L", s.trim(), 2))
            .collect::<Result<Vec<_>, _>>()?;
        let boundary = match get("boundary").unwrap_or("periodic") {
            "periodic" => Boundary::Periodic,
            "open" => Boundary::Open,
            other => return Err(ConfigError(format!("boundary: unknown value {other:?} (periodic or open)"))),
        };
        let seed = number("seed", get("seed").ok_or_else(|| ConfigError("a seed is required (--seed)".into()))?)?;
        let chains = at_least("chains", get("chains").unwrap_or("1"), 1)?;
        if chains > MAX_CHAINS {
            return Err(ConfigError(format!("chains must be <= {MAX_CHAINS}, got {chains}")));
        }
        let mode = get("mode").unwrap_or("site").parse().map_err(|e: aklt_core::Error| ConfigError(e.to_string()))?;
        let l_const: f64 = number("l-const", get("l_const").unwrap_or(&DEFAULT_SCALE_CONSTANT.to_string()))?;
        if !(l_const.is_finite() && l_const > 0.0) {
            return Err(ConfigError(format!("l-const must be positive, got {l_const}")));
        }
        let instance = match get("instance").unwrap_or("chain") {
            "chain" => Instance::Chain,
            "star" => Instance::Star,
            "dimer" => Instance::Dimer,
            "hexagon" => Instance::Hexagon,
            "all" => Instance::All,
            other => return Err(ConfigError(format!("instance: unknown value {other:?}"))),
        };
        let format = match get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "jsonl" => Format::Jsonl,
            other => return Err(ConfigError(format!("format: unknown value {other:?} (csv or jsonl)"))),
        };
        Ok(RunConfig {
            lattice,
            sizes,
            boundary,
            seed,
            warmup: number("warmup", get("warmup").unwrap_or("1000"))?,
            sweeps: at_least("sweeps", get("sweeps").unwrap_or("10000"), 1)?,
            interval: at_least("interval", get("interval").unwrap_or("10"), 1)?,
            chains,
            mode,
            p_grid: parse_grid(get("p_grid").unwrap_or("uniform:20"))?,
            replicates: at_least("replicates", get("replicates").unwrap_or(&DEFAULT_REPLICATES.to_string()), 1)?,
            l_const,
            instance,
            out: PathBuf::from(get("out").unwrap_or(".")),
            format,
        })
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))
}
