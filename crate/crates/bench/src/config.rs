//! Run configuration: per-command defaults, overlaid by an optional
//! `key = value` file, overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pbpqlp_core::factor::PowerScheme;
use pbpqlp_core::matgen::MatrixFamily;
use pbpqlp_core::Algorithm;

use crate::error::{BenchError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PBPQLP_OUT_DIR";
pub const DEFAULT_MAX_N: usize = 2500;
pub const DEFAULT_MEM_CAP: u64 = 2 << 30;

/// Keys accepted in config files; flags use the same names with `-`.
pub const KEYS: [&str; 15] = [
    "matrix", "n", "k", "d", "q", "alg", "seed", "trials", "out", "format", "mem_cap", "max_n", "no_reorth", "p",
    "upsilon",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Runtime,
    Spectrum,
    Lowrank,
    Image,
    NormRatio,
    VerifyBounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Runtime => "runtime",
            Command::Spectrum => "spectrum",
            Command::Lowrank => "lowrank",
            Command::Image => "image",
            Command::NormRatio => "norm-ratio",
            Command::VerifyBounds => "verify-bounds",
        }
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Runtime => &[
                ("matrix", "gaussian"),
                ("n", "512"),
                ("d", "frac:0.04,0.2,0.3"),
                ("q", "0,1,2"),
                ("alg", "r_svd,cor_utv,pbp_qlp"),
                ("trials", "3"),
            ],
            Command::Spectrum => &[
                ("matrix", "largegap"),
                ("n", "1000"),
                ("d", "30"),
                ("q", "2"),
                ("alg", "svd,cpqr,pqlp,r_svd,cor_utv,pbp_qlp,r_values"),
            ],
            Command::Lowrank => &[
                ("matrix", "largegap"),
                ("n", "1000"),
                ("d", "10,20,30,40,50"),
                ("q", "2"),
                ("alg", "svd,pqlp,r_svd,cor_utv,pbp_qlp"),
            ],
            Command::Image => &[("d", "80"), ("q", "2"), ("alg", "svd,pbp_qlp")],
            Command::NormRatio => &[
                ("matrix", "baart;deriv2;foxgood;gravity;heat"),
                ("n", "256"),
                ("d", "20"),
                ("q", "0,2"),
                ("alg", "cpqr,pqlp,pbp_qlp"),
            ],
            Command::VerifyBounds => &[
                ("matrix", "largegap"),
                ("n", "300"),
                ("d", "30"),
                ("q", "2"),
                ("alg", "pbp_qlp"),
                ("trials", "100"),
            ],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a test matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Family(MatrixFamily),
    /// Dense i.i.d. standard normal entries.
    Gaussian,
    Image(PathBuf),
}

impl MatrixSource {
    pub fn label(&self) -> String {
        match self {
            MatrixSource::Family(f) => f.to_string(),
            MatrixSource::Gaussian => "gaussian".into(),
            MatrixSource::Image(p) => format!("image:path={}", p.display()),
        }
    }
}

impl FromStr for MatrixSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "gaussian" {
            return Ok(MatrixSource::Gaussian);
        }
        if let Some(rest) = s.strip_prefix("image:") {
            let path = rest
                .strip_prefix("path=")
                .ok_or_else(|| BenchError::Usage(format!("image source expects image:path=<file>, got '{s}'")))?;
            if path.is_empty() {
                return Err(BenchError::Usage("image path is empty".into()));
            }
            return Ok(MatrixSource::Image(PathBuf::from(path)));
        }
        s.parse::<MatrixFamily>()
            .map(MatrixSource::Family)
            .map_err(|e| BenchError::Usage(e.to_string()))
    }
}

/// Sketch sizes, either absolute or as fractions of the order.
#[derive(Debug, Clone, PartialEq)]
pub enum DSpec {
    Values(Vec<usize>),
    Fractions(Vec<f64>),
}

impl DSpec {
    /// Concrete sizes for a matrix with `n` columns; fractions round to the
    /// nearest integer and never drop below 1.
    pub fn resolve(&self, n: usize) -> Vec<usize> {
        match self {
            DSpec::Values(v) => v.clone(),
            DSpec::Fractions(f) => f.iter().map(|&x| ((x * n as f64).round() as usize).max(1)).collect(),
        }
    }
}

impl FromStr for DSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().strip_prefix("frac:") {
            Some(rest) => {
                let f: Vec<f64> = parse_list(rest, "d")?;
                if let Some(bad) = f.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
                    return Err(BenchError::Usage(format!("d fraction {bad} outside (0, 1]")));
                }
                Ok(DSpec::Fractions(f))
            }
            None => {
                let v: Vec<usize> = parse_list(s, "d")?;
                if v.contains(&0) {
                    return Err(BenchError::Usage("d must be >= 1".into()));
                }
                Ok(DSpec::Values(v))
            }
        }
    }
}

/// One series of a spectrum or error table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Alg(Algorithm),
    /// `|diag(R)|` of PbP-QLP's first QR.
    RValues,
}

impl Series {
    pub fn name(self) -> &'static str {
        match self {
            Series::Alg(a) => a.name(),
            Series::RValues => "r_values",
        }
    }

    pub fn is_randomized(self) -> bool {
        match self {
            Series::Alg(a) => a.is_randomized(),
            Series::RValues => true,
        }
    }
}

impl FromStr for Series {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "r_values" {
            return Ok(Series::RValues);
        }
        s.parse::<Algorithm>()
            .map(Series::Alg)
            .map_err(|e| BenchError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Tab-separated.
    Dsv,
    Csv,
}

impl Format {
    pub fn delimiter(self) -> char {
        match self {
            Format::Dsv => '\t',
            Format::Csv => ',',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub matrices: Vec<MatrixSource>,
    pub n: Vec<usize>,
    pub k: usize,
    pub d: DSpec,
    pub q: Vec<usize>,
    pub algs: Vec<Series>,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub mem_cap: u64,
    pub max_n: usize,
    pub no_reorth: bool,
    pub p: usize,
    pub upsilon: f64,
    /// Negative-control hook for `verify-bounds`: overwrite one entry of `L`.
    pub corrupt_l: bool,
    /// The merged settings, for the output header.
    settings: BTreeMap<String, String>,
}

fn parse_list<T: FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    if items.is_empty() {
        return Err(BenchError::Usage(format!("{key}: empty list")));
    }
    items
        .iter()
        .map(|x| {
            x.parse::<T>()
                .map_err(|_| BenchError::Usage(format!("{key}: cannot parse '{x}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(s: &str, key: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| BenchError::Usage(format!("{key}: cannot parse '{s}'")))
}

fn parse_bool(s: &str, key: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(BenchError::Usage(format!("{key}: expected true or false, got '{other}'"))),
    }
}

/// Byte count with an optional `K`, `M` or `G` (binary) suffix.
pub fn parse_bytes(s: &str) -> Result<u64> {
    let s = s.trim();
    let (digits, shift) = match s.chars().last() {
        Some('K' | 'k') => (&s[..s.len() - 1], 10),
        Some('M' | 'm') => (&s[..s.len() - 1], 20),
        Some('G' | 'g') => (&s[..s.len() - 1], 30),
        _ => (s, 0),
    };
    let v: u64 = parse_one(digits, "mem_cap")?;
    v.checked_mul(1 << shift)
        .ok_or_else(|| BenchError::Usage(format!("mem_cap: '{s}' overflows")))
}

/// Parses a `key = value` config file. Blank lines and `#` comments are
/// skipped; unknown or repeated keys are errors.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Usage(format!("config line {}: expected key = value", no + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(BenchError::Usage(format!(
                "config line {}: unknown key '{key}' (known: {})",
                no + 1,
                KEYS.join(", ")
            )));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(BenchError::Usage(format!("config line {}: duplicate key '{key}'", no + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

impl RunConfig {
    /// Builds a config from defaults, then `file`, then `flags`.
    pub fn resolve(
        command: Command,
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut s: BTreeMap<String, String> = BTreeMap::new();
        let base: [(&str, &str); 10] = [
            ("k", "20"),
            ("seed", "0"),
            ("trials", "1"),
            ("format", "dsv"),
            ("no_reorth", "false"),
            ("p", "5"),
            ("upsilon", "0.05"),
            ("q", "0"),
            ("alg", "pbp_qlp"),
            ("n", "256"),
        ];
        for (k, v) in base.iter().chain(command.defaults()) {
            s.insert((*k).into(), (*v).into());
        }
        s.insert("max_n".into(), DEFAULT_MAX_N.to_string());
        s.insert("mem_cap".into(), DEFAULT_MEM_CAP.to_string());
        for layer in [file, flags] {
            for (k, v) in layer {
                if !KEYS.contains(&k.as_str()) {
                    return Err(BenchError::Usage(format!("unknown setting '{k}'")));
                }
                s.insert(k.clone(), v.clone());
            }
        }

        let get = |k: &str| s.get(k).map(String::as_str);
        let matrices = match get("matrix") {
            Some(m) => m
                .split(';')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(MatrixSource::from_str)
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        if matrices.is_empty() {
            return Err(BenchError::Usage(format!("{command} needs --matrix")));
        }
        let algs: Vec<Series> = parse_list(get("alg").unwrap_or_default(), "alg")?;
        if command != Command::Spectrum && algs.contains(&Series::RValues) {
            return Err(BenchError::Usage("r_values is only a spectrum series".into()));
        }
        let format = match get("format").unwrap_or("dsv") {
            "dsv" | "tsv" => Format::Dsv,
            "csv" => Format::Csv,
            other => return Err(BenchError::Usage(format!("format: unknown '{other}' (dsv, csv)"))),
        };
        let upsilon: f64 = parse_one(get("upsilon").unwrap_or_default(), "upsilon")?;
        if !(upsilon > 0.0 && upsilon < 1.0) {
            return Err(BenchError::Usage(format!("upsilon must lie in (0, 1), got {upsilon}")));
        }
        let trials: usize = parse_one(get("trials").unwrap_or_default(), "trials")?;
        if trials == 0 {
            return Err(BenchError::Usage("trials must be >= 1".into()));
        }
        let n: Vec<usize> = parse_list(get("n").unwrap_or_default(), "n")?;
        if n.contains(&0) {
            return Err(BenchError::Usage("n must be >= 1".into()));
        }
        Ok(RunConfig {
            command,
            matrices,
            n,
            k: parse_one(get("k").unwrap_or_default(), "k")?,
            d: get("d").unwrap_or("20").parse()?,
            q: parse_list(get("q").unwrap_or_default(), "q")?,
            algs,
            seed: parse_one(get("seed").unwrap_or_default(), "seed")?,
            trials,
            out: get("out").map(PathBuf::from),
            format,
            mem_cap: parse_bytes(get("mem_cap").unwrap_or_default())?,
            max_n: parse_one(get("max_n").unwrap_or_default(), "max_n")?,
            no_reorth: parse_bool(get("no_reorth").unwrap_or("false"), "no_reorth")?,
            p: parse_one(get("p").unwrap_or_default(), "p")?,
            upsilon,
            corrupt_l: false,
            settings: s,
        })
    }

    /// Defaults only.
    pub fn for_command(command: Command) -> Result<Self> {
        RunConfig::resolve(command, &BTreeMap::new(), &BTreeMap::new())
    }

    /// Defaults overlaid with `pairs`, as if given on the command line.
    pub fn with_flags(command: Command, pairs: &[(&str, &str)]) -> Result<Self> {
        let flags = pairs.iter().map(|(k, v)| ((*k).to_string(), (*v).to_string())).collect();
        RunConfig::resolve(command, &BTreeMap::new(), &flags)
    }

    pub fn scheme(&self) -> PowerScheme {
        if self.no_reorth {
            PowerScheme::Plain
        } else {
            PowerScheme::Orthonormalized
        }
    }

    /// Every effective setting as sorted `key=value` pairs.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self
            .settings
            .iter()
            .filter(|(k, _)| k.as_str() != "out")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if self.corrupt_l {
            parts.push("corrupt_l=true".into());
        }
        parts.join(" ")
    }

    /// The table destination: `--out`, else `<$PBPQLP_OUT_DIR>/<command>.<ext>`,
    /// else `None` for standard output.
    pub fn table_path(&self, env_dir: Option<&Path>) -> Option<PathBuf> {
        let ext = match self.format {
            Format::Dsv => "dsv",
            Format::Csv => "csv",
        };
        self.out
            .clone()
            .or_else(|| env_dir.map(|d| d.join(format!("{}.{ext}", self.command.name()))))
    }
}
