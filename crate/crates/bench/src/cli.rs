use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{header_line, run};
use crate::config::{read_config_file, Command, RunConfig, OUT_DIR_ENV};
use crate::error::{exit, BenchError, Result};

#[derive(Parser, Debug)]
#[command(name = "pbpqlp", version, about = "Randomized QLP experiments and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Wall time of the randomized factorizations.
    Runtime(Shared),
    /// Singular-value estimates against the exact spectrum.
    Spectrum(Shared),
    /// Spectral and Frobenius approximation errors per rank.
    Lowrank(Shared),
    /// Low-rank reconstructions of a PGM image.
    Image(Shared),
    /// Largest estimated singular value over the exact norm.
    NormRatio(Shared),
    /// Evaluate the rank-revealing and approximation bounds; exits 1 on a violation.
    VerifyBounds(Verify),
}

#[derive(Args, Debug, Default)]
struct Shared {
    /// Matrix `family[:key=value,...]`, `gaussian` or `image:path=<file>`; repeatable.
    #[arg(long)]
    matrix: Vec<String>,
    /// Matrix orders, comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Target rank.
    #[arg(long)]
    k: Option<String>,
    /// Sketch sizes `d1,d2,...` or `frac:f1,f2,...` of the order.
    #[arg(long)]
    d: Option<String>,
    /// Power-iteration counts.
    #[arg(long)]
    q: Option<String>,
    /// Algorithms, comma-separated.
    #[arg(long)]
    alg: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Table path; defaults to `$PBPQLP_OUT_DIR/<command>.dsv`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `dsv` (tab-separated) or `csv`.
    #[arg(long)]
    format: Option<String>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Memory cap in bytes (suffixes K, M, G).
    #[arg(long)]
    mem_cap: Option<String>,
    /// Largest accepted matrix order.
    #[arg(long)]
    max_n: Option<String>,
    /// Skip orthonormalization between power-iteration passes.
    #[arg(long)]
    no_reorth: bool,
    /// Oversampling used by the bounds.
    #[arg(long)]
    p: Option<String>,
    /// Failure probability of the high-probability bounds.
    #[arg(long)]
    upsilon: Option<String>,
}

#[derive(Args, Debug)]
struct Verify {
    #[command(flatten)]
    shared: Shared,
    #[arg(long, hide = true)]
    corrupt_l: bool,
}

impl Shared {
    fn flags(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        if !self.matrix.is_empty() {
            m.insert("matrix".into(), self.matrix.join(";"));
        }
        let pairs = [
            ("n", &self.n),
            ("k", &self.k),
            ("d", &self.d),
            ("q", &self.q),
            ("alg", &self.alg),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("format", &self.format),
            ("mem_cap", &self.mem_cap),
            ("max_n", &self.max_n),
            ("p", &self.p),
            ("upsilon", &self.upsilon),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                m.insert(k.into(), v.clone());
            }
        }
        if let Some(o) = &self.out {
            m.insert("out".into(), o.display().to_string());
        }
        if self.no_reorth {
            m.insert("no_reorth".into(), "true".into());
        }
        m
    }
}

fn build_config(cmd: Cmd) -> Result<RunConfig> {
    let (command, shared, corrupt) = match cmd {
        Cmd::Runtime(s) => (Command::Runtime, s, false),
        Cmd::Spectrum(s) => (Command::Spectrum, s, false),
        Cmd::Lowrank(s) => (Command::Lowrank, s, false),
        Cmd::Image(s) => (Command::Image, s, false),
        Cmd::NormRatio(s) => (Command::NormRatio, s, false),
        Cmd::VerifyBounds(v) => (Command::VerifyBounds, v.shared, v.corrupt_l),
    };
    let file = match &shared.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let mut cfg = RunConfig::resolve(command, &file, &shared.flags())?;
    cfg.corrupt_l = corrupt;
    Ok(cfg)
}

fn write_table(path: &Path, text: &str) -> Result<()> {
    let io = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

fn execute(cfg: &RunConfig, env_dir: Option<&Path>) -> Result<i32> {
    let table_path = cfg.table_path(env_dir);
    if let Some(p) = &table_path {
        let inputs = cfg.matrices.iter().filter_map(|m| match m {
            crate::config::MatrixSource::Image(i) => Some(i),
            _ => None,
        });
        for i in inputs {
            if i == p {
                return Err(BenchError::Usage(format!("refusing to overwrite input {}", i.display())));
            }
        }
    }
    let side_dir = match &table_path {
        Some(p) => Some(p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()),
        None => env_dir.map(Path::to_path_buf),
    };
    if let Some(d) = &side_dir {
        fs::create_dir_all(d).map_err(|source| BenchError::Io {
            path: d.clone(),
            source,
        })?;
    }
    let outcome = run(cfg, side_dir.as_deref())?;
    let text = outcome.table.to_string_with(&header_line(cfg), cfg.format.delimiter());
    match &table_path {
        Some(p) => write_table(p, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            let written = out.write_all(text.as_bytes()).and_then(|_| out.flush());
            match written {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other.map_err(|source| BenchError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?,
            }
        }
    }
    if outcome.violations.is_empty() {
        return Ok(exit::OK);
    }
    for v in &outcome.violations {
        eprintln!("bound violated: {v}");
    }
    Ok(exit::VIOLATION)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let result = build_config(cli.command).and_then(|cfg| execute(&cfg, env_dir.as_deref()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pbpqlp: {e}");
            e.exit_code()
        }
    }
}
