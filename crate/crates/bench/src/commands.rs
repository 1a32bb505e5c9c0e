//! The experiments behind each subcommand. Every function returns a table
//! whose rows carry the full parameter tuple that produced them.

use std::path::Path;
use std::time::Instant;

use pbpqlp_core::analysis::{
    eval_deterministic_bounds, eval_highprob_bounds, eval_theorem6_ratio, error_curve, l2_norm_ratio, Block12,
    BoundContext, BoundEntry, HighProbConfig,
};
use pbpqlp_core::factor::{PowerScheme, SketchParams};
use pbpqlp_core::matgen::SpectrumSpec;
use pbpqlp_core::rng::gaussian_matrix;
use pbpqlp_core::svd::singular_values;
use pbpqlp_core::{approximate, pbp_qlp_with, spectral_norm, svd_full, Algorithm, DenseMatrix};

use crate::config::{Command, MatrixSource, RunConfig, Series};
use crate::dsv::{num, Table};
use crate::error::{BenchError, Result};
use crate::pgm::{load_pgm, write_pgm};

/// Dense `n₁ × n₂` buffers alive at peak (input, generator factors,
/// residual and oracle copies).
pub const WORKING_COPIES: u64 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Hard bound violations, `id (seed s)`; nonempty means exit status 1.
    pub violations: Vec<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome {
            table,
            violations: Vec::new(),
        }
    }
}

struct Instance {
    label: String,
    a: DenseMatrix,
}

fn power_name(s: PowerScheme) -> &'static str {
    match s {
        PowerScheme::Orthonormalized => "orth",
        PowerScheme::Plain => "plain",
    }
}

/// Refuses runs past the order cap or the memory cap.
pub fn check_resources(cfg: &RunConfig, n1: usize, n2: usize) -> Result<()> {
    let order = n1.max(n2);
    if order > cfg.max_n {
        return Err(BenchError::Resource(format!(
            "order {order} exceeds the cap of {} (raise it with --max-n)",
            cfg.max_n
        )));
    }
    let need = 8 * n1 as u64 * n2 as u64 * WORKING_COPIES;
    if need > cfg.mem_cap {
        return Err(BenchError::Resource(format!(
            "a {n1}x{n2} run needs about {need} bytes, above the cap of {} bytes",
            cfg.mem_cap
        )));
    }
    Ok(())
}

fn instances(cfg: &RunConfig, mut f: impl FnMut(&Instance) -> Result<()>) -> Result<()> {
    for src in &cfg.matrices {
        if let MatrixSource::Image(path) = src {
            let a = load_pgm(path)?;
            check_resources(cfg, a.rows(), a.cols())?;
            f(&Instance { label: src.label(), a })?;
            continue;
        }
        for &n in &cfg.n {
            check_resources(cfg, n, n)?;
            let a = match src {
                MatrixSource::Family(fam) => SpectrumSpec::new(fam.clone(), n, cfg.seed).generate()?.a,
                MatrixSource::Gaussian => gaussian_matrix(n, n, cfg.seed)?,
                MatrixSource::Image(_) => unreachable!(),
            };
            f(&Instance { label: src.label(), a })?;
        }
    }
    Ok(())
}

/// `q` values to sweep; deterministic algorithms run once at `q = 0`.
fn q_values(cfg: &RunConfig, s: Series) -> Vec<usize> {
    if s.is_randomized() {
        cfg.q.clone()
    } else {
        vec![0]
    }
}

fn params(cfg: &RunConfig, d: usize, q: usize, seed: u64) -> SketchParams {
    SketchParams::new(d, q, seed).with_scheme(cfg.scheme())
}

fn alg_of(s: Series) -> Result<Algorithm> {
    match s {
        Series::Alg(a) => Ok(a),
        Series::RValues => Err(BenchError::Usage("r_values is only a spectrum series".into())),
    }
}

fn median(sorted: &[u128]) -> u128 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        (sorted[m - 1] + sorted[m]) / 2
    }
}

pub fn cmd_runtime(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&[
        "experiment", "matrix", "algorithm", "n1", "n2", "d", "q", "seed", "power", "trials", "median_ns", "mean_ns",
    ]);
    instances(cfg, |inst| {
        let (n1, n2) = inst.a.shape();
        for &s in &cfg.algs {
            let alg = alg_of(s)?;
            for d in cfg.d.resolve(n2) {
                for q in q_values(cfg, s) {
                    let p = params(cfg, d, q, cfg.seed);
                    approximate(&inst.a, alg, &p)?;
                    let mut times = Vec::with_capacity(cfg.trials);
                    for _ in 0..cfg.trials {
                        let start = Instant::now();
                        let out = approximate(&inst.a, alg, &p)?;
                        times.push(start.elapsed().as_nanos());
                        std::hint::black_box(out);
                    }
                    times.sort_unstable();
                    let mean = times.iter().sum::<u128>() / times.len() as u128;
                    t.push(vec![
                        "runtime".into(),
                        inst.label.clone(),
                        alg.name().into(),
                        n1.to_string(),
                        n2.to_string(),
                        d.to_string(),
                        q.to_string(),
                        cfg.seed.to_string(),
                        power_name(cfg.scheme()).into(),
                        cfg.trials.to_string(),
                        median(&times).to_string(),
                        mean.to_string(),
                    ]);
                }
            }
        }
        Ok(())
    })?;
    Ok(t.into())
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&[
        "experiment", "matrix", "algorithm", "n1", "n2", "d", "q", "seed", "power", "index", "value", "oracle",
    ]);
    instances(cfg, |inst| {
        let (n1, n2) = inst.a.shape();
        let oracle = singular_values(&inst.a)?;
        for &s in &cfg.algs {
            for d in cfg.d.resolve(n2) {
                for q in q_values(cfg, s) {
                    let p = params(cfg, d, q, cfg.seed);
                    let values = match s {
                        Series::Alg(alg) => approximate(&inst.a, alg, &p)?.estimates,
                        Series::RValues => pbp_qlp_with(&inst.a, &p)?.r_values(),
                    };
                    for (i, v) in values.iter().enumerate() {
                        t.push(vec![
                            "spectrum".into(),
                            inst.label.clone(),
                            s.name().into(),
                            n1.to_string(),
                            n2.to_string(),
                            d.to_string(),
                            q.to_string(),
                            cfg.seed.to_string(),
                            power_name(cfg.scheme()).into(),
                            (i + 1).to_string(),
                            num(*v),
                            num(oracle.get(i).copied().unwrap_or(0.0)),
                        ]);
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(t.into())
}

pub fn cmd_lowrank(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&[
        "experiment", "matrix", "algorithm", "n1", "n2", "d", "q", "seed", "power", "spectral", "frobenius",
        "sigma_next",
    ]);
    instances(cfg, |inst| {
        let (n1, n2) = inst.a.shape();
        let oracle = singular_values(&inst.a)?;
        let ds = cfg.d.resolve(n2);
        for &s in &cfg.algs {
            let alg = alg_of(s)?;
            for q in q_values(cfg, s) {
                for pt in error_curve(&inst.a, alg, &ds, &params(cfg, 1, q, cfg.seed))? {
                    t.push(vec![
                        "lowrank".into(),
                        inst.label.clone(),
                        alg.name().into(),
                        n1.to_string(),
                        n2.to_string(),
                        pt.d.to_string(),
                        q.to_string(),
                        cfg.seed.to_string(),
                        power_name(cfg.scheme()).into(),
                        num(pt.spectral),
                        num(pt.frobenius),
                        num(oracle.get(pt.d).copied().unwrap_or(0.0)),
                    ]);
                }
            }
        }
        Ok(())
    })?;
    Ok(t.into())
}

/// Reconstructions go to `side_dir` as `<stem>.<alg>.q<q>.r<rank>.pgm`.
pub fn cmd_image(cfg: &RunConfig, side_dir: &Path) -> Result<Outcome> {
    let mut t = Table::new(&[
        "experiment", "matrix", "algorithm", "n1", "n2", "rank", "q", "seed", "power", "frobenius", "spectral", "file",
    ]);
    for src in &cfg.matrices {
        let MatrixSource::Image(path) = src else {
            return Err(BenchError::Usage(format!(
                "image expects --matrix image:path=<file>, got '{}'",
                src.label()
            )));
        };
        let a = load_pgm(path)?;
        let (n1, n2) = a.shape();
        check_resources(cfg, n1, n2)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
        for &s in &cfg.algs {
            let alg = alg_of(s)?;
            for q in q_values(cfg, s) {
                for rank in cfg.d.resolve(n2) {
                    let approx = approximate(&a, alg, &params(cfg, rank, q, cfg.seed))?.reconstruct();
                    let residual = a.sub(&approx);
                    let file = format!("{stem}.{}.q{q}.r{rank}.pgm", alg.name());
                    write_pgm(&side_dir.join(&file), &approx)?;
                    t.push(vec![
                        "image".into(),
                        src.label(),
                        alg.name().into(),
                        n1.to_string(),
                        n2.to_string(),
                        rank.to_string(),
                        q.to_string(),
                        cfg.seed.to_string(),
                        power_name(cfg.scheme()).into(),
                        num(residual.frobenius_norm()),
                        num(spectral_norm(&residual)?),
                        file,
                    ]);
                }
            }
        }
    }
    Ok(t.into())
}

pub fn cmd_norm_ratio(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&[
        "experiment", "matrix", "algorithm", "n1", "n2", "d", "q", "seed", "power", "ratio",
    ]);
    instances(cfg, |inst| {
        let (n1, n2) = inst.a.shape();
        for &s in &cfg.algs {
            let alg = alg_of(s)?;
            for d in cfg.d.resolve(n2) {
                for q in q_values(cfg, s) {
                    let ratio = l2_norm_ratio(&inst.a, alg, &params(cfg, d, q, cfg.seed))?;
                    t.push(vec![
                        "norm-ratio".into(),
                        inst.label.clone(),
                        alg.name().into(),
                        n1.to_string(),
                        n2.to_string(),
                        d.to_string(),
                        q.to_string(),
                        cfg.seed.to_string(),
                        power_name(cfg.scheme()).into(),
                        num(ratio),
                    ]);
                }
            }
        }
        Ok(())
    })?;
    Ok(t.into())
}

pub const BOUND_COLUMNS: [&str; 14] = [
    "theorem", "lhs", "rhs", "slack", "satisfied", "seed", "n1", "n2", "k", "d", "p", "q", "kind", "matrix",
];

fn bound_row(e: &BoundEntry, label: &str, dims: (usize, usize), k: usize, d: usize, p: usize, q: usize) -> Vec<String> {
    vec![
        e.id.clone(),
        num(e.lhs),
        num(e.rhs),
        num(e.slack),
        e.satisfied.to_string(),
        e.seed.to_string(),
        dims.0.to_string(),
        dims.1.to_string(),
        k.to_string(),
        d.to_string(),
        p.to_string(),
        q.to_string(),
        e.kind.name().into(),
        label.into(),
    ]
}

/// Deterministic bounds and both readings of the singular-value ratio bound
/// for every trial seed `seed + t`, then the high-probability bounds across
/// the same trials. Matrices are generated from `seed` itself.
pub fn cmd_verify_bounds(cfg: &RunConfig) -> Result<Outcome> {
    let mut t = Table::new(&BOUND_COLUMNS);
    let mut violations = Vec::new();
    let (k, p) = (cfg.k, cfg.p);
    instances(cfg, |inst| {
        let a = &inst.a;
        let dims = a.shape();
        let oracle = svd_full(a)?;
        let ctx = BoundContext::new(&oracle, k, p).with_upsilon(cfg.upsilon);
        for d in cfg.d.resolve(dims.1) {
            ctx.check(d).map_err(|e| BenchError::Usage(e.to_string()))?;
            for &q in &cfg.q {
                let mut rows: Vec<BoundEntry> = Vec::new();
                for trial in 0..cfg.trials {
                    let seed = cfg.seed.wrapping_add(trial as u64);
                    let replay = |e: pbpqlp_core::Error| {
                        BenchError::Input(format!("trial seed {seed} (d = {d}, q = {q}): {e}"))
                    };
                    let mut f = pbp_qlp_with(a, &params(cfg, d, q, seed)).map_err(replay)?;
                    if cfg.corrupt_l {
                        f.l = if k < d {
                            f.l.with_entry(k, k, 1e3 * oracle.s[0])?
                        } else {
                            f.l.with_entry(k - 1, k - 1, 0.0)?
                        };
                    }
                    rows.extend(eval_deterministic_bounds(a, &f, &ctx).map_err(replay)?.entries);
                    for b in [Block12::StrictZero, Block12::UseR12] {
                        rows.extend(eval_theorem6_ratio(&f, &ctx, b).map_err(replay)?);
                    }
                }
                let cfg_hp = HighProbConfig {
                    d,
                    q,
                    trials: cfg.trials,
                    scheme: cfg.scheme(),
                };
                let hp = eval_highprob_bounds(a, &ctx, &cfg_hp, cfg.seed)?;
                let sum = &hp.summary;
                t.notes.push(format!(
                    "matrix={} n1={} n2={} d={d} q={q} upsilon={} c_upsilon={} {}",
                    inst.label,
                    dims.0,
                    dims.1,
                    num(cfg.upsilon),
                    sum.c_upsilon.map_or("-".into(), num),
                    sum.notes.join("; ")
                ));
                rows.extend(hp.entries);
                for e in &rows {
                    if e.is_violation() {
                        violations.push(format!("{} (seed {}, q = {q}, d = {d}, {})", e.id, e.seed, inst.label));
                    }
                    t.push(bound_row(e, &inst.label, dims, k, d, p, q));
                }
            }
        }
        Ok(())
    })?;
    Ok(Outcome { table: t, violations })
}

/// Runs `cfg.command`; `side_dir` receives image reconstructions.
pub fn run(cfg: &RunConfig, side_dir: Option<&Path>) -> Result<Outcome> {
    match cfg.command {
        Command::Runtime => cmd_runtime(cfg),
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Lowrank => cmd_lowrank(cfg),
        Command::Image => {
            let dir = side_dir.ok_or_else(|| {
                BenchError::Usage(format!(
                    "image writes reconstructions; pass --out or set {}",
                    crate::config::OUT_DIR_ENV
                ))
            })?;
            cmd_image(cfg, dir)
        }
        Command::NormRatio => cmd_norm_ratio(cfg),
        Command::VerifyBounds => cmd_verify_bounds(cfg),
    }
}

/// The leading comment line: tool version, command and every setting.
pub fn header_line(cfg: &RunConfig) -> String {
    format!(
        "pbpqlp {} {} {}",
        env!("CARGO_PKG_VERSION"),
        cfg.command.name(),
        cfg.describe()
    )
}
