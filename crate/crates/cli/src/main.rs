//! `cmtree` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on usage or
//! configuration errors. Every output is written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmtree::cmt::distance_matrix;
use cmtree::convexmin::gcm;
use cmtree::discrete::{critical_p, merge_record, prim_order};
use cmtree::fmt::g17;
use cmtree::frag::{fragments, merges, merges_csv};
use cmtree::paths::{sample_excursion, sample_motion_with, sample_parabolic_with, sample_tilted_excursion};
use cmtree::verify::{default_reps, run_suite, SUITES};
use cmtree::{Cutoff, Error, Noise, PathSample, RngKey, StatReport, UniformAssignment, Weights};

#[derive(Parser)]
#[command(name = "cmtree", version, about = "Convex minorant trees and Prim-order minimum spanning trees")]
struct Cli {
    /// Unlock the forced-weight and zero-noise hooks.
    #[arg(long, global = true)]
    test_hooks: bool,
    /// Worker threads; 0 uses the rayon default. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a driving path as CSV `t,v`.
    Paths {
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Greatest convex minorant of a sampled path.
    Gcm {
        #[command(flatten)]
        path: PathArgs,
        /// Emit the faces as CSV `left_t,right_t,slope,length`.
        #[arg(long)]
        dump: bool,
        /// Left end time of the hull interval.
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Right end time of the hull interval; the horizon when omitted.
        #[arg(long)]
        to: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pairwise tree distances between points of a Brownian excursion.
    CmtDist {
        /// Comma-separated times in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<f64>,
        /// Recursion depth cap. Pairwise entries use the length cutoff only.
        #[arg(long, default_value_t = 18)]
        depth: usize,
        /// Faces of at most this many grid cells are not expanded.
        #[arg(long, default_value_t = 4)]
        min_cells: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fragment masses of an excursion along a sweep of cut parameters.
    Frag {
        /// `start:stop:count` (inclusive, evenly spaced) or a comma list.
        #[arg(long, default_value = "0:2:11")]
        tau_sweep: String,
        /// Largest fragments reported per tau.
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Macroscopic merge events of a parabolic path as CSV `l,t,r,lambda`.
    Merges {
        /// Drift of the sampled path.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
        lambda_lo: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        lambda_hi: f64,
        /// Minimum gap length on both sides of a merge, in time units.
        #[arg(long, default_value_t = 0.3)]
        min_len: f64,
        /// Path horizon; the smallest power of two at least 2 lambda_hi + 4 when omitted.
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Prim-order minimum spanning tree of the complete graph on n vertices.
    Mst {
        /// Number of vertices, at most 10000.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Keep only edges of weight at most p_n(lambda) = (1 + lambda n^{-1/3}) / n.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Emit the merge record `l,i,r,s` instead of the edge list.
        #[arg(long)]
        records: bool,
        /// Explicit weights in lexicographic pair order (needs --test-hooks).
        #[arg(long, value_delimiter = ',')]
        force_weights: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a verification suite (or `all`) and emit JSON reports, one per line.
    Verify {
        /// Suite name or `all`.
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Replicas. When omitted: 50000 for dirichlet, stickbreak, martingale and
        /// rayleigh; 1000 for fragment, cuttree, surplus and position; 200 for
        /// dimension and dynamics; 2000 for mst_limit; 10000 for representation.
        #[arg(long)]
        reps: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Summarize JSON reports written by `verify`.
    Report {
        /// File with one JSON report per line.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Motion,
    Excursion,
    Parabolic,
    Tilted,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// The grid has 2^grid_exp cells.
    #[arg(long, default_value_t = 14)]
    grid_exp: u32,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long, value_enum, default_value_t = Kind::Excursion)]
    kind: Kind,
    /// Drift of a parabolic path.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Horizon of motion and parabolic paths; 1 for motion and the smallest
    /// power of two at least 2 lambda + 4 for parabolic paths when omitted.
    #[arg(long)]
    horizon: Option<f64>,
    /// Area-tilt exponent of a tilted excursion.
    #[arg(long, default_value_t = 1)]
    tilt: u32,
    /// Candidate batch of a tilted excursion.
    #[arg(long, default_value_t = 100)]
    batch: usize,
    /// Replace Gaussian increments by zeros (needs --test-hooks).
    #[arg(long)]
    zero_noise: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Suite(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Statistical(m) => Failure::Suite(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Writes to a temporary file next to `path` and renames it into place.
fn emit(out: &OutArgs, text: &str) -> Outcome {
    let Some(path) = &out.out else {
        let mut stdout = std::io::stdout().lock();
        return stdout.write_all(text.as_bytes()).or_else(|e| usage(format!("cannot write output: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn cells(grid: &GridArgs) -> std::result::Result<usize, Failure> {
    if !(1..=24).contains(&grid.grid_exp) {
        return usage(format!("grid-exp {} outside [1, 24]", grid.grid_exp));
    }
    Ok(1 << grid.grid_exp)
}

fn path_key(seed: u64) -> RngKey {
    RngKey::new(seed, "cli-path", 0)
}

fn sample(p: &PathArgs, hooks: bool) -> std::result::Result<PathSample, Failure> {
    if p.zero_noise && !hooks {
        return usage("--zero-noise needs --test-hooks");
    }
    let noise = if p.zero_noise { Noise::Zero } else { Noise::Gaussian };
    let n = cells(&p.grid)?;
    let key = path_key(p.grid.seed);
    let exc_only = |what: &str| -> Outcome {
        if p.zero_noise {
            return usage(format!("--zero-noise does not apply to {what} paths"));
        }
        Ok(())
    };
    let path = match p.kind {
        Kind::Motion => sample_motion_with(n, p.horizon.unwrap_or(1.0), &key, noise)?,
        Kind::Parabolic => {
            let t = p.horizon.unwrap_or_else(|| default_horizon(p.lambda));
            sample_parabolic_with(p.lambda, t, n, &key, noise)?
        }
        Kind::Excursion => {
            exc_only("excursion")?;
            sample_excursion(n, &key)?
        }
        Kind::Tilted => {
            exc_only("tilted")?;
            sample_tilted_excursion(p.tilt, n, p.batch, &key)?.path
        }
    };
    Ok(path)
}

fn default_horizon(lambda: f64) -> f64 {
    (2.0 * lambda.max(0.0) + 4.0).log2().ceil().exp2()
}

fn time_index(path: &PathSample, t: f64, what: &str) -> std::result::Result<usize, Failure> {
    if !(t >= 0.0 && t <= path.horizon) {
        return usage(format!("{what} = {t} outside [0, {}]", path.horizon));
    }
    Ok(path.index_of(t))
}

fn run_gcm(path: &PathSample, dump: bool, from: f64, to: Option<f64>) -> std::result::Result<String, Failure> {
    let a = time_index(path, from, "--from")?;
    let b = time_index(path, to.unwrap_or(path.horizon), "--to")?;
    let g = gcm(path, a, b)?;
    if dump {
        let mut s = String::from("left_t,right_t,slope,length\n");
        for f in &g.faces {
            let (l, r) = (path.time(f.left), path.time(f.right));
            s.push_str(&format!("{},{},{},{}\n", g17(l), g17(r), g17(f.slope), g17(f.length)));
        }
        Ok(s)
    } else {
        Ok(format!("vertices,faces\n{},{}\n", g.vertices.len(), g.faces.len()))
    }
}

fn run_cmt_dist(
    points: &[f64],
    depth: usize,
    min_cells: usize,
    grid: &GridArgs,
) -> std::result::Result<String, Failure> {
    let n = cells(grid)?;
    if min_cells < 1 {
        return usage("--min-cells must be positive");
    }
    let path = sample_excursion(n, &path_key(grid.seed))?;
    let idx: Vec<usize> = points.iter().map(|&t| time_index(&path, t, "point")).collect::<Result<_, _>>()?;
    let cutoff = Cutoff { max_depth: depth, min_len: min_cells as f64 * path.step() };
    let m = distance_matrix(&path, &UniformAssignment::new(grid.seed), &idx, cutoff)?;
    let header: Vec<String> = idx.iter().map(|&i| g17(path.time(i))).collect();
    let mut s = header.join(",");
    s.push('\n');
    for row in &m {
        let r: Vec<String> = row.iter().map(|x| g17(*x)).collect();
        s.push_str(&r.join(","));
        s.push('\n');
    }
    Ok(s)
}

fn parse_sweep(spec: &str) -> std::result::Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("malformed --tau-sweep {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let taus: Vec<f64> = if let Some((a, rest)) = spec.split_once(':') {
        let (b, k) = rest.split_once(':').ok_or_else(bad)?;
        let (a, b) = (num(a)?, num(b)?);
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        match k {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if taus.iter().any(|t| !t.is_finite()) {
        return Err(bad());
    }
    Ok(taus)
}

fn run_frag(sweep: &str, top: usize, grid: &GridArgs) -> std::result::Result<String, Failure> {
    let taus = parse_sweep(sweep)?;
    let path = sample_excursion(cells(grid)?, &path_key(grid.seed))?;
    let mut s = String::from("tau,frag_rank,mass\n");
    for tau in taus {
        for (k, f) in fragments(&path, -tau).iter().take(top).enumerate() {
            s.push_str(&format!("{},{},{}\n", g17(tau), k + 1, g17(f.mass)));
        }
    }
    Ok(s)
}

fn run_merges(
    lambda: f64,
    lo: f64,
    hi: f64,
    min_len: f64,
    horizon: Option<f64>,
    grid: &GridArgs,
) -> std::result::Result<String, Failure> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return usage("--lambda-lo must not exceed --lambda-hi");
    }
    let t = horizon.unwrap_or_else(|| default_horizon(hi.max(lambda)));
    let path = sample_parabolic_with(lambda, t, cells(grid)?, &path_key(grid.seed), Noise::Gaussian)?;
    let events = merges(&path, lo, hi, min_len)?;
    Ok(merges_csv(&path, &events))
}

fn run_mst(
    n: usize,
    seed: u64,
    lambda: Option<f64>,
    records: bool,
    force: Option<Vec<f64>>,
    hooks: bool,
) -> std::result::Result<String, Failure> {
    if !(2..=10_000).contains(&n) {
        return usage(format!("n = {n} outside [2, 10000]"));
    }
    let weights = match force {
        Some(_) if !hooks => return usage("--force-weights needs --test-hooks"),
        Some(w) => Weights::forced(n, w)?,
        None => Weights::keyed(n, seed),
    };
    let prim = prim_order(&weights)?;
    if records {
        if lambda.is_some() {
            return usage("--records and --lambda are exclusive");
        }
        return Ok(merge_record(&prim)?.to_csv());
    }
    let p = match lambda {
        Some(l) => {
            let p = critical_p(n, l);
            if !(p > 0.0 && p < 1.0) {
                return usage(format!("p_n(lambda) = {p} outside (0, 1)"));
            }
            p
        }
        None => f64::INFINITY,
    };
    let mut s = String::from("rank_a,rank_b,weight\n");
    for e in prim.edges.iter().filter(|e| e.weight <= p) {
        s.push_str(&format!("{},{},{}\n", e.a_rank, e.b_rank, g17(e.weight)));
    }
    Ok(s)
}

fn run_verify(suite: &str, seed: u64, reps: Option<usize>, out: &OutArgs) -> Outcome {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if default_reps(suite).is_some() {
        vec![suite]
    } else {
        return usage(format!("unknown suite {suite:?}; known: all, {}", SUITES.join(", ")));
    };
    let mut text = String::new();
    let mut failed = Vec::new();
    for name in names {
        let r = run_suite(name, seed, reps.or(default_reps(name)).expect("known suite"))?;
        if !r.pass {
            failed.push(format!("{name} ({})", r.failures().join(", ")));
        }
        text.push_str(&r.to_json());
        text.push('\n');
    }
    emit(out, &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Suite(format!("failed: {}", failed.join("; "))))
    }
}

fn run_report(input: &Path, format: Format, out: &OutArgs) -> Outcome {
    let text = std::fs::read_to_string(input).or_else(|e| usage(format!("cannot read {}: {e}", input.display())))?;
    let reports: Vec<StatReport> =
        text.lines().filter(|l| !l.trim().is_empty()).map(StatReport::from_json).collect::<Result<_, _>>()?;
    if reports.is_empty() {
        return usage(format!("no reports in {}", input.display()));
    }
    let body = match format {
        Format::Json => reports.iter().map(|r| r.to_json() + "\n").collect(),
        Format::Csv => {
            let mut s = String::from("suite,stat,value,lo,hi,role,pass\n");
            for r in &reports {
                for (k, v) in &r.stats {
                    let (b, role) = match (r.thresholds.get(k), r.advisory.get(k)) {
                        (Some(b), _) => (Some(b), "gate"),
                        (None, Some(b)) => (Some(b), "advisory"),
                        _ => (None, "info"),
                    };
                    let (lo, hi, ok) = match b {
                        Some(b) => (g17(b.lo), g17(b.hi), b.contains(*v).to_string()),
                        None => (String::new(), String::new(), String::new()),
                    };
                    s.push_str(&format!("{},{k},{},{lo},{hi},{role},{ok}\n", r.suite, g17(*v)));
                }
            }
            s
        }
    };
    emit(out, &body)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Suite(format!("failed: {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> Outcome {
    let hooks = cli.test_hooks;
    match cli.cmd {
        Cmd::Paths { path, out } => emit(&out, &sample(&path, hooks)?.to_csv()),
        Cmd::Gcm { path, dump, from, to, out } => emit(&out, &run_gcm(&sample(&path, hooks)?, dump, from, to)?),
        Cmd::CmtDist { points, depth, min_cells, grid, out } => {
            emit(&out, &run_cmt_dist(&points, depth, min_cells, &grid)?)
        }
        Cmd::Frag { tau_sweep, top, grid, out } => emit(&out, &run_frag(&tau_sweep, top, &grid)?),
        Cmd::Merges { lambda, lambda_lo, lambda_hi, min_len, horizon, grid, out } => {
            emit(&out, &run_merges(lambda, lambda_lo, lambda_hi, min_len, horizon, &grid)?)
        }
        Cmd::Mst { n, seed, lambda, records, force_weights, out } => {
            emit(&out, &run_mst(n, seed, lambda, records, force_weights, hooks)?)
        }
        Cmd::Verify { suite, seed, reps, out } => run_verify(&suite, seed, reps, &out),
        Cmd::Report { input, format, out } => run_report(&input, format, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("cmtree: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("cmtree: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Suite(m)) => {
            eprintln!("cmtree: {m}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_forms() {
        assert!(matches!(parse_sweep("0:1:3").ok(), Some(v) if v == vec![0.0, 0.5, 1.0]));
        assert!(matches!(parse_sweep("0.5").ok(), Some(v) if v == vec![0.5]));
        assert!(matches!(parse_sweep("1,2").ok(), Some(v) if v == vec![1.0, 2.0]));
        assert!(parse_sweep("0:1:0").is_err());
        assert!(parse_sweep("0:1").is_err());
        assert!(parse_sweep("x").is_err());
    }

    #[test]
    fn horizon_covers_the_window() {
        assert_eq!(default_horizon(0.0), 4.0);
        assert_eq!(default_horizon(2.0), 8.0);
        assert_eq!(default_horizon(5.0), 16.0);
        assert_eq!(default_horizon(-3.0), 4.0);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
