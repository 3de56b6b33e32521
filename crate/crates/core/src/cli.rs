//! Command-line front end. `run` returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::model::MAX_K;
use crate::oracle::{self, brute_force_f, OracleOptions};
use crate::report::{self, Analysis};
use crate::search::{self, enumerate_with, RunControl, SearchConfig, SearchOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_INTERRUPTED: i32 = 4;
pub const EXIT_AUDIT: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Checkpoint(_) => EXIT_USAGE,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Interrupted { .. } => EXIT_INTERRUPTED,
        Error::Overflow | Error::InstantiationFailed(_) | Error::Audit(_) => EXIT_AUDIT,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}

#[derive(Parser, Debug)]
#[command(name = "zsfree", version, about = "Minimal subset-sum counts of zero-sum-free sets in Z_n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate almost-examples and solve them
    Search(SearchArgs),
    /// Compute f_n(k) by direct enumeration
    Oracle(OracleArgs),
    /// Build the table of f_n(k) for one k
    Table(TableArgs),
    /// Run the built-in consistency checks
    Audit(AuditArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

fn parse_k(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=MAX_K).contains(&k) {
        Ok(k)
    } else {
        Err(format!("k must be in 1..={MAX_K}"))
    }
}

#[derive(Args, Debug)]
pub struct SearchOpts {
    #[arg(long, value_parser = parse_k)]
    pub k: usize,
    /// Largest class count kept [default: k(k+1)/2 - 1]
    #[arg(long)]
    pub lmax: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    #[arg(long)]
    pub no_symmetry: bool,
    #[arg(long)]
    pub no_anticlique: bool,
    #[arg(long)]
    pub no_memo: bool,
    /// Branching decisions per shard
    #[arg(long, default_value_t = 12)]
    pub shard_depth: usize,
}

impl SearchOpts {
    fn config(&self) -> SearchConfig {
        let mut cfg = SearchConfig::new(self.k).with_workers(self.workers as usize).with_toggles(
            !self.no_symmetry,
            !self.no_anticlique,
            !self.no_memo,
        );
        if let Some(l) = self.lmax {
            cfg = cfg.with_ell_max(l);
        }
        cfg.shard_depth = self.shard_depth;
        cfg
    }
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub opts: SearchOpts,
    /// Record progress in this file
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Continue from this progress file (and keep recording to it)
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Stop after this many shards finish, as if interrupted
    #[arg(long, hide = true)]
    pub stop_after_shards: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
    pub n: Option<u64>,
    /// Inclusive range `a..b`
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    /// Visit every set instead of one per unit-multiple orbit
    #[arg(long)]
    pub no_orbit_reduction: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, value_parser = parse_k)]
    pub k: usize,
    #[arg(long, default_value_t = 40)]
    pub sweep_limit: u64,
    /// Records written by `search --format records`
    #[arg(long)]
    pub search_output: Option<PathBuf>,
    /// Refuse to run the search when no search output is given
    #[arg(long)]
    pub no_inline: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Largest k for the pruning comparison
    #[arg(long, default_value_t = 4, value_parser = parse_k)]
    pub k_max: usize,
    /// Largest n for the oracle comparison
    #[arg(long, default_value_t = 24)]
    pub n_max: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

fn interrupt_flag() -> Arc<AtomicBool> {
    static FLAG: OnceLock<Arc<AtomicBool>> = OnceLock::new();
    FLAG.get_or_init(|| {
        let flag = Arc::new(AtomicBool::new(false));
        let f = Arc::clone(&flag);
        // a second handler cannot be installed; running without one is fine
        let _ = ctrlc::set_handler(move || f.store(true, Ordering::SeqCst));
        flag
    })
    .clone()
}

fn search_and_solve(cfg: &SearchConfig, control: &RunControl) -> Result<(SearchOutcome, Analysis), Error> {
    let outcome = enumerate_with(cfg, control)?;
    let analysis = report::analyze(cfg.k, &outcome.examples)?;
    Ok((outcome, analysis))
}

fn cmd_search(a: &SearchArgs) -> Result<(), Error> {
    let cfg = a.opts.config();
    let (checkpoint, resume) = match (&a.checkpoint, &a.resume) {
        (Some(c), Some(r)) if c != r => {
            return Err(Error::InvalidArgument("--checkpoint and --resume name different files".into()))
        }
        (_, Some(r)) => (Some(r.clone()), true),
        (c, None) => (c.clone(), false),
    };
    if resume && !checkpoint.as_ref().is_some_and(|p| p.exists()) {
        return Err(Error::InvalidArgument("--resume file does not exist".into()));
    }
    let control = RunControl {
        checkpoint: checkpoint.clone(),
        resume,
        interrupt: Some(interrupt_flag()),
        stop_after_shards: a.stop_after_shards,
    };
    let (outcome, analysis) = match search_and_solve(&cfg, &control) {
        Err(Error::Interrupted { completed, total }) => {
            match &checkpoint {
                Some(p) => {
                    eprintln!("interrupted after {completed} of {total} shards; continue with --resume {}", p.display())
                }
                None => eprintln!("interrupted after {completed} of {total} shards; no checkpoint was kept"),
            }
            return Err(Error::Interrupted { completed, total });
        }
        r => r?,
    };
    let s = &outcome.stats;
    eprintln!(
        "{} shards ({} resumed), {} nodes, {} branch points, {} leaves, pruned: {} symmetry, {} anti-clique",
        outcome.shards,
        outcome.resumed_shards,
        s.nodes,
        s.branch_points,
        s.leaves,
        s.pruned_symmetry,
        s.pruned_anti_clique
    );
    let text = match a.format {
        Format::Text => report::search_text(&cfg, &outcome, &analysis),
        Format::Records => report::search_records(&cfg, &outcome, &analysis)?,
    };
    emit(&a.out, &text)
}

fn parse_range(s: &str) -> Result<(u64, u64), Error> {
    let bad = || Error::InvalidArgument(format!("--n-range expects a..b, got {s}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Serialize)]
struct OracleRecord {
    schema: &'static str,
    n: u64,
    k: usize,
    /// `null` when no zero-sum-free set exists.
    value: Option<usize>,
    witness: Option<Vec<u64>>,
}

fn cmd_oracle(a: &OracleArgs) -> Result<(), Error> {
    let (lo, hi) = match (&a.n, &a.n_range) {
        (Some(n), _) => (*n, *n),
        (None, Some(r)) => parse_range(r)?,
        (None, None) => return Err(Error::InvalidArgument("give --n or --n-range".into())),
    };
    if hi > oracle::CAPACITY {
        return Err(Error::Capacity { n: hi, capacity: oracle::CAPACITY });
    }
    let opts = OracleOptions { orbit_reduction: !a.no_orbit_reduction };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers as usize)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let mut text = String::new();
    for n in lo.max(2)..=hi {
        let f = pool.install(|| brute_force_f(n, a.k, opts))?;
        let witness = f.witness.as_ref().map(|w| w.elements.clone());
        match a.format {
            Format::Records => {
                let rec = OracleRecord { schema: "zsfree.oracle/1", n, k: a.k, value: f.value, witness };
                text.push_str(&serde_json::to_string(&rec)?);
                text.push('\n');
            }
            Format::Text => {
                let line = match (f.value, witness) {
                    (Some(v), Some(w)) => {
                        let e: Vec<String> = w.iter().map(u64::to_string).collect();
                        format!("f_{n}({}) = {v}  {{{}}}", a.k, e.join(", "))
                    }
                    _ => format!("f_{n}({}) = infinity", a.k),
                };
                text.push_str(&line);
                text.push('\n');
            }
        }
    }
    emit(&a.out, &text)
}

fn cmd_table(a: &TableArgs) -> Result<(), Error> {
    let examples = match &a.search_output {
        Some(p) => {
            let (k, ell_max, examples) = report::parse_search_records(&fs::read_to_string(p)?)?;
            if k != a.k {
                return Err(Error::InvalidArgument(format!("search output is for k={k}, not {}", a.k)));
            }
            if ell_max < SearchConfig::default_ell_max(k) {
                eprintln!("warning: search output stops at ell_max={ell_max}; rows above it come only from {{1..k}}");
            }
            examples
        }
        None if a.no_inline => {
            return Err(Error::InvalidArgument("--no-inline needs --search-output".into()));
        }
        None => {
            let cfg = SearchConfig::new(a.k).with_workers(a.workers as usize);
            let control = RunControl { interrupt: Some(interrupt_flag()), ..RunControl::default() };
            enumerate_with(&cfg, &control)?.examples
        }
    };
    let analysis = report::analyze(a.k, &examples)?;
    let rows = report::build_table(a.k, &analysis.families, a.sweep_limit)?;
    let text = match a.format {
        Format::Text => report::render_table(&rows),
        Format::Records => report::table_records(&rows)?,
    };
    emit(&a.out, &text)
}

/// Self-checks: named witnesses, pruning toggles, every emitted witness,
/// and the tables against the oracle.
fn cmd_audit(a: &AuditArgs) -> Result<(), Error> {
    let mut failures = 0;
    let mut check = |name: String, ok: bool| {
        println!("{} {name}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    for (n, b, ell) in [
        (4u64, vec![1u64, 2], 3usize),
        (6, vec![1, 3, 4], 5),
        (9, vec![3, 1, 4, 7], 8),
        (15, vec![14, 2, 3, 4, 5], 14),
        (25, vec![5, 10, 1, 6, 11, 16, 21], 24),
    ] {
        check(format!("witness {b:?} in Z_{n} has {ell} sums"), oracle::verify_example(n, &b, ell));
    }
    for k in 1..=a.k_max {
        let base = SearchConfig::new(k).with_workers(a.workers as usize);
        let reference = search::enumerate(&base)?.examples;
        for (s, c, m) in [(false, true, true), (true, false, true), (true, true, false), (false, false, false)] {
            let other = search::enumerate(&base.clone().with_toggles(s, c, m))?.examples;
            check(format!("k={k} symmetry={s} anticlique={c} memo={m} gives the same relations"), other == reference);
        }
        let analysis = report::analyze(k, &reference)?;
        check(
            format!("k={k} generic witnesses verify"),
            analysis.families.iter().all(|f| oracle::verify_example(f.witness.n, &f.witness.elements, f.ell)),
        );
        let rows = report::build_table(k, &analysis.families, a.n_max)?;
        let mut agree = true;
        for n in 2..=a.n_max {
            let f = brute_force_f(n, k, OracleOptions::default())?;
            agree &= f.value == report::predicted_f(&rows, n);
        }
        check(format!("k={k} table agrees with the oracle for n <= {}", a.n_max), agree);
    }
    if failures > 0 {
        return Err(Error::Audit(format!("{failures} checks failed")));
    }
    Ok(())
}

pub fn run_with(cli: Cli) -> i32 {
    let r = match &cli.command {
        Command::Search(a) => cmd_search(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Table(a) => cmd_table(a),
        Command::Audit(a) => cmd_audit(a),
    };
    match r {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, Error::Interrupted { .. }) {
                eprintln!("error: {e}");
            }
            exit_code(&e)
        }
    }
}

/// Parses the process arguments; clap reports usage errors with exit code 2.
pub fn run() -> i32 {
    run_with(Cli::parse())
}
