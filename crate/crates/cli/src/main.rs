//! Command-line surface over the core library: convergents, neighbors,
//! Bertrand thresholds, gap statistics, counting, discriminators, and a
//! batch sweep runner with a bounded worker pool.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 resource guard tripped
//! (ceilings, materialization limits, io), 4 internal invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use sunits::bertrand::{self, BertrandResult, SolveOptions, SolveOutcome};
use sunits::sunits::SUnitContext;
use sunits::{discriminator, gaps, primes, Alpha, Error, ExponentPair};

#[derive(Parser)]
#[command(name = "sunits", version, about = "Exact computations on integers of the form p^a q^b")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Directory for convergent-table caches.
    #[arg(long, global = true, env = "SUNITS_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Clone, Copy)]
struct PrimePair {
    /// Smaller prime p.
    #[arg(long)]
    p: u64,
    /// Larger prime q.
    #[arg(long)]
    q: u64,
}

#[derive(Subcommand)]
enum Command {
    /// List the certified convergents of log p / log q.
    Convergents {
        #[command(flatten)]
        pair: PrimePair,
        /// Grow the table until a denominator reaches this bound.
        #[arg(long, default_value_t = 1)]
        min_denominator: u64,
    },
    /// Left or right neighbor of p^a q^b in the ordered sequence.
    Neighbor {
        #[command(flatten)]
        pair: PrimePair,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        /// Predecessor instead of successor.
        #[arg(long, conflicts_with = "right")]
        left: bool,
        /// Successor (the default).
        #[arg(long)]
        right: bool,
    },
    /// Smallest n such that every [m, m*alpha) with m >= n contains p^a q^b.
    Bertrand {
        #[command(flatten)]
        pair: PrimePair,
        /// Window ratio as an exact fraction, e.g. 3/2.
        #[arg(long)]
        alpha: Alpha,
        /// Checkpoint file for long runs.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Resume from the checkpoint file if it exists.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Print the full decimal expansion instead of the symbolic form.
        #[arg(long)]
        materialize: bool,
        /// Refuse to materialize answers beyond this many decimal digits.
        #[arg(long, default_value_t = 2_000_000)]
        max_digits: u64,
        /// Pause (writing a checkpoint) after this many steps.
        #[arg(long, requires = "checkpoint")]
        pause_after: Option<u64>,
    },
    /// Gap statistics D1, D2, mu over a window of L consecutive gaps.
    Gaps {
        #[command(flatten)]
        pair: PrimePair,
        /// Number of neighbors in the scan window.
        #[arg(long, default_value_t = 10_000)]
        l: u64,
    },
    /// Number of p^a q^b less than or equal to x.
    Count {
        #[command(flatten)]
        pair: PrimePair,
        /// Decimal bound (arbitrary size).
        #[arg(long)]
        x: String,
    },
    /// Discriminator of the sequence U_{n+2} = (4k+2) U_{n+1} - U_n.
    Discriminator {
        /// Recurrence parameter k (a single discriminator value).
        #[arg(long, required_unless_present = "exponent", conflicts_with = "exponent")]
        k: Option<u64>,
        /// Number of initial terms that must stay distinct.
        #[arg(long, required_unless_present = "exponent")]
        n: Option<u64>,
        /// Give up beyond this modulus.
        #[arg(long, default_value_t = 1_000_000)]
        ceiling: u64,
        /// Mersenne exponent p: cross-check D_{2^p-1}(n) against the
        /// {2, 2^p-1}-unit successor for every n up to --n-max.
        #[arg(long)]
        exponent: Option<u64>,
        #[arg(long, default_value_t = 130, requires = "exponent")]
        n_max: u64,
    },
    /// Batch runner over prime pairs p < q, sorted by (p, q).
    Sweep {
        /// Threshold sweep with this window ratio (mutually exclusive with --gaps).
        #[arg(long, required_unless_present = "gaps", conflicts_with = "gaps")]
        alpha: Option<Alpha>,
        /// Gap-statistics sweep instead of thresholds.
        #[arg(long)]
        gaps: bool,
        /// Largest p to include.
        #[arg(long, default_value_t = 2)]
        pmax: u64,
        /// Largest q to include.
        #[arg(long)]
        qmax: u64,
        /// Window size for --gaps.
        #[arg(long, default_value_t = 10_000)]
        l: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Emit the full per-run layout (start/end pairs, iterations,
        /// digit counts) instead of the two-column q, n_value table.
        #[arg(long)]
        detail: bool,
        /// Materialize values in the two-column layout.
        #[arg(long)]
        materialize: bool,
    },
}

/// A uniform tabular payload: named columns for csv/table output plus a
/// richer JSON value.
struct Report {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: serde_json::Value,
}

impl Report {
    fn emit(&self, format: Format) {
        match format {
            Format::Json => println!("{}", serde_json::to_string_pretty(&self.json).unwrap()),
            Format::Csv => {
                println!("{}", self.headers.join(","));
                for row in &self.rows {
                    println!("{}", row.join(","));
                }
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.len());
                    }
                }
                let line = |cells: Vec<String>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                println!("{}", line(self.headers.iter().map(|h| h.to_string()).collect()));
                for row in &self.rows {
                    println!("{}", line(row.clone()));
                }
            }
        }
    }
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::NotPrime(_)
        | Error::PrimeOrder { .. }
        | Error::AlphaOutOfRange { .. }
        | Error::BadRational(_)
        | Error::CheckpointMismatch(_)
        | Error::BadVersion(_) => ExitCode::from(2),
        Error::ResourceGuard(_)
        | Error::DiscriminatorCeiling(_)
        | Error::ExtendTable { .. }
        | Error::Io(_)
        | Error::Serde(_) => ExitCode::from(3),
        Error::PrecisionExhausted { .. }
        | Error::NonPositiveLinearForm
        | Error::NoPredecessor => ExitCode::from(4),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn context(cli: &Cli, p: u64, q: u64) -> Result<SUnitContext, Error> {
    SUnitContext::with_cache(p, q, cli.cache_dir.as_deref())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let report = match &cli.command {
        Command::Convergents { pair, min_denominator } => {
            let ctx = context(cli, pair.p, pair.q)?;
            let table = ctx.ensure_covers(0, *min_denominator)?;
            let rows: Vec<Vec<String>> = table
                .entries()
                .iter()
                .map(|c| {
                    vec![
                        c.index.to_string(),
                        if c.index % 2 == 0 { "lower" } else { "upper" }.to_string(),
                        c.r.to_string(),
                        c.s.to_string(),
                        c.quotient.to_string(),
                    ]
                })
                .collect();
            Report {
                headers: vec!["k", "side", "num", "den", "quotient"],
                json: json!({
                    "p": pair.p, "q": pair.q,
                    "convergents": table.entries().iter().map(|c| json!({
                        "k": c.index,
                        "side": if c.index % 2 == 0 { "lower" } else { "upper" },
                        "num": c.r.to_string(),
                        "den": c.s.to_string(),
                        "quotient": c.quotient.to_string(),
                    })).collect::<Vec<_>>(),
                }),
                rows,
            }
        }
        Command::Neighbor { pair, a, b, left, right: _ } => {
            let ctx = context(cli, pair.p, pair.q)?;
            let from = ExponentPair::new(*a, *b);
            let to = if *left {
                ctx.left_neighbor(from)?
            } else {
                ctx.right_neighbor(from)?
            };
            let value = to.value(pair.p, pair.q).to_string();
            Report {
                headers: vec!["a", "b", "value"],
                rows: vec![vec![to.a.to_string(), to.b.to_string(), value.clone()]],
                json: json!({
                    "p": pair.p, "q": pair.q,
                    "direction": if *left { "left" } else { "right" },
                    "from": { "a": a, "b": b },
                    "a": to.a, "b": to.b, "value": value,
                }),
            }
        }
        Command::Bertrand {
            pair,
            alpha,
            checkpoint,
            resume,
            materialize,
            max_digits,
            pause_after,
        } => {
            let ctx = context(cli, pair.p, pair.q)?;
            let opts = SolveOptions {
                checkpoint: checkpoint.clone(),
                resume: *resume,
                materialize: *materialize,
                max_digits: *max_digits,
                max_steps: *pause_after,
                ..SolveOptions::default()
            };
            match bertrand::solve_with(&ctx, *alpha, &opts)? {
                SolveOutcome::Done(r) => bertrand_report(&[r], *materialize),
                SolveOutcome::Paused { at, iterations } => Report {
                    headers: vec!["status", "a", "b", "iterations"],
                    rows: vec![vec![
                        "paused".into(),
                        at.a.to_string(),
                        at.b.to_string(),
                        iterations.to_string(),
                    ]],
                    json: json!({
                        "status": "paused",
                        "a": at.a, "b": at.b, "iterations": iterations,
                    }),
                },
            }
        }
        Command::Gaps { pair, l } => {
            let ctx = context(cli, pair.p, pair.q)?;
            let stats = gaps::scan(&ctx, *l)?;
            gaps_report(&[stats])
        }
        Command::Count { pair, x } => {
            let ctx = context(cli, pair.p, pair.q)?;
            let x: BigUint = x
                .parse()
                .map_err(|_| Error::BadRational(format!("not a decimal integer: {x}")))?;
            let count = ctx.count(&x)?.to_string();
            Report {
                headers: vec!["count"],
                rows: vec![vec![count.clone()]],
                json: json!({ "p": pair.p, "q": pair.q, "x": x.to_string(), "count": count }),
            }
        }
        Command::Discriminator { k, n, ceiling, exponent, n_max } => match exponent {
            Some(p) => {
                let rows = discriminator::successor_check(*p, *n_max)?;
                Report {
                    headers: vec!["n", "disc", "successor", "equal"],
                    rows: rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n.to_string(),
                                r.disc_value.to_string(),
                                r.successor.to_string(),
                                r.equal.to_string(),
                            ]
                        })
                        .collect(),
                    json: serde_json::to_value(&rows)?,
                }
            }
            None => {
                let kctx = discriminator::LucasContext::new(k.unwrap())?;
                let n = n.unwrap();
                let d = discriminator::disc(&kctx, n, *ceiling)?;
                Report {
                    headers: vec!["k", "n", "disc"],
                    rows: vec![vec![kctx.k().to_string(), n.to_string(), d.to_string()]],
                    json: json!({ "k": kctx.k(), "n": n, "disc": d }),
                }
            }
        },
        Command::Sweep {
            alpha,
            gaps: gaps_mode,
            pmax,
            qmax,
            l,
            workers,
            detail,
            materialize,
        } => {
            let mut jobs: Vec<(u64, u64)> = Vec::new();
            for p in primes::primes_upto(*pmax) {
                for q in primes::primes_upto(*qmax) {
                    if q > p {
                        jobs.push((p, q));
                    }
                }
            }
            jobs.sort_unstable();
            if *gaps_mode {
                let stats = run_pool(cli, &jobs, *workers, |ctx| gaps::scan(ctx, *l))?;
                gaps_report(&stats)
            } else {
                let alpha = alpha.unwrap();
                let materialize = *materialize || !*detail;
                let results = run_pool(cli, &jobs, *workers, |ctx| {
                    let opts = SolveOptions { materialize, ..SolveOptions::default() };
                    match bertrand::solve_with(ctx, alpha, &opts)? {
                        SolveOutcome::Done(r) => Ok(r),
                        SolveOutcome::Paused { .. } => unreachable!("no step budget"),
                    }
                })?;
                if *detail {
                    bertrand_report(&results, materialize)
                } else {
                    if jobs.iter().any(|(p, _)| *p != jobs[0].0) {
                        return Err(Error::BadRational(
                            "two-column layout needs a single p; pass --detail".into(),
                        ));
                    }
                    Report {
                        headers: vec!["q", "n_value"],
                        rows: results
                            .iter()
                            .map(|r| {
                                vec![r.q.to_string(), r.value.as_ref().unwrap().to_string()]
                            })
                            .collect(),
                        json: serde_json::to_value(&results)?,
                    }
                }
            }
        }
    };
    report.emit(cli.format);
    Ok(ExitCode::SUCCESS)
}

/// Run one job per (p, q) pair on a bounded pool; results come back in
/// job order regardless of scheduling.
fn run_pool<T: Send>(
    cli: &Cli,
    jobs: &[(u64, u64)],
    workers: usize,
    f: impl Fn(&SUnitContext) -> Result<T, Error> + Sync,
) -> Result<Vec<T>, Error> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<T, Error>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(p, q)) = jobs.get(i) else { break };
                let out = context(cli, p, q).and_then(|ctx| f(&ctx));
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

fn bertrand_report(results: &[BertrandResult], materialize: bool) -> Report {
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                r.q.to_string(),
                r.alpha.to_string(),
                r.start.a.to_string(),
                r.start.b.to_string(),
                r.end.a.to_string(),
                r.end.b.to_string(),
                r.iterations.to_string(),
                bertrand::digit_len(r.p, r.q, r.start).to_string(),
                r.digits.to_string(),
                if materialize {
                    r.value.as_ref().unwrap().to_string()
                } else {
                    r.value_repr.clone()
                },
            ]
        })
        .collect();
    Report {
        headers: vec![
            "p", "q", "alpha", "a_start", "b_start", "a_end", "b_end", "iterations",
            "len_start", "len_n0", "value_repr",
        ],
        rows,
        json: serde_json::to_value(results).unwrap(),
    }
}

fn gaps_report(stats: &[gaps::GapStats]) -> Report {
    let mut rows = Vec::with_capacity(stats.len());
    let mut objects = Vec::with_capacity(stats.len());
    for s in stats {
        let (d1, d2, mu) = s
            .truncated(10)
            .expect("window statistics certified to 10 digits");
        objects.push(json!({
            "p": s.p, "q": s.q,
            "window": serde_json::to_value(&s.window).unwrap(),
            "D1": d1, "D2": d2, "mu": mu,
            "k_plus": s.k_plus, "evaluated": s.evaluated,
        }));
        rows.push(vec![s.p.to_string(), s.q.to_string(), d1, d2, mu]);
    }
    Report {
        headers: vec!["p", "q", "D1", "D2", "mu"],
        rows,
        json: serde_json::Value::Array(objects),
    }
}
