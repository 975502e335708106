mod checkpoint;
mod commands;
mod ledger;
mod records;
mod runner;

use clap::{Args, Parser, Subcommand};
use sqfgap::Variant;
use std::path::PathBuf;
use std::process::ExitCode;

/// Search for gaps between square-free numbers, verify known records, and
/// reproduce the sieve's cost analysis.
#[derive(Parser)]
#[command(name = "sqfgap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search a range for gaps of at least a minimum length.
    Search(SearchArgs),
    /// Verify fixture lines of known gaps against the oracle.
    Verify(VerifyArgs),
    /// Check the catalog of first occurrences.
    Catalog(CatalogArgs),
    /// Minimum number of distinct squared primes per gap length.
    Np2min(Np2MinArgs),
    /// Construct certified gap bounds from randomized congruence patterns.
    Bounds(BoundsArgs),
    /// Evaluate the expected sort-cost series.
    Series(SeriesArgs),
    /// Work-unit ledger operations.
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Compare variant wall clock on a fixed range.
    Bench(BenchArgs),
    /// Emit catalog or series data as CSV.
    PlotCsv(PlotCsvArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    start: u64,
    #[arg(long)]
    end: u64,
    #[arg(long)]
    min_len: u32,
    /// Sieve variant level, v0 through v7.
    #[arg(long, default_value = "v7")]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Chunk width in numbers; the unit of parallelism and checkpointing.
    #[arg(long, default_value_t = runner::DEFAULT_CHUNK)]
    chunk: u64,
    /// Record output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enable checkpointing into this directory (requires --out, one worker).
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Track this run as a work unit in the given ledger file.
    #[arg(long)]
    ledger: Option<PathBuf>,
    #[arg(long, default_value = "local")]
    owner: String,
    /// Testing hook: abandon the run after this many chunks.
    #[arg(long, hide = true)]
    stop_after_chunks: Option<u64>,
    /// Print run statistics to stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// File of `<start>: <length>` lines.
    #[arg(long)]
    fixture: PathBuf,
    /// Verify only this many randomly chosen lines.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CatalogArgs {
    /// Verify witness divisibility for every catalogued row.
    #[arg(long)]
    check_factors: bool,
    /// Search for the first gap of each exact length up to this one and
    /// compare with the catalog.
    #[arg(long)]
    check_firsts: Option<u32>,
    #[arg(long, default_value = "v7")]
    variant: Variant,
    /// Give up a first-occurrence search beyond this bound.
    #[arg(long, default_value_t = 400_000_000_000)]
    max_n: u64,
}

#[derive(Args)]
struct Np2MinArgs {
    #[arg(long, visible_alias = "max-L", default_value_t = 17)]
    max_len: u32,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    length: u32,
    /// Number of randomized assignments; accepts scientific notation (1e5).
    #[arg(long, value_parser = commands::parse_count, default_value = "100000")]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Offsets left to luck per assignment (0..=5).
    #[arg(long, default_value_t = 5)]
    free: usize,
    /// Consecutive solutions scanned per assignment.
    #[arg(long, default_value_t = 512)]
    shifts: u64,
    /// Distinct small primes available for single positions.
    #[arg(long, default_value_t = 64)]
    pool: usize,
    /// Place the class of 2 uniformly instead of on a largest class.
    #[arg(long)]
    uniform: bool,
}

#[derive(Args)]
struct SeriesArgs {
    /// Truncation, in primes; accepts scientific notation (1e6).
    #[arg(long, value_parser = commands::parse_count, default_value = "1000000")]
    terms: u64,
    /// Also print the per-rank share for this rank.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Subcommand)]
enum LedgerCmd {
    /// Claim a work unit.
    Claim(LedgerClaimArgs),
    /// Mark a claimed unit done.
    Complete(LedgerCompleteArgs),
    /// Merge another ledger into this one.
    Merge(LedgerMergeArgs),
    /// List units.
    List(LedgerListArgs),
}

#[derive(Args)]
struct LedgerClaimArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    start: u64,
    #[arg(long)]
    end: u64,
    #[arg(long)]
    min_len: u32,
    #[arg(long, default_value = "local")]
    owner: String,
}

#[derive(Args)]
struct LedgerCompleteArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    start: u64,
    #[arg(long)]
    end: u64,
    #[arg(long)]
    min_len: u32,
    /// Output digest as printed by `search --stats`.
    #[arg(long, default_value_t = 0)]
    digest: u64,
}

#[derive(Args)]
struct LedgerMergeArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    other: PathBuf,
    /// Destination (defaults to --file).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LedgerListArgs {
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    start: u64,
    #[arg(long)]
    end: u64,
    #[arg(long)]
    min_len: u32,
    /// Comma-separated variant list.
    #[arg(long, default_value = "v1,v2,v5,v6,v7", value_delimiter = ',')]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = 3)]
    reps: u32,
}

#[derive(Args)]
struct PlotCsvArgs {
    /// What to emit: `qgap` or `series`.
    #[arg(long)]
    what: String,
    #[arg(long, value_parser = commands::parse_count, default_value = "1000000")]
    terms: u64,
    #[arg(long, default_value_t = 24)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Dying quietly on a closed pipe beats a panic when piping into head.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Cmd::Search(args) => commands::search(args),
        Cmd::Verify(args) => commands::verify(args),
        Cmd::Catalog(args) => commands::catalog(args),
        Cmd::Np2min(args) => commands::np2min(args),
        Cmd::Bounds(args) => commands::bounds(args),
        Cmd::Series(args) => commands::series(args),
        Cmd::Ledger(cmd) => commands::ledger(cmd),
        Cmd::Bench(args) => commands::bench(args),
        Cmd::PlotCsv(args) => commands::plot_csv(args),
    }
}

/// 2 for configuration mistakes, 3 for I/O and everything operational.
/// Verification failures exit 1 via the command result itself.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<sqfgap::Error>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    3
}
