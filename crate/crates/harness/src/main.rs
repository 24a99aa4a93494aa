use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_bitvec_harness::{annotate, generate, run, GenConfig, Kind, RunOptions, Trace};
use clap::{Parser, Subcommand};

/// Generate and replay operation traces on adaptive bitvectors, arrays and
/// wavelet matrices.
#[derive(Parser)]
#[command(name = "adbv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a random trace with one update per q operations on average.
    Generate {
        /// bits, array:WIDTH or seq:SIGMA
        #[arg(long, default_value = "bits")]
        kind: Kind,
        /// Initial length, filled with random content on replay.
        #[arg(long, default_value_t = 0)]
        n0: usize,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        ops: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay a trace and print one CSV row per window.
    ///
    /// Output starts with the comment `# adbv-stats v1` and the header
    /// window,ops,m,u,q,visits_per_query,visits_per_update,flatten_count,
    /// split_count,overhead_ratio,elapsed_ns. m and u count queries and
    /// updates in the window, q = (m+u)/max(u,1), visits are internal nodes
    /// traversed per operation, flatten and split counts are window deltas,
    /// overhead_ratio is measured at the window end.
    ///
    /// Exit status: 0 ok, 1 verification mismatch, 2 usage or parse error.
    Run {
        /// Trace file; standard input when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Check every answer against the naive oracle.
        #[arg(long)]
        verify: bool,
        /// Run the structural validator after every operation (slow).
        #[arg(long)]
        validate_each: bool,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
    },
    /// Replay a trace on the oracle and print it with literal positions and
    /// expected answers.
    Annotate {
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn read_trace(path: Option<&PathBuf>) -> Result<Trace, ExitCode> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| {
            eprintln!("adbv: cannot read {}: {e}", p.display());
            ExitCode::from(2)
        })?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| {
                eprintln!("adbv: cannot read standard input: {e}");
                ExitCode::from(2)
            })?;
            s
        }
    };
    Trace::parse(&text).map_err(|e| {
        eprintln!("adbv: parse error at {e}");
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match cli.command {
        Command::Generate { kind, n0, ops, q, seed } => {
            let cfg = GenConfig {
                kind,
                n0,
                ops: ops as usize,
                q,
                seed,
            };
            match out.write_all(generate(&cfg).as_bytes()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("adbv: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Run {
            trace,
            verify,
            validate_each,
            window,
        } => match read_trace(trace.as_ref()) {
            Err(code) => code,
            Ok(t) => {
                let opts = RunOptions {
                    verify,
                    window: window as usize,
                    validate_each,
                };
                match run(&t, &opts, &mut out) {
                    Ok(_) => ExitCode::SUCCESS,
                    Err(e) => {
                        let _ = out.flush();
                        eprintln!("adbv: {e}");
                        ExitCode::from(e.exit_code() as u8)
                    }
                }
            }
        },
        Command::Annotate { trace } => match read_trace(trace.as_ref()) {
            Err(code) => code,
            Ok(t) => match annotate(&t) {
                Ok(s) => {
                    let _ = out.write_all(s.as_bytes());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("adbv: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            },
        },
    };
    let _ = out.flush();
    code
}
