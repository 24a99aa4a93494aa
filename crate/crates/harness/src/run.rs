//! Trace replay with optional oracle verification and windowed statistics.

use std::fmt::Display;
use std::io::{self, Write};
use std::time::Instant;

use adaptive_bitvec::oracle::{NaiveBits, NaiveCells, NaiveSeq};
use adaptive_bitvec::{AdaptiveArray, AdaptiveBitvector, AdaptiveWaveletMatrix, Event, LifetimeStats, Violation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::generate::random_value;
use crate::trace::{Kind, Line, Op, Pos, Trace};

pub const CSV_VERSION: &str = "# adbv-stats v1";
pub const CSV_COLUMNS: &str =
    "window,ops,m,u,q,visits_per_query,visits_per_update,flatten_count,split_count,overhead_ratio,elapsed_ns";

/// A structure that can execute resolved operations. Answers are rendered
/// as trace text: a number, `none` for an exhausted select, `ok` for an
/// insert and `err` for a rejected call.
pub trait Machine {
    fn len(&self) -> usize;
    fn exec(&mut self, op: Op) -> String;
    fn payload(&self) -> Vec<u64>;
    /// Occurrences of bit or symbol `v`, without issuing a query.
    fn count(&self, v: u64) -> usize;
}

/// Statistics of an adaptive structure.
pub trait Observe {
    fn stats(&self) -> LifetimeStats;
    fn overhead_ratio(&self) -> f64;
    fn check(&self) -> Vec<Violation>;
    fn set_event_log(&mut self);
    /// Drains logged events and returns how many flattens they held, or a
    /// description of the first flatten larger than the cap.
    fn audit_flattens(&mut self) -> Result<u64, String>;
}

fn audit<'a>(events: impl Iterator<Item = (&'a Event, usize)>) -> Result<u64, String> {
    let mut n = 0;
    for (e, cap) in events {
        if let Event::Flatten { size, level } = *e {
            if size > cap {
                return Err(format!("flattened {size} units at level {level}, over the cap {cap}"));
            }
            n += 1;
        }
    }
    Ok(n)
}

fn at(p: Pos) -> usize {
    match p {
        Pos::At(p) => p,
        Pos::Uniform => unreachable!("positions are resolved before execution"),
    }
}

fn show<T: Display, E>(r: Result<T, E>) -> String {
    r.map_or_else(|_| "err".to_string(), |v| v.to_string())
}

fn show_sel<E>(r: Result<Option<usize>, E>) -> String {
    match r {
        Ok(Some(p)) => p.to_string(),
        Ok(None) => "none".to_string(),
        Err(_) => "err".to_string(),
    }
}

fn ok<E>(r: Result<(), E>) -> String {
    if r.is_ok() { "ok" } else { "err" }.to_string()
}

macro_rules! bit_machine {
    ($t:ty) => {
        impl Machine for $t {
            fn len(&self) -> usize {
                <$t>::len(self)
            }
            fn exec(&mut self, op: Op) -> String {
                match op {
                    Op::Access(i) => show(self.access(at(i)).map(u8::from)),
                    Op::Rank(b, i) => show(self.rank(b == 1, at(i))),
                    Op::Select(b, j) => show_sel(self.select(b == 1, at(j))),
                    Op::Insert(i, v) => ok(self.insert(at(i), v == 1)),
                    Op::Delete(i) => show(self.delete(at(i)).map(u8::from)),
                    Op::Write(i, v) => show(self.write(at(i), v == 1).map(u8::from)),
                }
            }
            fn payload(&self) -> Vec<u64> {
                bits_of(self)
            }
            fn count(&self, v: u64) -> usize {
                let ones = self.ones();
                if v == 1 {
                    ones
                } else {
                    <$t>::len(self) - ones
                }
            }
        }
    };
}

trait BitsOf {
    fn bit_vec(&self) -> Vec<bool>;
    fn ones(&self) -> usize;
}
impl BitsOf for AdaptiveBitvector {
    fn bit_vec(&self) -> Vec<bool> {
        self.to_bits()
    }
    fn ones(&self) -> usize {
        self.count_ones()
    }
}
impl BitsOf for NaiveBits {
    fn bit_vec(&self) -> Vec<bool> {
        self.as_slice().to_vec()
    }
    fn ones(&self) -> usize {
        self.as_slice().iter().filter(|&&b| b).count()
    }
}
fn bits_of<T: BitsOf>(t: &T) -> Vec<u64> {
    t.bit_vec().into_iter().map(u64::from).collect()
}

bit_machine!(AdaptiveBitvector);
bit_machine!(NaiveBits);

macro_rules! cell_machine {
    ($t:ty, $payload:expr) => {
        impl Machine for $t {
            fn len(&self) -> usize {
                <$t>::len(self)
            }
            fn exec(&mut self, op: Op) -> String {
                match op {
                    Op::Access(i) => show(self.read(at(i))),
                    Op::Insert(i, v) => ok(self.insert(at(i), v)),
                    Op::Delete(i) => show(self.delete(at(i))),
                    Op::Write(i, v) => show(self.write(at(i), v)),
                    Op::Rank(..) | Op::Select(..) => "err".to_string(),
                }
            }
            fn payload(&self) -> Vec<u64> {
                $payload(self)
            }
            fn count(&self, _: u64) -> usize {
                0
            }
        }
    };
}

cell_machine!(AdaptiveArray, AdaptiveArray::to_vec);
cell_machine!(NaiveCells, |c: &NaiveCells| c.as_slice().to_vec());

macro_rules! seq_machine {
    ($t:ty, $payload:expr, $count:expr) => {
        impl Machine for $t {
            fn len(&self) -> usize {
                <$t>::len(self)
            }
            fn exec(&mut self, op: Op) -> String {
                match op {
                    Op::Access(i) => show(self.access(at(i))),
                    Op::Rank(c, i) => show(self.rank(c, at(i))),
                    Op::Select(c, j) => show_sel(self.select(c, at(j))),
                    Op::Insert(i, c) => ok(self.insert(at(i), c)),
                    Op::Delete(i) => show(self.delete(at(i))),
                    Op::Write(..) => "err".to_string(),
                }
            }
            fn payload(&self) -> Vec<u64> {
                $payload(self)
            }
            fn count(&self, c: u64) -> usize {
                $count(self, c)
            }
        }
    };
}

seq_machine!(AdaptiveWaveletMatrix, AdaptiveWaveletMatrix::to_vec, AdaptiveWaveletMatrix::occurrences);
seq_machine!(NaiveSeq, |s: &NaiveSeq| s.as_slice().to_vec(), |s: &NaiveSeq, c| s
    .as_slice()
    .iter()
    .filter(|&&x| x == c)
    .count());

impl Observe for AdaptiveBitvector {
    fn stats(&self) -> LifetimeStats {
        AdaptiveBitvector::stats(self)
    }
    fn overhead_ratio(&self) -> f64 {
        self.space_report().overhead_ratio
    }
    fn check(&self) -> Vec<Violation> {
        AdaptiveBitvector::check(self)
    }
    fn set_event_log(&mut self) {
        AdaptiveBitvector::set_event_log(self, true);
    }
    fn audit_flattens(&mut self) -> Result<u64, String> {
        let cap = self.params().flatten_cap;
        audit(self.take_events().iter().map(|e| (e, cap)))
    }
}

impl Observe for AdaptiveArray {
    fn stats(&self) -> LifetimeStats {
        AdaptiveArray::stats(self)
    }
    fn overhead_ratio(&self) -> f64 {
        self.space_report().overhead_ratio
    }
    fn check(&self) -> Vec<Violation> {
        AdaptiveArray::check(self)
    }
    fn set_event_log(&mut self) {
        AdaptiveArray::set_event_log(self, true);
    }
    fn audit_flattens(&mut self) -> Result<u64, String> {
        let cap = self.params().flatten_cap;
        audit(self.take_events().iter().map(|e| (e, cap)))
    }
}

impl Observe for AdaptiveWaveletMatrix {
    fn stats(&self) -> LifetimeStats {
        AdaptiveWaveletMatrix::stats(self)
    }
    fn overhead_ratio(&self) -> f64 {
        self.space_report().overhead_ratio
    }
    fn check(&self) -> Vec<Violation> {
        AdaptiveWaveletMatrix::check(self)
    }
    fn set_event_log(&mut self) {
        AdaptiveWaveletMatrix::set_event_log(self, true);
    }
    fn audit_flattens(&mut self) -> Result<u64, String> {
        let events = self.take_events();
        audit(events.iter().map(|(d, e)| (e, self.level(*d).params().flatten_cap)))
    }
}

/// Counters of one window of operations.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub window: usize,
    pub ops: usize,
    /// Queries in the window.
    pub m: u64,
    /// Updates in the window.
    pub u: u64,
    /// Operations per update, `(m + u) / max(u, 1)`.
    pub q: f64,
    pub visits_per_query: f64,
    pub visits_per_update: f64,
    pub flatten_count: u64,
    pub split_count: u64,
    pub overhead_ratio: f64,
    pub elapsed_ns: u128,
}

impl StatsRow {
    /// The CSV line, optionally without the timing column.
    pub fn csv(&self, with_time: bool) -> String {
        let mut s = format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{},{},{:.6}",
            self.window,
            self.ops,
            self.m,
            self.u,
            self.q,
            self.visits_per_query,
            self.visits_per_update,
            self.flatten_count,
            self.split_count,
            self.overhead_ratio
        );
        if with_time {
            s.push_str(&format!(",{}", self.elapsed_ns));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Compare every answer with the oracle, and the full payload and
    /// structural invariants at every window boundary.
    pub verify: bool,
    /// Operations per stats row.
    pub window: usize,
    /// Run the structural validator after every operation.
    pub validate_each: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            verify: false,
            window: 10_000,
            validate_each: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("mismatch at op {op_index} (line {line}) `{op}`: expected {expected}, got {got}")]
    Mismatch {
        op_index: usize,
        line: usize,
        op: String,
        expected: String,
        got: String,
    },
    #[error("after op {op_index} (line {line}): {message}")]
    Diverged { op_index: usize, line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunError {
    /// Process exit code: 1 for verification failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Mismatch { .. } | RunError::Diverged { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<StatsRow>,
    /// Flatten events seen, each checked against the flatten cap.
    pub flattens_audited: u64,
    pub stats: LifetimeStats,
    pub final_len: usize,
    pub overhead_ratio: f64,
}

// `count` gives the occurrences of a bit or symbol; select positions are
// drawn over the occurrences that exist (just `1` when there are none).
fn resolve(
    rng: &mut ChaCha8Rng,
    op: Op,
    n: usize,
    count: impl Fn(u64) -> usize,
    line: usize,
) -> Result<Op, RunError> {
    let mut draw = |p: Pos, lo: usize, hi: usize| -> Result<Pos, RunError> {
        match p {
            Pos::At(_) => Ok(p),
            Pos::Uniform if lo > hi => Err(RunError::Invalid {
                line,
                message: format!("no valid position for `{op}` on an empty structure"),
            }),
            Pos::Uniform => Ok(Pos::At(rng.gen_range(lo..=hi))),
        }
    };
    Ok(match op {
        Op::Access(i) => Op::Access(draw(i, 1, n)?),
        Op::Rank(b, i) => Op::Rank(b, draw(i, 0, n)?),
        Op::Select(b, j) => Op::Select(b, draw(j, 1, count(b).max(1))?),
        Op::Insert(i, v) => Op::Insert(draw(i, 1, n + 1)?, v),
        Op::Delete(i) => Op::Delete(draw(i, 1, n)?),
        Op::Write(i, v) => Op::Write(draw(i, 1, n)?, v),
    })
}

/// Replay stream for a trace: the initial payload, then one draw per `U`.
fn replay_rng(trace: &Trace) -> (ChaCha8Rng, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(trace.seed);
    let init = (0..trace.n0).map(|_| random_value(&mut rng, trace.kind)).collect();
    (rng, init)
}

/// Replays `trace`, writing the CSV to `out`.
pub fn run(trace: &Trace, opts: &RunOptions, out: &mut impl Write) -> Result<RunSummary, RunError> {
    let (rng, init) = replay_rng(trace);
    let err = |e: adaptive_bitvec::Error| RunError::Invalid {
        line: 1,
        message: e.to_string(),
    };
    match trace.kind {
        Kind::Bits => {
            let bits: Vec<bool> = init.iter().map(|&v| v == 1).collect();
            let a = AdaptiveBitvector::from_bits(bits.iter().copied());
            let o = opts.verify.then(|| NaiveBits::from_bits(bits));
            drive(trace, opts, rng, a, o, out)
        }
        Kind::Array(w) => {
            let a = AdaptiveArray::from_values(w, init.iter().copied()).map_err(err)?;
            let o = if opts.verify {
                Some(NaiveCells::from_values(w, init).map_err(err)?)
            } else {
                None
            };
            drive(trace, opts, rng, a, o, out)
        }
        Kind::Seq(s) => {
            let a = AdaptiveWaveletMatrix::from_symbols(s, init.iter().copied()).map_err(err)?;
            let o = if opts.verify {
                Some(NaiveSeq::from_symbols(s, init).map_err(err)?)
            } else {
                None
            };
            drive(trace, opts, rng, a, o, out)
        }
    }
}

fn drive<A: Machine + Observe, O: Machine>(
    trace: &Trace,
    opts: &RunOptions,
    mut rng: ChaCha8Rng,
    mut a: A,
    mut o: Option<O>,
    out: &mut impl Write,
) -> Result<RunSummary, RunError> {
    let window = opts.window.max(1);
    a.set_event_log();
    let mut flattens_audited = 0;
    writeln!(out, "{CSV_VERSION}")?;
    writeln!(out, "{CSV_COLUMNS}")?;
    let mut rows = Vec::new();
    let mut base = a.stats();
    let (mut m, mut u, mut ops) = (0u64, 0u64, 0usize);
    let mut clock = Instant::now();
    for (k, Line { line, op, expected }) in trace.ops.iter().enumerate() {
        let op_index = k + 1;
        let op = resolve(&mut rng, *op, a.len(), |v| a.count(v), *line)?;
        let got = a.exec(op);
        let mismatch = |expected: String, got: &str| RunError::Mismatch {
            op_index,
            line: *line,
            op: op.to_string(),
            expected,
            got: got.to_string(),
        };
        if let Some(o) = o.as_mut() {
            let want = o.exec(op);
            if want != got {
                return Err(mismatch(want, &got));
            }
        }
        if let Some(e) = expected {
            if *e != got {
                return Err(mismatch(e.clone(), &got));
            }
        }
        if opts.validate_each {
            if let Some(v) = a.check().first() {
                return Err(RunError::Diverged {
                    op_index,
                    line: *line,
                    message: format!("invariant violated: {v}"),
                });
            }
        }
        flattens_audited += a.audit_flattens().map_err(|message| RunError::Diverged {
            op_index,
            line: *line,
            message,
        })?;
        if trace.kind.is_update(&op) {
            u += 1;
        } else {
            m += 1;
        }
        ops += 1;
        if ops == window || op_index == trace.ops.len() {
            let elapsed_ns = clock.elapsed().as_nanos();
            if let Some(o) = o.as_ref() {
                let diverged = |message| RunError::Diverged {
                    op_index,
                    line: *line,
                    message,
                };
                if a.payload() != o.payload() {
                    return Err(diverged("payload differs from the oracle".to_string()));
                }
                if let Some(v) = a.check().first() {
                    return Err(diverged(format!("invariant violated: {v}")));
                }
            }
            let now = a.stats();
            let row = StatsRow {
                window: rows.len() + 1,
                ops,
                m,
                u,
                q: (m + u) as f64 / u.max(1) as f64,
                visits_per_query: (now.query_visits - base.query_visits) as f64 / m.max(1) as f64,
                visits_per_update: (now.update_visits - base.update_visits) as f64 / u.max(1) as f64,
                flatten_count: now.flatten_count - base.flatten_count,
                split_count: now.split_count - base.split_count,
                overhead_ratio: a.overhead_ratio(),
                elapsed_ns,
            };
            writeln!(out, "{}", row.csv(true))?;
            rows.push(row);
            base = now;
            (m, u, ops) = (0, 0, 0);
            clock = Instant::now();
        }
    }
    Ok(RunSummary {
        rows,
        flattens_audited,
        stats: a.stats(),
        final_len: a.len(),
        overhead_ratio: a.overhead_ratio(),
    })
}

/// Executes `trace` on the oracle alone and returns it with every position
/// made literal and every answer appended as `= answer`.
pub fn annotate(trace: &Trace) -> Result<String, RunError> {
    let (rng, init) = replay_rng(trace);
    let err = |e: adaptive_bitvec::Error| RunError::Invalid {
        line: 1,
        message: e.to_string(),
    };
    match trace.kind {
        Kind::Bits => annotate_with(trace, rng, NaiveBits::from_bits(init.iter().map(|&v| v == 1))),
        Kind::Array(w) => annotate_with(trace, rng, NaiveCells::from_values(w, init).map_err(err)?),
        Kind::Seq(s) => annotate_with(trace, rng, NaiveSeq::from_symbols(s, init).map_err(err)?),
    }
}

fn annotate_with<O: Machine>(trace: &Trace, mut rng: ChaCha8Rng, mut o: O) -> Result<String, RunError> {
    let mut s = format!("{}\n", trace.header());
    for l in &trace.ops {
        let op = resolve(&mut rng, l.op, o.len(), |v| o.count(v), l.line)?;
        let got = o.exec(op);
        s.push_str(&format!("{op} = {got}\n"));
    }
    Ok(s)
}
