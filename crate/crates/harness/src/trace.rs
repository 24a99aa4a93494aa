//! Plain-text operation traces.
//!
//! ```text
//! trace bits n0=1000 seed=7
//! # comment
//! A U
//! R 1 17 = 9
//! S 0 U
//! I 3 1
//! D U = 0
//! W 12 1 = 1
//! ```
//!
//! Positions are literal or `U`, drawn uniformly over the valid range when
//! the operation executes; for select that range is the occurrences present.
//! A trailing `= answer` is checked on replay.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Bits,
    /// Cells of the given width.
    Array(u32),
    /// Symbols `1..=sigma`.
    Seq(u64),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Bits => write!(f, "bits"),
            Kind::Array(w) => write!(f, "array:{w}"),
            Kind::Seq(s) => write!(f, "seq:{s}"),
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Kind, String> {
        if s == "bits" {
            return Ok(Kind::Bits);
        }
        let bad = || format!("unknown kind {s:?}; expected bits, array:WIDTH or seq:SIGMA");
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "array" => match arg.parse() {
                Ok(w) if (1..=64).contains(&w) => Ok(Kind::Array(w)),
                _ => Err(format!("array width {arg:?} outside 1..=64")),
            },
            "seq" => match arg.parse() {
                Ok(s) if s >= 2 => Ok(Kind::Seq(s)),
                _ => Err(format!("alphabet size {arg:?} must be an integer >= 2")),
            },
            _ => Err(bad()),
        }
    }
}

impl Kind {
    /// Whether `v` is a storable value (bit, cell or symbol).
    pub fn value_ok(&self, v: u64) -> bool {
        match *self {
            Kind::Bits => v <= 1,
            Kind::Array(w) => w == 64 || v >> w == 0,
            Kind::Seq(s) => (1..=s).contains(&v),
        }
    }

    /// Writes are updates for bitvectors and queries for arrays; sequences
    /// have none.
    pub fn is_update(&self, op: &Op) -> bool {
        match op {
            Op::Insert(..) | Op::Delete(_) => true,
            Op::Write(..) => *self == Kind::Bits,
            _ => false,
        }
    }

    fn allows(&self, op: &Op) -> bool {
        match (self, op) {
            (Kind::Array(_), Op::Rank(..) | Op::Select(..)) => false,
            (Kind::Seq(_), Op::Write(..)) => false,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos {
    At(usize),
    Uniform,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pos::At(p) => write!(f, "{p}"),
            Pos::Uniform => write!(f, "U"),
        }
    }
}

/// One operation. For arrays `Access` reads a cell; for sequences the
/// value of `Rank`/`Select` is the symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Access(Pos),
    Rank(u64, Pos),
    Select(u64, Pos),
    Insert(Pos, u64),
    Delete(Pos),
    Write(Pos, u64),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Access(i) => write!(f, "A {i}"),
            Op::Rank(b, i) => write!(f, "R {b} {i}"),
            Op::Select(b, j) => write!(f, "S {b} {j}"),
            Op::Insert(i, v) => write!(f, "I {i} {v}"),
            Op::Delete(i) => write!(f, "D {i}"),
            Op::Write(i, v) => write!(f, "W {i} {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    /// 1-based line number in the source text.
    pub line: usize,
    pub op: Op,
    pub expected: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub kind: Kind,
    pub n0: usize,
    pub seed: u64,
    pub ops: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

impl Trace {
    pub fn header(&self) -> String {
        format!("trace {} n0={} seed={}", self.kind, self.n0, self.seed)
    }

    pub fn parse(text: &str) -> Result<Trace, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "empty trace"))?;
        let (kind, n0, seed) = parse_header(header).map_err(|m| err(hl, m))?;
        let mut ops = Vec::new();
        for (line, text) in lines {
            let (body, expected) = match text.split_once('=') {
                Some((b, e)) => (b.trim(), Some(e.trim().to_string())),
                None => (text, None),
            };
            if expected.as_deref() == Some("") {
                return Err(err(line, "empty expected answer"));
            }
            let op = parse_op(body).map_err(|m| err(line, m))?;
            if !kind.allows(&op) {
                return Err(err(line, format!("operation {op} not supported for {kind}")));
            }
            let value = match op {
                Op::Rank(v, _) | Op::Select(v, _) | Op::Insert(_, v) | Op::Write(_, v) => Some(v),
                _ => None,
            };
            if let Some(v) = value {
                if !kind.value_ok(v) {
                    return Err(err(line, format!("value {v} invalid for {kind}")));
                }
            }
            ops.push(Line { line, op, expected });
        }
        Ok(Trace { kind, n0, seed, ops })
    }
}

fn parse_header(h: &str) -> Result<(Kind, usize, u64), String> {
    let mut it = h.split_whitespace();
    if it.next() != Some("trace") {
        return Err("header must start with `trace`".into());
    }
    let kind: Kind = it.next().ok_or("header lacks a kind")?.parse()?;
    let (mut n0, mut seed) = (None, None);
    for field in it {
        match field.split_once('=') {
            Some(("n0", v)) => n0 = Some(v.parse().map_err(|_| format!("bad n0 {v:?}"))?),
            Some(("seed", v)) => seed = Some(v.parse().map_err(|_| format!("bad seed {v:?}"))?),
            _ => return Err(format!("unknown header field {field:?}")),
        }
    }
    Ok((kind, n0.ok_or("header lacks n0")?, seed.ok_or("header lacks seed")?))
}

fn parse_op(s: &str) -> Result<Op, String> {
    let t: Vec<&str> = s.split_whitespace().collect();
    let pos = |x: &str| -> Result<Pos, String> {
        if x == "U" {
            Ok(Pos::Uniform)
        } else {
            x.parse().map(Pos::At).map_err(|_| format!("bad position {x:?}"))
        }
    };
    let val = |x: &str| -> Result<u64, String> { x.parse().map_err(|_| format!("bad value {x:?}")) };
    match t.as_slice() {
        ["A", i] => Ok(Op::Access(pos(i)?)),
        ["R", b, i] => Ok(Op::Rank(val(b)?, pos(i)?)),
        ["S", b, j] => Ok(Op::Select(val(b)?, pos(j)?)),
        ["I", i, v] => Ok(Op::Insert(pos(i)?, val(v)?)),
        ["D", i] => Ok(Op::Delete(pos(i)?)),
        ["W", i, v] => Ok(Op::Write(pos(i)?, val(v)?)),
        _ => Err(format!("cannot parse operation {s:?}")),
    }
}
