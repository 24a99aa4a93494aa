//! Random trace generation at a target query:update ratio.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trace::{Kind, Op, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub kind: Kind,
    pub n0: usize,
    pub ops: usize,
    /// One update per `q` operations in expectation.
    pub q: u64,
    pub seed: u64,
}

/// Random value for `kind`: a bit, a cell of the kind's width or a symbol.
pub fn random_value(rng: &mut ChaCha8Rng, kind: Kind) -> u64 {
    match kind {
        Kind::Bits => rng.gen_range(0..2),
        Kind::Array(64) => rng.gen(),
        Kind::Array(w) => rng.gen_range(0..1u64 << w),
        Kind::Seq(s) => rng.gen_range(1..=s),
    }
}

/// Generator stream for `seed`; replay uses stream 0 of the same seed.
pub fn generator_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Each operation is an update with probability `1/q`. Updates are drawn
/// uniformly among the kind's update operations, queries among its query
/// operations. Deletes and other position-bound operations are replaced by
/// inserts while the structure is empty. All positions are `U`.
pub fn generate_ops(cfg: &GenConfig) -> Vec<Op> {
    assert!(cfg.q >= 1);
    let mut rng = generator_rng(cfg.seed);
    let mut n = cfg.n0;
    let mut out = Vec::with_capacity(cfg.ops);
    let u = Pos::Uniform;
    for _ in 0..cfg.ops {
        let update = rng.gen_range(0..cfg.q) == 0;
        let v = random_value(&mut rng, cfg.kind);
        let op = match (cfg.kind, update) {
            (Kind::Bits, true) => match rng.gen_range(0..3) {
                0 => Op::Insert(u, v),
                1 => Op::Delete(u),
                _ => Op::Write(u, v),
            },
            (_, true) => match rng.gen_range(0..2) {
                0 => Op::Insert(u, v),
                _ => Op::Delete(u),
            },
            (Kind::Array(_), false) => match rng.gen_range(0..2) {
                0 => Op::Access(u),
                _ => Op::Write(u, v),
            },
            (_, false) => match rng.gen_range(0..3) {
                0 => Op::Access(u),
                1 => Op::Rank(v, u),
                _ => Op::Select(v, u),
            },
        };
        let op = match op {
            Op::Delete(_) | Op::Write(..) | Op::Access(_) if n == 0 => match (cfg.kind, update) {
                (Kind::Array(_), _) | (_, true) => Op::Insert(u, v),
                _ => Op::Rank(v, u),
            },
            op => op,
        };
        match op {
            Op::Insert(..) => n += 1,
            Op::Delete(_) => n -= 1,
            _ => {}
        }
        out.push(op);
    }
    out
}

/// The full trace text.
pub fn generate(cfg: &GenConfig) -> String {
    let ops = generate_ops(cfg);
    let mut s = String::with_capacity(ops.len() * 8 + 64);
    writeln!(s, "trace {} n0={} seed={}", cfg.kind, cfg.n0, cfg.seed).unwrap();
    writeln!(s, "# ops={} q={}", cfg.ops, cfg.q).unwrap();
    for op in ops {
        writeln!(s, "{op}").unwrap();
    }
    s
}
