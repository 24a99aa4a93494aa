//! Dynamic wavelet matrix over adaptive bitvectors.
//!
//! Symbols `1..=sigma` are stored as `c - 1` in `⌈log₂ sigma⌉` bits, most
//! significant bit on level 0. Within each level the positions whose bit is
//! 0 move to the front of the next level, stably.

use std::collections::HashMap;

use crate::bitvector::AdaptiveBitvector;
use crate::engine::{Event, Violation};
use crate::error::{check_index, Error, Result};
use crate::params::ceil_log2;
use crate::stats::{LifetimeStats, SpaceReport};

/// A dynamic sequence over `1..=sigma` with access, rank and select.
///
/// ```
/// use adaptive_bitvec::AdaptiveWaveletMatrix;
///
/// let mut s = AdaptiveWaveletMatrix::from_symbols(4, [1, 2, 1, 3]).unwrap();
/// assert_eq!(s.rank(1, 3), Ok(2));
/// assert_eq!(s.select(3, 1), Ok(Some(4)));
/// assert_eq!(s.access(2), Ok(2));
/// ```
#[derive(Debug)]
pub struct AdaptiveWaveletMatrix {
    sigma: u64,
    levels: Vec<AdaptiveBitvector>,
    zeros: Vec<usize>,
    len: usize,
    // occurrences per present symbol
    counts: HashMap<u64, usize>,
}

impl AdaptiveWaveletMatrix {
    pub fn new(sigma: u64) -> Result<AdaptiveWaveletMatrix> {
        AdaptiveWaveletMatrix::from_symbols(sigma, [])
    }

    /// Bulk-loads `symbols`, building each level's bitvector in one pass.
    pub fn from_symbols<I: IntoIterator<Item = u64>>(sigma: u64, symbols: I) -> Result<AdaptiveWaveletMatrix> {
        if sigma < 2 {
            return Err(Error::InvalidAlphabet(sigma));
        }
        let depth = ceil_log2_u64(sigma);
        let mut codes = Vec::new();
        let mut counts = HashMap::new();
        for c in symbols {
            check_symbol(c, sigma)?;
            codes.push(c - 1);
            *counts.entry(c).or_insert(0) += 1;
        }
        let len = codes.len();
        let mut levels = Vec::with_capacity(depth as usize);
        let mut zeros = Vec::with_capacity(depth as usize);
        for d in 0..depth {
            let shift = depth - 1 - d;
            levels.push(AdaptiveBitvector::from_bits(codes.iter().map(|&x| (x >> shift) & 1 == 1)));
            let (z, o): (Vec<u64>, Vec<u64>) = codes.iter().partition(|&&x| (x >> shift) & 1 == 0);
            zeros.push(z.len());
            codes = z;
            codes.extend(o);
        }
        Ok(AdaptiveWaveletMatrix {
            sigma,
            levels,
            zeros,
            len,
            counts,
        })
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Occurrences of `c` in the whole sequence, without issuing a query.
    pub fn occurrences(&self, c: u64) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, d: usize) -> &AdaptiveBitvector {
        &self.levels[d]
    }

    fn bit(&self, code: u64, d: usize) -> bool {
        (code >> (self.depth() - 1 - d)) & 1 == 1
    }

    /// One access-with-rank query per level.
    pub fn access(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len)?;
        let mut p = i;
        let mut code = 0u64;
        for d in 0..self.depth() {
            let (bit, r) = self.levels[d].access_with_rank(p)?;
            code = (code << 1) | bit as u64;
            p = if bit { self.zeros[d] + r + 1 } else { r + 1 };
        }
        Ok(code + 1)
    }

    /// Occurrences of `c` in positions `1..=i`.
    pub fn rank(&mut self, c: u64, i: usize) -> Result<usize> {
        check_symbol(c, self.sigma)?;
        check_index(i, 0, self.len)?;
        let (s, e) = self.narrow(c - 1, i)?;
        Ok(e - s)
    }

    // Maps the prefix `[0, i)` through every level and returns the final
    // interval `[s, e)` of positions holding `code`.
    fn narrow(&mut self, code: u64, i: usize) -> Result<(usize, usize)> {
        let (mut s, mut e) = (0, i);
        for d in 0..self.depth() {
            let bit = self.bit(code, d);
            let z = if bit { self.zeros[d] } else { 0 };
            s = z + self.levels[d].rank(bit, s)?;
            e = z + self.levels[d].rank(bit, e)?;
        }
        Ok((s, e))
    }

    /// Position of the `j`-th occurrence of `c`, or `None` past the last.
    pub fn select(&mut self, c: u64, j: usize) -> Result<Option<usize>> {
        check_symbol(c, self.sigma)?;
        check_index(j, 1, usize::MAX)?;
        let code = c - 1;
        let (s, e) = self.narrow(code, self.len)?;
        if j > e - s {
            return Ok(None);
        }
        let mut p = s + j;
        for d in (0..self.depth()).rev() {
            let bit = self.bit(code, d);
            let local = if bit { p - self.zeros[d] } else { p };
            p = self.levels[d].select(bit, local)?.expect("occurrence exists on every level");
        }
        Ok(Some(p))
    }

    /// One insert per level.
    pub fn insert(&mut self, i: usize, c: u64) -> Result<()> {
        check_index(i, 1, self.len + 1)?;
        check_symbol(c, self.sigma)?;
        let code = c - 1;
        let mut p = i;
        for d in 0..self.depth() {
            let bit = self.bit(code, d);
            let r = self.levels[d].insert_with_rank(p, bit)?;
            if bit {
                p = self.zeros[d] + r + 1;
            } else {
                self.zeros[d] += 1;
                p = r + 1;
            }
        }
        self.len += 1;
        *self.counts.entry(c).or_insert(0) += 1;
        Ok(())
    }

    /// One delete per level; returns the removed symbol.
    pub fn delete(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len)?;
        let mut p = i;
        let mut code = 0u64;
        for d in 0..self.depth() {
            let (bit, r) = self.levels[d].delete_with_rank(p)?;
            code = (code << 1) | bit as u64;
            if bit {
                p = self.zeros[d] + r + 1;
            } else {
                self.zeros[d] -= 1;
                p = r + 1;
            }
        }
        self.len -= 1;
        let c = code + 1;
        match self.counts.get_mut(&c) {
            Some(k) if *k > 1 => *k -= 1,
            _ => {
                self.counts.remove(&c);
            }
        }
        Ok(c)
    }

    /// Decodes the whole sequence from level snapshots, without queries.
    pub fn to_vec(&self) -> Vec<u64> {
        let bits: Vec<Vec<bool>> = self.levels.iter().map(|l| l.to_bits()).collect();
        // prefix ones per level, so decoding needs no tree descents
        let ones: Vec<Vec<usize>> = bits
            .iter()
            .map(|b| {
                let mut acc = Vec::with_capacity(b.len() + 1);
                acc.push(0);
                for &x in b {
                    acc.push(acc.last().unwrap() + x as usize);
                }
                acc
            })
            .collect();
        (0..self.len)
            .map(|i| {
                let mut p = i;
                let mut code = 0u64;
                for d in 0..self.depth() {
                    let bit = bits[d][p];
                    code = (code << 1) | bit as u64;
                    p = if bit { self.zeros[d] + ones[d][p] } else { p - ones[d][p] };
                }
                code + 1
            })
            .collect()
    }

    pub fn stats(&self) -> LifetimeStats {
        self.levels.iter().fold(LifetimeStats::default(), |acc, l| acc.merged(&l.stats()))
    }

    pub fn space_report(&self) -> SpaceReport {
        self.levels.iter().fold(SpaceReport::default(), |acc, l| acc.merged(&l.space_report()))
    }

    /// Violations of every level plus the cross-level invariants.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (d, l) in self.levels.iter().enumerate() {
            for mut v in l.check() {
                v.message = format!("level {d}: {}", v.message);
                out.push(v);
            }
            if l.len() != self.len {
                out.push(level_violation(d, format!("length {} != sequence length {}", l.len(), self.len)));
            }
            let z = l.len() - l.count_ones();
            if z != self.zeros[d] {
                out.push(level_violation(d, format!("cached zeros {} != actual {z}", self.zeros[d])));
            }
        }
        if out.is_empty() {
            let seq = self.to_vec();
            if let Some(p) = seq.iter().position(|&c| c > self.sigma) {
                out.push(level_violation(0, format!("position {} decodes past the alphabet", p + 1)));
            }
            let mut actual: HashMap<u64, usize> = HashMap::new();
            for c in seq {
                *actual.entry(c).or_insert(0) += 1;
            }
            if actual != self.counts {
                out.push(Violation {
                    path: vec![],
                    message: "cached symbol counts differ from the decoded sequence".to_string(),
                });
            }
        }
        out
    }

    pub fn set_event_log(&mut self, on: bool) {
        for l in &mut self.levels {
            l.set_event_log(on);
        }
    }

    /// Drains the event logs of all levels, tagging each event with its level.
    pub fn take_events(&mut self) -> Vec<(usize, Event)> {
        let mut out = Vec::new();
        for (d, l) in self.levels.iter_mut().enumerate() {
            out.extend(l.take_events().into_iter().map(|e| (d, e)));
        }
        out
    }
}

fn level_violation(d: usize, message: String) -> Violation {
    Violation {
        path: vec![],
        message: format!("level {d}: {message}"),
    }
}

fn check_symbol(c: u64, sigma: u64) -> Result<()> {
    if c == 0 || c > sigma {
        Err(Error::SymbolOutOfRange { symbol: c, sigma })
    } else {
        Ok(())
    }
}

fn ceil_log2_u64(x: u64) -> u32 {
    match usize::try_from(x) {
        Ok(v) => ceil_log2(v),
        Err(_) => 64 - (x - 1).leading_zeros(),
    }
}
