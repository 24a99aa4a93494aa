//! Naive reference structures: flat vectors with linear-scan queries.
//!
//! They expose the same 1-based contract as the adaptive structures and are
//! the ground truth for tests and for the harness's verification mode.

use crate::error::{check_index, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NaiveBits {
    bits: Vec<bool>,
}

impl NaiveBits {
    pub fn new() -> NaiveBits {
        NaiveBits::default()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> NaiveBits {
        NaiveBits {
            bits: bits.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn access(&self, i: usize) -> Result<bool> {
        check_index(i, 1, self.len())?;
        Ok(self.bits[i - 1])
    }

    pub fn rank(&self, bit: bool, i: usize) -> Result<usize> {
        check_index(i, 0, self.len())?;
        Ok(self.bits[..i].iter().filter(|&&b| b == bit).count())
    }

    pub fn select(&self, bit: bool, j: usize) -> Result<Option<usize>> {
        check_index(j, 1, usize::MAX)?;
        Ok(self
            .bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == bit)
            .nth(j - 1)
            .map(|(p, _)| p + 1))
    }

    pub fn insert(&mut self, i: usize, bit: bool) -> Result<()> {
        check_index(i, 1, self.len() + 1)?;
        self.bits.insert(i - 1, bit);
        Ok(())
    }

    pub fn delete(&mut self, i: usize) -> Result<bool> {
        check_index(i, 1, self.len())?;
        Ok(self.bits.remove(i - 1))
    }

    pub fn write(&mut self, i: usize, bit: bool) -> Result<bool> {
        check_index(i, 1, self.len())?;
        Ok(std::mem::replace(&mut self.bits[i - 1], bit))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveCells {
    width: u32,
    cells: Vec<u64>,
}

impl NaiveCells {
    pub fn new(width: u32) -> Result<NaiveCells> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        Ok(NaiveCells { width, cells: Vec::new() })
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(width: u32, values: I) -> Result<NaiveCells> {
        let mut c = NaiveCells::new(width)?;
        for v in values {
            c.check_value(v)?;
            c.cells.push(v);
        }
        Ok(c)
    }

    fn check_value(&self, v: u64) -> Result<()> {
        if self.width < 64 && v >> self.width != 0 {
            return Err(Error::ValueTooWide { value: v, width: self.width });
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.cells
    }

    pub fn read(&self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        Ok(self.cells[i - 1])
    }

    pub fn write(&mut self, i: usize, v: u64) -> Result<u64> {
        check_index(i, 1, self.len())?;
        self.check_value(v)?;
        Ok(std::mem::replace(&mut self.cells[i - 1], v))
    }

    pub fn insert(&mut self, i: usize, v: u64) -> Result<()> {
        check_index(i, 1, self.len() + 1)?;
        self.check_value(v)?;
        self.cells.insert(i - 1, v);
        Ok(())
    }

    pub fn delete(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        Ok(self.cells.remove(i - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveSeq {
    sigma: u64,
    syms: Vec<u64>,
}

impl NaiveSeq {
    pub fn new(sigma: u64) -> Result<NaiveSeq> {
        if sigma < 2 {
            return Err(Error::InvalidAlphabet(sigma));
        }
        Ok(NaiveSeq { sigma, syms: Vec::new() })
    }

    pub fn from_symbols<I: IntoIterator<Item = u64>>(sigma: u64, syms: I) -> Result<NaiveSeq> {
        let mut s = NaiveSeq::new(sigma)?;
        for c in syms {
            s.check_symbol(c)?;
            s.syms.push(c);
        }
        Ok(s)
    }

    fn check_symbol(&self, c: u64) -> Result<()> {
        if c == 0 || c > self.sigma {
            return Err(Error::SymbolOutOfRange { symbol: c, sigma: self.sigma });
        }
        Ok(())
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.syms
    }

    pub fn access(&self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        Ok(self.syms[i - 1])
    }

    pub fn rank(&self, c: u64, i: usize) -> Result<usize> {
        self.check_symbol(c)?;
        check_index(i, 0, self.len())?;
        Ok(self.syms[..i].iter().filter(|&&s| s == c).count())
    }

    pub fn select(&self, c: u64, j: usize) -> Result<Option<usize>> {
        self.check_symbol(c)?;
        check_index(j, 1, usize::MAX)?;
        Ok(self
            .syms
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == c)
            .nth(j - 1)
            .map(|(p, _)| p + 1))
    }

    pub fn insert(&mut self, i: usize, c: u64) -> Result<()> {
        check_index(i, 1, self.len() + 1)?;
        self.check_symbol(c)?;
        self.syms.insert(i - 1, c);
        Ok(())
    }

    pub fn delete(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        Ok(self.syms.remove(i - 1))
    }
}
