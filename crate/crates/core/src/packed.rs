//! Fixed-width unit storage packed into 64-bit chunks.
//!
//! A [`PackedVec`] always owns exactly `⌈len·width / 64⌉` chunks; every
//! mutation that changes the chunk count reallocates to the exact size.
//! Bits above the logical end are kept zero.

use std::fmt;

pub const WORD_BITS: usize = 64;

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Reads `n ≤ 64` bits starting at bit `pos`.
#[inline]
pub fn read_bits(words: &[u64], pos: usize, n: u32) -> u64 {
    if n == 0 {
        return 0;
    }
    let w = pos / WORD_BITS;
    let off = (pos % WORD_BITS) as u32;
    let lo = words[w] >> off;
    let v = if off + n > 64 {
        lo | (words[w + 1] << (64 - off))
    } else {
        lo
    };
    v & low_mask(n)
}

/// Overwrites `n ≤ 64` bits starting at bit `pos` with the low bits of `v`.
#[inline]
pub fn write_bits(words: &mut [u64], pos: usize, n: u32, v: u64) {
    if n == 0 {
        return;
    }
    let v = v & low_mask(n);
    let w = pos / WORD_BITS;
    let off = (pos % WORD_BITS) as u32;
    let m = low_mask(n) << off;
    words[w] = (words[w] & !m) | (v << off);
    if off + n > 64 {
        let spill = off + n - 64;
        let m = low_mask(spill);
        words[w + 1] = (words[w + 1] & !m) | (v >> (64 - off));
    }
}

// Moves every bit at position >= from up by k (1 ≤ k ≤ 64). The vacated
// positions [from, from+k) become zero; bits shifted past the end are lost.
fn shift_up(words: &mut [u64], from: usize, k: u32) {
    debug_assert!((1..=64).contains(&k));
    let wf = from / WORD_BITS;
    if wf >= words.len() {
        return;
    }
    let keep = low_mask((from % WORD_BITS) as u32);
    let saved = words[wf] & keep;
    words[wf] &= !keep;
    for j in (wf + 1..words.len()).rev() {
        let pair = ((words[j] as u128) << 64) | words[j - 1] as u128;
        words[j] = (pair >> (64 - k)) as u64;
    }
    words[wf] = if k == 64 { 0 } else { words[wf] << k };
    words[wf] |= saved;
}

// Moves every bit at position >= from + k down by k, overwriting [from, from+k).
fn shift_down(words: &mut [u64], from: usize, k: u32) {
    debug_assert!((1..=64).contains(&k));
    let wf = from / WORD_BITS;
    if wf >= words.len() {
        return;
    }
    let keep = low_mask((from % WORD_BITS) as u32);
    let saved = words[wf] & keep;
    let last = words.len() - 1;
    for j in wf..last {
        let pair = ((words[j + 1] as u128) << 64) | words[j] as u128;
        words[j] = (pair >> k) as u64;
    }
    words[last] = if k == 64 { 0 } else { words[last] >> k };
    words[wf] = (words[wf] & !keep) | saved;
}

/// A sequence of `width`-bit unsigned units (1 ≤ width ≤ 64).
#[derive(Clone, PartialEq, Eq)]
pub struct PackedVec {
    words: Box<[u64]>,
    len: usize,
    width: u32,
}

impl PackedVec {
    pub fn new(width: u32) -> PackedVec {
        assert!((1..=64).contains(&width), "unit width must be in 1..=64");
        PackedVec {
            words: Box::new([]),
            len: 0,
            width,
        }
    }

    /// Wraps raw chunks holding `len` units. Bits past the end are cleared
    /// and surplus chunks dropped.
    pub fn from_words(mut words: Vec<u64>, len: usize, width: u32) -> PackedVec {
        assert!((1..=64).contains(&width), "unit width must be in 1..=64");
        let bits = len * width as usize;
        assert!(words.len() * WORD_BITS >= bits, "not enough chunks for {len} units");
        words.truncate(words_for(bits));
        if bits % WORD_BITS != 0 {
            let last = words.len() - 1;
            words[last] &= low_mask((bits % WORD_BITS) as u32);
        }
        PackedVec {
            words: words.into_boxed_slice(),
            len,
            width,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> PackedVec {
        let mut b = PackedBuilder::new(1);
        for bit in bits {
            b.push(bit as u64);
        }
        b.finish()
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(width: u32, values: I) -> PackedVec {
        let mut b = PackedBuilder::new(width);
        for v in values {
            b.push(v);
        }
        b.finish()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn bit_len(&self) -> usize {
        self.len * self.width as usize
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of 64-bit chunks currently allocated.
    #[inline]
    pub fn storage_words(&self) -> usize {
        self.words.len()
    }

    /// Whether the allocation is exactly `⌈bits / 64⌉` chunks.
    pub fn storage_is_exact(&self) -> bool {
        self.words.len() == words_for(self.bit_len())
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len, "index {i} out of bounds ({})", self.len);
        read_bits(&self.words, i * self.width as usize, self.width)
    }

    /// Overwrites unit `i`, returning the previous value.
    #[inline]
    pub fn set(&mut self, i: usize, v: u64) -> u64 {
        debug_assert!(i < self.len);
        let pos = i * self.width as usize;
        let old = read_bits(&self.words, pos, self.width);
        write_bits(&mut self.words, pos, self.width, v);
        old
    }

    fn resize_words(&mut self, bits: usize) {
        let want = words_for(bits);
        if want != self.words.len() {
            let mut v = std::mem::take(&mut self.words).into_vec();
            v.resize(want, 0);
            self.words = v.into_boxed_slice();
        }
    }

    /// Inserts `v` so that it becomes unit `i`, shifting later units up.
    pub fn insert(&mut self, i: usize, v: u64) {
        assert!(i <= self.len, "insert index {i} out of bounds ({})", self.len);
        let w = self.width;
        self.resize_words(self.bit_len() + w as usize);
        shift_up(&mut self.words, i * w as usize, w);
        write_bits(&mut self.words, i * w as usize, w, v);
        self.len += 1;
    }

    /// Removes and returns unit `i`.
    pub fn remove(&mut self, i: usize) -> u64 {
        assert!(i < self.len, "remove index {i} out of bounds ({})", self.len);
        let w = self.width;
        let old = self.get(i);
        shift_down(&mut self.words, i * w as usize, w);
        self.len -= 1;
        self.resize_words(self.bit_len());
        old
    }

    pub fn push(&mut self, v: u64) {
        self.insert(self.len, v);
    }

    /// Copies units `start..start + count` into a new vector.
    pub fn slice(&self, start: usize, count: usize) -> PackedVec {
        assert!(start + count <= self.len);
        let mut b = PackedBuilder::with_capacity(self.width, count);
        b.extend_from(self, start, count);
        b.finish()
    }

    /// Splits off units `at..`, leaving `..at` in place.
    pub fn split_off(&mut self, at: usize) -> PackedVec {
        let tail = self.slice(at, self.len - at);
        self.truncate(at);
        tail
    }

    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        let bits = len * self.width as usize;
        self.len = len;
        self.resize_words(bits);
        if bits % WORD_BITS != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= low_mask((bits % WORD_BITS) as u32);
        }
    }

    /// Appends all units of `other`, which must have the same width.
    pub fn append(&mut self, other: &PackedVec) {
        assert_eq!(self.width, other.width);
        let me = std::mem::replace(self, PackedVec::new(other.width));
        let mut b = PackedBuilder::from_vec(me, other.len);
        b.extend_from(other, 0, other.len);
        *self = b.finish();
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Total set bits across the payload (all units).
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for PackedVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 1 {
            let s: String = self.iter().map(|b| if b == 1 { '1' } else { '0' }).collect();
            write!(f, "PackedVec[{}]", s)
        } else {
            f.debug_list().entries(self.iter()).finish()
        }
    }
}

/// Append-only builder used for concatenating leaves.
#[derive(Debug)]
pub struct PackedBuilder {
    words: Vec<u64>,
    bits: usize,
    width: u32,
}

impl PackedBuilder {
    pub fn new(width: u32) -> PackedBuilder {
        PackedBuilder::with_capacity(width, 0)
    }

    pub fn with_capacity(width: u32, units: usize) -> PackedBuilder {
        assert!((1..=64).contains(&width), "unit width must be in 1..=64");
        PackedBuilder {
            words: Vec::with_capacity(words_for(units * width as usize)),
            bits: 0,
            width,
        }
    }

    fn from_vec(v: PackedVec, extra_units: usize) -> PackedBuilder {
        let bits = v.bit_len();
        let mut words = v.words.into_vec();
        words.reserve(words_for(bits + extra_units * v.width as usize) - words.len());
        PackedBuilder {
            words,
            bits,
            width: v.width,
        }
    }

    #[inline]
    fn push_bits(&mut self, v: u64, n: u32) {
        if n == 0 {
            return;
        }
        let off = (self.bits % WORD_BITS) as u32;
        if off == 0 {
            self.words.push(v);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= v << off;
            if off + n > 64 {
                self.words.push(v >> (64 - off));
            }
        }
        self.bits += n as usize;
    }

    #[inline]
    pub fn push(&mut self, v: u64) {
        self.push_bits(v & low_mask(self.width), self.width);
    }

    /// Appends units `start..start + count` of `src`.
    pub fn extend_from(&mut self, src: &PackedVec, start: usize, count: usize) {
        assert_eq!(src.width, self.width);
        let mut pos = start * self.width as usize;
        let mut left = count * self.width as usize;
        while left > 0 {
            let n = left.min(64) as u32;
            self.push_bits(read_bits(&src.words, pos, n), n);
            pos += n as usize;
            left -= n as usize;
        }
    }

    pub fn len(&self) -> usize {
        self.bits / self.width as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn finish(self) -> PackedVec {
        let len = self.bits / self.width as usize;
        PackedVec::from_words(self.words, len, self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_remove_bits() {
        let mut v = PackedVec::from_bits([true, false, true]);
        v.insert(1, 0);
        assert_eq!(format!("{v:?}"), "PackedVec[1001]");
        assert_eq!(v.remove(1), 0);
        assert_eq!(format!("{v:?}"), "PackedVec[101]");
        let mut e = PackedVec::new(1);
        e.insert(0, 1);
        assert_eq!(e.len(), 1);
        assert!(e.storage_is_exact());
    }

    #[test]
    fn full_width_cells() {
        let mut v = PackedVec::from_values(64, [u64::MAX, 3, 7]);
        v.insert(1, 42);
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![u64::MAX, 42, 3, 7]);
        assert_eq!(v.remove(0), u64::MAX);
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![42, 3, 7]);
        assert_eq!(v.storage_words(), 3);
    }

    #[test]
    fn chunk_boundary_growth() {
        let mut v = PackedVec::new(1);
        for i in 0..200 {
            v.insert(i / 2, (i % 3 == 0) as u64);
            assert!(v.storage_is_exact());
        }
        while !v.is_empty() {
            v.remove(v.len() / 3);
            assert!(v.storage_is_exact());
        }
        assert_eq!(v.storage_words(), 0);
    }

    fn model_op(width: u32) -> impl Strategy<Value = Vec<(u8, usize, u64)>> {
        let max = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        prop::collection::vec((0u8..4, any::<usize>(), 0..=max), 0..300)
    }

    proptest! {
        #[test]
        fn matches_vec_model(width in prop::sample::select(vec![1u32, 3, 8, 31, 64]),
                             ops in model_op(64)) {
            let mask = low_mask(width);
            let mut v = PackedVec::new(width);
            let mut model: Vec<u64> = Vec::new();
            for (kind, pos, val) in ops {
                let val = val & mask;
                match kind {
                    0 | 1 => {
                        let i = pos % (model.len() + 1);
                        v.insert(i, val);
                        model.insert(i, val);
                    }
                    2 if !model.is_empty() => {
                        let i = pos % model.len();
                        prop_assert_eq!(v.remove(i), model.remove(i));
                    }
                    3 if !model.is_empty() => {
                        let i = pos % model.len();
                        prop_assert_eq!(v.set(i, val), model[i]);
                        model[i] = val;
                    }
                    _ => {}
                }
                prop_assert!(v.storage_is_exact());
            }
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), model.clone());
            if !model.is_empty() {
                let at = model.len() / 2;
                let mut head = v.clone();
                let tail = head.split_off(at);
                prop_assert_eq!(head.iter().collect::<Vec<_>>(), model[..at].to_vec());
                prop_assert_eq!(tail.iter().collect::<Vec<_>>(), model[at..].to_vec());
                head.append(&tail);
                prop_assert_eq!(head, v);
            }
        }
    }
}
