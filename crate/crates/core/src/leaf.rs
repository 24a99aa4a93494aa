//! Bit leaves: a small mutable [`DynamicLeaf`] answered by chunk scanning,
//! and an immutable [`StaticLeaf`] of any length with a rank directory and
//! sampled select.
//!
//! Positions are 0-based; `rank1(i)` counts the ones in `[0, i)` and
//! `select(bit, j)` returns the position of the `j`-th (1-based) occurrence.

use crate::packed::{PackedVec, WORD_BITS};

/// Position (0-based) of the `r`-th (0-based) set bit of `w`.
#[inline]
pub fn select_in_word(mut w: u64, mut r: u32) -> u32 {
    debug_assert!(r < w.count_ones());
    let mut shift = 0;
    loop {
        let c = (w & 0xff).count_ones();
        if r < c {
            break;
        }
        r -= c;
        w >>= 8;
        shift += 8;
    }
    for _ in 0..r {
        w &= w - 1;
    }
    shift + w.trailing_zeros()
}

#[inline]
fn prefix_mask(bits: usize) -> u64 {
    if bits == 0 {
        0
    } else {
        u64::MAX >> (64 - bits)
    }
}

fn rank1_words(words: &[u64], i: usize) -> usize {
    let full = i / WORD_BITS;
    let mut r: usize = words[..full].iter().map(|w| w.count_ones() as usize).sum();
    let rem = i % WORD_BITS;
    if rem > 0 {
        r += (words[full] & prefix_mask(rem)).count_ones() as usize;
    }
    r
}

fn select_words(words: &[u64], len: usize, bit: bool, mut j: usize) -> Option<usize> {
    if j == 0 {
        return None;
    }
    for (k, &w) in words.iter().enumerate() {
        let valid = (len - k * WORD_BITS).min(WORD_BITS);
        let w = if bit { w } else { !w } & prefix_mask(valid);
        let c = w.count_ones() as usize;
        if j <= c {
            return Some(k * WORD_BITS + select_in_word(w, (j - 1) as u32) as usize);
        }
        j -= c;
    }
    None
}

/// A mutable leaf of at most `b` bits, stored in exactly `⌈len/64⌉` chunks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DynamicLeaf {
    bits: PackedVec,
}

impl Default for DynamicLeaf {
    fn default() -> Self {
        DynamicLeaf::new()
    }
}

impl DynamicLeaf {
    pub fn new() -> DynamicLeaf {
        DynamicLeaf {
            bits: PackedVec::new(1),
        }
    }

    pub fn from_packed(bits: PackedVec) -> DynamicLeaf {
        assert_eq!(bits.width(), 1);
        DynamicLeaf { bits }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> DynamicLeaf {
        DynamicLeaf::from_packed(PackedVec::from_bits(bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn packed(&self) -> &PackedVec {
        &self.bits
    }

    pub fn packed_mut(&mut self) -> &mut PackedVec {
        &mut self.bits
    }

    pub fn into_packed(self) -> PackedVec {
        self.bits
    }

    #[inline]
    pub fn access(&self, i: usize) -> bool {
        self.bits.get(i) == 1
    }

    pub fn rank1(&self, i: usize) -> usize {
        debug_assert!(i <= self.len());
        rank1_words(self.bits.words(), i)
    }

    pub fn ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn select(&self, bit: bool, j: usize) -> Option<usize> {
        select_words(self.bits.words(), self.len(), bit, j)
    }

    pub fn insert(&mut self, i: usize, bit: bool) {
        self.bits.insert(i, bit as u64);
    }

    pub fn delete(&mut self, i: usize) -> bool {
        self.bits.remove(i) == 1
    }

    pub fn write(&mut self, i: usize, bit: bool) -> bool {
        self.bits.set(i, bit as u64) == 1
    }
}

const SUPERBLOCK: usize = 512;
const BLOCKS_PER_SUPER: usize = SUPERBLOCK / WORD_BITS;
const SELECT_STEP: usize = 512;

/// An immutable bit leaf with constant-work rank and sampled select.
///
/// The rank directory stores, per 512-bit superblock, the absolute number of
/// ones before it plus seven 9-bit counts relative to the superblock start
/// (one per remaining 64-bit block). Select keeps the position of every
/// 512th one and zero and binary-searches superblocks between samples.
#[derive(Clone, Debug)]
pub struct StaticLeaf {
    bits: PackedVec,
    ones: usize,
    // two words per superblock, plus a trailing sentinel superblock
    directory: Box<[u64]>,
    select1_samples: Box<[u32]>,
    select0_samples: Box<[u32]>,
}

impl StaticLeaf {
    pub fn build(bits: PackedVec) -> StaticLeaf {
        assert_eq!(bits.width(), 1);
        let words = bits.words();
        let supers = words.len() / BLOCKS_PER_SUPER + 1;
        let mut directory = Vec::with_capacity(2 * supers);
        let mut select1 = Vec::new();
        let mut select0 = Vec::new();
        let mut ones = 0usize;
        let mut zeros = 0usize;
        for s in 0..supers {
            directory.push(ones as u64);
            let mut rel = 0u64;
            let mut in_super = 0usize;
            for blk in 0..BLOCKS_PER_SUPER {
                let k = s * BLOCKS_PER_SUPER + blk;
                if blk > 0 {
                    rel |= (in_super as u64) << (9 * (blk - 1));
                }
                let Some(&w) = words.get(k) else { continue };
                let valid = (bits.len() - k * WORD_BITS).min(WORD_BITS);
                let c1 = w.count_ones() as usize;
                let c0 = valid - c1;
                // record samples whose occurrence index falls in this word
                let next1 = (ones + in_super).div_ceil(SELECT_STEP) * SELECT_STEP;
                if next1 < ones + in_super + c1 {
                    let r = (next1 - ones - in_super) as u32;
                    select1.push((k * WORD_BITS) as u32 + select_in_word(w, r));
                }
                let z_before = zeros + (blk * WORD_BITS).min(bits.len() - s * SUPERBLOCK) - in_super;
                let next0 = z_before.div_ceil(SELECT_STEP) * SELECT_STEP;
                if next0 < z_before + c0 {
                    let r = (next0 - z_before) as u32;
                    select0.push((k * WORD_BITS) as u32 + select_in_word(!w & prefix_mask(valid), r));
                }
                in_super += c1;
            }
            directory.push(rel);
            let span = bits.len().saturating_sub(s * SUPERBLOCK).min(SUPERBLOCK);
            ones += in_super;
            zeros += span - in_super;
        }
        StaticLeaf {
            bits,
            ones,
            directory: directory.into_boxed_slice(),
            select1_samples: select1.into_boxed_slice(),
            select0_samples: select0.into_boxed_slice(),
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> StaticLeaf {
        StaticLeaf::build(PackedVec::from_bits(bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn packed(&self) -> &PackedVec {
        &self.bits
    }

    pub fn into_packed(self) -> PackedVec {
        self.bits
    }

    #[inline]
    pub fn access(&self, i: usize) -> bool {
        self.bits.get(i) == 1
    }

    #[inline]
    fn super_rank(&self, s: usize) -> usize {
        self.directory[2 * s] as usize
    }

    #[inline]
    fn block_rank(&self, k: usize) -> usize {
        let s = k / BLOCKS_PER_SUPER;
        let blk = k % BLOCKS_PER_SUPER;
        let mut r = self.super_rank(s);
        if blk > 0 {
            r += ((self.directory[2 * s + 1] >> (9 * (blk - 1))) & 0x1ff) as usize;
        }
        r
    }

    pub fn rank1(&self, i: usize) -> usize {
        debug_assert!(i <= self.len());
        let k = i / WORD_BITS;
        let rem = i % WORD_BITS;
        let mut r = self.block_rank(k);
        if rem > 0 {
            r += (self.bits.words()[k] & prefix_mask(rem)).count_ones() as usize;
        }
        r
    }

    // occurrences of `bit` before superblock s
    #[inline]
    fn super_count(&self, bit: bool, s: usize) -> usize {
        let r = self.super_rank(s);
        if bit {
            r
        } else {
            (s * SUPERBLOCK).min(self.len()) - r
        }
    }

    pub fn select(&self, bit: bool, j: usize) -> Option<usize> {
        let total = if bit { self.ones } else { self.len() - self.ones };
        if j == 0 || j > total {
            return None;
        }
        let samples = if bit { &self.select1_samples } else { &self.select0_samples };
        let t = (j - 1) / SELECT_STEP;
        let lo_s = samples[t] as usize / SUPERBLOCK;
        let hi_s = match samples.get(t + 1) {
            Some(&p) => p as usize / SUPERBLOCK,
            None => self.directory.len() / 2 - 1,
        };
        // last superblock in [lo_s, hi_s] with fewer than j occurrences before it
        let (mut lo, mut hi) = (lo_s, hi_s);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.super_count(bit, mid) < j {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let s = lo;
        let mut left = j - self.super_count(bit, s);
        let words = self.bits.words();
        let first = s * BLOCKS_PER_SUPER;
        let last = (first + BLOCKS_PER_SUPER).min(words.len());
        for (k, &raw) in words.iter().enumerate().take(last).skip(first) {
            let valid = (self.len() - k * WORD_BITS).min(WORD_BITS);
            let w = if bit { raw } else { !raw } & prefix_mask(valid);
            let c = w.count_ones() as usize;
            if left <= c {
                return Some(k * WORD_BITS + select_in_word(w, (left - 1) as u32) as usize);
            }
            left -= c;
        }
        unreachable!("select directory inconsistent")
    }

    /// Bits spent on the rank directory and select samples.
    pub fn index_bits(&self) -> usize {
        self.directory.len() * 64 + (self.select1_samples.len() + self.select0_samples.len()) * 32
    }

    /// Cross-checks the cached counts, directory and samples against a scan.
    pub fn check(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !self.bits.storage_is_exact() {
            errs.push("static payload storage not exact".to_string());
        }
        let scan_ones = self.bits.count_ones();
        if scan_ones != self.ones {
            errs.push(format!("cached ones {} != scanned {}", self.ones, scan_ones));
        }
        let words = self.bits.words();
        for k in 0..=words.len() {
            if k * WORD_BITS > self.len() && k > 0 {
                break;
            }
            let expect = rank1_words(words, (k * WORD_BITS).min(self.len()));
            if self.block_rank(k) != expect {
                errs.push(format!("directory entry for block {k} is {} != {expect}", self.block_rank(k)));
                break;
            }
        }
        for (bit, samples) in [(true, &self.select1_samples), (false, &self.select0_samples)] {
            let total = if bit { self.ones } else { self.len() - self.ones };
            if samples.len() != total.div_ceil(SELECT_STEP) {
                errs.push(format!("select{} sample count {} for {total} occurrences", bit as u8, samples.len()));
                continue;
            }
            for (t, &p) in samples.iter().enumerate() {
                let expect = select_words(words, self.len(), bit, t * SELECT_STEP + 1);
                if expect != Some(p as usize) {
                    errs.push(format!("select{} sample {t} = {p}, expected {expect:?}", bit as u8));
                    break;
                }
            }
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parse(s: &str) -> Vec<bool> {
        s.bytes().map(|c| c == b'1').collect()
    }

    // scan oracles over a plain bool slice
    fn o_rank1(b: &[bool], i: usize) -> usize {
        b[..i].iter().filter(|&&x| x).count()
    }
    fn o_select(b: &[bool], bit: bool, j: usize) -> Option<usize> {
        if j == 0 {
            return None;
        }
        b.iter().enumerate().filter(|(_, &x)| x == bit).nth(j - 1).map(|(p, _)| p)
    }

    fn random_bits(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<bool> {
        (0..n).map(|_| rng.gen_bool(density)).collect()
    }

    #[test]
    fn dynamic_examples() {
        let leaf = DynamicLeaf::from_bits(parse("10110"));
        assert!(leaf.access(0));
        assert!(leaf.access(2));
        assert_eq!(leaf.rank1(3), 2);
        assert_eq!(leaf.rank1(0), 0);
        assert_eq!(leaf.select(true, 2), Some(2));
        assert_eq!(leaf.select(false, 1), Some(1));
        assert_eq!(leaf.select(true, 4), None);

        let mut l = DynamicLeaf::from_bits(parse("101"));
        l.insert(1, false);
        assert_eq!(l, DynamicLeaf::from_bits(parse("1001")));
        assert!(!l.delete(1));
        assert_eq!(l, DynamicLeaf::from_bits(parse("101")));
        assert!(l.write(2, false));
        assert_eq!(l, DynamicLeaf::from_bits(parse("100")));

        let mut e = DynamicLeaf::new();
        e.insert(0, true);
        assert_eq!(e, DynamicLeaf::from_bits(parse("1")));
    }

    #[test]
    fn dynamic_random_against_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut model = random_bits(&mut rng, 500, 0.5);
        let mut leaf = DynamicLeaf::from_bits(model.iter().copied());
        assert_eq!(leaf.access(316), model[316]);
        assert_eq!(leaf.rank1(499), o_rank1(&model, 499));
        for j in 1..=leaf.ones() + 1 {
            assert_eq!(leaf.select(true, j), o_select(&model, true, j));
        }
        leaf.insert(249, true);
        model.insert(249, true);
        assert_eq!(leaf.packed().iter().map(|b| b == 1).collect::<Vec<_>>(), model);
        for _ in 0..2000 {
            let i = rng.gen_range(0..=model.len());
            let v = rng.gen_bool(0.5);
            leaf.insert(i, v);
            assert_eq!(leaf.delete(i), v);
            assert!(leaf.packed().storage_is_exact());
        }
        assert_eq!(leaf.packed().iter().map(|b| b == 1).collect::<Vec<_>>(), model);
    }

    #[test]
    fn static_examples() {
        let s = StaticLeaf::from_bits(parse("1111"));
        assert_eq!(s.ones(), 4);
        assert_eq!(s.rank1(4), 4);
        let s = StaticLeaf::from_bits(parse("10110"));
        assert_eq!(s.rank1(3), 2);
        assert_eq!(s.select(false, 1), Some(1));
        assert!(s.check().is_empty());

        let z = StaticLeaf::from_bits(vec![false; 1000]);
        assert_eq!(z.select1_samples.len(), 0);
        for j in 0..=1001 {
            assert_eq!(z.select(true, j), None);
        }
        assert_eq!(z.select(false, 1000), Some(999));
        assert!(z.check().is_empty());
    }

    #[test]
    fn static_large_random_against_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let bits = random_bits(&mut rng, n, 0.5);
        let s = StaticLeaf::from_bits(bits.iter().copied());
        assert!(s.check().is_empty());
        for i in [0, 1, 17, n] {
            assert_eq!(s.rank1(i), o_rank1(&bits, i));
        }
        let mut prefix = vec![0usize; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + bits[i] as usize;
        }
        let ones_pos: Vec<usize> = (0..n).filter(|&i| bits[i]).collect();
        let zeros_pos: Vec<usize> = (0..n).filter(|&i| !bits[i]).collect();
        for _ in 0..1000 {
            let i = rng.gen_range(0..=n);
            assert_eq!(s.rank1(i), prefix[i]);
            let p = rng.gen_range(0..n);
            assert_eq!(s.access(p), bits[p]);
            let j = rng.gen_range(1..=ones_pos.len());
            assert_eq!(s.select(true, j), Some(ones_pos[j - 1]));
            let j = rng.gen_range(1..=zeros_pos.len());
            assert_eq!(s.select(false, j), Some(zeros_pos[j - 1]));
        }
        assert_eq!(s.select(true, ones_pos.len() + 1), None);
    }

    #[test]
    fn static_skewed_densities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for density in [0.001, 0.02, 0.98, 0.999] {
            for n in [1, 63, 64, 65, 511, 512, 513, 4096, 20_000] {
                let bits = random_bits(&mut rng, n, density);
                let s = StaticLeaf::from_bits(bits.iter().copied());
                let d = DynamicLeaf::from_bits(bits.iter().copied());
                assert!(s.check().is_empty(), "n={n} density={density}");
                let ones = s.ones();
                for j in 1..=ones + 1 {
                    assert_eq!(s.select(true, j), d.select(true, j));
                }
                for j in 1..=n - ones + 1 {
                    assert_eq!(s.select(false, j), d.select(false, j));
                }
                for i in 0..=n {
                    assert_eq!(s.rank1(i), d.rank1(i));
                }
            }
        }
    }

    #[test]
    fn exhaustive_small_payloads_static_equals_dynamic() {
        for n in 0..=12usize {
            for mask in 0u32..(1 << n) {
                let bits: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
                let d = DynamicLeaf::from_bits(bits.iter().copied());
                let s = StaticLeaf::from_bits(bits.iter().copied());
                for i in 0..=n {
                    let r = d.rank1(i);
                    assert_eq!(r, s.rank1(i));
                    assert_eq!(r + (i - r), i);
                    if i < n {
                        assert_eq!(d.access(i), s.access(i));
                    }
                }
                assert_eq!(d.rank1(n), s.ones());
                for bit in [false, true] {
                    for j in 0..=n + 1 {
                        let p = d.select(bit, j);
                        assert_eq!(p, s.select(bit, j));
                        if let Some(p) = p {
                            let r = if bit { d.rank1(p + 1) } else { p + 1 - d.rank1(p + 1) };
                            assert_eq!(r, j);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn select_in_word_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let w: u64 = rng.gen();
            let pos: Vec<u32> = (0..64).filter(|&k| w >> k & 1 == 1).collect();
            for (r, &p) in pos.iter().enumerate() {
                assert_eq!(select_in_word(w, r as u32), p);
            }
        }
    }
}
