//! The public adaptive bitvector: 1-based positions, bounds checking,
//! global rebuilds and statistics on top of the engine.

use crate::engine::{Bits, Event, Tree, TreeConfig, UpdateKind, Violation};
use crate::error::{check_index, Result};
use crate::packed::PackedVec;
use crate::params::{ceil_log2, rebuild_due, Params};
use crate::stats::{LifetimeStats, SpaceReport};

pub(crate) fn tree_config(p: &Params) -> TreeConfig {
    TreeConfig {
        arity: p.a,
        leaf_cap: p.b,
        flatten_cap: p.flatten_cap,
    }
}

pub(crate) fn current_log_n(n: usize) -> u32 {
    ceil_log2(n.max(16))
}

/// A dynamic bitvector whose query-hot regions become static.
///
/// Every operation, queries included, needs `&mut self`: queries bump
/// counters and may restructure the tree.
///
/// ```
/// use adaptive_bitvec::AdaptiveBitvector;
///
/// let mut bv = AdaptiveBitvector::from_bits([true, false, true, true, false]);
/// assert_eq!(bv.rank(true, 5), Ok(3));
/// assert_eq!(bv.select(false, 2), Ok(Some(5)));
/// assert_eq!(bv.select(true, 4), Ok(None));
/// ```
#[derive(Debug)]
pub struct AdaptiveBitvector {
    tree: Tree<Bits>,
    params: Params,
    queries: u64,
    updates: u64,
    rebuilds: u64,
}

impl Default for AdaptiveBitvector {
    fn default() -> Self {
        AdaptiveBitvector::new()
    }
}

impl AdaptiveBitvector {
    pub fn new() -> AdaptiveBitvector {
        AdaptiveBitvector::from_packed(PackedVec::new(1))
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> AdaptiveBitvector {
        AdaptiveBitvector::from_packed(PackedVec::from_bits(bits))
    }

    /// Bulk-loads a width-1 packed payload.
    pub fn from_packed(bits: PackedVec) -> AdaptiveBitvector {
        assert_eq!(bits.width(), 1, "bitvector payload must have width 1");
        let params = Params::for_len(bits.len());
        AdaptiveBitvector {
            tree: Tree::build(Bits, tree_config(&params), bits),
            params,
            queries: 0,
            updates: 0,
            rebuilds: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Total number of ones, read from the root without counting a query.
    pub fn count_ones(&self) -> usize {
        self.tree.ones()
    }

    pub fn tree(&self) -> &Tree<Bits> {
        &self.tree
    }

    pub fn access(&mut self, i: usize) -> Result<bool> {
        check_index(i, 1, self.len())?;
        self.queries += 1;
        Ok(self.tree.access(i - 1).expect("checked position"))
    }

    /// The bit at `i` and the number of equal bits strictly before it, in
    /// one descent.
    pub fn access_with_rank(&mut self, i: usize) -> Result<(bool, usize)> {
        check_index(i, 1, self.len())?;
        self.queries += 1;
        let (bit, ones) = self.tree.access_rank(i - 1).expect("checked position");
        Ok((bit, if bit { ones } else { i - 1 - ones }))
    }

    /// Occurrences of `bit` in positions `1..=i`.
    pub fn rank(&mut self, bit: bool, i: usize) -> Result<usize> {
        check_index(i, 0, self.len())?;
        self.queries += 1;
        let ones = self.tree.rank1(i);
        Ok(if bit { ones } else { i - ones })
    }

    /// Position of the `j`-th occurrence of `bit`, or `None` past the last.
    pub fn select(&mut self, bit: bool, j: usize) -> Result<Option<usize>> {
        check_index(j, 1, usize::MAX)?;
        self.queries += 1;
        Ok(self.tree.select(bit, j).map(|p| p + 1))
    }

    pub fn insert(&mut self, i: usize, bit: bool) -> Result<()> {
        self.insert_with_rank(i, bit).map(|_| ())
    }

    /// Inserts and returns how many bits equal to `bit` precede position `i`.
    pub fn insert_with_rank(&mut self, i: usize, bit: bool) -> Result<usize> {
        check_index(i, 1, self.len() + 1)?;
        let out = self.tree.update(i - 1, UpdateKind::Insert(bit as u64));
        self.after_update(true);
        Ok(if bit { out.ones_before } else { i - 1 - out.ones_before })
    }

    pub fn delete(&mut self, i: usize) -> Result<bool> {
        self.delete_with_rank(i).map(|(b, _)| b)
    }

    /// Deletes and returns the removed bit together with the number of equal
    /// bits before it.
    pub fn delete_with_rank(&mut self, i: usize) -> Result<(bool, usize)> {
        check_index(i, 1, self.len())?;
        let out = self.tree.update(i - 1, UpdateKind::Delete);
        self.after_update(true);
        let bit = out.old.expect("delete reports the removed bit") != 0;
        Ok((bit, if bit { out.ones_before } else { i - 1 - out.ones_before }))
    }

    /// Overwrites bit `i`, returning the previous value. Counts as an update.
    pub fn write(&mut self, i: usize, bit: bool) -> Result<bool> {
        check_index(i, 1, self.len())?;
        let out = self.tree.update(i - 1, UpdateKind::Write(bit as u64));
        self.after_update(false);
        Ok(out.old.expect("write reports the previous bit") != 0)
    }

    fn after_update(&mut self, resized: bool) {
        self.updates += 1;
        if !resized {
            return;
        }
        let current = current_log_n(self.len());
        if rebuild_due(current, self.params.log_n) {
            self.params = Params::compute(current);
            self.tree.rebuild(tree_config(&self.params));
            self.rebuilds += 1;
            self.tree.record(Event::Rebuild {
                log_n: self.params.log_n,
                len: self.len(),
            });
        }
    }

    pub fn stats(&self) -> LifetimeStats {
        LifetimeStats::from_engine(self.tree.stats(), 1, self.queries, self.updates, self.rebuilds)
    }

    pub fn space_report(&self) -> SpaceReport {
        // child reference, size and ones per child
        SpaceReport::from_tally(self.len(), &self.tree.space(), self.params.log_n, 3)
    }

    /// Every structural violation, empty when sound.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = self.tree.validate();
        out.extend(facade_violations(&self.params, self.tree.config(), self.len()));
        out
    }

    pub fn set_event_log(&mut self, on: bool) {
        self.tree.set_event_log(on);
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        self.tree.take_events()
    }

    /// The whole payload, without counting a query or touching counters.
    pub fn to_packed(&self) -> PackedVec {
        self.tree.flatten_all()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.to_packed().iter().map(|v| v != 0).collect()
    }
}

pub(crate) fn facade_violations(params: &Params, cfg: &TreeConfig, len: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let current = current_log_n(len);
    if rebuild_due(current, params.log_n) {
        out.push(Violation {
            path: vec![],
            message: format!("built for log_n {} but length {len} needs {current}", params.log_n),
        });
    }
    if *params != Params::compute(params.log_n) {
        out.push(Violation {
            path: vec![],
            message: format!("parameters {params:?} inconsistent with log_n"),
        });
    }
    if cfg.arity != params.a || cfg.flatten_cap != params.flatten_cap {
        out.push(Violation {
            path: vec![],
            message: format!("tree config {cfg:?} does not follow {params:?}"),
        });
    }
    out
}
