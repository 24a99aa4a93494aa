//! Adaptive dynamic array of fixed-width cells.
//!
//! Same tree as the bitvector, over cell units. Reads and writes are
//! queries: static leaves of cells carry no index, so a write can change a
//! cell in place without splitting anything. Only insert and delete are
//! updates.

use crate::bitvector::{current_log_n, facade_violations};
use crate::engine::{Event, LeafMut, Layout, Tree, TreeConfig, UpdateKind, Violation};
use crate::error::{check_index, Error, Result};
use crate::packed::PackedVec;
use crate::params::{rebuild_due, Params};
use crate::sums::Field;
use crate::stats::{LifetimeStats, SpaceReport};

/// Cell units of a fixed width; no ones aggregates.
#[derive(Debug, Clone, Copy)]
pub struct Cells {
    width: u32,
}

/// A flattened run of cells. It is plain packed storage.
#[derive(Debug, Clone)]
pub struct StaticCells(PackedVec);

impl StaticCells {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0.get(i)
    }

    pub fn set(&mut self, i: usize, v: u64) -> u64 {
        self.0.set(i, v)
    }
}

impl Layout for Cells {
    type Dyn = PackedVec;
    type Static = StaticCells;
    const TRACKS_ONES: bool = false;

    fn width(&self) -> u32 {
        self.width
    }
    fn dyn_from(&self, units: PackedVec) -> PackedVec {
        units
    }
    fn dyn_units(d: &PackedVec) -> &PackedVec {
        d
    }
    fn dyn_units_mut(d: &mut PackedVec) -> &mut PackedVec {
        d
    }
    fn dyn_into(d: PackedVec) -> PackedVec {
        d
    }
    fn static_from(&self, units: PackedVec) -> StaticCells {
        StaticCells(units)
    }
    fn static_units(s: &StaticCells) -> &PackedVec {
        &s.0
    }
    fn static_into(s: StaticCells) -> PackedVec {
        s.0
    }
    fn static_ones(_: &StaticCells) -> usize {
        0
    }
    fn static_index_bits(_: &StaticCells) -> usize {
        0
    }
    fn static_check(s: &StaticCells) -> Vec<String> {
        if s.0.storage_is_exact() {
            vec![]
        } else {
            vec![format!("static cells use {} words for {} bits", s.0.storage_words(), s.0.bit_len())]
        }
    }
    fn prefix_ones(_: &PackedVec, _: usize) -> usize {
        0
    }
}

/// Leaf capacity in cells: `64·b/log_n` bits divided among `width`-bit cells,
/// and never below 4.
pub fn cell_capacity(p: &Params, width: u32) -> usize {
    let bits = 64 * p.b / p.log_n as usize;
    (bits / width as usize).max(4)
}

fn array_config(p: &Params, width: u32) -> TreeConfig {
    TreeConfig {
        arity: p.a,
        leaf_cap: cell_capacity(p, width),
        flatten_cap: p.flatten_cap,
    }
}

/// A dynamic array of `width`-bit values with 1-based positions.
///
/// ```
/// use adaptive_bitvec::AdaptiveArray;
///
/// let mut a = AdaptiveArray::from_values(8, [5, 7, 9]).unwrap();
/// assert_eq!(a.read(2), Ok(7));
/// assert_eq!(a.write(2, 7), Ok(7));
/// assert_eq!(a.delete(1), Ok(5));
/// ```
#[derive(Debug)]
pub struct AdaptiveArray {
    tree: Tree<Cells>,
    params: Params,
    queries: u64,
    updates: u64,
    rebuilds: u64,
}

impl AdaptiveArray {
    pub fn new(width: u32) -> Result<AdaptiveArray> {
        AdaptiveArray::from_values(width, [])
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(width: u32, values: I) -> Result<AdaptiveArray> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        let mut cells = PackedVec::new(width);
        for v in values {
            check_width(v, width)?;
            cells.push(v);
        }
        Ok(AdaptiveArray::from_packed(cells))
    }

    /// Bulk-loads packed cells; the width is taken from `cells`.
    pub fn from_packed(cells: PackedVec) -> AdaptiveArray {
        let width = cells.width();
        let params = Params::for_len(cells.len());
        AdaptiveArray {
            tree: Tree::build(Cells { width }, array_config(&params, width), cells),
            params,
            queries: 0,
            updates: 0,
            rebuilds: 0,
        }
    }

    pub fn width(&self) -> u32 {
        self.tree.layout().width
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

    pub fn tree(&self) -> &Tree<Cells> {
        &self.tree
    }

    pub fn read(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        self.queries += 1;
        let (v, _) = self
            .tree
            .query(Field::Size, i, |leaf, t| match leaf {
                LeafMut::Dyn(d) => d.get(t - 1),
                LeafMut::Static(s) => s.get(t - 1),
            })
            .expect("checked position");
        Ok(v)
    }

    /// Overwrites cell `i` in place and returns the previous value. This is
    /// a query: it bumps counters and may flatten, but never splits.
    pub fn write(&mut self, i: usize, v: u64) -> Result<u64> {
        check_index(i, 1, self.len())?;
        check_width(v, self.width())?;
        self.queries += 1;
        let (old, _) = self
            .tree
            .query(Field::Size, i, |leaf, t| match leaf {
                LeafMut::Dyn(d) => d.set(t - 1, v),
                LeafMut::Static(s) => s.set(t - 1, v),
            })
            .expect("checked position");
        Ok(old)
    }

    pub fn insert(&mut self, i: usize, v: u64) -> Result<()> {
        check_index(i, 1, self.len() + 1)?;
        check_width(v, self.width())?;
        self.tree.update(i - 1, UpdateKind::Insert(v));
        self.after_update();
        Ok(())
    }

    pub fn delete(&mut self, i: usize) -> Result<u64> {
        check_index(i, 1, self.len())?;
        let out = self.tree.update(i - 1, UpdateKind::Delete);
        self.after_update();
        Ok(out.old.expect("delete reports the removed cell"))
    }

    fn after_update(&mut self) {
        self.updates += 1;
        let current = current_log_n(self.len());
        if rebuild_due(current, self.params.log_n) {
            self.params = Params::compute(current);
            let cfg = array_config(&self.params, self.width());
            self.tree.rebuild(cfg);
            self.rebuilds += 1;
            self.tree.record(Event::Rebuild {
                log_n: self.params.log_n,
                len: self.len(),
            });
        }
    }

    pub fn stats(&self) -> LifetimeStats {
        LifetimeStats::from_engine(self.tree.stats(), self.width(), self.queries, self.updates, self.rebuilds)
    }

    pub fn space_report(&self) -> SpaceReport {
        // child reference and size per child
        SpaceReport::from_tally(self.len() * self.width() as usize, &self.tree.space(), self.params.log_n, 2)
    }

    pub fn check(&self) -> Vec<Violation> {
        let mut out = self.tree.validate();
        out.extend(facade_violations(&self.params, self.tree.config(), self.len()));
        let want = cell_capacity(&self.params, self.width());
        if self.tree.config().leaf_cap != want {
            out.push(Violation {
                path: vec![],
                message: format!("leaf capacity {} but parameters give {want}", self.tree.config().leaf_cap),
            });
        }
        out
    }

    pub fn set_event_log(&mut self, on: bool) {
        self.tree.set_event_log(on);
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        self.tree.take_events()
    }

    pub fn to_packed(&self) -> PackedVec {
        self.tree.flatten_all()
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.to_packed().iter().collect()
    }
}

fn check_width(v: u64, width: u32) -> Result<()> {
    if width < 64 && v >> width != 0 {
        Err(Error::ValueTooWide { value: v, width })
    } else {
        Ok(())
    }
}
