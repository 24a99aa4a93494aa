//! The adaptive weight-balanced B-tree shared by bitvectors and arrays.
//!
//! Leaves sit at level 0 and hold between `cap/4` and `cap` units; a
//! non-root node at level `l` spans between `a^l·cap/4` and `a^l·cap`
//! units. Every internal node counts the queries that crossed it since the
//! last update did. Once a node has seen at least as many queries as it
//! holds units (and is no larger than the flatten cap) its subtree is
//! replaced by a static leaf of the same level. Updates that reach a static
//! leaf explode it one level at a time until they hit a dynamic leaf.

use std::fmt;

use crate::leaf::{DynamicLeaf, StaticLeaf};
use crate::packed::{PackedBuilder, PackedVec};
use crate::sums::{Field, PartialSums, Prefix};

/// Storage behind the two leaf kinds of a tree.
pub trait Layout: fmt::Debug {
    type Dyn: fmt::Debug + Clone;
    type Static: fmt::Debug + Clone;
    /// Whether `ones` aggregates are meaningful.
    const TRACKS_ONES: bool;

    fn width(&self) -> u32;
    fn dyn_from(&self, units: PackedVec) -> Self::Dyn;
    fn dyn_units(d: &Self::Dyn) -> &PackedVec;
    fn dyn_units_mut(d: &mut Self::Dyn) -> &mut PackedVec;
    fn dyn_into(d: Self::Dyn) -> PackedVec;
    fn static_from(&self, units: PackedVec) -> Self::Static;
    fn static_units(s: &Self::Static) -> &PackedVec;
    fn static_into(s: Self::Static) -> PackedVec;
    fn static_ones(s: &Self::Static) -> usize;
    fn static_index_bits(s: &Self::Static) -> usize;
    fn static_check(s: &Self::Static) -> Vec<String>;
    /// Ones among units `0..i` of a dynamic payload.
    fn prefix_ones(units: &PackedVec, i: usize) -> usize;
}

/// Single-bit units with ones/zeros aggregates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bits;

impl Layout for Bits {
    type Dyn = DynamicLeaf;
    type Static = StaticLeaf;
    const TRACKS_ONES: bool = true;

    fn width(&self) -> u32 {
        1
    }
    fn dyn_from(&self, units: PackedVec) -> DynamicLeaf {
        DynamicLeaf::from_packed(units)
    }
    fn dyn_units(d: &DynamicLeaf) -> &PackedVec {
        d.packed()
    }
    fn dyn_units_mut(d: &mut DynamicLeaf) -> &mut PackedVec {
        d.packed_mut()
    }
    fn dyn_into(d: DynamicLeaf) -> PackedVec {
        d.into_packed()
    }
    fn static_from(&self, units: PackedVec) -> StaticLeaf {
        StaticLeaf::build(units)
    }
    fn static_units(s: &StaticLeaf) -> &PackedVec {
        s.packed()
    }
    fn static_into(s: StaticLeaf) -> PackedVec {
        s.into_packed()
    }
    fn static_ones(s: &StaticLeaf) -> usize {
        s.ones()
    }
    fn static_index_bits(s: &StaticLeaf) -> usize {
        s.index_bits()
    }
    fn static_check(s: &StaticLeaf) -> Vec<String> {
        s.check()
    }
    fn prefix_ones(units: &PackedVec, i: usize) -> usize {
        let words = units.words();
        let full = i / 64;
        let mut r: usize = words[..full].iter().map(|w| w.count_ones() as usize).sum();
        if i % 64 != 0 {
            r += (words[full] & (u64::MAX >> (64 - i % 64))).count_ones() as usize;
        }
        r
    }
}

/// Shape constants of one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    /// Arity base `a`.
    pub arity: usize,
    /// Leaf capacity `b`, in units.
    pub leaf_cap: usize,
    /// Largest subtree (in units) that may be flattened.
    pub flatten_cap: usize,
}

impl TreeConfig {
    /// Upper weight bound `a^l·b` of a level-`l` node.
    pub fn max_size(&self, level: u32) -> usize {
        let mut s = self.leaf_cap;
        for _ in 0..level {
            s = s.saturating_mul(self.arity);
        }
        s
    }

    /// Lower weight bound `a^l·b/4` of a non-root level-`l` node.
    pub fn min_size(&self, level: u32) -> usize {
        self.max_size(level) / 4
    }

    // Merged nodes above this size are cut again.
    fn merge_limit(&self, level: u32) -> usize {
        (14 * self.max_size(level) / 16).saturating_sub(1)
    }

    fn leaf_target(&self) -> usize {
        (3 * self.leaf_cap / 4).max(1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub query_visits: u64,
    pub update_visits: u64,
    pub flatten_count: u64,
    pub flatten_units: u64,
    pub split_count: u64,
    pub split_units: u64,
}

/// Structural events, recorded when the event log is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Flatten { size: usize, level: u32 },
    Split { size: usize, level: u32 },
    /// Whole-structure rebuild for a new `log_n`; pushed by the facades.
    Rebuild { log_n: u32, len: usize },
}

/// A structural invariant violation found by [`Tree::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {:?}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Internal,
    Dynamic,
    Static,
}

/// Summary of one node, for inspection in tests and tools.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub path: Vec<usize>,
    pub kind: NodeKind,
    pub level: u32,
    pub size: usize,
    pub queries: usize,
    pub children: usize,
}

/// Space figures gathered by walking the tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceTally {
    pub dyn_slack_bits: usize,
    pub static_slack_bits: usize,
    pub static_index_bits: usize,
    pub internal_nodes: usize,
    /// Child slots over all internal nodes.
    pub child_slots: usize,
    pub dyn_leaves: usize,
    pub static_leaves: usize,
}

pub(crate) enum Node<L: Layout> {
    Internal(Box<Internal<L>>),
    Dyn(L::Dyn),
    Static(Box<StaticNode<L>>),
}

pub(crate) struct Internal<L: Layout> {
    level: u32,
    children: Vec<Node<L>>,
    sums: PartialSums,
    queries: usize,
}

pub(crate) struct StaticNode<L: Layout> {
    level: u32,
    leaf: L::Static,
}

/// The leaf a query ended at.
pub enum LeafMut<'a, L: Layout> {
    Dyn(&'a mut L::Dyn),
    Static(&'a mut L::Static),
}

/// Update kinds; values are raw unit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Insert(u64),
    Delete,
    Write(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateOutcome {
    /// Removed (delete) or replaced (write) unit.
    pub old: Option<u64>,
    /// Ones strictly before the updated position.
    pub ones_before: usize,
}

const MAX_DEPTH: usize = 64;

fn agg<L: Layout>(node: &Node<L>) -> Prefix {
    match node {
        Node::Internal(i) => i.sums.total(),
        Node::Dyn(d) => {
            let u = L::dyn_units(d);
            Prefix {
                size: u.len(),
                ones: if L::TRACKS_ONES { u.count_ones() } else { 0 },
            }
        }
        Node::Static(s) => Prefix {
            size: L::static_units(&s.leaf).len(),
            ones: if L::TRACKS_ONES { L::static_ones(&s.leaf) } else { 0 },
        },
    }
}

fn collect<L: Layout>(node: &Node<L>, out: &mut PackedBuilder) {
    match node {
        Node::Internal(i) => {
            for c in &i.children {
                collect(c, out);
            }
        }
        Node::Dyn(d) => {
            let u = L::dyn_units(d);
            out.extend_from(u, 0, u.len());
        }
        Node::Static(s) => {
            let u = L::static_units(&s.leaf);
            out.extend_from(u, 0, u.len());
        }
    }
}

fn even_parts(total: usize, parts: usize) -> impl Iterator<Item = usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(move |k| base + (k < extra) as usize)
}

fn internal_from<L: Layout>(level: u32, children: Vec<Node<L>>) -> Internal<L> {
    let mut sums = PartialSums::with_capacity(children.len());
    for c in &children {
        let p = agg(c);
        sums.push(p.size, p.ones);
    }
    Internal {
        level,
        children,
        sums,
        queries: 0,
    }
}

// Splits the children of `inner` into two nodes of the same level with sizes
// as close as possible.
fn cut_internal<L: Layout>(mut inner: Internal<L>) -> (Internal<L>, Internal<L>) {
    let total = inner.sums.total().size;
    let n = inner.children.len();
    debug_assert!(n >= 2);
    let mut best = 1;
    let mut best_gap = usize::MAX;
    let mut acc = 0;
    for j in 1..n {
        acc += inner.sums.size(j - 1);
        let gap = (2 * acc).abs_diff(total);
        if gap < best_gap {
            best_gap = gap;
            best = j;
        }
    }
    let right_children = inner.children.split_off(best);
    let right_sums = inner.sums.split_off(best);
    let right = Internal {
        level: inner.level,
        children: right_children,
        sums: right_sums,
        queries: 0,
    };
    inner.queries = 0;
    (inner, right)
}

struct Cx<'a, L: Layout> {
    layout: &'a L,
    cfg: &'a TreeConfig,
    stats: &'a mut EngineStats,
    events: &'a mut Option<Vec<Event>>,
}

impl<L: Layout> Cx<'_, L> {
    fn log_split(&mut self, size: usize, level: u32) {
        self.stats.split_count += 1;
        self.stats.split_units += size as u64;
        if let Some(ev) = self.events.as_mut() {
            ev.push(Event::Split { size, level });
        }
    }

    // Bulk-builds a subtree over `units` (the rebuild path).
    fn build(&self, units: PackedVec) -> Node<L> {
        let n = units.len();
        if n <= self.cfg.leaf_cap {
            return Node::Dyn(self.layout.dyn_from(units));
        }
        let leaves = n.div_ceil(self.cfg.leaf_target());
        let mut nodes: Vec<Node<L>> = Vec::with_capacity(leaves);
        let mut start = 0;
        for len in even_parts(n, leaves) {
            nodes.push(Node::Dyn(self.layout.dyn_from(units.slice(start, len))));
            start += len;
        }
        drop(units);
        let a = self.cfg.arity;
        let mut level = 0;
        loop {
            let c = nodes.len();
            if c <= 4 * a && n <= self.cfg.max_size(level + 1) {
                return Node::Internal(Box::new(internal_from(level + 1, nodes)));
            }
            let groups = c.div_ceil(a);
            let mut it = nodes.into_iter();
            let mut parents = Vec::with_capacity(groups);
            for g in even_parts(c, groups) {
                let children: Vec<Node<L>> = it.by_ref().take(g).collect();
                parents.push(Node::Internal(Box::new(internal_from(level + 1, children))));
            }
            nodes = parents;
            level += 1;
        }
    }

    // Replaces a static leaf by an internal node of the same level: `a`
    // static children one level down, or dynamic leaves of ~3/4 capacity
    // when the leaf is at level 1.
    fn explode(&mut self, leaf: L::Static, level: u32) -> Internal<L> {
        debug_assert!(level >= 1);
        let units = L::static_into(leaf);
        let t = units.len();
        self.log_split(t, level);
        let parts = if level == 1 {
            (4 * t).div_ceil(3 * self.cfg.leaf_cap).max(1)
        } else {
            self.cfg.arity.min(t).max(1)
        };
        let mut children = Vec::with_capacity(parts);
        let mut start = 0;
        for len in even_parts(t, parts) {
            let slice = units.slice(start, len);
            start += len;
            children.push(if level == 1 {
                Node::Dyn(self.layout.dyn_from(slice))
            } else {
                Node::Static(Box::new(StaticNode {
                    level: level - 1,
                    leaf: self.layout.static_from(slice),
                }))
            });
        }
        internal_from(level, children)
    }

    fn update(&mut self, node: &mut Node<L>, pos: usize, op: UpdateKind) -> UpdateOutcome {
        match node {
            Node::Dyn(d) => {
                let units = L::dyn_units_mut(d);
                let ones_before = if L::TRACKS_ONES { L::prefix_ones(units, pos) } else { 0 };
                let old = match op {
                    UpdateKind::Insert(v) => {
                        units.insert(pos, v);
                        None
                    }
                    UpdateKind::Delete => Some(units.remove(pos)),
                    UpdateKind::Write(v) => Some(units.set(pos, v)),
                };
                UpdateOutcome { old, ones_before }
            }
            Node::Static(_) => unreachable!("updates explode static leaves before entering them"),
            Node::Internal(inner) => {
                inner.queries = 0;
                self.stats.update_visits += 1;
                let (k, before) = match op {
                    UpdateKind::Insert(_) if pos == inner.sums.total().size => {
                        let k = inner.sums.len() - 1;
                        (k, inner.sums.prefix(k))
                    }
                    _ => inner.sums.route(Field::Size, pos + 1).expect("position within node"),
                };
                if let Node::Static(_) = inner.children[k] {
                    let Node::Static(s) = std::mem::replace(&mut inner.children[k], Node::Dyn(self.layout.dyn_from(PackedVec::new(self.layout.width())))) else {
                        unreachable!()
                    };
                    let s = *s;
                    inner.children[k] = Node::Internal(Box::new(self.explode(s.leaf, s.level)));
                }
                let mut out = self.update(&mut inner.children[k], pos - before.size, op);
                out.ones_before += before.ones;
                let p = agg(&inner.children[k]);
                inner.sums.set(k, p.size, p.ones);
                self.fix_child(inner, k);
                out
            }
        }
    }

    fn empty_leaf(&self) -> Node<L> {
        Node::Dyn(self.layout.dyn_from(PackedVec::new(self.layout.width())))
    }

    // Restores the weight bounds of child `k` after an update went through it.
    fn fix_child(&mut self, inner: &mut Internal<L>, k: usize) {
        let child_level = inner.level - 1;
        let size = inner.sums.size(k);
        let siblings = inner.children.len() > 1;
        if child_level == 0 {
            if size > self.cfg.leaf_cap {
                let Node::Dyn(d) = &mut inner.children[k] else { unreachable!() };
                let tail = L::dyn_units_mut(d).split_off(size / 2);
                let right = Node::Dyn(self.layout.dyn_from(tail));
                let lp = agg(&inner.children[k]);
                let rp = agg(&right);
                inner.sums.set(k, lp.size, lp.ones);
                inner.children.insert(k + 1, right);
                inner.sums.insert(k + 1, rp.size, rp.ones);
            } else if size < self.cfg.leaf_cap / 4 && siblings {
                self.merge_leaves(inner, k);
            }
            return;
        }
        if !matches!(inner.children[k], Node::Internal(_)) {
            return;
        }
        if size > self.cfg.max_size(child_level) {
            let Node::Internal(node) = std::mem::replace(&mut inner.children[k], self.empty_leaf()) else {
                unreachable!()
            };
            let (l, r) = cut_internal(*node);
            let (l, r) = (Node::Internal(Box::new(l)), Node::Internal(Box::new(r)));
            let (lp, rp) = (agg(&l), agg(&r));
            inner.children[k] = l;
            inner.sums.set(k, lp.size, lp.ones);
            inner.children.insert(k + 1, r);
            inner.sums.insert(k + 1, rp.size, rp.ones);
        } else if size < self.cfg.min_size(child_level) && siblings {
            self.merge_internal(inner, k, child_level);
        }
    }

    fn take_pair(&mut self, inner: &mut Internal<L>, k: usize) -> (usize, Node<L>, Node<L>) {
        let s = if k + 1 < inner.children.len() { k + 1 } else { k - 1 };
        let l = k.min(s);
        let right = inner.children.remove(l + 1);
        inner.sums.remove(l + 1);
        let left = std::mem::replace(&mut inner.children[l], self.empty_leaf());
        (l, left, right)
    }

    fn place(inner: &mut Internal<L>, at: usize, nodes: Vec<Node<L>>) {
        let mut nodes = nodes.into_iter();
        let first = nodes.next().expect("at least one node");
        let p = agg(&first);
        inner.children[at] = first;
        inner.sums.set(at, p.size, p.ones);
        for (off, n) in nodes.enumerate() {
            let p = agg(&n);
            inner.children.insert(at + 1 + off, n);
            inner.sums.insert(at + 1 + off, p.size, p.ones);
        }
    }

    // Merges underflowing leaf `k` with its right sibling (left if last),
    // cutting the result again when it is too large.
    fn merge_leaves(&mut self, inner: &mut Internal<L>, k: usize) {
        let (l, left, right) = self.take_pair(inner, k);
        let (Node::Dyn(left), Node::Dyn(right)) = (left, right) else {
            unreachable!("level-1 children are dynamic leaves")
        };
        let mut units = L::dyn_into(left);
        units.append(L::dyn_units(&right));
        let total = units.len();
        let mut out = Vec::with_capacity(2);
        if total > self.cfg.merge_limit(0) {
            let tail = units.split_off(total / 2);
            out.push(Node::Dyn(self.layout.dyn_from(units)));
            out.push(Node::Dyn(self.layout.dyn_from(tail)));
        } else {
            out.push(Node::Dyn(self.layout.dyn_from(units)));
        }
        Self::place(inner, l, out);
    }

    fn into_internal(&mut self, node: Node<L>) -> Internal<L> {
        match node {
            Node::Internal(i) => *i,
            Node::Static(s) => {
                let s = *s;
                self.explode(s.leaf, s.level)
            }
            Node::Dyn(_) => unreachable!("level >= 1 sibling is never a dynamic leaf"),
        }
    }

    fn merge_internal(&mut self, inner: &mut Internal<L>, k: usize, level: u32) {
        let (l, left, right) = self.take_pair(inner, k);
        let mut left = self.into_internal(left);
        let mut right = self.into_internal(right);
        left.children.append(&mut right.children);
        left.sums.append(&mut right.sums);
        left.queries = 0;
        let total = left.sums.total().size;
        let out = if total > self.cfg.merge_limit(level) {
            let (a, b) = cut_internal(left);
            vec![Node::Internal(Box::new(a)), Node::Internal(Box::new(b))]
        } else {
            vec![Node::Internal(Box::new(left))]
        };
        Self::place(inner, l, out);
    }
}

/// Adaptive weight-balanced tree over units of a [`Layout`].
pub struct Tree<L: Layout> {
    root: Node<L>,
    len: usize,
    cfg: TreeConfig,
    layout: L,
    stats: EngineStats,
    events: Option<Vec<Event>>,
}

impl<L: Layout> fmt::Debug for Tree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tree")
            .field("len", &self.len)
            .field("cfg", &self.cfg)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

impl<L: Layout> Tree<L> {
    pub fn new(layout: L, cfg: TreeConfig) -> Tree<L> {
        let units = PackedVec::new(layout.width());
        Tree::build(layout, cfg, units)
    }

    /// Bulk-loads `units` into a fresh all-dynamic tree.
    pub fn build(layout: L, cfg: TreeConfig, units: PackedVec) -> Tree<L> {
        assert!(cfg.arity >= 4 && cfg.leaf_cap >= 4, "degenerate tree configuration");
        assert_eq!(units.width(), layout.width());
        let len = units.len();
        let mut stats = EngineStats::default();
        let mut events = None;
        let root = Cx {
            layout: &layout,
            cfg: &cfg,
            stats: &mut stats,
            events: &mut events,
        }
        .build(units);
        Tree {
            root,
            len,
            cfg,
            layout,
            stats,
            events,
        }
    }

    /// Rebuilds the same content under a new configuration, keeping stats.
    pub fn rebuild(&mut self, cfg: TreeConfig) {
        let units = self.flatten_all();
        self.cfg = cfg;
        self.root = self.cx().build(units);
    }

    fn cx(&mut self) -> Cx<'_, L> {
        Cx {
            layout: &self.layout,
            cfg: &self.cfg,
            stats: &mut self.stats,
            events: &mut self.events,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn config(&self) -> &TreeConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &L {
        &self.layout
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    pub fn ones(&self) -> usize {
        agg(&self.root).ones
    }

    pub fn set_event_log(&mut self, on: bool) {
        self.events = if on { Some(Vec::new()) } else { None };
    }

    /// Appends `e` to the event log if it is enabled.
    pub fn record(&mut self, e: Event) {
        if let Some(ev) = self.events.as_mut() {
            ev.push(e);
        }
    }

    pub fn events_enabled(&self) -> bool {
        self.events.is_some()
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        self.events.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// The whole payload, concatenated left to right, without touching the tree.
    pub fn flatten_all(&self) -> PackedVec {
        let mut b = PackedBuilder::with_capacity(self.layout.width(), self.len);
        collect(&self.root, &mut b);
        b.finish()
    }

    /// Descends by `field` to the leaf holding the `target`-th (1-based)
    /// unit of that field, counting the query on every internal node
    /// crossed, runs `at_leaf` with the leaf and the remaining target, and
    /// finally flattens the shallowest node that became eligible.
    ///
    /// Returns `None` when `target` is 0 or exceeds the field's total.
    pub fn query<R>(
        &mut self,
        field: Field,
        target: usize,
        at_leaf: impl FnOnce(LeafMut<'_, L>, usize) -> R,
    ) -> Option<(R, Prefix)> {
        let total = agg(&self.root);
        if target == 0 || target > total.get(field) {
            return None;
        }
        let cap = self.cfg.flatten_cap;
        let mut path = [0usize; MAX_DEPTH];
        let mut depth = 0;
        let mut eligible: Option<usize> = None;
        let mut node_size = total.size;
        let mut target = target;
        let mut before = Prefix::default();
        let mut node = &mut self.root;
        let result = loop {
            match node {
                Node::Internal(inner) => {
                    inner.queries += 1;
                    self.stats.query_visits += 1;
                    if eligible.is_none() && inner.queries >= node_size && node_size <= cap {
                        eligible = Some(depth);
                    }
                    let (k, b) = inner.sums.route(field, target).expect("target within node");
                    target -= b.get(field);
                    before.size += b.size;
                    before.ones += b.ones;
                    node_size = inner.sums.size(k);
                    if eligible.is_none() {
                        path[depth] = k;
                    }
                    depth += 1;
                    node = &mut inner.children[k];
                }
                Node::Dyn(d) => break at_leaf(LeafMut::Dyn(d), target),
                Node::Static(s) => break at_leaf(LeafMut::Static(&mut s.leaf), target),
            }
        };
        if let Some(d) = eligible {
            self.flatten_at(&path[..d]);
        }
        Some((result, before))
    }

    fn node_at_mut(&mut self, path: &[usize]) -> &mut Node<L> {
        let mut node = &mut self.root;
        for &k in path {
            node = match node {
                Node::Internal(inner) => &mut inner.children[k],
                _ => panic!("path leaves the tree"),
            };
        }
        node
    }

    fn flatten_at(&mut self, path: &[usize]) {
        let width = self.layout.width();
        let node = self.node_at_mut(path);
        let Node::Internal(inner) = node else {
            unreachable!("only internal nodes are flattened")
        };
        let level = inner.level;
        let mut b = PackedBuilder::new(width);
        collect(node, &mut b);
        let units = b.finish();
        let size = units.len();
        let leaf = self.layout.static_from(units);
        *self.node_at_mut(path) = Node::Static(Box::new(StaticNode { level, leaf }));
        self.stats.flatten_count += 1;
        self.stats.flatten_units += size as u64;
        if let Some(ev) = self.events.as_mut() {
            ev.push(Event::Flatten { size, level });
        }
    }

    /// Applies an insert (`pos ≤ len`), delete or write (`pos < len`).
    pub fn update(&mut self, pos: usize, op: UpdateKind) -> UpdateOutcome {
        match op {
            UpdateKind::Insert(_) => assert!(pos <= self.len, "insert position {pos} past end {}", self.len),
            _ => assert!(pos < self.len, "position {pos} out of range {}", self.len),
        }
        let mut root = std::mem::replace(&mut self.root, Node::Dyn(self.layout.dyn_from(PackedVec::new(self.layout.width()))));
        let mut cx = Cx {
            layout: &self.layout,
            cfg: &self.cfg,
            stats: &mut self.stats,
            events: &mut self.events,
        };
        if let Node::Static(s) = root {
            let s = *s;
            let size = L::static_units(&s.leaf).len();
            root = if size >= cx.cfg.min_size(s.level) && size <= cx.cfg.max_size(s.level) {
                Node::Internal(Box::new(cx.explode(s.leaf, s.level)))
            } else {
                cx.log_split(size, s.level);
                cx.build(L::static_into(s.leaf))
            };
        }
        let out = cx.update(&mut root, pos, op);
        match op {
            UpdateKind::Insert(_) => self.len += 1,
            UpdateKind::Delete => self.len -= 1,
            UpdateKind::Write(_) => {}
        }
        self.root = self.fix_root(root);
        out
    }

    fn fix_root(&self, mut root: Node<L>) -> Node<L> {
        loop {
            root = match root {
                Node::Internal(mut inner) if inner.children.len() == 1 => inner.children.pop().unwrap(),
                Node::Internal(inner) if inner.sums.total().size > self.cfg.max_size(inner.level) => {
                    let level = inner.level;
                    let (l, r) = cut_internal(*inner);
                    Node::Internal(Box::new(internal_from(
                        level + 1,
                        vec![Node::Internal(Box::new(l)), Node::Internal(Box::new(r))],
                    )))
                }
                Node::Dyn(mut d) if L::dyn_units(&d).len() > self.cfg.leaf_cap => {
                    let units = L::dyn_units_mut(&mut d);
                    let tail = units.split_off(units.len() / 2);
                    let right = Node::Dyn(self.layout.dyn_from(tail));
                    Node::Internal(Box::new(internal_from(1, vec![Node::Dyn(d), right])))
                }
                other => return other,
            };
        }
    }

    /// Checks every structural invariant; empty iff the tree is sound.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        let p = self.validate_node(&self.root, None, &mut path, &mut out);
        if p.size != self.len {
            out.push(Violation {
                path: vec![],
                message: format!("root size {} != tracked length {}", p.size, self.len),
            });
        }
        out
    }

    fn validate_node(
        &self,
        node: &Node<L>,
        expect_level: Option<u32>,
        path: &mut Vec<usize>,
        out: &mut Vec<Violation>,
    ) -> Prefix {
        let is_root = expect_level.is_none();
        let cfg = &self.cfg;
        let mut bad = |path: &Vec<usize>, message: String| {
            out.push(Violation {
                path: path.clone(),
                message,
            })
        };
        match node {
            Node::Dyn(d) => {
                let units = L::dyn_units(d);
                if let Some(l) = expect_level {
                    if l != 0 {
                        bad(path, format!("dynamic leaf where a level-{l} node belongs"));
                    }
                }
                if units.len() > cfg.leaf_cap {
                    bad(path, format!("leaf holds {} > {} units", units.len(), cfg.leaf_cap));
                }
                if !is_root && units.len() < cfg.leaf_cap / 4 {
                    bad(path, format!("leaf holds {} < {} units", units.len(), cfg.leaf_cap / 4));
                }
                if !units.storage_is_exact() {
                    bad(path, "leaf storage is not exact".into());
                }
                agg(node)
            }
            Node::Static(s) => {
                let size = L::static_units(&s.leaf).len();
                if s.level == 0 {
                    bad(path, "static leaf at level 0".into());
                }
                if let Some(l) = expect_level {
                    if l != s.level {
                        bad(path, format!("static leaf of level {} where level {l} belongs", s.level));
                    }
                    if size < cfg.min_size(l) || size > cfg.max_size(l) {
                        bad(path, format!("static leaf size {size} outside level-{l} bounds"));
                    }
                }
                for e in L::static_check(&s.leaf) {
                    bad(path, e);
                }
                agg(node)
            }
            Node::Internal(inner) => {
                let l = inner.level;
                if let Some(e) = expect_level {
                    if e != l {
                        bad(path, format!("internal node of level {l} where level {e} belongs"));
                    }
                }
                if l == 0 {
                    bad(path, "internal node at level 0".into());
                }
                let arity = inner.children.len();
                let min_arity = if is_root { 2 } else { (cfg.arity / 4).max(1) };
                if arity < min_arity || arity > 4 * cfg.arity {
                    bad(path, format!("arity {arity} outside [{min_arity}, {}]", 4 * cfg.arity));
                }
                if inner.sums.len() != arity {
                    bad(path, format!("{} sums entries for {arity} children", inner.sums.len()));
                }
                let mut total = Prefix::default();
                for (k, c) in inner.children.iter().enumerate() {
                    path.push(k);
                    let p = self.validate_node(c, Some(l.saturating_sub(1)), path, out);
                    path.pop();
                    if k < inner.sums.len() && (inner.sums.size(k) != p.size || inner.sums.ones(k) != p.ones) {
                        out.push(Violation {
                            path: path.clone(),
                            message: format!(
                                "sums entry {k} = ({}, {}) but child holds ({}, {})",
                                inner.sums.size(k),
                                inner.sums.ones(k),
                                p.size,
                                p.ones
                            ),
                        });
                    }
                    total.size += p.size;
                    total.ones += p.ones;
                }
                if !is_root && (total.size < cfg.min_size(l) || total.size > cfg.max_size(l)) {
                    out.push(Violation {
                        path: path.clone(),
                        message: format!(
                            "size {} outside level-{l} bounds [{}, {}]",
                            total.size,
                            cfg.min_size(l),
                            cfg.max_size(l)
                        ),
                    });
                }
                if is_root && total.size > cfg.max_size(l) {
                    out.push(Violation {
                        path: path.clone(),
                        message: format!("root size {} above level-{l} bound", total.size),
                    });
                }
                total
            }
        }
    }

    /// Every node in preorder.
    pub fn nodes(&self) -> Vec<NodeInfo> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        Self::walk(&self.root, &mut path, &mut out);
        out
    }

    fn walk(node: &Node<L>, path: &mut Vec<usize>, out: &mut Vec<NodeInfo>) {
        let size = agg(node).size;
        match node {
            Node::Internal(inner) => {
                out.push(NodeInfo {
                    path: path.clone(),
                    kind: NodeKind::Internal,
                    level: inner.level,
                    size,
                    queries: inner.queries,
                    children: inner.children.len(),
                });
                for (k, c) in inner.children.iter().enumerate() {
                    path.push(k);
                    Self::walk(c, path, out);
                    path.pop();
                }
            }
            Node::Dyn(_) => out.push(NodeInfo {
                path: path.clone(),
                kind: NodeKind::Dynamic,
                level: 0,
                size,
                queries: 0,
                children: 0,
            }),
            Node::Static(s) => out.push(NodeInfo {
                path: path.clone(),
                kind: NodeKind::Static,
                level: s.level,
                size,
                queries: 0,
                children: 0,
            }),
        }
    }

    /// The node reached by following `path`, if any.
    pub fn node_info(&self, path: &[usize]) -> Option<NodeInfo> {
        let mut node = &self.root;
        for &k in path {
            node = match node {
                Node::Internal(inner) => inner.children.get(k)?,
                _ => return None,
            };
        }
        let mut out = Vec::new();
        let mut p = path.to_vec();
        Self::walk(node, &mut p, &mut out);
        out.into_iter().next()
    }

    /// Height of the root (0 when the root is a dynamic leaf).
    pub fn height(&self) -> u32 {
        match &self.root {
            Node::Internal(i) => i.level,
            Node::Static(s) => s.level,
            Node::Dyn(_) => 0,
        }
    }

    pub fn space(&self) -> SpaceTally {
        let mut t = SpaceTally::default();
        Self::tally(&self.root, &mut t);
        t
    }

    fn tally(node: &Node<L>, t: &mut SpaceTally) {
        match node {
            Node::Internal(inner) => {
                t.internal_nodes += 1;
                t.child_slots += inner.children.len();
                for c in &inner.children {
                    Self::tally(c, t);
                }
            }
            Node::Dyn(d) => {
                let u = L::dyn_units(d);
                t.dyn_leaves += 1;
                t.dyn_slack_bits += u.storage_words() * 64 - u.bit_len();
            }
            Node::Static(s) => {
                let u = L::static_units(&s.leaf);
                t.static_leaves += 1;
                t.static_slack_bits += u.storage_words() * 64 - u.bit_len();
                t.static_index_bits += L::static_index_bits(&s.leaf);
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn corrupt_sums(&mut self, path: &[usize], k: usize) {
        if let Node::Internal(inner) = self.node_at_mut(path) {
            let (s, o) = (inner.sums.size(k), inner.sums.ones(k));
            inner.sums.set(k, s + 1, o);
        }
    }
}

impl Tree<Bits> {
    /// Bit at 0-based `pos`.
    pub fn access(&mut self, pos: usize) -> Option<bool> {
        self.query(Field::Size, pos + 1, |leaf, t| match leaf {
            LeafMut::Dyn(d) => d.access(t - 1),
            LeafMut::Static(s) => s.access(t - 1),
        })
        .map(|(b, _)| b)
    }

    /// Bit at `pos` together with the ones strictly before it, in one descent.
    pub fn access_rank(&mut self, pos: usize) -> Option<(bool, usize)> {
        self.query(Field::Size, pos + 1, |leaf, t| match leaf {
            LeafMut::Dyn(d) => (d.access(t - 1), d.rank1(t - 1)),
            LeafMut::Static(s) => (s.access(t - 1), s.rank1(t - 1)),
        })
        .map(|((b, r), before)| (b, before.ones + r))
    }

    /// Ones in the first `i` bits.
    pub fn rank1(&mut self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        let (r, before) = self
            .query(Field::Size, i, |leaf, t| match leaf {
                LeafMut::Dyn(d) => d.rank1(t),
                LeafMut::Static(s) => s.rank1(t),
            })
            .expect("rank position within bounds");
        before.ones + r
    }

    /// 0-based position of the `j`-th occurrence of `bit`.
    pub fn select(&mut self, bit: bool, j: usize) -> Option<usize> {
        let field = if bit { Field::Ones } else { Field::Zeros };
        self.query(field, j, |leaf, t| match leaf {
            LeafMut::Dyn(d) => d.select(bit, t),
            LeafMut::Static(s) => s.select(bit, t),
        })
        .map(|(p, before)| before.size + p.expect("leaf holds the routed occurrence"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> TreeConfig {
        TreeConfig {
            arity: 4,
            leaf_cap: 16,
            flatten_cap: usize::MAX,
        }
    }

    fn wide_cfg() -> TreeConfig {
        TreeConfig {
            arity: 16,
            leaf_cap: 16,
            flatten_cap: usize::MAX,
        }
    }

    // plain-vector model, 0-based
    fn m_rank1(m: &[bool], i: usize) -> usize {
        m[..i].iter().filter(|&&b| b).count()
    }
    fn m_select(m: &[bool], bit: bool, j: usize) -> Option<usize> {
        if j == 0 {
            return None;
        }
        m.iter().enumerate().filter(|(_, &b)| b == bit).nth(j - 1).map(|(p, _)| p)
    }

    fn tree_from(bits: &[bool], cfg: TreeConfig) -> Tree<Bits> {
        Tree::build(Bits, cfg, PackedVec::from_bits(bits.iter().copied()))
    }

    fn payload(t: &Tree<Bits>) -> Vec<bool> {
        t.flatten_all().iter().map(|b| b == 1).collect()
    }

    fn answers(t: &mut Tree<Bits>) -> Vec<usize> {
        let n = t.len();
        let mut v = Vec::new();
        for i in 0..n {
            v.push(t.access(i).unwrap() as usize);
        }
        for i in 0..=n {
            v.push(t.rank1(i));
        }
        for bit in [false, true] {
            for j in 1..=n + 1 {
                v.push(t.select(bit, j).unwrap_or(usize::MAX));
            }
        }
        v
    }

    fn assert_valid(t: &Tree<Bits>) {
        let v = t.validate();
        assert!(v.is_empty(), "violations: {:#?}", v);
    }

    fn offset_of(t: &Tree<Bits>, path: &[usize]) -> usize {
        let mut off = 0;
        for d in 0..path.len() {
            for k in 0..path[d] {
                let mut p = path[..d].to_vec();
                p.push(k);
                off += t.node_info(&p).unwrap().size;
            }
        }
        off
    }

    // (start offset, size) of every dynamic leaf, left to right
    fn leaf_spans(t: &Tree<Bits>) -> Vec<(usize, usize)> {
        let mut off = 0;
        let mut out = Vec::new();
        for n in t.nodes() {
            match n.kind {
                NodeKind::Dynamic => {
                    out.push((off, n.size));
                    off += n.size;
                }
                NodeKind::Static => off += n.size,
                NodeKind::Internal => {}
            }
        }
        out
    }

    #[test]
    fn small_tree_queries() {
        let mut t = tree_from(&[true, false, true, true, false], small_cfg());
        assert_eq!(t.rank1(3), 2);
        assert_eq!(t.access(4), Some(false));
        assert_eq!(t.select(true, 3), Some(3));
        assert_eq!(t.select(true, 4), None);
    }

    #[test]
    fn bulk_build_is_valid_and_faithful() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for cfg in [small_cfg(), wide_cfg()] {
            for n in [0, 1, 15, 16, 17, 100, 1000, 10_000, 70_000] {
                let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let mut t = tree_from(&bits, cfg);
                assert_valid(&t);
                assert_eq!(payload(&t), bits);
                for i in (0..=n).step_by(7) {
                    assert_eq!(t.rank1(i), m_rank1(&bits, i));
                }
            }
        }
    }

    #[test]
    fn queries_count_exactly_the_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bits: Vec<bool> = (0..2000).map(|_| rng.gen()).collect();
        let mut t = tree_from(&bits, small_cfg());
        for _ in 0..50 {
            let before = t.nodes();
            t.access(rng.gen_range(0..2000));
            let after = t.nodes();
            let mut touched = 0;
            for (b, a) in before.iter().zip(&after) {
                assert_eq!(b.path, a.path);
                if a.kind == NodeKind::Internal {
                    assert!(a.queries == b.queries || a.queries == b.queries + 1);
                    touched += (a.queries == b.queries + 1) as u32;
                }
            }
            assert_eq!(touched, t.height());
        }
    }

    #[test]
    fn no_op_write_resets_counters_on_path_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<bool> = (0..2000).map(|_| rng.gen()).collect();
        let mut t = tree_from(&bits, small_cfg());
        for _ in 0..300 {
            t.access(rng.gen_range(0..2000));
        }
        let pos = rng.gen_range(0..2000);
        let cur = t.access(pos).unwrap();
        let before = t.nodes();
        t.update(pos, UpdateKind::Write(cur as u64));
        let after = t.nodes();
        assert_eq!(before.len(), after.len());
        let mut zeroed = 0;
        for (b, a) in before.iter().zip(&after) {
            if a.kind != NodeKind::Internal {
                continue;
            }
            if a.queries != b.queries {
                assert_eq!(a.queries, 0);
                zeroed += 1;
            }
        }
        // every node on the path had just been queried, so all of them changed
        assert_eq!(zeroed, t.height() as usize);
        assert_eq!(payload(&t), bits);
    }

    #[test]
    fn flatten_fires_at_threshold_and_preserves_answers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bits: Vec<bool> = (0..1800).map(|_| rng.gen()).collect();
        let mut t = tree_from(&bits, wide_cfg());
        t.set_event_log(true);
        let before = answers(&mut tree_from(&bits, wide_cfg()));
        let v = t.nodes().into_iter().find(|n| n.kind == NodeKind::Internal && n.level == 1).unwrap();
        assert!(t.height() >= 2);
        let start = offset_of(&t, &v.path);
        for q in 0..v.size {
            assert_eq!(t.node_info(&v.path).unwrap().kind, NodeKind::Internal, "flattened early at {q}");
            t.access(start + q);
        }
        assert_eq!(t.node_info(&v.path).unwrap().kind, NodeKind::Static);
        assert_eq!(t.take_events(), vec![Event::Flatten { size: v.size, level: 1 }]);
        assert_valid(&t);
        assert_eq!(answers(&mut t), before);
    }

    #[test]
    fn interrupted_query_run_does_not_flatten() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let bits: Vec<bool> = (0..1800).map(|_| rng.gen()).collect();
        let mut t = tree_from(&bits, wide_cfg());
        let v = t.nodes().into_iter().find(|n| n.kind == NodeKind::Internal && n.level == 1).unwrap();
        let start = offset_of(&t, &v.path);
        for q in 0..v.size - 1 {
            t.access(start + q);
        }
        let b = bits[start];
        t.update(start, UpdateKind::Write(b as u64));
        for q in 0..v.size - 2 {
            t.access(start + q);
        }
        assert_eq!(t.node_info(&v.path).unwrap().kind, NodeKind::Internal);
        assert_eq!(t.stats().flatten_count, 0);
    }

    #[test]
    fn flatten_cap_is_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<bool> = (0..3000).map(|_| rng.gen()).collect();
        let mut cfg = small_cfg();
        cfg.flatten_cap = 60;
        let mut t = tree_from(&bits, cfg);
        t.set_event_log(true);
        for _ in 0..20_000 {
            t.rank1(rng.gen_range(0..=3000));
        }
        let ev = t.take_events();
        assert!(!ev.is_empty());
        for e in ev {
            let Event::Flatten { size, .. } = e else { panic!("unexpected {e:?}") };
            assert!(size <= 60);
        }
        assert_valid(&t);
    }

    #[test]
    fn split_static_shapes() {
        let cfg = TreeConfig {
            arity: 16,
            leaf_cap: 96,
            flatten_cap: usize::MAX,
        };
        let mut stats = EngineStats::default();
        let mut events = None;
        let mut cx = Cx {
            layout: &Bits,
            cfg: &cfg,
            stats: &mut stats,
            events: &mut events,
        };
        // level 1, t = a·b·3/4 = 1152 → 16 leaves of 72 = (3/4)b
        let leaf = StaticLeaf::from_bits((0..1152).map(|i| i % 3 == 0));
        let node = cx.explode(leaf, 1);
        assert_eq!(node.children.len(), 16);
        for k in 0..16 {
            assert_eq!(node.sums.size(k), 72);
            assert!(matches!(node.children[k], Node::Dyn(_)));
        }
        // level 2 → a static children differing by at most one
        let leaf = StaticLeaf::from_bits((0..20_001).map(|i| i % 7 < 3));
        let node = cx.explode(leaf, 2);
        assert_eq!(node.children.len(), 16);
        let sizes: Vec<usize> = (0..16).map(|k| node.sums.size(k)).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(node.children.iter().all(|c| matches!(c, Node::Static(s) if s.level == 1)));
        assert_eq!(stats.split_count, 2);
    }

    #[test]
    fn update_on_flattened_region_splits_down_to_a_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 4000;
        let mut model: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let mut cfg = small_cfg();
        cfg.flatten_cap = 1000;
        let mut t = tree_from(&model, cfg);
        for _ in 0..20 * n {
            t.access(rng.gen_range(0..n));
        }
        assert!(t.stats().flatten_count > 0);
        assert!(t.nodes().iter().any(|x| x.kind == NodeKind::Static && x.level >= 2));
        assert_valid(&t);
        let snapshot = answers(&mut tree_from(&model, small_cfg()));
        assert_eq!(answers(&mut t), snapshot);
        let statics_before = t.nodes().iter().filter(|x| x.kind == NodeKind::Static).count();
        let pos = rng.gen_range(0..n);
        t.update(pos, UpdateKind::Insert(1));
        model.insert(pos, true);
        assert!(t.stats().split_count > 0);
        assert!(t.nodes().iter().filter(|x| x.kind == NodeKind::Static).count() > statics_before);
        assert_valid(&t);
        assert_eq!(payload(&t), model);
    }

    #[test]
    fn random_ops_against_model_with_validation() {
        for seed in 0..6 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let mut cfg = if seed < 3 { small_cfg() } else { wide_cfg() };
            cfg.flatten_cap = if seed % 2 == 0 { usize::MAX } else { 200 };
            let mut t = Tree::new(Bits, cfg);
            let mut m: Vec<bool> = Vec::new();
            for step in 0..12_000 {
                let phase = step / 4000;
                let n = m.len();
                let r: f64 = rng.gen();
                let (p_ins, p_del) = match phase {
                    0 => (0.5, 0.05),
                    1 => (0.02, 0.02),
                    _ => (0.05, 0.4),
                };
                if r < p_ins || n == 0 {
                    let i = rng.gen_range(0..=n);
                    let v: bool = rng.gen();
                    let out = t.update(i, UpdateKind::Insert(v as u64));
                    assert_eq!(out.ones_before, m_rank1(&m, i));
                    m.insert(i, v);
                } else if r < p_ins + p_del {
                    let i = rng.gen_range(0..n);
                    assert_eq!(t.update(i, UpdateKind::Delete).old, Some(m.remove(i) as u64));
                } else if r < p_ins + p_del + 0.03 {
                    let i = rng.gen_range(0..n);
                    let v: bool = rng.gen();
                    let out = t.update(i, UpdateKind::Write(v as u64));
                    assert_eq!(out.old, Some(m[i] as u64));
                    assert_eq!(out.ones_before, m_rank1(&m, i));
                    m[i] = v;
                } else {
                    match rng.gen_range(0..5) {
                        0 => {
                            let i = rng.gen_range(0..n);
                            assert_eq!(t.access(i), Some(m[i]));
                        }
                        1 => {
                            let i = rng.gen_range(0..n);
                            assert_eq!(t.access_rank(i), Some((m[i], m_rank1(&m, i))));
                        }
                        2 => {
                            let i = rng.gen_range(0..=n);
                            assert_eq!(t.rank1(i), m_rank1(&m, i));
                        }
                        3 => {
                            let j = rng.gen_range(1..=n + 1);
                            assert_eq!(t.select(true, j), m_select(&m, true, j));
                        }
                        _ => {
                            let j = rng.gen_range(1..=n + 1);
                            assert_eq!(t.select(false, j), m_select(&m, false, j));
                        }
                    }
                }
                if step % 97 == 0 {
                    assert_valid(&t);
                    assert_eq!(payload(&t), m);
                }
            }
            assert_valid(&t);
        }
    }

    #[test]
    fn insert_then_delete_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = Tree::new(Bits, small_cfg());
        let mut m: Vec<bool> = Vec::new();
        for _ in 0..1000 {
            let i = rng.gen_range(0..=m.len());
            let v: bool = rng.gen();
            t.update(i, UpdateKind::Insert(v as u64));
            m.insert(i, v);
            assert_valid(&t);
        }
        while !m.is_empty() {
            let i = rng.gen_range(0..m.len());
            assert_eq!(t.update(i, UpdateKind::Delete).old, Some(m.remove(i) as u64));
            assert_valid(&t);
        }
        assert!(t.is_empty());
        assert_eq!(t.height(), 0);
    }

    #[test]
    fn validator_reports_corruption() {
        let bits: Vec<bool> = (0..500).map(|i| i % 5 == 0).collect();
        let mut t = tree_from(&bits, small_cfg());
        assert_valid(&t);
        t.corrupt_sums(&[], 0);
        let v = t.validate();
        assert_eq!(v.len(), 1, "{v:#?}");
        assert_eq!(v[0].path, Vec::<usize>::new());
        assert!(v[0].message.contains("sums entry 0"));
    }

    #[test]
    fn rebuild_preserves_content() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let bits: Vec<bool> = (0..10_000).map(|_| rng.gen()).collect();
        let mut t = tree_from(&bits, small_cfg());
        let before = answers(&mut tree_from(&bits, small_cfg()));
        t.rebuild(small_cfg());
        assert_valid(&t);
        assert_eq!(answers(&mut t), before);
        t.rebuild(TreeConfig {
            arity: 16,
            leaf_cap: 96,
            flatten_cap: usize::MAX,
        });
        assert_valid(&t);
        assert_eq!(payload(&t), bits);
        let empty = Tree::new(Bits, small_cfg());
        assert_eq!(empty.flatten_all().len(), 0);
    }

    #[test]
    fn balancing_laws_after_single_updates() {
        let cfg = TreeConfig {
            arity: 16,
            leaf_cap: 64,
            flatten_cap: usize::MAX,
        };
        let b = cfg.leaf_cap;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut t = Tree::new(Bits, cfg);
        let mut n = 0usize;
        let mut rebalanced = 0;
        for step in 0..20_000 {
            let grow = step < 10_000;
            let before = leaf_spans(&t);
            if n == 0 || (grow && rng.gen_bool(0.8)) || (!grow && rng.gen_bool(0.2)) {
                t.update(rng.gen_range(0..=n), UpdateKind::Insert(1));
                n += 1;
            } else {
                t.update(rng.gen_range(0..n), UpdateKind::Delete);
                n -= 1;
            }
            if t.height() == 0 {
                continue;
            }
            for &(s, z) in &leaf_spans(&t) {
                assert!(z >= b / 4 && z <= b, "leaf size {z}");
                let old = before.iter().any(|&(s0, z0)| s0.abs_diff(s) <= 1 && z0.abs_diff(z) <= 1);
                if !old && before.len() > 1 {
                    rebalanced += 1;
                    assert!(z >= 7 * b / 16 - 1 && z <= 14 * b / 16 - 1, "rebalanced leaf of {z}");
                }
            }
        }
        assert!(rebalanced > 100);
    }
}
