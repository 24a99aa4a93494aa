//! Lifetime counters and the logical space report shared by all facades.

use crate::engine::{EngineStats, SpaceTally};

/// Monotone operation counters. `queries / max(updates, 1)` is the observed
/// query-to-update ratio `q`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LifetimeStats {
    pub queries: u64,
    pub updates: u64,
    /// Internal nodes traversed by queries.
    pub query_visits: u64,
    /// Internal nodes traversed by updates.
    pub update_visits: u64,
    pub flatten_count: u64,
    pub flatten_bits: u64,
    pub split_count: u64,
    pub split_bits: u64,
    pub rebuild_count: u64,
}

impl LifetimeStats {
    pub(crate) fn from_engine(e: &EngineStats, width: u32, queries: u64, updates: u64, rebuilds: u64) -> LifetimeStats {
        LifetimeStats {
            queries,
            updates,
            query_visits: e.query_visits,
            update_visits: e.update_visits,
            flatten_count: e.flatten_count,
            flatten_bits: e.flatten_units * width as u64,
            split_count: e.split_count,
            split_bits: e.split_units * width as u64,
            rebuild_count: rebuilds,
        }
    }

    pub fn internal_visits(&self) -> u64 {
        self.query_visits + self.update_visits
    }

    /// Field-wise sum, used to aggregate the levels of a wavelet matrix.
    pub fn merged(&self, o: &LifetimeStats) -> LifetimeStats {
        LifetimeStats {
            queries: self.queries + o.queries,
            updates: self.updates + o.updates,
            query_visits: self.query_visits + o.query_visits,
            update_visits: self.update_visits + o.update_visits,
            flatten_count: self.flatten_count + o.flatten_count,
            flatten_bits: self.flatten_bits + o.flatten_bits,
            split_count: self.split_count + o.split_count,
            split_bits: self.split_bits + o.split_bits,
            rebuild_count: self.rebuild_count + o.rebuild_count,
        }
    }
}

/// Space in bits, measured by walking the structure under a logical model:
/// leaf payloads occupy whole 64-bit words, and every counter or child
/// reference in an internal node costs `log_n` bits.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpaceReport {
    pub payload_bits: usize,
    /// Unused bits in the last word of dynamic leaves.
    pub dynamic_leaf_slack_bits: usize,
    /// Unused bits in the last word of static leaves.
    pub static_leaf_slack_bits: usize,
    /// Rank directories and select samples of static leaves.
    pub static_index_bits: usize,
    pub internal_node_bits: usize,
    pub total_bits: usize,
    /// `(total - payload) / payload`, or 0 when empty.
    pub overhead_ratio: f64,
}

impl SpaceReport {
    /// `fields_per_child` counts the child reference plus the aggregates kept
    /// per child; each internal node also holds a query counter and a level.
    pub(crate) fn from_tally(payload_bits: usize, t: &SpaceTally, log_n: u32, fields_per_child: usize) -> SpaceReport {
        let word = log_n as usize;
        let internal_node_bits = t.child_slots * fields_per_child * word + t.internal_nodes * 2 * word;
        let total_bits =
            payload_bits + t.dyn_slack_bits + t.static_slack_bits + t.static_index_bits + internal_node_bits;
        let overhead_ratio = if payload_bits == 0 {
            0.0
        } else {
            (total_bits - payload_bits) as f64 / payload_bits as f64
        };
        SpaceReport {
            payload_bits,
            dynamic_leaf_slack_bits: t.dyn_slack_bits,
            static_leaf_slack_bits: t.static_slack_bits,
            static_index_bits: t.static_index_bits,
            internal_node_bits,
            total_bits,
            overhead_ratio,
        }
    }

    /// Component-wise sum; the ratio is recomputed.
    pub fn merged(&self, o: &SpaceReport) -> SpaceReport {
        let payload_bits = self.payload_bits + o.payload_bits;
        let total_bits = self.total_bits + o.total_bits;
        SpaceReport {
            payload_bits,
            dynamic_leaf_slack_bits: self.dynamic_leaf_slack_bits + o.dynamic_leaf_slack_bits,
            static_leaf_slack_bits: self.static_leaf_slack_bits + o.static_leaf_slack_bits,
            static_index_bits: self.static_index_bits + o.static_index_bits,
            internal_node_bits: self.internal_node_bits + o.internal_node_bits,
            total_bits,
            overhead_ratio: if payload_bits == 0 {
                0.0
            } else {
                (total_bits - payload_bits) as f64 / payload_bits as f64
            },
        }
    }
}
