//! HELLO-driven one-hop neighbor table, kept farthest-first.

use std::cmp::Ordering;

use super::NodeId;
use crate::radio::{self, LinkBudget};
use crate::sim_core::{RadioConfig, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    pub distance_m: f64,
    pub last_heard: SimTime,
}

/// Neighbors sorted by estimated distance, farthest first. Equal distances
/// are ordered by node id so the order is total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborhoodVector {
    entries: Vec<NeighborEntry>,
}

fn farthest_first(a: &NeighborEntry, b: &NeighborEntry) -> Ordering {
    b.distance_m
        .total_cmp(&a.distance_m)
        .then(a.neighbor.cmp(&b.neighbor))
}

impl NeighborhoodVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of neighbors (the `n` that K divides).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NeighborEntry] {
        &self.entries
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.neighbor)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.iter().any(|e| e.neighbor == id)
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.entries.iter().find(|e| e.neighbor == id)
    }

    /// Insert or refresh an entry, keeping ids unique and the order intact.
    pub fn upsert(&mut self, neighbor: NodeId, distance_m: f64, now: SimTime) {
        debug_assert!(distance_m >= 0.0);
        let entry = NeighborEntry {
            neighbor,
            distance_m,
            last_heard: now,
        };
        let Some(mut i) = self.entries.iter().position(|e| e.neighbor == neighbor) else {
            let at = self
                .entries
                .partition_point(|e| farthest_first(e, &entry) == Ordering::Less);
            self.entries.insert(at, entry);
            return;
        };
        // Refresh in place, then shift the entry to its sorted slot.
        self.entries[i] = entry;
        while i > 0 && farthest_first(&self.entries[i - 1], &self.entries[i]) == Ordering::Greater {
            self.entries.swap(i - 1, i);
            i -= 1;
        }
        while i + 1 < self.entries.len()
            && farthest_first(&self.entries[i], &self.entries[i + 1]) == Ordering::Greater
        {
            self.entries.swap(i, i + 1);
            i += 1;
        }
    }

    /// Drop entries not heard within `max_age_s`.
    pub fn expire(&mut self, now: SimTime, max_age_s: f64) {
        self.entries.retain(|e| now - e.last_heard <= max_age_s);
    }
}

/// What a node should do after processing a HELLO.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HelloOutcome {
    /// Set when the sender was never heard before and the HELLO was not
    /// itself a reply: answer so the newcomer learns about us.
    pub reply_to: Option<NodeId>,
}

/// Estimate the sender's distance from the received power and record it.
pub fn on_hello(
    nv: &mut NeighborhoodVector,
    first_contact: bool,
    sender: NodeId,
    rx_power_dbm: f64,
    is_reply: bool,
    now: SimTime,
    radio_cfg: &RadioConfig,
) -> HelloOutcome {
    let budget = LinkBudget::new(radio_cfg.tx_power_dbm, rx_power_dbm, radio_cfg.frequency_mhz);
    let distance_m = radio::distance_from_rssi(&budget) * 1000.0;
    nv.upsert(sender, distance_m.max(0.0), now);
    HelloOutcome {
        reply_to: (first_contact && !is_reply).then_some(sender),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: f64) -> SimTime {
        SimTime::from_secs(s)
    }

    fn distances(nv: &NeighborhoodVector) -> Vec<(u32, f64)> {
        nv.entries()
            .iter()
            .map(|e| (e.neighbor.0, (e.distance_m * 1e6).round() / 1e6))
            .collect()
    }

    fn hello(nv: &mut NeighborhoodVector, sender: u32, d_m: f64, now: f64) -> HelloOutcome {
        let radio = RadioConfig::default();
        let rx = radio::rx_power_dbm(d_m, &radio);
        on_hello(nv, true, NodeId(sender), rx, false, t(now), &radio)
    }

    #[test]
    fn first_hello_creates_singleton() {
        let mut nv = NeighborhoodVector::new();
        let out = hello(&mut nv, 7, 40.0, 0.0);
        assert_eq!(distances(&nv), vec![(7, 40.0)]);
        assert_eq!(out.reply_to, Some(NodeId(7)));
    }

    #[test]
    fn insertion_keeps_farthest_first() {
        let mut nv = NeighborhoodVector::new();
        hello(&mut nv, 1, 90.0, 0.0);
        hello(&mut nv, 2, 30.0, 0.0);
        hello(&mut nv, 3, 60.0, 0.0);
        assert_eq!(distances(&nv), vec![(1, 90.0), (3, 60.0), (2, 30.0)]);
    }

    #[test]
    fn reheard_entry_updates_in_place() {
        let mut nv = NeighborhoodVector::new();
        hello(&mut nv, 1, 90.0, 0.0);
        hello(&mut nv, 2, 30.0, 0.0);
        hello(&mut nv, 1, 20.0, 1.0);
        assert_eq!(distances(&nv), vec![(2, 30.0), (1, 20.0)]);
        assert_eq!(nv.get(NodeId(1)).unwrap().last_heard, t(1.0));
    }

    #[test]
    fn replies_do_not_trigger_replies() {
        let radio = RadioConfig::default();
        let mut nv = NeighborhoodVector::new();
        let rx = radio::rx_power_dbm(10.0, &radio);
        let out = on_hello(&mut nv, true, NodeId(4), rx, true, t(0.0), &radio);
        assert_eq!(out.reply_to, None);
        let out = on_hello(&mut nv, false, NodeId(4), rx, false, t(1.0), &radio);
        assert_eq!(out.reply_to, None);
    }

    proptest::proptest! {
        #[test]
        fn order_and_uniqueness_hold(ops in proptest::collection::vec((0u32..12, 0.0f64..100.0), 0..80)) {
            let mut nv = NeighborhoodVector::new();
            for (i, (id, d)) in ops.iter().enumerate() {
                nv.upsert(NodeId(*id), *d, t(i as f64));
            }
            let e = nv.entries();
            proptest::prop_assert!(e.windows(2).all(|w| farthest_first(&w[0], &w[1]) == Ordering::Less));
            let mut ids: Vec<u32> = e.iter().map(|x| x.neighbor.0).collect();
            ids.sort();
            ids.dedup();
            proptest::prop_assert_eq!(ids.len(), e.len());
            for (id, _) in &ops {
                let last = ops.iter().rev().find(|(j, _)| j == id).unwrap().1;
                proptest::prop_assert_eq!(nv.get(NodeId(*id)).unwrap().distance_m, last);
            }
        }
    }

    #[test]
    fn stale_entries_expire() {
        let mut nv = NeighborhoodVector::new();
        hello(&mut nv, 1, 50.0, 0.0);
        hello(&mut nv, 2, 60.0, 1.5);
        nv.expire(t(2.0), 2.0);
        assert_eq!(nv.len(), 2);
        nv.expire(t(2.5), 2.0);
        assert_eq!(distances(&nv), vec![(2, 60.0)]);
    }

    #[test]
    fn coincident_sender_is_distance_zero() {
        let radio = RadioConfig::default();
        let mut nv = NeighborhoodVector::new();
        on_hello(&mut nv, true, NodeId(1), radio.tx_power_dbm, false, t(0.0), &radio);
        assert!(nv.get(NodeId(1)).unwrap().distance_m < 0.02);
    }
}
