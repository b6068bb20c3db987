//! Per-discovery records, aggregate metrics and the BFS hop-count oracle.

use std::collections::{BTreeSet, VecDeque};

use crate::mobility::Position;
use crate::protocol::NodeId;
use crate::radio::RangeCheck;
use crate::sim_core::{RadioConfig, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("latency is undefined for a failed discovery")]
    NotSucceeded,
}

/// Everything observed about one route discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryRecord {
    pub origin: NodeId,
    pub target: NodeId,
    pub seq: Option<u32>,
    pub start: SimTime,
    pub end: Option<SimTime>,
    /// Nodes holding the request at least once (`r`). The origin joins when it
    /// actually transmits.
    pub received: BTreeSet<NodeId>,
    /// Nodes that transmitted the request (`t`), broadcast or unicast.
    pub transmitted: BTreeSet<NodeId>,
    pub succeeded: bool,
    pub path_hops: Option<usize>,
    pub oracle_hops: Option<usize>,
}

impl DiscoveryRecord {
    pub fn new(origin: NodeId, target: NodeId, start: SimTime) -> Self {
        DiscoveryRecord {
            origin,
            target,
            seq: None,
            start,
            end: None,
            received: BTreeSet::new(),
            transmitted: BTreeSet::new(),
            succeeded: false,
            path_hops: None,
            oracle_hops: None,
        }
    }

    /// Saved-rebroadcast ratio, `None` when no request was ever sent.
    pub fn srb(&self) -> Option<f64> {
        srb(self.received.len(), self.transmitted.len())
    }

    /// Established hops over oracle hops, for routes found by a request.
    /// Neighbor-table hits (no request sent) have no discovered path to grade.
    pub fn stretch(&self) -> Option<f64> {
        if self.received.is_empty() {
            return None;
        }
        match (self.succeeded, self.path_hops, self.oracle_hops) {
            (true, Some(p), Some(o)) if o > 0 => Some(p as f64 / o as f64),
            _ => None,
        }
    }
}

/// `(r - t) / r`; `None` when `r` is zero.
pub fn srb(r: usize, t: usize) -> Option<f64> {
    if r == 0 {
        return None;
    }
    debug_assert!(t <= r, "more transmitters ({t}) than receivers ({r})");
    Some((r as f64 - t as f64) / r as f64)
}

pub fn success_rate(records: &[DiscoveryRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let ok = records.iter().filter(|r| r.succeeded).count();
    Some(ok as f64 / records.len() as f64)
}

pub fn latency(record: &DiscoveryRecord) -> Result<f64, MetricsError> {
    match (record.succeeded, record.end) {
        (true, Some(end)) => Ok(end - record.start),
        _ => Err(MetricsError::NotSucceeded),
    }
}

/// Mean and 95% normal-approximation half-width. The values are summed in
/// sorted order so the result does not depend on input order.
pub fn mean_ci(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return Some((mean, 0.0));
    }
    let mut sq: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    sq.sort_by(f64::total_cmp);
    let var = sq.iter().sum::<f64>() / (n - 1.0);
    Some((mean, 1.96 * (var / n).sqrt()))
}

/// Aggregate of one run's discoveries.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub discovery_count: usize,
    pub success_rate: Option<f64>,
    pub mean_srb: Option<f64>,
    pub srb_ci: Option<f64>,
    /// Records without any request transmission, left out of SRB.
    pub srb_excluded: usize,
    pub mean_latency_s: Option<f64>,
    pub mean_path_stretch: Option<f64>,
}

impl AggregateReport {
    pub fn from_records(records: &[DiscoveryRecord]) -> Self {
        let srbs: Vec<f64> = records.iter().filter_map(DiscoveryRecord::srb).collect();
        let latencies: Vec<f64> = records.iter().filter_map(|r| latency(r).ok()).collect();
        let stretches: Vec<f64> = records.iter().filter_map(DiscoveryRecord::stretch).collect();
        let srb_stats = mean_ci(&srbs);
        AggregateReport {
            discovery_count: records.len(),
            success_rate: success_rate(records),
            mean_srb: srb_stats.map(|s| s.0),
            srb_ci: srb_stats.map(|s| s.1),
            srb_excluded: records.len() - srbs.len(),
            mean_latency_s: mean_ci(&latencies).map(|s| s.0),
            mean_path_stretch: mean_ci(&stretches).map(|s| s.0),
        }
    }
}

/// Symmetric connectivity graph as a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    n: usize,
    adj: Vec<bool>,
}

impl Connectivity {
    pub fn empty(n: usize) -> Self {
        Connectivity {
            n,
            adj: vec![false; n * n],
        }
    }

    /// In-range graph of the given positions.
    pub fn from_positions(positions: &[Position], radio_cfg: &RadioConfig) -> Self {
        let range = RangeCheck::new(radio_cfg);
        let n = positions.len();
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if range.reaches(positions[i], positions[j]) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a * self.n + b] = true;
        self.adj[b * self.n + a] = true;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.n + b]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Add every edge of `other` (same node set).
    pub fn union_with(&mut self, other: &Connectivity) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.adj.iter_mut().zip(&other.adj) {
            *a |= *b;
        }
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[a * self.n..(a + 1) * self.n];
        row.iter().enumerate().filter(|(_, &e)| e).map(|(i, _)| i)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.reachable_from(0).iter().all(|&r| r)
    }

    fn reachable_from(&self, src: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[src] = true;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Exact minimum hop count from `src` to `dst`, `None` when unreachable.
pub fn bfs_shortest_hops(graph: &Connectivity, src: NodeId, dst: NodeId) -> Option<usize> {
    let (s, d) = (src.index(), dst.index());
    if s == d {
        return Some(0);
    }
    let mut dist = vec![usize::MAX; graph.node_count()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in graph.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                if v == d {
                    return Some(dist[v]);
                }
                queue.push_back(v);
            }
        }
    }
    None
}
