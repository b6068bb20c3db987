//! Per-node protocol state: neighbor tables, the PRP path-discovery rules,
//! the blind-flooding baseline and origin-side route bookkeeping.

mod discovery;
mod flood;
mod neighbor;
mod prp;

use std::collections::{HashMap, HashSet};
use std::fmt;

pub use discovery::{on_discovery_timeout, on_rrep, start_discovery, RrepOutcome, StartOutcome};
pub use flood::flood_on_rreq;
pub use neighbor::{on_hello, HelloOutcome, NeighborEntry, NeighborhoodVector};
pub use prp::{choose_k, prp_on_rreq, select_forwarders, Selection};

use crate::sim_core::{KPolicy, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Identifies one route discovery network-wide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiscoveryId {
    pub origin: NodeId,
    pub seq: u32,
}

/// Route request. `forwarders` lists the receivers allowed to rebroadcast;
/// every other receiver treats itself as blocked for this discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct RreqPacket {
    pub origin: NodeId,
    pub target: NodeId,
    pub seq: u32,
    pub path: Vec<NodeId>,
    pub forwarders: Vec<NodeId>,
    pub unblock: bool,
}

impl RreqPacket {
    pub fn new(origin: NodeId, target: NodeId, seq: u32) -> Self {
        RreqPacket {
            origin,
            target,
            seq,
            path: vec![origin],
            forwarders: Vec::new(),
            unblock: false,
        }
    }

    pub fn id(&self) -> DiscoveryId {
        DiscoveryId {
            origin: self.origin,
            seq: self.seq,
        }
    }

    /// Non-empty, starts at the origin, no node twice.
    pub fn path_is_well_formed(&self) -> bool {
        if self.path.first() != Some(&self.origin) {
            return false;
        }
        let mut seen = HashSet::with_capacity(self.path.len());
        self.path.iter().all(|n| seen.insert(*n))
    }

    /// Copy of this request as rebroadcast by `via`.
    fn extended(&self, via: NodeId, forwarders: Vec<NodeId>, unblock: bool) -> RreqPacket {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(via);
        RreqPacket {
            origin: self.origin,
            target: self.target,
            seq: self.seq,
            path,
            forwarders,
            unblock,
        }
    }
}

/// Route reply carrying the full discovered path, origin first.
#[derive(Debug, Clone, PartialEq)]
pub struct RrepPacket {
    pub origin: NodeId,
    pub target: NodeId,
    pub seq: u32,
    pub path: Vec<NodeId>,
}

impl RrepPacket {
    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello { reply: bool },
    Rreq(RreqPacket),
    Rrep(RrepPacket),
}

impl Message {
    /// Canonical on-air size, used only for serialization delay.
    pub fn size_bytes(&self) -> usize {
        match self {
            Message::Hello { .. } => 64,
            Message::Rreq(_) | Message::Rrep(_) => 512,
        }
    }
}

/// Transmission requested by a protocol handler.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Broadcast(Message),
    Unicast { to: NodeId, msg: Message },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolFault {
    #[error("route request with a malformed path")]
    MalformedPath,
    #[error("route reply for an unknown discovery")]
    UnknownDiscovery,
    #[error("route reply delivered to a node not on its path")]
    NotOnPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscoveryStatus {
    #[default]
    Unseen,
    Forwarded,
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DiscoveryState {
    pub status: DiscoveryStatus,
    pub k_used: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RouteStatus {
    Pending,
    Established,
    TimedOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PendingRoute {
    target: NodeId,
    started: SimTime,
    status: RouteStatus,
}

/// Protocol settings shared by all nodes of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub k_policy: KPolicy,
    /// Neighbor entries older than this are dropped before use.
    pub neighbor_ttl_s: f64,
}

impl ProtocolParams {
    pub fn new(k_policy: KPolicy, hello_period_s: f64) -> Self {
        ProtocolParams {
            k_policy,
            neighbor_ttl_s: 2.0 * hello_period_s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub neighbors: NeighborhoodVector,
    heard: HashSet<NodeId>,
    discoveries: HashMap<DiscoveryId, DiscoveryState>,
    routes: HashMap<u32, PendingRoute>,
    next_seq: u32,
}

impl NodeState {
    pub fn new(id: NodeId) -> Self {
        NodeState {
            id,
            neighbors: NeighborhoodVector::new(),
            heard: HashSet::new(),
            discoveries: HashMap::new(),
            routes: HashMap::new(),
            next_seq: 0,
        }
    }

    pub fn discovery(&self, id: DiscoveryId) -> DiscoveryState {
        self.discoveries.get(&id).copied().unwrap_or_default()
    }

    fn discovery_mut(&mut self, id: DiscoveryId) -> &mut DiscoveryState {
        self.discoveries.entry(id).or_default()
    }

    /// Process a HELLO from `sender` heard at `rx_power_dbm`.
    pub fn receive_hello(
        &mut self,
        sender: NodeId,
        rx_power_dbm: f64,
        is_reply: bool,
        now: SimTime,
        radio: &crate::sim_core::RadioConfig,
    ) -> HelloOutcome {
        let first_contact = self.heard.insert(sender);
        on_hello(
            &mut self.neighbors,
            first_contact,
            sender,
            rx_power_dbm,
            is_reply,
            now,
            radio,
        )
    }

    fn refresh_neighbors(&mut self, now: SimTime, params: &ProtocolParams) {
        self.neighbors.expire(now, params.neighbor_ttl_s);
    }
}

/// Target side of both protocols: answer the first copy of each request.
fn answer_at_target(node: &mut NodeState, rreq: &RreqPacket) -> Vec<Action> {
    let state = node.discovery_mut(rreq.id());
    if state.status == DiscoveryStatus::Forwarded {
        return Vec::new();
    }
    state.status = DiscoveryStatus::Forwarded;
    let mut path = rreq.path.clone();
    path.push(node.id);
    let prev = rreq.path[rreq.path.len() - 1];
    vec![Action::Unicast {
        to: prev,
        msg: Message::Rrep(RrepPacket {
            origin: rreq.origin,
            target: rreq.target,
            seq: rreq.seq,
            path,
        }),
    }]
}
