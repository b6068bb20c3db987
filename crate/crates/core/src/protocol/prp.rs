//! Probabilistic route discovery: each forwarding node picks a reachability
//! parameter K and lets only its n/K farthest neighbors rebroadcast.

use rand::Rng;

use super::{
    answer_at_target, Action, DiscoveryStatus, Message, NodeId, NodeState, ProtocolFault,
    ProtocolParams, RreqPacket,
};
use crate::protocol::NeighborhoodVector;
use crate::sim_core::{KPolicy, SimTime};

pub fn choose_k<R: Rng>(policy: &KPolicy, rng: &mut R) -> u32 {
    match *policy {
        KPolicy::Fixed(k) => k,
        KPolicy::RandomUniform { lo, hi } => rng.random_range(lo..=hi),
    }
}

/// Result of forwarder selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// Farthest first.
    pub chosen: Vec<NodeId>,
    /// Set when a single neighbor was forced through even if blocked.
    pub unblock: bool,
}

/// Pick the `floor(m / K)` farthest eligible neighbors, where `m` counts the
/// neighbors not in `exclude`. When that rounds to zero but a neighbor
/// exists, the single farthest one is chosen and unblocked.
pub fn select_forwarders(nv: &NeighborhoodVector, k: u32, exclude: &[NodeId]) -> Selection {
    assert!(k >= 1, "reachability parameter must be positive");
    let eligible: Vec<NodeId> = nv.ids().filter(|id| !exclude.contains(id)).collect();
    let m = eligible.len();
    let quota = m / k as usize;
    if quota >= 1 {
        Selection {
            chosen: eligible[..quota].to_vec(),
            unblock: false,
        }
    } else if m >= 1 {
        Selection {
            chosen: vec![eligible[0]],
            unblock: true,
        }
    } else {
        Selection {
            chosen: Vec::new(),
            unblock: false,
        }
    }
}

/// Fill in a fresh selection of far neighbors on `out`, whose path already
/// ends with this node. `None` at a dead end (every neighbor on the path).
pub(super) fn with_selected_forwarders<R: Rng>(
    node: &mut NodeState,
    mut out: RreqPacket,
    params: &ProtocolParams,
    rng: &mut R,
) -> Option<RreqPacket> {
    let k = choose_k(&params.k_policy, rng);
    node.discovery_mut(out.id()).k_used = Some(k);
    let sel = select_forwarders(&node.neighbors, k, &out.path);
    if sel.chosen.is_empty() {
        return None;
    }
    out.forwarders = sel.chosen;
    out.unblock = sel.unblock;
    Some(out)
}

/// Handle a route request delivered to `node` under PRP.
pub fn prp_on_rreq<R: Rng>(
    node: &mut NodeState,
    rreq: &RreqPacket,
    now: SimTime,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<Vec<Action>, ProtocolFault> {
    if !rreq.path_is_well_formed() {
        return Err(ProtocolFault::MalformedPath);
    }
    if node.id == rreq.target {
        return Ok(answer_at_target(node, rreq));
    }

    let id = rreq.id();
    let listed = rreq.forwarders.contains(&node.id);
    let state = node.discovery_mut(id);
    if !listed {
        // Receivers outside the forwarder list are blocked, except by an
        // unblocking request, which addresses only its single listed node.
        if state.status == DiscoveryStatus::Unseen && !rreq.unblock {
            state.status = DiscoveryStatus::Blocked;
        }
        return Ok(Vec::new());
    }
    match state.status {
        DiscoveryStatus::Forwarded => return Ok(Vec::new()),
        DiscoveryStatus::Blocked if !rreq.unblock => return Ok(Vec::new()),
        _ => {}
    }
    state.status = DiscoveryStatus::Forwarded;

    node.refresh_neighbors(now, params);
    if node.neighbors.contains(rreq.target) {
        let direct = rreq.extended(node.id, vec![rreq.target], false);
        return Ok(vec![Action::Unicast {
            to: rreq.target,
            msg: Message::Rreq(direct),
        }]);
    }
    let out = rreq.extended(node.id, Vec::new(), false);
    Ok(with_selected_forwarders(node, out, params, rng)
        .map(|r| Action::Broadcast(Message::Rreq(r)))
        .into_iter()
        .collect())
}
