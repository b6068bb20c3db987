//! Origin-side route discovery: starting a request, consuming replies and
//! timing out.

use rand::Rng;

use super::prp::with_selected_forwarders;
use super::{
    Action, DiscoveryStatus, Message, NodeId, NodeState, PendingRoute, ProtocolFault,
    ProtocolParams, RouteStatus, RreqPacket,
};
use crate::sim_core::{Protocol, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub enum StartOutcome {
    /// Target already a one-hop neighbor; no request sent.
    OneHop,
    /// No neighbors, or no eligible forwarder: the request fails at once.
    Isolated,
    /// Request `seq` sent with the given transmission.
    Sent { seq: u32, action: Action },
}

/// Begin a discovery from `node` toward `target`.
pub fn start_discovery<R: Rng>(
    node: &mut NodeState,
    target: NodeId,
    now: SimTime,
    protocol: Protocol,
    params: &ProtocolParams,
    rng: &mut R,
) -> StartOutcome {
    assert_ne!(node.id, target, "source and target must differ");
    node.refresh_neighbors(now, params);
    if node.neighbors.contains(target) {
        return StartOutcome::OneHop;
    }
    if node.neighbors.is_empty() {
        return StartOutcome::Isolated;
    }

    let seq = node.next_seq;
    node.next_seq += 1;
    let rreq = RreqPacket::new(node.id, target, seq);
    node.discovery_mut(rreq.id()).status = DiscoveryStatus::Forwarded;

    let action = match protocol {
        Protocol::Flood => Action::Broadcast(Message::Rreq(rreq)),
        Protocol::Prp => {
            match with_selected_forwarders(node, rreq, params, rng) {
                Some(r) => Action::Broadcast(Message::Rreq(r)),
                None => return StartOutcome::Isolated,
            }
        }
    };
    node.routes.insert(
        seq,
        PendingRoute {
            target,
            started: now,
            status: RouteStatus::Pending,
        },
    );
    StartOutcome::Sent { seq, action }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RrepOutcome {
    /// Relay toward the origin.
    Relay(Action),
    /// First reply at the origin.
    Established {
        seq: u32,
        target: NodeId,
        latency_s: f64,
        path: Vec<NodeId>,
    },
    /// Late or duplicate reply.
    Ignored,
}

/// Handle a route reply at any node on its path.
pub fn on_rrep(
    node: &mut NodeState,
    rrep: &super::RrepPacket,
    now: SimTime,
) -> Result<RrepOutcome, ProtocolFault> {
    let Some(pos) = rrep.path.iter().position(|&n| n == node.id) else {
        return Err(ProtocolFault::NotOnPath);
    };
    if pos > 0 {
        return Ok(RrepOutcome::Relay(Action::Unicast {
            to: rrep.path[pos - 1],
            msg: Message::Rrep(rrep.clone()),
        }));
    }
    if rrep.origin != node.id {
        return Err(ProtocolFault::NotOnPath);
    }
    let route = node
        .routes
        .get_mut(&rrep.seq)
        .ok_or(ProtocolFault::UnknownDiscovery)?;
    if route.status != RouteStatus::Pending {
        return Ok(RrepOutcome::Ignored);
    }
    route.status = RouteStatus::Established;
    Ok(RrepOutcome::Established {
        seq: rrep.seq,
        target: route.target,
        latency_s: now - route.started,
        path: rrep.path.clone(),
    })
}

/// Returns true when the discovery was still pending and is now failed.
pub fn on_discovery_timeout(node: &mut NodeState, seq: u32) -> bool {
    match node.routes.get_mut(&seq) {
        Some(route) if route.status == RouteStatus::Pending => {
            route.status = RouteStatus::TimedOut;
            true
        }
        _ => false,
    }
}
