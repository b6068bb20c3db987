//! Blind flooding with duplicate suppression.

use super::{answer_at_target, Action, DiscoveryStatus, Message, NodeState, ProtocolFault, RreqPacket};

/// Every node rebroadcasts the first copy it receives. The target also
/// answers that first copy with a route reply.
pub fn flood_on_rreq(node: &mut NodeState, rreq: &RreqPacket) -> Result<Vec<Action>, ProtocolFault> {
    if !rreq.path_is_well_formed() {
        return Err(ProtocolFault::MalformedPath);
    }
    if node.id == rreq.target {
        let mut actions = answer_at_target(node, rreq);
        if !actions.is_empty() {
            actions.push(rebroadcast(node, rreq));
        }
        return Ok(actions);
    }
    let state = node.discovery_mut(rreq.id());
    if state.status == DiscoveryStatus::Forwarded {
        return Ok(Vec::new());
    }
    state.status = DiscoveryStatus::Forwarded;
    Ok(vec![rebroadcast(node, rreq)])
}

fn rebroadcast(node: &NodeState, rreq: &RreqPacket) -> Action {
    Action::Broadcast(Message::Rreq(rreq.extended(node.id, Vec::new(), false)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::NodeId;

    fn req() -> RreqPacket {
        let mut r = RreqPacket::new(NodeId(0), NodeId(9), 3);
        r.path.push(NodeId(2));
        r
    }

    #[test]
    fn first_reception_rebroadcasts() {
        let mut node = NodeState::new(NodeId(4));
        let out = flood_on_rreq(&mut node, &req()).unwrap();
        match &out[..] {
            [Action::Broadcast(Message::Rreq(r))] => {
                assert_eq!(r.path, vec![NodeId(0), NodeId(2), NodeId(4)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_dropped() {
        let mut node = NodeState::new(NodeId(4));
        flood_on_rreq(&mut node, &req()).unwrap();
        assert!(flood_on_rreq(&mut node, &req()).unwrap().is_empty());
    }

    #[test]
    fn target_replies_and_rebroadcasts_once() {
        let mut node = NodeState::new(NodeId(9));
        let out = flood_on_rreq(&mut node, &req()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(matches!(
            &out[0],
            Action::Unicast { to: NodeId(2), msg: Message::Rrep(_) }
        ));
        assert!(matches!(&out[1], Action::Broadcast(Message::Rreq(_))));
        assert!(flood_on_rreq(&mut node, &req()).unwrap().is_empty());
    }
}
