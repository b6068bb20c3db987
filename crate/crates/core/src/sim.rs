//! One simulation run: nodes, channel, mobility and discovery bookkeeping
//! driven by the event queue.

use std::collections::HashMap;
use std::rc::Rc;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::metrics::{bfs_shortest_hops, AggregateReport, Connectivity, DiscoveryRecord};
use crate::mobility::{MobilityState, Position};
use crate::protocol::{
    self, Action, DiscoveryId, Message, NodeId, NodeState, ProtocolParams, RrepOutcome,
    StartOutcome,
};
use crate::radio::{self, Dest, Frame, RangeCheck};
use crate::sim_core::{
    ConfigError, Event, EventQueue, MobilityModel, Protocol, RngStreams, ScenarioConfig, SimTime,
};

#[derive(Debug, Clone)]
pub enum EventKind {
    HelloTick { node: NodeId },
    /// One frame reaching its receivers. All receivers of a transmission
    /// share an arrival time and would hold consecutive sequence numbers, so
    /// they are handled in one event, in id order.
    PacketDelivery { to: Vec<NodeId>, frame: Rc<Frame> },
    MobilityUpdate,
    DiscoveryStart { origin: NodeId, target: NodeId },
    DiscoveryTimeout { origin: NodeId, seq: u32 },
    MetricsSnapshot,
}

impl EventKind {
    fn describe(&self) -> String {
        match self {
            EventKind::HelloTick { node } => format!("hello_tick {node}"),
            EventKind::PacketDelivery { to, frame } => {
                let what = match &frame.payload {
                    Message::Hello { reply } => format!("hello reply={reply}"),
                    Message::Rreq(r) => format!("rreq {}#{} len={}", r.origin, r.seq, r.path.len()),
                    Message::Rrep(r) => format!("rrep {}#{}", r.origin, r.seq),
                };
                let to: Vec<String> = to.iter().map(|n| n.to_string()).collect();
                format!("deliver {} -> [{}]: {what}", frame.src, to.join(" "))
            }
            EventKind::MobilityUpdate => "mobility".to_string(),
            EventKind::DiscoveryStart { origin, target } => format!("start {origin} -> {target}"),
            EventKind::DiscoveryTimeout { origin, seq } => format!("timeout {origin}#{seq}"),
            EventKind::MetricsSnapshot => "snapshot".to_string(),
        }
    }
}

/// One processed event, as recorded when tracing is on.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub time: f64,
    pub seq_no: u64,
    pub what: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub events: u64,
    pub hello_frames: u64,
    pub rreq_frames: u64,
    pub rrep_frames: u64,
    pub deliveries: u64,
    pub lost: u64,
    pub protocol_faults: u64,
}

/// Result of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiscoveryRecord>,
    pub report: AggregateReport,
    pub stats: RunStats,
}

pub struct Simulation {
    config: ScenarioConfig,
    params: ProtocolParams,
    range: RangeCheck,
    queue: EventQueue<EventKind>,
    mobility: MobilityState,
    nodes: Vec<NodeState>,
    rngs: RngStreams,
    rssi_noise: Option<Normal<f64>>,
    records: Vec<DiscoveryRecord>,
    record_index: HashMap<DiscoveryId, usize>,
    /// Connectivity seen so far by each unresolved discovery.
    open_graphs: HashMap<DiscoveryId, Connectivity>,
    graph_cache: Option<(u64, Rc<Connectivity>)>,
    mobility_epoch: u64,
    stats: RunStats,
    trace: Option<Vec<TraceEntry>>,
    finished: bool,
}

impl Simulation {
    /// Validates the config, places nodes and schedules the whole run.
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rngs = RngStreams::new(config.rng_seed);
        let mobility = MobilityState::new(&config, &mut rngs.mobility);
        Ok(Self::build(config, mobility, rngs))
    }

    /// Run on fixed initial positions (typically with the static model).
    pub fn with_positions(
        config: ScenarioConfig,
        positions: Vec<Position>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        if positions.len() != config.node_count {
            return Err(ConfigError::invalid(
                "node_count",
                format!("{} positions given for {} nodes", positions.len(), config.node_count),
            ));
        }
        let mut rngs = RngStreams::new(config.rng_seed);
        let mobility = MobilityState::with_positions(
            positions,
            config.mobility.clone(),
            config.map.clone(),
            &mut rngs.mobility,
        );
        Ok(Self::build(config, mobility, rngs))
    }

    fn build(config: ScenarioConfig, mobility: MobilityState, rngs: RngStreams) -> Self {
        let n = config.node_count;
        let rssi_noise = (config.radio.rssi_noise_db > 0.0)
            .then(|| Normal::new(0.0, config.radio.rssi_noise_db).expect("validated std dev"));
        let mut sim = Simulation {
            params: ProtocolParams::new(config.k_policy, config.hello_period_s),
            range: RangeCheck::new(&config.radio),
            queue: EventQueue::new(),
            mobility,
            nodes: (0..n as u32).map(|i| NodeState::new(NodeId(i))).collect(),
            rngs,
            rssi_noise,
            records: Vec::new(),
            record_index: HashMap::new(),
            open_graphs: HashMap::new(),
            graph_cache: None,
            mobility_epoch: 0,
            stats: RunStats::default(),
            trace: None,
            finished: false,
            config,
        };
        sim.schedule_initial();
        sim
    }

    fn schedule_initial(&mut self) {
        let cfg = &self.config;
        let n = cfg.node_count;
        let end = SimTime::from_secs(cfg.sim_duration_s);
        // HELLO phases staggered evenly over the first period.
        for i in 0..n {
            let at = SimTime::from_secs(cfg.hello_period_s * i as f64 / n as f64);
            self.queue.schedule(at, EventKind::HelloTick { node: NodeId(i as u32) });
        }
        if cfg.mobility != MobilityModel::Static {
            self.queue
                .schedule(SimTime::ZERO + cfg.mobility_tick_s, EventKind::MobilityUpdate);
        }

        // One discovery per flow per second, after neighbor tables settle.
        // Each round draws 2 * flow_count distinct nodes and pairs them up.
        let warmup = 2.0 * cfg.hello_period_s;
        let flows = cfg.flow_count;
        let mut round = warmup;
        let mut starts = Vec::new();
        while round + 1.0 + cfg.discovery_timeout_s <= cfg.sim_duration_s {
            let picks = index::sample(&mut self.rngs.flow_selection, n, 2 * flows);
            for f in 0..flows {
                let origin = NodeId(picks.index(2 * f) as u32);
                let target = NodeId(picks.index(2 * f + 1) as u32);
                let at = round + self.rngs.flow_selection.random::<f64>();
                starts.push((at, origin, target));
            }
            round += 1.0;
        }
        for (at, origin, target) in starts {
            self.queue
                .schedule(SimTime::from_secs(at), EventKind::DiscoveryStart { origin, target });
        }
        self.queue.schedule(end, EventKind::MetricsSnapshot);
    }

    /// Record every processed event from now on.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[TraceEntry]> {
        self.trace.as_deref()
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn positions(&self) -> &[Position] {
        &self.mobility.positions
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    pub fn records(&self) -> &[DiscoveryRecord] {
        &self.records
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    /// Process events up to `end` (clamped to the scenario duration).
    pub fn run_until(&mut self, end: SimTime) -> u64 {
        let end = end.min(SimTime::from_secs(self.config.sim_duration_s));
        let mut queue = std::mem::take(&mut self.queue);
        let n = queue.run_until(end, |q, ev| self.handle(q, ev));
        self.queue = queue;
        self.stats.events += n;
        n
    }

    /// Run the whole scenario and summarize it.
    pub fn run(mut self) -> RunOutput {
        self.run_until(SimTime::from_secs(self.config.sim_duration_s));
        RunOutput {
            report: AggregateReport::from_records(&self.records),
            records: self.records,
            stats: self.stats,
        }
    }

    fn handle(&mut self, q: &mut EventQueue<EventKind>, ev: Event<EventKind>) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                time: ev.fire_at.as_secs(),
                seq_no: ev.seq_no,
                what: ev.kind.describe(),
            });
        }
        match ev.kind {
            EventKind::HelloTick { node } => {
                self.nodes[node.index()]
                    .neighbors
                    .expire(ev.fire_at, self.params.neighbor_ttl_s);
                self.transmit(q, node, Dest::Broadcast, Message::Hello { reply: false });
                q.schedule_in(self.config.hello_period_s, EventKind::HelloTick { node });
            }
            EventKind::MobilityUpdate => self.on_mobility_tick(q),
            EventKind::PacketDelivery { to, frame } => {
                for node in to {
                    self.deliver(q, node, &frame);
                }
            }
            EventKind::DiscoveryStart { origin, target } => self.begin_discovery(q, origin, target),
            EventKind::DiscoveryTimeout { origin, seq } => {
                if protocol::on_discovery_timeout(&mut self.nodes[origin.index()], seq) {
                    self.close_discovery(DiscoveryId { origin, seq }, None, ev.fire_at);
                }
            }
            EventKind::MetricsSnapshot => self.finish(ev.fire_at),
        }
    }

    fn on_mobility_tick(&mut self, q: &mut EventQueue<EventKind>) {
        let dt = self.config.mobility_tick_s;
        self.mobility.advance(dt, &mut self.rngs.mobility);
        self.mobility_epoch += 1;
        if !self.open_graphs.is_empty() {
            let g = self.current_graph();
            for open in self.open_graphs.values_mut() {
                open.union_with(&g);
            }
        }
        q.schedule_in(dt, EventKind::MobilityUpdate);
    }

    fn current_graph(&mut self) -> Rc<Connectivity> {
        match &self.graph_cache {
            Some((epoch, g)) if *epoch == self.mobility_epoch => g.clone(),
            _ => {
                let g = Rc::new(Connectivity::from_positions(
                    &self.mobility.positions,
                    &self.config.radio,
                ));
                self.graph_cache = Some((self.mobility_epoch, g.clone()));
                g
            }
        }
    }

    fn transmit(&mut self, q: &mut EventQueue<EventKind>, src: NodeId, dst: Dest, payload: Message) {
        match &payload {
            Message::Hello { .. } => self.stats.hello_frames += 1,
            Message::Rreq(r) => {
                self.stats.rreq_frames += 1;
                if let Some(&i) = self.record_index.get(&r.id()) {
                    let rec = &mut self.records[i];
                    rec.received.insert(src);
                    rec.transmitted.insert(src);
                }
            }
            Message::Rrep(_) => self.stats.rrep_frames += 1,
        }
        let frame = Frame {
            src,
            dst,
            payload,
            tx_time: q.now(),
        };
        let mut receivers = radio::receivers(&frame, &self.mobility.positions, &self.range);
        let loss_prob = self.config.radio.loss_prob;
        if loss_prob > 0.0 {
            let before = receivers.len();
            let loss = &mut self.rngs.loss;
            receivers.retain(|_| loss.random::<f64>() >= loss_prob);
            self.stats.lost += (before - receivers.len()) as u64;
        }
        if receivers.is_empty() {
            return;
        }
        let at = frame.delivery_time(&self.config.radio);
        q.schedule(
            at,
            EventKind::PacketDelivery {
                to: receivers,
                frame: Rc::new(frame),
            },
        );
    }

    fn send(&mut self, q: &mut EventQueue<EventKind>, src: NodeId, action: Action) {
        match action {
            Action::Broadcast(msg) => self.transmit(q, src, Dest::Broadcast, msg),
            Action::Unicast { to, msg } => self.transmit(q, src, Dest::Unicast(to), msg),
        }
    }

    fn deliver(&mut self, q: &mut EventQueue<EventKind>, to: NodeId, frame: &Frame) {
        self.stats.deliveries += 1;
        let now = q.now();
        match &frame.payload {
            Message::Hello { reply } => {
                let d = self.mobility.positions[frame.src.index()]
                    .distance_to(self.mobility.positions[to.index()]);
                let mut rx = radio::rx_power_dbm(d, &self.config.radio);
                if let Some(noise) = &self.rssi_noise {
                    rx += noise.sample(&mut self.rngs.loss);
                }
                // Noise must not report more power than was sent.
                rx = rx.min(self.config.radio.tx_power_dbm);
                let outcome =
                    self.nodes[to.index()].receive_hello(frame.src, rx, *reply, now, &self.config.radio);
                if let Some(peer) = outcome.reply_to {
                    self.transmit(q, to, Dest::Unicast(peer), Message::Hello { reply: true });
                }
            }
            Message::Rreq(rreq) => {
                if let Some(&i) = self.record_index.get(&rreq.id()) {
                    self.records[i].received.insert(to);
                }
                let node = &mut self.nodes[to.index()];
                let result = match self.config.protocol {
                    Protocol::Prp => protocol::prp_on_rreq(
                        node,
                        rreq,
                        now,
                        &self.params,
                        &mut self.rngs.k_choice,
                    ),
                    Protocol::Flood => protocol::flood_on_rreq(node, rreq),
                };
                match result {
                    Ok(actions) => {
                        for a in actions {
                            self.send(q, to, a);
                        }
                    }
                    Err(_) => self.stats.protocol_faults += 1,
                }
            }
            Message::Rrep(rrep) => match protocol::on_rrep(&mut self.nodes[to.index()], rrep, now) {
                Ok(RrepOutcome::Relay(action)) => self.send(q, to, action),
                Ok(RrepOutcome::Established { seq, path, .. }) => {
                    let hops = path.len() - 1;
                    self.close_discovery(DiscoveryId { origin: to, seq }, Some(hops), now);
                }
                Ok(RrepOutcome::Ignored) => {}
                Err(_) => self.stats.protocol_faults += 1,
            },
        }
    }

    fn begin_discovery(&mut self, q: &mut EventQueue<EventKind>, origin: NodeId, target: NodeId) {
        let now = q.now();
        let graph = self.current_graph();
        let mut record = DiscoveryRecord::new(origin, target, now);
        record.oracle_hops = bfs_shortest_hops(&graph, origin, target);

        let outcome = protocol::start_discovery(
            &mut self.nodes[origin.index()],
            target,
            now,
            self.config.protocol,
            &self.params,
            &mut self.rngs.k_choice,
        );
        match outcome {
            StartOutcome::OneHop => {
                record.succeeded = true;
                record.end = Some(now);
                record.path_hops = Some(1);
                self.records.push(record);
            }
            StartOutcome::Isolated => self.records.push(record),
            StartOutcome::Sent { seq, action } => {
                let id = DiscoveryId { origin, seq };
                record.seq = Some(seq);
                self.record_index.insert(id, self.records.len());
                self.records.push(record);
                self.open_graphs.insert(id, (*graph).clone());
                self.send(q, origin, action);
                q.schedule_in(
                    self.config.discovery_timeout_s,
                    EventKind::DiscoveryTimeout { origin, seq },
                );
            }
        }
    }

    fn close_discovery(&mut self, id: DiscoveryId, path_hops: Option<usize>, now: SimTime) {
        let Some(&i) = self.record_index.get(&id) else {
            return;
        };
        let rec = &mut self.records[i];
        if let Some(graph) = self.open_graphs.remove(&id) {
            rec.oracle_hops = bfs_shortest_hops(&graph, rec.origin, rec.target);
        }
        if let Some(hops) = path_hops {
            rec.succeeded = true;
            rec.path_hops = Some(hops);
            rec.end = Some(now);
        }
    }

    fn finish(&mut self, now: SimTime) {
        if self.finished {
            return;
        }
        self.finished = true;
        let mut open: Vec<DiscoveryId> = self.open_graphs.keys().copied().collect();
        open.sort();
        for id in open {
            if protocol::on_discovery_timeout(&mut self.nodes[id.origin.index()], id.seq) {
                self.close_discovery(id, None, now);
            }
        }
    }
}
