//! Free-space channel model.
//!
//! Frequencies are in MHz and distances in km so that the 32.45 dB constant of
//! the free-space formula is dimensionally consistent.

use crate::sim_core::{RadioConfig, SimTime};
use crate::mobility::Position;
use crate::protocol::{Message, NodeId};

const FSPL_CONSTANT_DB: f64 = 32.45;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RadioError {
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("frequency must be positive, got {0} MHz")]
    NonPositiveFrequency(f64),
}

/// Free-space path loss in dB at `distance_km` and `frequency_mhz`.
pub fn path_loss_at(distance_km: f64, frequency_mhz: f64) -> Result<f64, RadioError> {
    if !(distance_km > 0.0) {
        return Err(RadioError::NonPositiveDistance(distance_km));
    }
    if !(frequency_mhz > 0.0) {
        return Err(RadioError::NonPositiveFrequency(frequency_mhz));
    }
    Ok(FSPL_CONSTANT_DB + 20.0 * distance_km.log10() + 20.0 * frequency_mhz.log10())
}

/// Transmit power, received power and the path loss between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub rx_power_dbm: f64,
    pub path_loss_db: f64,
    pub frequency_mhz: f64,
}

impl LinkBudget {
    pub fn new(tx_power_dbm: f64, rx_power_dbm: f64, frequency_mhz: f64) -> Self {
        assert!(frequency_mhz > 0.0, "frequency must be positive");
        LinkBudget {
            tx_power_dbm,
            rx_power_dbm,
            path_loss_db: tx_power_dbm - rx_power_dbm,
            frequency_mhz,
        }
    }
}

/// Distance in km implied by a measured path loss (inverse of [`path_loss_at`]).
pub fn distance_from_rssi(budget: &LinkBudget) -> f64 {
    let exponent =
        (budget.path_loss_db - FSPL_CONSTANT_DB - 20.0 * budget.frequency_mhz.log10()) / 20.0;
    10f64.powf(exponent)
}

/// Received power for a frame sent over `distance_m`, without noise.
pub fn rx_power_dbm(distance_m: f64, radio: &RadioConfig) -> f64 {
    match path_loss_at(distance_m / 1000.0, radio.frequency_mhz) {
        Ok(loss) => radio.tx_power_dbm - loss,
        // Coincident antennas: no measurable loss.
        Err(_) => radio.tx_power_dbm,
    }
}

/// Whether a frame from `a` reaches `b`. Coincident positions are in range.
pub fn in_range(a: Position, b: Position, radio: &RadioConfig) -> bool {
    let d_m = a.distance_to(b);
    if d_m == 0.0 {
        return true;
    }
    match path_loss_at(d_m / 1000.0, radio.frequency_mhz) {
        Ok(loss) => loss <= radio.max_path_loss_db(),
        Err(_) => false,
    }
}

/// Range test equivalent to [`in_range`] for one radio configuration, done on
/// squared distances. Path loss is strictly increasing in distance, so
/// `loss(d) <= budget` iff `d <= d_max` with `d_max` from the inverse formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeCheck {
    max_range_sq_m2: f64,
}

impl RangeCheck {
    pub fn new(radio: &RadioConfig) -> Self {
        let budget = LinkBudget::new(
            radio.tx_power_dbm,
            radio.rx_sensitivity_dbm(),
            radio.frequency_mhz,
        );
        let max_m = distance_from_rssi(&budget) * 1000.0;
        RangeCheck {
            max_range_sq_m2: max_m * max_m,
        }
    }

    pub fn max_range_m(&self) -> f64 {
        self.max_range_sq_m2.sqrt()
    }

    pub fn reaches(&self, a: Position, b: Position) -> bool {
        let (dx, dy) = (a.x - b.x, a.y - b.y);
        dx * dx + dy * dy <= self.max_range_sq_m2
    }
}

/// Destination of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dest {
    Broadcast,
    Unicast(NodeId),
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub src: NodeId,
    pub dst: Dest,
    pub payload: Message,
    pub tx_time: SimTime,
}

impl Frame {
    /// Channel delay plus serialization time of the payload.
    pub fn airtime_s(&self, radio: &RadioConfig) -> f64 {
        radio.channel_delay_s + (self.payload.size_bytes() * 8) as f64 / radio.bandwidth_bps
    }

    pub fn delivery_time(&self, radio: &RadioConfig) -> SimTime {
        self.tx_time + self.airtime_s(radio)
    }
}

/// Receivers of `frame` given current positions: all in-range nodes other
/// than the sender for broadcast, or the destination if it is in range.
pub fn receivers(frame: &Frame, positions: &[Position], range: &RangeCheck) -> Vec<NodeId> {
    let src = positions[frame.src.index()];
    match frame.dst {
        Dest::Broadcast => positions
            .iter()
            .enumerate()
            .filter(|&(i, &p)| i != frame.src.index() && range.reaches(src, p))
            .map(|(i, _)| NodeId(i as u32))
            .collect(),
        Dest::Unicast(dst) => {
            if dst != frame.src && range.reaches(src, positions[dst.index()]) {
                vec![dst]
            } else {
                Vec::new()
            }
        }
    }
}
