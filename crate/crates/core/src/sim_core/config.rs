//! Scenario configuration, loaded from TOML.
//!
//! Every field has a default; unknown keys are rejected so a typo never
//! silently falls back to a default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::radio;

/// Which route-discovery scheme the nodes run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Prp,
    Flood,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Prp => "prp",
            Protocol::Flood => "flood",
        })
    }
}

/// How a forwarding node picks its reachability parameter K.
///
/// Written in config files as `"fixed:K"` or `"random:LO-HI"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(try_from = "String")]
pub enum KPolicy {
    Fixed(u32),
    RandomUniform { lo: u32, hi: u32 },
}

impl KPolicy {
    fn validate(&self) -> Result<(), ConfigError> {
        let min_k = if cfg!(feature = "degenerate-k") { 1 } else { 2 };
        match *self {
            KPolicy::Fixed(k) if k < min_k => Err(ConfigError::invalid(
                "k_policy",
                format!("fixed K must be at least 2, got {k}"),
            )),
            KPolicy::RandomUniform { lo, hi } if lo < 2 || lo > hi => Err(ConfigError::invalid(
                "k_policy",
                format!("random K bounds must satisfy 2 <= lo <= hi, got {lo}-{hi}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPolicy::Fixed(k) => write!(f, "fixed:{k}"),
            KPolicy::RandomUniform { lo, hi } => write!(f, "random:{lo}-{hi}"),
        }
    }
}

impl FromStr for KPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid k_policy `{s}` (expected `fixed:K` or `random:LO-HI`)");
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "fixed" => rest.trim().parse().map(KPolicy::Fixed).map_err(|_| bad()),
            "random" => {
                let (lo, hi) = rest.split_once('-').ok_or_else(bad)?;
                let lo = lo.trim().parse().map_err(|_| bad())?;
                let hi = hi.trim().parse().map_err(|_| bad())?;
                Ok(KPolicy::RandomUniform { lo, hi })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for KPolicy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "RawMobility")]
pub enum MobilityModel {
    Static,
    RandomWaypoint {
        max_speed_mps: f64,
        pause_s: f64,
    },
    /// Bounded random steps with reflection at the map edges.
    RestrictedRandomWalk {
        max_step_m: f64,
        max_speed_mps: f64,
    },
}

/// Flat form of the `[mobility]` section. Keys that do not belong to the
/// selected model are rejected rather than ignored.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMobility {
    model: String,
    max_speed_mps: Option<f64>,
    pause_s: Option<f64>,
    max_step_m: Option<f64>,
}

impl TryFrom<RawMobility> for MobilityModel {
    type Error = String;

    fn try_from(raw: RawMobility) -> Result<Self, Self::Error> {
        let reject = |key: &str, set: bool| {
            if set {
                Err(format!("unknown field `{key}` for mobility model `{}`", raw.model))
            } else {
                Ok(())
            }
        };
        match raw.model.as_str() {
            "static" => {
                reject("max_speed_mps", raw.max_speed_mps.is_some())?;
                reject("pause_s", raw.pause_s.is_some())?;
                reject("max_step_m", raw.max_step_m.is_some())?;
                Ok(MobilityModel::Static)
            }
            "random_waypoint" => {
                reject("max_step_m", raw.max_step_m.is_some())?;
                Ok(MobilityModel::RandomWaypoint {
                    max_speed_mps: raw.max_speed_mps.unwrap_or_else(default_max_speed),
                    pause_s: raw.pause_s.unwrap_or(0.0),
                })
            }
            "restricted_random_walk" => {
                reject("pause_s", raw.pause_s.is_some())?;
                Ok(MobilityModel::RestrictedRandomWalk {
                    max_step_m: raw.max_step_m.unwrap_or_else(default_max_step),
                    max_speed_mps: raw.max_speed_mps.unwrap_or_else(default_max_speed),
                })
            }
            other => Err(format!(
                "unknown mobility model `{other}` (expected static, random_waypoint or restricted_random_walk)"
            )),
        }
    }
}

fn default_max_speed() -> f64 {
    20.0
}

fn default_max_step() -> f64 {
    10.0
}

impl Default for MobilityModel {
    fn default() -> Self {
        MobilityModel::RandomWaypoint {
            max_speed_mps: default_max_speed(),
            pause_s: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            width_m: 350.0,
            height_m: 350.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    /// When absent, chosen so the free-space range is exactly 100 m.
    pub rx_sensitivity_dbm: Option<f64>,
    pub frequency_mhz: f64,
    pub bandwidth_bps: f64,
    pub channel_delay_s: f64,
    /// Independent per-delivery drop probability.
    pub loss_prob: f64,
    /// Standard deviation of Gaussian noise added to RSSI readings, in dB.
    pub rssi_noise_db: f64,
}

pub const DEFAULT_RANGE_KM: f64 = 0.1;

impl RadioConfig {
    pub fn rx_sensitivity_dbm(&self) -> f64 {
        self.rx_sensitivity_dbm.unwrap_or_else(|| {
            self.tx_power_dbm
                - radio::path_loss_at(DEFAULT_RANGE_KM, self.frequency_mhz)
                    .unwrap_or(f64::INFINITY)
        })
    }

    /// Largest path loss a frame can suffer and still be received.
    pub fn max_path_loss_db(&self) -> f64 {
        self.tx_power_dbm - self.rx_sensitivity_dbm()
    }
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            tx_power_dbm: 20.0,
            rx_sensitivity_dbm: None,
            frequency_mhz: 2400.0,
            bandwidth_bps: 11e6,
            channel_delay_s: 10e-6,
            loss_prob: 0.0,
            rssi_noise_db: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub node_count: usize,
    pub sim_duration_s: f64,
    pub flow_count: usize,
    pub rng_seed: u64,
    pub protocol: Protocol,
    pub hello_period_s: f64,
    pub discovery_timeout_s: f64,
    pub mobility_tick_s: f64,
    pub k_policy: KPolicy,
    pub map: MapConfig,
    pub radio: RadioConfig,
    pub mobility: MobilityModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            node_count: 50,
            sim_duration_s: 900.0,
            flow_count: 1,
            rng_seed: 1,
            protocol: Protocol::Prp,
            hello_period_s: 1.0,
            discovery_timeout_s: 0.5,
            mobility_tick_s: 0.1,
            k_policy: KPolicy::RandomUniform { lo: 3, hi: 7 },
            map: MapConfig::default(),
            radio: RadioConfig::default(),
            mobility: MobilityModel::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be non-negative, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Nodes per square meter. Derived, never stored.
    pub fn density(&self) -> f64 {
        self.node_count as f64 / (self.map.width_m * self.map.height_m)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.node_count < 2 {
            return Err(ConfigError::invalid(
                "node_count",
                format!("need at least 2 nodes, got {}", self.node_count),
            ));
        }
        if self.flow_count == 0 || self.flow_count > self.node_count / 2 {
            return Err(ConfigError::invalid(
                "flow_count",
                format!(
                    "must be between 1 and node_count / 2 = {}, got {}",
                    self.node_count / 2,
                    self.flow_count
                ),
            ));
        }
        positive("sim_duration_s", self.sim_duration_s)?;
        positive("hello_period_s", self.hello_period_s)?;
        positive("discovery_timeout_s", self.discovery_timeout_s)?;
        positive("mobility_tick_s", self.mobility_tick_s)?;
        self.k_policy.validate()?;
        positive("map.width_m", self.map.width_m)?;
        positive("map.height_m", self.map.height_m)?;

        let r = &self.radio;
        positive("radio.frequency_mhz", r.frequency_mhz)?;
        positive("radio.bandwidth_bps", r.bandwidth_bps)?;
        non_negative("radio.channel_delay_s", r.channel_delay_s)?;
        non_negative("radio.rssi_noise_db", r.rssi_noise_db)?;
        if !(0.0..=1.0).contains(&r.loss_prob) {
            return Err(ConfigError::invalid(
                "radio.loss_prob",
                format!("must lie in [0, 1], got {}", r.loss_prob),
            ));
        }
        if !r.tx_power_dbm.is_finite() {
            return Err(ConfigError::invalid("radio.tx_power_dbm", "must be finite"));
        }
        if !(r.rx_sensitivity_dbm() < r.tx_power_dbm) {
            return Err(ConfigError::invalid(
                "radio.rx_sensitivity_dbm",
                "must be below tx_power_dbm",
            ));
        }

        match self.mobility {
            MobilityModel::Static => {}
            MobilityModel::RandomWaypoint {
                max_speed_mps,
                pause_s,
            } => {
                positive("mobility.max_speed_mps", max_speed_mps)?;
                non_negative("mobility.pause_s", pause_s)?;
            }
            MobilityModel::RestrictedRandomWalk {
                max_step_m,
                max_speed_mps,
            } => {
                positive("mobility.max_step_m", max_step_m)?;
                positive("mobility.max_speed_mps", max_speed_mps)?;
            }
        }
        Ok(())
    }
}
