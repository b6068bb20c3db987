//! Node placement and movement.

use rand::Rng;

use crate::sim_core::{MapConfig, MobilityModel, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_to(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn within(self, map: &MapConfig) -> bool {
        (0.0..=map.width_m).contains(&self.x) && (0.0..=map.height_m).contains(&self.y)
    }
}

/// Uniform placement of `config.node_count` nodes over the map.
pub fn place_initial<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec<Position> {
    (0..config.node_count)
        .map(|_| uniform_point(&config.map, rng))
        .collect()
}

fn uniform_point<R: Rng>(map: &MapConfig, rng: &mut R) -> Position {
    Position::new(
        rng.random::<f64>() * map.width_m,
        rng.random::<f64>() * map.height_m,
    )
}

/// Uniform speed in (0, max].
fn uniform_speed<R: Rng>(max: f64, rng: &mut R) -> f64 {
    max * (1.0 - rng.random::<f64>())
}

/// Fold `v` back into `[0, len]` as if it bounced off both walls.
pub fn reflect(v: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * len;
    let m = v.rem_euclid(period);
    let r = if m > len { period - m } else { m };
    r.clamp(0.0, len)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    Static,
    Waypoint {
        target: Position,
        speed: f64,
        pause_left: f64,
    },
    Walk,
}

/// Positions plus per-node model state.
#[derive(Debug, Clone)]
pub struct MobilityState {
    pub positions: Vec<Position>,
    pub motion: Vec<Motion>,
    model: MobilityModel,
    map: MapConfig,
}

impl MobilityState {
    pub fn new<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Self {
        let positions = place_initial(config, rng);
        Self::with_positions(positions, config.mobility.clone(), config.map.clone(), rng)
    }

    pub fn with_positions<R: Rng>(
        positions: Vec<Position>,
        model: MobilityModel,
        map: MapConfig,
        rng: &mut R,
    ) -> Self {
        let motion = positions
            .iter()
            .map(|_| match model {
                MobilityModel::Static => Motion::Static,
                MobilityModel::RandomWaypoint { max_speed_mps, .. } => Motion::Waypoint {
                    target: uniform_point(&map, rng),
                    speed: uniform_speed(max_speed_mps, rng),
                    pause_left: 0.0,
                },
                MobilityModel::RestrictedRandomWalk { .. } => Motion::Walk,
            })
            .collect();
        MobilityState {
            positions,
            motion,
            model,
            map,
        }
    }

    pub fn model(&self) -> &MobilityModel {
        &self.model
    }

    /// Move every node by `dt` seconds of its model.
    pub fn advance<R: Rng>(&mut self, dt: f64, rng: &mut R) {
        assert!(dt > 0.0, "advance needs a positive time step, got {dt}");
        match self.model {
            MobilityModel::Static => {}
            MobilityModel::RandomWaypoint {
                max_speed_mps,
                pause_s,
            } => {
                for (pos, motion) in self.positions.iter_mut().zip(&mut self.motion) {
                    advance_waypoint(pos, motion, dt, max_speed_mps, pause_s, &self.map, rng);
                }
            }
            MobilityModel::RestrictedRandomWalk {
                max_step_m,
                max_speed_mps,
            } => {
                let bound = max_step_m.min(max_speed_mps * dt);
                for pos in &mut self.positions {
                    let heading = rng.random::<f64>() * std::f64::consts::TAU;
                    let len = bound * (1.0 - rng.random::<f64>());
                    *pos = Position::new(
                        reflect(pos.x + len * heading.cos(), self.map.width_m),
                        reflect(pos.y + len * heading.sin(), self.map.height_m),
                    );
                }
            }
        }
    }
}

fn advance_waypoint<R: Rng>(
    pos: &mut Position,
    motion: &mut Motion,
    dt: f64,
    max_speed: f64,
    pause_s: f64,
    map: &MapConfig,
    rng: &mut R,
) {
    let Motion::Waypoint {
        target,
        speed,
        pause_left,
    } = motion
    else {
        return;
    };
    let mut remaining = dt;
    // Bounded: each pass either consumes the remaining time or reaches a waypoint.
    for _ in 0..64 {
        if remaining <= 0.0 {
            break;
        }
        if *pause_left > 0.0 {
            let p = pause_left.min(remaining);
            *pause_left -= p;
            remaining -= p;
            continue;
        }
        let dist = pos.distance_to(*target);
        let reach = *speed * remaining;
        if reach < dist {
            let f = reach / dist;
            pos.x += (target.x - pos.x) * f;
            pos.y += (target.y - pos.y) * f;
            break;
        }
        *pos = *target;
        remaining -= dist / *speed;
        *pause_left = pause_s;
        *target = uniform_point(map, rng);
        *speed = uniform_speed(max_speed, rng);
    }
}
