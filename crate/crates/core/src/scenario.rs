//! Road world: RSU placement, vehicle kinematics, and per-transmission RSU
//! selection.

use crate::{Error, Result, Vec2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A fixed roadside unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rsu {
    pub id: u32,
    pub position: Vec2,
}

/// Kinematic state of a vehicle at one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec2,
    /// Speed in m/s, within [0, 33].
    pub speed: f64,
    /// Unit direction of travel.
    pub heading: Vec2,
    pub slot_index: u64,
}

impl VehicleState {
    pub fn new(position: Vec2, speed: f64, heading: Vec2) -> Self {
        VehicleState {
            position,
            speed,
            heading,
            slot_index: 0,
        }
    }
}

/// Parameters for [`build_road_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub road_length: f64,
    pub road_width: f64,
    pub rsu_spacing: f64,
    pub rsu_range_limit: f64,
    pub legit_start: Vec2,
    pub attacker_start: Vec2,
    pub speed: f64,
    pub heading: Vec2,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            road_length: 3000.0,
            road_width: 20.0,
            rsu_spacing: 300.0,
            rsu_range_limit: 400.0,
            legit_start: Vec2::new(1.0, 10.0),
            attacker_start: Vec2::new(0.0, 10.0),
            speed: 1.0,
            heading: Vec2::new(1.0, 0.0),
        }
    }
}

/// The immutable 2D road world. Stepping vehicles produces new states, so a
/// `Scenario` can be shared read-only across parallel Monte Carlo workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub road_length: f64,
    pub road_width: f64,
    pub rsus: Vec<Rsu>,
    pub rsu_range_limit: f64,
    pub legit: VehicleState,
    pub attacker: VehicleState,
    pub attacker_offset: Vec2,
}

/// Place RSUs on both road edges at the configured spacing and initialize
/// both vehicles.
pub fn build_road_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    if !(config.road_length > 0.0) || !(config.road_width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "road dimensions must be positive (got {} x {})",
            config.road_length, config.road_width
        )));
    }
    if !(config.rsu_spacing > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "rsu_spacing must be positive (got {})",
            config.rsu_spacing
        )));
    }
    if !(config.rsu_range_limit > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "rsu_range_limit must be positive (got {})",
            config.rsu_range_limit
        )));
    }
    for (name, p) in [
        ("legit_start", config.legit_start),
        ("attacker_start", config.attacker_start),
    ] {
        if !p.is_finite()
            || p.x < 0.0
            || p.x > config.road_length
            || p.y < 0.0
            || p.y > config.road_width
        {
            return Err(Error::InvalidConfig(format!(
                "{name} ({}, {}) outside road bounds",
                p.x, p.y
            )));
        }
    }

    let mut rsus = Vec::new();
    let mut id = 0u32;
    for side_y in [0.0, config.road_width] {
        let mut x = 0.0;
        while x <= config.road_length + 1e-9 {
            rsus.push(Rsu {
                id,
                position: Vec2::new(x, side_y),
            });
            id += 1;
            x += config.rsu_spacing;
        }
    }

    let legit = VehicleState::new(config.legit_start, config.speed, config.heading);
    let attacker = VehicleState::new(config.attacker_start, config.speed, config.heading);
    Ok(Scenario {
        road_length: config.road_length,
        road_width: config.road_width,
        rsus,
        rsu_range_limit: config.rsu_range_limit,
        attacker_offset: config.attacker_start - config.legit_start,
        legit,
        attacker,
    })
}

/// Advance a vehicle by one slot of constant-velocity motion.
pub fn step_vehicle(state: &VehicleState, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0);
    VehicleState {
        position: state.position + state.heading * (state.speed * dt),
        speed: state.speed,
        heading: state.heading,
        slot_index: state.slot_index + 1,
    }
}

/// The `k` nearest RSUs to `tx_position`, all strictly within the range
/// limit, sorted ascending by distance with ties broken by lower id.
pub fn select_rsus(scenario: &Scenario, tx_position: Vec2, k: usize) -> Result<Vec<Rsu>> {
    select_rsus_from(&scenario.rsus, scenario.rsu_range_limit, tx_position, k)
}

/// Same as [`select_rsus`] but over an arbitrary RSU deployment (used by the
/// dataset generator, which does not run on the road scenario).
pub fn select_rsus_from(
    rsus: &[Rsu],
    range_limit: f64,
    tx_position: Vec2,
    k: usize,
) -> Result<Vec<Rsu>> {
    let mut in_range: Vec<(f64, Rsu)> = rsus
        .iter()
        .filter_map(|r| {
            let d = r.position.distance(tx_position);
            (d < range_limit).then_some((d, *r))
        })
        .collect();
    if in_range.len() < k {
        return Err(Error::InsufficientCoverage {
            needed: k,
            in_range: in_range.len(),
        });
    }
    in_range.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    Ok(in_range.into_iter().take(k).map(|(_, r)| r).collect())
}

/// Attacker state for the current slot: it mirrors the legitimate vehicle's
/// speed and heading at a fixed positional offset.
pub fn attacker_step(scenario: &Scenario) -> VehicleState {
    VehicleState {
        position: scenario.legit.position + scenario.attacker_offset,
        speed: scenario.legit.speed,
        heading: scenario.legit.heading,
        slot_index: scenario.legit.slot_index,
    }
}

/// Uniformly random RSU deployment over a square region, for the mobility
/// dataset.
pub fn deploy_random_rsus<R: Rng>(rng: &mut R, count: usize, region_size: f64) -> Vec<Rsu> {
    (0..count)
        .map(|i| Rsu {
            id: i as u32,
            position: Vec2::new(
                rng.gen_range(0.0..region_size),
                rng.gen_range(0.0..region_size),
            ),
        })
        .collect()
}
