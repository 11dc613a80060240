//! Scenario geometry: the road, vehicles, platoons and their mobility.
//!
//! The world is the shared ground truth every other module reads. Positions
//! live on a road segment of length `road_length_m`; by default mobility
//! wraps around the segment so relative geometry (and with it the
//! interference statistics) stays stationary over a whole run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Lateral lane pitch used when converting lane indices into meters.
pub const LANE_WIDTH_M: f64 = 3.5;

/// How vehicles behave at the end of the road segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityMode {
    /// Positions wrap around the segment (default); distances are measured
    /// on the resulting ring.
    Wrap,
    /// Positions clamp at the segment end; geometry freezes there.
    Clamp,
}

/// Static description of one experiment's road and platoon layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub road_length_m: f64,
    pub lanes: u32,
    pub num_platoons: usize,
    pub vehicles_per_platoon: usize,
    pub inter_car_spacing_m: f64,
    pub vehicle_length_m: f64,
    /// Constant speed applied to every platoon unless overridden per platoon.
    pub platoon_speed_mps: f64,
    /// Optional per-platoon speeds; length must equal `num_platoons`.
    pub platoon_speeds_mps: Option<Vec<f64>>,
    /// Nominal leader-to-tail gap between consecutive platoons at t = 0.
    pub initial_platoon_gap_m: f64,
    /// Relative jitter (±fraction) applied to the initial gaps, drawn from
    /// the run seed so each run sees a different geometry.
    pub placement_jitter: f64,
    pub mobility: MobilityMode,
    pub cacc_period_s: f64,
    pub cacc_message_bytes: u32,
    pub vdsa_period_s: f64,
    pub run_duration_s: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            road_length_m: 5_000.0,
            lanes: 3,
            num_platoons: 3,
            vehicles_per_platoon: 6,
            inter_car_spacing_m: 5.0,
            vehicle_length_m: 4.0,
            platoon_speed_mps: 30.0,
            platoon_speeds_mps: None,
            initial_platoon_gap_m: 200.0,
            placement_jitter: 0.2,
            mobility: MobilityMode::Wrap,
            cacc_period_s: 0.2,
            cacc_message_bytes: 300,
            vdsa_period_s: 1.0,
            run_duration_s: 140.0,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.road_length_m > 0.0) {
            return Err(Error::config("road_length_m must be > 0"));
        }
        if self.num_platoons < 1 {
            return Err(Error::config("num_platoons must be >= 1"));
        }
        if self.vehicles_per_platoon < 2 {
            return Err(Error::config("vehicles_per_platoon must be >= 2"));
        }
        if !(self.cacc_period_s > 0.0) {
            return Err(Error::config("cacc_period_s must be > 0"));
        }
        if self.vdsa_period_s < self.cacc_period_s {
            return Err(Error::config("vdsa_period_s must be >= cacc_period_s"));
        }
        let ratio = self.vdsa_period_s / self.cacc_period_s;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config(
                "vdsa_period_s must be an integer multiple of cacc_period_s",
            ));
        }
        if let Some(speeds) = &self.platoon_speeds_mps {
            if speeds.len() != self.num_platoons {
                return Err(Error::config(format!(
                    "platoon_speeds_mps has {} entries, expected {}",
                    speeds.len(),
                    self.num_platoons
                )));
            }
        }
        if !(0.0..1.0).contains(&self.placement_jitter) {
            return Err(Error::config("placement_jitter must be in [0, 1)"));
        }
        if self.inter_car_spacing_m < 0.0 || self.vehicle_length_m <= 0.0 {
            return Err(Error::config("spacing must be >= 0 and vehicle length > 0"));
        }
        Ok(())
    }

    /// Leader-to-last-member position distance for one platoon.
    pub fn leader_to_last_m(&self) -> f64 {
        (self.vehicles_per_platoon - 1) as f64
            * (self.inter_car_spacing_m + self.vehicle_length_m)
    }

    /// Total physical extent of one platoon, front bumper to rear bumper.
    pub fn platoon_span_m(&self) -> f64 {
        self.leader_to_last_m() + self.vehicle_length_m
    }

    pub fn speed_of(&self, platoon: usize) -> f64 {
        self.platoon_speeds_mps
            .as_ref()
            .map(|v| v[platoon])
            .unwrap_or(self.platoon_speed_mps)
    }
}

/// TVWS channelization: the VDSA channels and the active DTT channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandPlan {
    pub vdsa_centers_mhz: Vec<f64>,
    pub vdsa_bandwidth_mhz: f64,
    pub dtt_centers_mhz: Vec<f64>,
    pub dtt_bandwidth_mhz: f64,
}

impl Default for BandPlan {
    fn default() -> Self {
        Self {
            vdsa_centers_mhz: vec![498.0, 506.0, 514.0],
            vdsa_bandwidth_mhz: 10.0,
            dtt_centers_mhz: vec![490.0, 522.0],
            dtt_bandwidth_mhz: 8.0,
        }
    }
}

impl BandPlan {
    /// Number of selectable VDSA channels (the action-space size).
    pub fn num_vdsa_bands(&self) -> usize {
        self.vdsa_centers_mhz.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vdsa_centers_mhz.is_empty() {
            return Err(Error::config("band plan needs at least one VDSA channel"));
        }
        if !self.vdsa_centers_mhz.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("vdsa_centers_mhz must be strictly increasing"));
        }
        if !(self.vdsa_bandwidth_mhz > 0.0) || !(self.dtt_bandwidth_mhz > 0.0) {
            return Err(Error::config("bandwidths must be > 0"));
        }
        Ok(())
    }

    /// Fraction of a transmitter's power (flat spectral mask, `tx_width` MHz
    /// around `tx_center`) that falls inside a receiver band.
    pub fn overlap_fraction(tx_center: f64, tx_width: f64, rx_center: f64, rx_width: f64) -> f64 {
        let lo = (tx_center - tx_width / 2.0).max(rx_center - rx_width / 2.0);
        let hi = (tx_center + tx_width / 2.0).min(rx_center + rx_width / 2.0);
        ((hi - lo).max(0.0) / tx_width).min(1.0)
    }

    /// Leakage fraction of a VDSA transmission on band `tx` into VDSA band `rx`.
    pub fn vdsa_to_vdsa(&self, tx: usize, rx: usize) -> f64 {
        Self::overlap_fraction(
            self.vdsa_centers_mhz[tx],
            self.vdsa_bandwidth_mhz,
            self.vdsa_centers_mhz[rx],
            self.vdsa_bandwidth_mhz,
        )
    }

    /// Leakage fraction of a VDSA transmission into a DTT channel.
    pub fn vdsa_to_dtt(&self, vdsa: usize, dtt: usize) -> f64 {
        Self::overlap_fraction(
            self.vdsa_centers_mhz[vdsa],
            self.vdsa_bandwidth_mhz,
            self.dtt_centers_mhz[dtt],
            self.dtt_bandwidth_mhz,
        )
    }

    /// Fraction of a DTT transmission's power landing inside a VDSA band.
    pub fn dtt_to_vdsa(&self, dtt: usize, vdsa: usize) -> f64 {
        Self::overlap_fraction(
            self.dtt_centers_mhz[dtt],
            self.dtt_bandwidth_mhz,
            self.vdsa_centers_mhz[vdsa],
            self.vdsa_bandwidth_mhz,
        )
    }
}

/// Identifies a vehicle globally: platoon index plus index within the platoon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VehicleId {
    pub platoon: usize,
    pub index: usize,
}

impl VehicleId {
    /// Compact key for shadow-field hashing.
    pub fn key(&self) -> u64 {
        (self.platoon as u64) << 16 | self.index as u64
    }
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: VehicleId,
    pub position_m: f64,
    pub lane: u32,
}

impl Vehicle {
    pub fn is_leader(&self) -> bool {
        self.id.index == 0
    }

    pub fn lateral_m(&self) -> f64 {
        self.lane as f64 * LANE_WIDTH_M
    }
}

#[derive(Debug, Clone)]
pub struct Platoon {
    pub id: usize,
    /// Members ordered leader first (index 0), then followers front-to-back.
    pub members: Vec<Vehicle>,
    pub current_band: usize,
    pub speed_mps: f64,
}

impl Platoon {
    pub fn leader(&self) -> &Vehicle {
        &self.members[0]
    }
}

/// The simulated world: all platoons plus the road they travel on.
#[derive(Debug, Clone)]
pub struct World {
    pub road_length_m: f64,
    pub mobility: MobilityMode,
    pub platoons: Vec<Platoon>,
}

impl World {
    pub fn vehicle(&self, id: VehicleId) -> &Vehicle {
        &self.platoons[id.platoon].members[id.index]
    }

    pub fn total_vehicles(&self) -> usize {
        self.platoons.iter().map(|p| p.members.len()).sum()
    }

    /// Longitudinal distance between two road positions, honoring wrap mode.
    pub fn along_road_distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.mobility {
            MobilityMode::Wrap => d.min(self.road_length_m - d),
            MobilityMode::Clamp => d,
        }
    }

    /// Euclidean distance between a vehicle and a (position, lateral) point.
    pub fn distance_to_point(&self, v: &Vehicle, position_m: f64, lateral_m: f64) -> f64 {
        let dx = self.along_road_distance(v.position_m, position_m);
        let dy = v.lateral_m() - lateral_m;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn distance_between(&self, a: &Vehicle, b: &Vehicle) -> f64 {
        self.distance_to_point(a, b.position_m, b.lateral_m())
    }
}

/// Lay out the platoons on the road. Placement is deterministic given
/// `run_seed`: the convoy start offset and the inter-platoon gaps are drawn
/// from a seed-derived stream.
pub fn build_scenario(config: &ScenarioConfig, plan: &BandPlan, run_seed: u64) -> Result<World> {
    config.validate()?;
    plan.validate()?;

    let step = config.inter_car_spacing_m + config.vehicle_length_m;
    let platoon_len = config.leader_to_last_m();
    let max_gap = config.initial_platoon_gap_m * (1.0 + config.placement_jitter);
    let worst_total = config.num_platoons as f64 * platoon_len
        + (config.num_platoons.saturating_sub(1)) as f64 * max_gap;
    if worst_total > config.road_length_m {
        return Err(Error::config(format!(
            "convoy of {} platoons needs up to {:.0} m but the road is {:.0} m",
            config.num_platoons, worst_total, config.road_length_m
        )));
    }

    let mut placement = rng::stream(run_seed, &[rng::purpose::PLACEMENT]);
    let start_offset: f64 = placement.random::<f64>() * config.road_length_m;

    let wrap = |x: f64| -> f64 {
        match config.mobility {
            MobilityMode::Wrap => x.rem_euclid(config.road_length_m),
            MobilityMode::Clamp => x.clamp(0.0, config.road_length_m),
        }
    };

    let mut platoons = Vec::with_capacity(config.num_platoons);
    // Platoon 0's leader sits at the offset; later platoons follow behind it.
    let mut leader_pos = start_offset;
    for p in 0..config.num_platoons {
        if p > 0 {
            let jitter = 1.0 + config.placement_jitter * (2.0 * placement.random::<f64>() - 1.0);
            let gap = config.initial_platoon_gap_m * jitter;
            leader_pos -= platoon_len + gap;
        }
        let members = (0..config.vehicles_per_platoon)
            .map(|v| Vehicle {
                id: VehicleId { platoon: p, index: v },
                position_m: wrap(leader_pos - v as f64 * step),
                lane: 0,
            })
            .collect();
        platoons.push(Platoon {
            id: p,
            members,
            current_band: 0,
            speed_mps: config.speed_of(p),
        });
    }

    Ok(World {
        road_length_m: config.road_length_m,
        mobility: config.mobility,
        platoons,
    })
}

/// Advance every vehicle by its platoon speed for `dt_s` seconds.
pub fn advance_mobility(world: &mut World, dt_s: f64) {
    debug_assert!(dt_s > 0.0);
    let road = world.road_length_m;
    let mode = world.mobility;
    for platoon in &mut world.platoons {
        let delta = platoon.speed_mps * dt_s;
        for v in &mut platoon.members {
            v.position_m = match mode {
                MobilityMode::Wrap => (v.position_m + delta).rem_euclid(road),
                MobilityMode::Clamp => (v.position_m + delta).clamp(0.0, road),
            };
        }
    }
}
