//! The context database (REM): a DTT power profile along the road, the
//! protected-receiver registry, and a latency-delayed registry of platoon
//! positions and band choices.
//!
//! All reads are time-indexed and side-effect free; no query ever returns
//! information younger than the configured acquisition latency.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::radio::{db_to_linear, linear_to_db, Propagation};
use crate::scenario::BandPlan;
use crate::{Error, Result};

/// A DTT broadcast transmitter feeding the power profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DttTransmitter {
    /// Road coordinate; may lie beyond the simulated segment.
    pub position_m: f64,
    pub lateral_offset_m: f64,
    /// Index into the band plan's DTT channel list.
    pub dtt_band: usize,
    pub eirp_dbm: f64,
}

/// Piecewise-linear received-power profile per DTT channel.
#[derive(Debug, Clone)]
pub struct DttPowerMap {
    /// `knots[band]` is sorted by position and covers the road extent.
    knots: Vec<Vec<(f64, f64)>>,
}

impl DttPowerMap {
    /// Sample the field produced by the configured transmitters every
    /// `step_m` along the road, using median (shadow-free) propagation.
    /// Distances to transmitters are measured along the straight line, not
    /// the wrap ring: the profile is anchored to absolute road coordinates.
    pub fn from_transmitters(
        transmitters: &[DttTransmitter],
        num_dtt_bands: usize,
        road_length_m: f64,
        step_m: f64,
        prop: &Propagation,
    ) -> Self {
        assert!(step_m > 0.0);
        let n = (road_length_m / step_m).ceil() as usize + 1;
        let knots = (0..num_dtt_bands)
            .map(|band| {
                (0..=n)
                    .map(|i| {
                        let x = (i as f64 * step_m).min(road_length_m);
                        let mut mw = 0.0;
                        for tx in transmitters.iter().filter(|t| t.dtt_band == band) {
                            let dx = x - tx.position_m;
                            let d = (dx * dx + tx.lateral_offset_m * tx.lateral_offset_m).sqrt();
                            mw += db_to_linear(tx.eirp_dbm + prop.gain_db(d, 0.0));
                        }
                        (x, linear_to_db(mw))
                    })
                    .collect()
            })
            .collect();
        Self { knots }
    }

    /// Load a profile verbatim from a plain-text file with whitespace
    /// separated rows `band_center_mhz position_m power_dbm`, sorted by
    /// position within each band.
    pub fn from_profile_file(path: &Path, plan: &BandPlan) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut knots: Vec<Vec<(f64, f64)>> = vec![Vec::new(); plan.dtt_centers_mhz.len()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut field = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| {
                        Error::DataFile(format!("line {}: missing {name}", lineno + 1))
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::DataFile(format!("line {}: {e}", lineno + 1)))
            };
            let center = field("band_center_mhz")?;
            let pos = field("position_m")?;
            let power = field("power_dbm")?;
            let band = plan
                .dtt_centers_mhz
                .iter()
                .position(|&c| (c - center).abs() < 1e-6)
                .ok_or_else(|| {
                    Error::DataFile(format!(
                        "line {}: {center} MHz is not a configured DTT channel",
                        lineno + 1
                    ))
                })?;
            knots[band].push((pos, power));
        }
        for (band, ks) in knots.iter().enumerate() {
            if ks.is_empty() {
                return Err(Error::DataFile(format!(
                    "no profile rows for DTT channel index {band}"
                )));
            }
            if !ks.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(Error::DataFile(format!(
                    "profile rows for DTT channel index {band} are not sorted by position"
                )));
            }
        }
        Ok(Self { knots })
    }

    /// Received DTT power at a road position in the channel's own band, dBm.
    /// Out-of-range positions clamp to the nearest knot; interpolation is
    /// linear in dB.
    pub fn power_in_band_dbm(&self, position_m: f64, dtt_band: usize) -> f64 {
        let ks = &self.knots[dtt_band];
        if position_m <= ks[0].0 {
            return ks[0].1;
        }
        if position_m >= ks[ks.len() - 1].0 {
            return ks[ks.len() - 1].1;
        }
        let i = ks.partition_point(|&(x, _)| x <= position_m);
        let (x0, y0) = ks[i - 1];
        let (x1, y1) = ks[i];
        y0 + (y1 - y0) * (position_m - x0) / (x1 - x0)
    }
}

/// A platoon's periodic self-report to the context database.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonAnnouncement {
    pub platoon_id: usize,
    pub leader_position_m: f64,
    pub member_count: usize,
    pub chosen_band: usize,
    pub timestamp_s: f64,
}

/// The context database: DTT field plus delayed platoon registry.
#[derive(Debug, Clone)]
pub struct Rem {
    power_map: DttPowerMap,
    /// DTT -> VDSA leakage per (dtt band, vdsa band), in dB.
    overlap_db: Vec<Vec<f64>>,
    pub info_latency_s: f64,
    /// Per platoon, announcements ordered by timestamp.
    announcements: Vec<Vec<PlatoonAnnouncement>>,
}

impl Rem {
    pub fn new(
        power_map: DttPowerMap,
        plan: &BandPlan,
        info_latency_s: f64,
        num_platoons: usize,
    ) -> Self {
        assert!(info_latency_s >= 0.0);
        let overlap_db = (0..plan.dtt_centers_mhz.len())
            .map(|d| {
                (0..plan.num_vdsa_bands())
                    .map(|k| linear_to_db(plan.dtt_to_vdsa(d, k)))
                    .collect()
            })
            .collect();
        Self {
            power_map,
            overlap_db,
            info_latency_s,
            announcements: vec![Vec::new(); num_platoons],
        }
    }

    /// Expected DTT interference inside a VDSA band at a road position, dBm.
    /// Returns negative infinity when no DTT channel overlaps the band.
    pub fn query_dtt_power_dbm(&self, position_m: f64, vdsa_band: usize) -> f64 {
        let mut mw = 0.0;
        for (dtt_band, overlaps) in self.overlap_db.iter().enumerate() {
            let o = overlaps[vdsa_band];
            if o.is_finite() {
                mw += db_to_linear(self.power_map.power_in_band_dbm(position_m, dtt_band) + o);
            }
        }
        linear_to_db(mw)
    }

    /// DTT power at a receiver site in its own channel, dBm.
    pub fn receiver_power_dbm(&self, position_m: f64, dtt_band: usize) -> f64 {
        self.power_map.power_in_band_dbm(position_m, dtt_band)
    }

    pub fn announce(&mut self, announcement: PlatoonAnnouncement, now_s: f64) {
        assert!(
            announcement.timestamp_s <= now_s + 1e-9,
            "announcement timestamped in the future"
        );
        let slot = &mut self.announcements[announcement.platoon_id];
        slot.push(announcement);
        // keep the newest entry that is already visible plus anything newer
        let visible_cutoff = now_s - self.info_latency_s;
        if let Some(last_visible) = slot.iter().rposition(|a| a.timestamp_s <= visible_cutoff) {
            slot.drain(..last_visible);
        }
    }

    /// Most recent visible announcement of every platoon except the
    /// requester. Stale positions are returned as announced.
    pub fn snapshot_other_platoons(
        &self,
        requester: usize,
        now_s: f64,
    ) -> Vec<&PlatoonAnnouncement> {
        let cutoff = now_s - self.info_latency_s + 1e-9;
        self.announcements
            .iter()
            .enumerate()
            .filter(|(id, _)| *id != requester)
            .filter_map(|(_, slot)| slot.iter().rev().find(|a| a.timestamp_s <= cutoff))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::PropagationModel;
    use approx::assert_relative_eq;

    fn flat_map(dbm: f64) -> DttPowerMap {
        DttPowerMap {
            knots: vec![
                vec![(0.0, dbm), (5_000.0, dbm)],
                vec![(0.0, dbm), (5_000.0, dbm)],
            ],
        }
    }

    fn two_knot_map() -> DttPowerMap {
        DttPowerMap {
            knots: vec![
                vec![(0.0, -60.0), (1_000.0, -70.0)],
                vec![(0.0, -60.0), (1_000.0, -70.0)],
            ],
        }
    }

    #[test]
    fn query_at_knot_and_midpoint() {
        let map = two_knot_map();
        assert_eq!(map.power_in_band_dbm(0.0, 0), -60.0);
        assert_eq!(map.power_in_band_dbm(1_000.0, 0), -70.0);
        assert_relative_eq!(map.power_in_band_dbm(500.0, 0), -65.0, epsilon = 1e-12);
    }

    #[test]
    fn query_clamps_out_of_range() {
        let map = two_knot_map();
        assert_eq!(map.power_in_band_dbm(-50.0, 0), -60.0);
        assert_eq!(map.power_in_band_dbm(9_999.0, 0), -70.0);
    }

    #[test]
    fn vdsa_scaling_and_zero_overlap() {
        let plan = BandPlan::default();
        let rem = Rem::new(flat_map(-60.0), &plan, 1.0, 3);
        // middle band overlaps no DTT channel
        assert_eq!(rem.query_dtt_power_dbm(100.0, 1), f64::NEG_INFINITY);
        // outer band: 1 MHz of the 8 MHz DTT mask -> -9.03 dB
        let got = rem.query_dtt_power_dbm(100.0, 0);
        assert_relative_eq!(got, -60.0 + linear_to_db(0.125), epsilon = 1e-9);
    }

    #[test]
    fn profile_scaling_shifts_queries_uniformly() {
        let plan = BandPlan::default();
        let rem_a = Rem::new(two_knot_map(), &plan, 1.0, 1);
        let mut shifted = two_knot_map();
        for band in &mut shifted.knots {
            for knot in band.iter_mut() {
                knot.1 += 7.5;
            }
        }
        let rem_b = Rem::new(shifted, &plan, 1.0, 1);
        for pos in [0.0, 123.0, 456.7, 999.0] {
            let a = rem_a.query_dtt_power_dbm(pos, 0);
            let b = rem_b.query_dtt_power_dbm(pos, 0);
            assert_relative_eq!(b - a, 7.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn announcement_visibility_honors_latency() {
        let plan = BandPlan::default();
        let mut rem = Rem::new(flat_map(-60.0), &plan, 1.0, 3);
        rem.announce(
            PlatoonAnnouncement {
                platoon_id: 1,
                leader_position_m: 100.0,
                member_count: 6,
                chosen_band: 2,
                timestamp_s: 10.0,
            },
            10.0,
        );
        assert!(rem.snapshot_other_platoons(0, 10.5).is_empty());
        let visible = rem.snapshot_other_platoons(0, 11.0);
        assert_eq!(visible.len(), 1);
        assert_eq!(visible[0].chosen_band, 2);
    }

    #[test]
    fn later_announcement_supersedes_once_visible() {
        let plan = BandPlan::default();
        let mut rem = Rem::new(flat_map(-60.0), &plan, 1.0, 2);
        for (t, band) in [(10.0, 0), (11.0, 2)] {
            rem.announce(
                PlatoonAnnouncement {
                    platoon_id: 1,
                    leader_position_m: 100.0,
                    member_count: 6,
                    chosen_band: band,
                    timestamp_s: t,
                },
                t,
            );
        }
        // at t = 11.5 only the first is visible
        assert_eq!(rem.snapshot_other_platoons(0, 11.5)[0].chosen_band, 0);
        // at t = 12 the newer one supersedes
        assert_eq!(rem.snapshot_other_platoons(0, 12.0)[0].chosen_band, 2);
    }

    #[test]
    fn snapshot_excludes_requester_and_empty_world() {
        let plan = BandPlan::default();
        let mut rem = Rem::new(flat_map(-60.0), &plan, 1.0, 3);
        assert!(rem.snapshot_other_platoons(0, 100.0).is_empty());
        for id in 0..3 {
            rem.announce(
                PlatoonAnnouncement {
                    platoon_id: id,
                    leader_position_m: 10.0 * id as f64,
                    member_count: 6,
                    chosen_band: id,
                    timestamp_s: 20.0,
                },
                20.0,
            );
        }
        let snap = rem.snapshot_other_platoons(1, 25.0);
        assert_eq!(snap.len(), 2);
        assert!(snap.iter().all(|a| a.platoon_id != 1));
    }

    #[test]
    fn generated_profile_tracks_transmitter_distance() {
        let plan = BandPlan::default();
        let prop = Propagation::resolve(&PropagationModel::default(), &plan);
        let txs = vec![DttTransmitter {
            position_m: -2_000.0,
            lateral_offset_m: 0.0,
            dtt_band: 0,
            eirp_dbm: 60.0,
        }];
        let map = DttPowerMap::from_transmitters(&txs, 2, 5_000.0, 50.0, &prop);
        let near = map.power_in_band_dbm(0.0, 0);
        let far = map.power_in_band_dbm(5_000.0, 0);
        assert!(near > far, "field must decay away from the transmitter");
        // knot at x = 0 must equal the direct computation
        let want = 60.0 + prop.gain_db(2_000.0, 0.0);
        assert_relative_eq!(near, want, epsilon = 1e-9);
        // band 1 has no transmitter: silent
        assert_eq!(map.power_in_band_dbm(100.0, 1), f64::NEG_INFINITY);
    }

    #[test]
    fn profile_file_round_trip() {
        let plan = BandPlan::default();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.txt");
        std::fs::write(
            &path,
            "# band position power\n490.0 0 -55\n490.0 2500 -60\n490.0 5000 -65\n\
             522.0 0 -65\n522.0 5000 -55\n",
        )
        .unwrap();
        let map = DttPowerMap::from_profile_file(&path, &plan).unwrap();
        assert_eq!(map.power_in_band_dbm(0.0, 0), -55.0);
        assert_relative_eq!(map.power_in_band_dbm(2_500.0, 1), -60.0, epsilon = 1e-9);

        std::fs::write(&path, "490.0 100 -55\n490.0 50 -60\n522.0 0 -65\n").unwrap();
        assert!(DttPowerMap::from_profile_file(&path, &plan).is_err());
        std::fs::write(&path, "497.5 100 -55\n").unwrap();
        assert!(DttPowerMap::from_profile_file(&path, &plan).is_err());
    }
}
