//! Reward: estimated platoon average throughput from per-packet SINRs,
//! truncated-Shannon style with a 100 Mbps cap per vehicle.

use serde::{Deserialize, Serialize};

/// How per-packet throughputs combine into a vehicle's throughput figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Average over the packets received in the period (a rate in Mbps).
    Mean,
    /// Plain sum over the packets, capped like the mean.
    LiteralSum,
}

pub const THROUGHPUT_CAP_MBPS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RewardSample {
    /// Platoon reward: mean per-vehicle throughput over non-leader members.
    pub value: f64,
    /// Per non-leader vehicle throughput, Mbps.
    pub per_vehicle: Vec<f64>,
    /// Total packets that entered the computation.
    pub packets_counted: usize,
}

/// Compute the platoon reward from each non-leader vehicle's per-packet
/// linear SINRs observed during one VDSA period. Vehicles with no received
/// packets contribute zero throughput.
pub fn compute_reward(
    per_vehicle_packet_sinrs: &[Vec<f64>],
    bandwidth_mhz: f64,
    mode: RewardMode,
) -> RewardSample {
    assert!(!per_vehicle_packet_sinrs.is_empty());
    let mut packets = 0usize;
    let per_vehicle: Vec<f64> = per_vehicle_packet_sinrs
        .iter()
        .map(|sinrs| {
            if sinrs.is_empty() {
                return 0.0;
            }
            packets += sinrs.len();
            let total: f64 = sinrs
                .iter()
                .map(|&s| bandwidth_mhz * (1.0 + s).log2())
                .sum();
            let t = match mode {
                RewardMode::Mean => total / sinrs.len() as f64,
                RewardMode::LiteralSum => total,
            };
            t.min(THROUGHPUT_CAP_MBPS)
        })
        .collect();
    let value = per_vehicle.iter().sum::<f64>() / per_vehicle.len() as f64;
    RewardSample { value, per_vehicle, packets_counted: packets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_sinr_gives_zero_reward() {
        let r = compute_reward(&[vec![0.0; 5], vec![0.0; 5]], 10.0, RewardMode::Mean);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.packets_counted, 10);
    }

    #[test]
    fn enormous_sinr_hits_the_cap() {
        let r = compute_reward(&[vec![2f64.powi(100)]], 10.0, RewardMode::Mean);
        assert_eq!(r.per_vehicle[0], THROUGHPUT_CAP_MBPS);
    }

    #[test]
    fn unit_sinr_at_ten_megahertz_gives_ten_mbps() {
        let r = compute_reward(&[vec![1.0]], 10.0, RewardMode::Mean);
        assert_relative_eq!(r.per_vehicle[0], 10.0, epsilon = 1e-12);
        assert_relative_eq!(r.value, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn reward_is_mean_over_vehicles_including_silent_ones() {
        // one vehicle at 10 Mbps, one with no packets at all
        let r = compute_reward(&[vec![1.0], vec![]], 10.0, RewardMode::Mean);
        assert_eq!(r.per_vehicle[1], 0.0);
        assert_relative_eq!(r.value, 5.0, epsilon = 1e-12);
        assert_eq!(r.packets_counted, 1);
    }

    #[test]
    fn literal_sum_mode_accumulates_before_capping() {
        let r = compute_reward(&[vec![1.0; 5]], 10.0, RewardMode::LiteralSum);
        assert_relative_eq!(r.per_vehicle[0], 50.0, epsilon = 1e-12);
        let r = compute_reward(&[vec![1.0; 20]], 10.0, RewardMode::LiteralSum);
        assert_eq!(r.per_vehicle[0], THROUGHPUT_CAP_MBPS);
    }
}
