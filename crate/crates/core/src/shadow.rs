//! Spatially correlated log-normal shadowing.
//!
//! Shadow values are a pure function of (field seed, link kind, endpoint
//! keys, correlation-segment indices): the same link queried at the same
//! segment returns the same dB value, and the value is redrawn whenever an
//! endpoint crosses into the next correlation segment. Swapping the
//! endpoints never changes the result.

use crate::rng;

/// Which sigma applies to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// Vehicle-to-vehicle links inside and between platoons.
    VehicleToVehicle,
    /// Vehicle to a protected DTT receiver.
    VehicleToDtt,
}

#[derive(Debug, Clone)]
pub struct ShadowField {
    seed: u64,
    pub sigma_v2v_db: f64,
    pub sigma_v2d_db: f64,
    pub correlation_m: f64,
}

impl ShadowField {
    pub fn new(seed: u64, sigma_v2v_db: f64, sigma_v2d_db: f64, correlation_m: f64) -> Self {
        assert!(sigma_v2v_db >= 0.0 && sigma_v2d_db >= 0.0);
        assert!(correlation_m > 0.0);
        Self { seed, sigma_v2v_db, sigma_v2d_db, correlation_m }
    }

    /// A field that always returns 0 dB (median propagation).
    pub fn disabled(seed: u64) -> Self {
        Self::new(seed, 0.0, 0.0, 25.0)
    }

    fn segment(&self, position_m: f64) -> i64 {
        (position_m / self.correlation_m).floor() as i64
    }

    /// Shadow sample in dB for the link between two endpoints identified by
    /// stable keys at given road positions.
    pub fn sample_db(
        &self,
        kind: LinkKind,
        key_a: u64,
        pos_a_m: f64,
        key_b: u64,
        pos_b_m: f64,
    ) -> f64 {
        let sigma = match kind {
            LinkKind::VehicleToVehicle => self.sigma_v2v_db,
            LinkKind::VehicleToDtt => self.sigma_v2d_db,
        };
        if sigma == 0.0 {
            return 0.0;
        }
        let (sa, sb) = (self.segment(pos_a_m), self.segment(pos_b_m));
        // canonical endpoint order so the sample is symmetric
        let ((k0, s0), (k1, s1)) = if (key_a, sa) <= (key_b, sb) {
            ((key_a, sa), (key_b, sb))
        } else {
            ((key_b, sb), (key_a, sa))
        };
        let kind_tag = match kind {
            LinkKind::VehicleToVehicle => 0xA1,
            LinkKind::VehicleToDtt => 0xA2,
        };
        let h = rng::mix(&[self.seed, kind_tag, k0, s0 as u64, k1, s1 as u64]);
        sigma * standard_normal(h)
    }
}

/// Deterministic standard-normal draw from a 64-bit hash (Box–Muller).
fn standard_normal(hash: u64) -> f64 {
    let mut s = hash;
    let a = rng::splitmix64(&mut s);
    let b = rng::splitmix64(&mut s);
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (b >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> ShadowField {
        ShadowField::new(42, 3.0, 8.0, 25.0)
    }

    #[test]
    fn deterministic_and_symmetric() {
        let f = field();
        let a = f.sample_db(LinkKind::VehicleToVehicle, 1, 10.0, 2, 40.0);
        let b = f.sample_db(LinkKind::VehicleToVehicle, 1, 10.0, 2, 40.0);
        let c = f.sample_db(LinkKind::VehicleToVehicle, 2, 40.0, 1, 10.0);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn constant_within_segment_redrawn_across() {
        let f = field();
        let a = f.sample_db(LinkKind::VehicleToVehicle, 1, 10.0, 2, 40.0);
        let same = f.sample_db(LinkKind::VehicleToVehicle, 1, 24.9, 2, 26.0);
        let moved = f.sample_db(LinkKind::VehicleToVehicle, 1, 25.1, 2, 40.0);
        assert_eq!(a, same); // both endpoints still in segments (0, 1)
        assert_ne!(a, moved); // first endpoint crossed into segment 1
    }

    #[test]
    fn zero_sigma_returns_zero() {
        let f = ShadowField::disabled(3);
        assert_eq!(f.sample_db(LinkKind::VehicleToDtt, 1, 0.0, 2, 1.0), 0.0);
    }

    #[test]
    fn kinds_use_distinct_draws_and_sigmas() {
        let f = field();
        let v2v = f.sample_db(LinkKind::VehicleToVehicle, 1, 10.0, 2, 40.0);
        let v2d = f.sample_db(LinkKind::VehicleToDtt, 1, 10.0, 2, 40.0);
        assert_ne!(v2v, v2d);
    }

    #[test]
    fn samples_look_gaussian() {
        let f = field();
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let x = f.sample_db(LinkKind::VehicleToVehicle, i, 0.0, i + 1_000_000, 30.0);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((var.sqrt() - 3.0).abs() < 0.1, "std {}", var.sqrt());
    }
}
