//! Channel gains, adjacent-channel leakage, DTT-protection power control and
//! SINR computation.
//!
//! All external interfaces express powers in dBm and gains in dB; the
//! arithmetic that sums interference runs in linear scale (mW). Every
//! function here is pure: identical inputs (including shadow samples)
//! produce bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::scenario::{BandPlan, Platoon, World};
use crate::shadow::{LinkKind, ShadowField};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const LN10_OVER_10: f64 = core::f64::consts::LN_10 / 10.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    (db * LN10_OVER_10).exp()
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Log-distance path loss with optional log-normal shadowing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationModel {
    /// Path loss at the reference distance, dB. `None` selects free-space
    /// loss at the band-plan mid frequency.
    pub pl0_db: Option<f64>,
    pub ref_distance_m: f64,
    pub exponent: f64,
    pub shadowing_sigma_v2v_db: f64,
    pub shadowing_sigma_v2d_db: f64,
    pub shadowing_correlation_m: f64,
    /// Noise variance over one VDSA channel, dBm.
    pub noise_variance_dbm: f64,
}

impl Default for PropagationModel {
    fn default() -> Self {
        Self {
            pl0_db: None,
            ref_distance_m: 1.0,
            exponent: 2.7,
            shadowing_sigma_v2v_db: 3.0,
            shadowing_sigma_v2d_db: 8.0,
            shadowing_correlation_m: 25.0,
            noise_variance_dbm: -95.0,
        }
    }
}

/// Free-space path loss at `ref_m` meters for a carrier in MHz.
pub fn free_space_pl0_db(freq_mhz: f64, ref_m: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * ref_m * freq_mhz * 1e6 / SPEED_OF_LIGHT).log10()
}

impl PropagationModel {
    /// Reference loss, resolving the free-space default against a band plan.
    pub fn pl0_for(&self, plan: &BandPlan) -> f64 {
        self.pl0_db.unwrap_or_else(|| {
            let centers = &plan.vdsa_centers_mhz;
            let mid = centers[centers.len() / 2];
            free_space_pl0_db(mid, self.ref_distance_m)
        })
    }

    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_variance_dbm)
    }
}

/// Resolved propagation parameters used on the hot path.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub pl0_db: f64,
    pub ref_distance_m: f64,
    pub exponent: f64,
    pub noise_mw: f64,
}

impl Propagation {
    pub fn resolve(model: &PropagationModel, plan: &BandPlan) -> Self {
        Self {
            pl0_db: model.pl0_for(plan),
            ref_distance_m: model.ref_distance_m,
            exponent: model.exponent,
            noise_mw: model.noise_mw(),
        }
    }

    /// Channel gain in dB at a distance, with a shadow sample applied.
    /// Distances below the reference clamp to the reference.
    #[inline]
    pub fn gain_db(&self, distance_m: f64, shadow_db: f64) -> f64 {
        let d = distance_m.max(self.ref_distance_m);
        -(self.pl0_db + 10.0 * self.exponent * (d / self.ref_distance_m).log10()) + shadow_db
    }

    #[inline]
    pub fn gain_linear(&self, distance_m: f64, shadow_db: f64) -> f64 {
        db_to_linear(self.gain_db(distance_m, shadow_db))
    }
}

/// Linear leakage fractions between every pair of VDSA bands.
#[derive(Debug, Clone)]
pub struct AcirMatrix {
    factors: Vec<f64>,
    n: usize,
}

impl AcirMatrix {
    /// Default: spectral overlap of flat channel masks at the plan's centers.
    pub fn from_band_plan(plan: &BandPlan) -> Self {
        let n = plan.num_vdsa_bands();
        let mut factors = vec![0.0; n * n];
        for l in 0..n {
            for k in 0..n {
                factors[l * n + k] = plan.vdsa_to_vdsa(l, k);
            }
        }
        Self { factors, n }
    }

    /// Explicit matrix override from configuration.
    pub fn from_rows(rows: &[Vec<f64>]) -> crate::Result<Self> {
        let n = rows.len();
        let mut factors = vec![0.0; n * n];
        for (l, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(crate::Error::config("acir matrix must be square"));
            }
            for (k, &f) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&f) {
                    return Err(crate::Error::config("acir factors must be in [0, 1]"));
                }
                factors[l * n + k] = f;
            }
        }
        for l in 0..n {
            if (factors[l * n + l] - 1.0).abs() > 1e-12 {
                return Err(crate::Error::config("acir diagonal must be 1.0"));
            }
            for k in 0..n {
                if (factors[l * n + k] - factors[k * n + l]).abs() > 1e-12 {
                    return Err(crate::Error::config("acir matrix must be symmetric"));
                }
            }
        }
        Ok(Self { factors, n })
    }

    #[inline]
    pub fn factor(&self, l: usize, k: usize) -> f64 {
        self.factors[l * self.n + k]
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

/// A protected DTT receiver site.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DttReceiver {
    pub position_m: f64,
    pub lateral_offset_m: f64,
    /// Index into the band plan's DTT channel list.
    pub dtt_band: usize,
}

/// Primary-user protection parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DttProtectionParams {
    pub protected_receivers: Vec<DttReceiver>,
    /// Detectability threshold: receivers whose DTT power is below this are
    /// not protected (and are excluded from SIR statistics).
    pub gamma_pu_dbm: f64,
    pub sir_min_db: f64,
    pub device_max_power_dbm: f64,
    /// Transmit-power floor; when a computed limit falls below it the
    /// vehicle transmits at the floor and the event is counted.
    pub power_floor_dbm: f64,
}

impl Default for DttProtectionParams {
    fn default() -> Self {
        Self {
            protected_receivers: Vec::new(),
            gamma_pu_dbm: -80.0,
            sir_min_db: 39.5,
            device_max_power_dbm: 23.0,
            power_floor_dbm: -10.0,
        }
    }
}

impl DttProtectionParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.sir_min_db > 0.0) {
            return Err(crate::Error::config("sir_min_db must be > 0"));
        }
        if self.power_floor_dbm > self.device_max_power_dbm {
            return Err(crate::Error::config(
                "power_floor_dbm must not exceed device_max_power_dbm",
            ));
        }
        Ok(())
    }
}

/// Per-(vehicle, band) maximum transmit power in dBm.
#[derive(Debug, Clone)]
pub struct PowerAllocation {
    /// Indexed `[platoon][member][band]`.
    p_max_dbm: Vec<Vec<Vec<f64>>>,
    /// Number of (vehicle, band) entries clamped up to the power floor.
    pub floor_bindings: u64,
}

impl PowerAllocation {
    #[inline]
    pub fn p_max_dbm(&self, platoon: usize, member: usize, band: usize) -> f64 {
        self.p_max_dbm[platoon][member][band]
    }

    #[inline]
    pub fn p_max_mw(&self, platoon: usize, member: usize, band: usize) -> f64 {
        db_to_linear(self.p_max_dbm(platoon, member, band))
    }
}

/// Transmit-overlap probabilities: how likely a member of a given platoon is
/// on air while some other vehicle receives.
#[derive(Debug, Clone)]
pub struct TxWeights {
    per_platoon: Vec<f64>,
}

impl TxWeights {
    /// Duty-cycle model: members × airtime of one CACC frame / CACC period.
    pub fn duty_cycle(
        members_per_platoon: &[usize],
        message_bytes: u32,
        phy_rate_mbps: f64,
        cacc_period_s: f64,
    ) -> Self {
        let airtime_s = message_bytes as f64 * 8.0 / (phy_rate_mbps * 1e6);
        let per_platoon = members_per_platoon
            .iter()
            .map(|&n| (n as f64 * airtime_s / cacc_period_s).clamp(0.0, 1.0))
            .collect();
        Self { per_platoon }
    }

    /// Worst case: every interferer always on air.
    pub fn worst_case(num_platoons: usize) -> Self {
        Self { per_platoon: vec![1.0; num_platoons] }
    }

    #[inline]
    pub fn weight(&self, tx_platoon: usize) -> f64 {
        self.per_platoon[tx_platoon]
    }
}

/// A transmitting or receiving point in the radio model.
#[derive(Debug, Clone, Copy)]
pub struct RadioNode {
    pub platoon: usize,
    pub member: usize,
    /// Stable key for shadow-field lookups.
    pub key: u64,
    pub position_m: f64,
    pub lateral_m: f64,
}

impl RadioNode {
    pub fn from_vehicle(v: &crate::scenario::Vehicle) -> Self {
        Self {
            platoon: v.id.platoon,
            member: v.id.index,
            key: v.id.key(),
            position_m: v.position_m,
            lateral_m: v.lateral_m(),
        }
    }
}

/// Road distance helper shared by ground-truth and estimated geometry.
#[derive(Debug, Clone, Copy)]
pub struct RoadGeometry {
    pub length_m: f64,
    pub wrap: bool,
}

impl RoadGeometry {
    pub fn of(world: &World) -> Self {
        Self {
            length_m: world.road_length_m,
            wrap: world.mobility == crate::scenario::MobilityMode::Wrap,
        }
    }

    #[inline]
    pub fn distance(&self, a: &RadioNode, b: &RadioNode) -> f64 {
        let mut dx = (a.position_m - b.position_m).abs();
        if self.wrap {
            dx = dx.min(self.length_m - dx);
        }
        let dy = a.lateral_m - b.lateral_m;
        (dx * dx + dy * dy).sqrt()
    }
}

/// One interfering platoon as seen by a receiver: its band, its transmit
/// weight and its member geometry (ground truth or reconstructed from
/// delayed context information).
#[derive(Debug, Clone)]
pub struct InterferenceSource {
    pub platoon: usize,
    pub band: usize,
    pub weight: f64,
    pub members: Vec<RadioNode>,
}

/// The set of other-platoon interferers visible to one receiver.
#[derive(Debug, Clone, Default)]
pub struct InterfererView {
    pub sources: Vec<InterferenceSource>,
}

impl InterfererView {
    /// Ground-truth view: every platoon except `exclude_platoon`, at its
    /// actual positions and on its actual band.
    pub fn ground_truth(world: &World, exclude_platoon: usize, weights: &TxWeights) -> Self {
        let sources = world
            .platoons
            .iter()
            .filter(|p| p.id != exclude_platoon)
            .map(|p| InterferenceSource {
                platoon: p.id,
                band: p.current_band,
                weight: weights.weight(p.id),
                members: p.members.iter().map(RadioNode::from_vehicle).collect(),
            })
            .collect();
        Self { sources }
    }
}

/// Channel gain between two nodes, optionally shadowed.
#[inline]
pub fn node_gain_linear(
    prop: &Propagation,
    geom: &RoadGeometry,
    a: &RadioNode,
    b: &RadioNode,
    kind: LinkKind,
    shadow: Option<&ShadowField>,
) -> f64 {
    let d = geom.distance(a, b);
    let shadow_db = shadow
        .map(|f| f.sample_db(kind, a.key, a.position_m, b.key, b.position_m))
        .unwrap_or(0.0);
    prop.gain_linear(d, shadow_db)
}

/// Aggregate interference from other platoons at a receiver on a band (mW).
///
/// Sums, over every other platoon and each of its members, the member's
/// maximum transmit power on its own band, weighted by the transmit-overlap
/// probability, the band-leakage factor into the receive band and the
/// channel gain.
pub fn other_platoon_interference_mw(
    rx: &RadioNode,
    rx_band: usize,
    view: &InterfererView,
    alloc: &PowerAllocation,
    acir: &AcirMatrix,
    prop: &Propagation,
    geom: &RoadGeometry,
    shadow: Option<&ShadowField>,
) -> f64 {
    let mut total = 0.0;
    for src in &view.sources {
        let leak = acir.factor(src.band, rx_band);
        if leak == 0.0 || src.weight == 0.0 {
            continue;
        }
        for tx in &src.members {
            let p_mw = alloc.p_max_mw(tx.platoon, tx.member, src.band);
            let h = node_gain_linear(prop, geom, tx, rx, LinkKind::VehicleToVehicle, shadow);
            total += src.weight * p_mw * leak * h;
        }
    }
    total
}

/// Single-link SINR (linear): transmit power through the channel gain over
/// noise plus DTT plus other-platoon interference.
#[inline]
pub fn link_sinr_linear(p_tx_mw: f64, gain_linear: f64, noise_mw: f64, dtt_mw: f64, other_mw: f64) -> f64 {
    p_tx_mw * gain_linear / (noise_mw + dtt_mw + other_mw)
}

/// Per-vehicle SINR on a band: the minimum of the leader link and the
/// preceding-vehicle link. Undefined for the leader itself.
pub fn vehicle_sinr_linear(
    members: &[RadioNode],
    v: usize,
    band: usize,
    alloc: &PowerAllocation,
    prop: &Propagation,
    geom: &RoadGeometry,
    dtt_mw: f64,
    other_mw: f64,
    shadow: Option<&ShadowField>,
) -> f64 {
    debug_assert!(v > 0, "vehicle SINR is undefined for the leader");
    let rx = &members[v];
    let denom_noise = prop.noise_mw;
    let mut sinr = f64::INFINITY;
    // u = 0 (leader) and u = v - 1 (preceding) coincide for v = 1.
    let sources = if v == 1 { &[0][..] } else { &[0, v - 1][..] };
    for &u in sources {
        let tx = &members[u];
        let h = node_gain_linear(prop, geom, tx, rx, LinkKind::VehicleToVehicle, shadow);
        let p = alloc.p_max_mw(tx.platoon, tx.member, band);
        let s = link_sinr_linear(p, h, denom_noise, dtt_mw, other_mw);
        sinr = sinr.min(s);
    }
    sinr
}

/// Minimum per-vehicle SINR across a platoon's non-leader members.
///
/// `dtt_other_mw` supplies, per member index, the (DTT, other-platoon)
/// interference at that member's position.
pub fn platoon_min_sinr_linear(
    members: &[RadioNode],
    band: usize,
    alloc: &PowerAllocation,
    prop: &Propagation,
    geom: &RoadGeometry,
    dtt_other_mw: &[(f64, f64)],
    shadow: Option<&ShadowField>,
) -> f64 {
    debug_assert!(members.len() >= 2);
    let mut min = f64::INFINITY;
    for v in 1..members.len() {
        let (dtt, other) = dtt_other_mw[v];
        let s = vehicle_sinr_linear(members, v, band, alloc, prop, geom, dtt, other, shadow);
        min = min.min(s);
    }
    min
}

/// Power control: cap each vehicle's per-band transmit power so that, at
/// median propagation, no detectable protected receiver drops below the
/// required SIR. `receiver_dtt_dbm` holds the DTT power at each protected
/// receiver in its own channel.
pub fn compute_power_control(
    world: &World,
    dtt: &DttProtectionParams,
    prop: &Propagation,
    plan: &BandPlan,
    receiver_dtt_dbm: &[f64],
) -> PowerAllocation {
    debug_assert_eq!(receiver_dtt_dbm.len(), dtt.protected_receivers.len());
    let geom = RoadGeometry::of(world);
    let bands = plan.num_vdsa_bands();
    let mut floor_bindings = 0u64;

    let active: Vec<(usize, &DttReceiver, f64)> = dtt
        .protected_receivers
        .iter()
        .enumerate()
        .filter(|(i, _)| receiver_dtt_dbm[*i] >= dtt.gamma_pu_dbm)
        .map(|(i, r)| (i, r, receiver_dtt_dbm[i]))
        .collect();

    let p_max_dbm = world
        .platoons
        .iter()
        .map(|platoon| {
            platoon
                .members
                .iter()
                .map(|v| {
                    let node = RadioNode::from_vehicle(v);
                    (0..bands)
                        .map(|k| {
                            let mut p = dtt.device_max_power_dbm;
                            for &(_, r, p_dtt) in &active {
                                let leak = plan.vdsa_to_dtt(k, r.dtt_band);
                                if leak == 0.0 {
                                    continue;
                                }
                                let rx = RadioNode {
                                    platoon: usize::MAX,
                                    member: usize::MAX,
                                    key: 0,
                                    position_m: r.position_m,
                                    lateral_m: r.lateral_offset_m,
                                };
                                let gain_db = prop.gain_db(geom.distance(&node, &rx), 0.0);
                                let bound =
                                    p_dtt - dtt.sir_min_db - linear_to_db(leak) - gain_db;
                                p = p.min(bound);
                            }
                            if p < dtt.power_floor_dbm {
                                floor_bindings += 1;
                                p = dtt.power_floor_dbm;
                            }
                            p
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    PowerAllocation { p_max_dbm, floor_bindings }
}

/// SIR at one protected receiver given the set of currently transmitting
/// vehicles, in dB. Returns `f64::INFINITY` when no transmission leaks into
/// the receiver's channel.
pub fn dtt_sir_db(
    receiver: &DttReceiver,
    receiver_dtt_dbm: f64,
    transmitters: &[(RadioNode, usize)],
    alloc: &PowerAllocation,
    plan: &BandPlan,
    prop: &Propagation,
    geom: &RoadGeometry,
    shadow: Option<&ShadowField>,
) -> f64 {
    let rx = RadioNode {
        platoon: usize::MAX,
        member: usize::MAX,
        key: u64::MAX ^ ((receiver.position_m as u64) << 8) ^ receiver.dtt_band as u64,
        position_m: receiver.position_m,
        lateral_m: receiver.lateral_offset_m,
    };
    let mut interference_mw = 0.0;
    for (tx, band) in transmitters {
        let leak = plan.vdsa_to_dtt(*band, receiver.dtt_band);
        if leak == 0.0 {
            continue;
        }
        let h = node_gain_linear(prop, geom, tx, &rx, LinkKind::VehicleToDtt, shadow);
        interference_mw += alloc.p_max_mw(tx.platoon, tx.member, *band) * leak * h;
    }
    if interference_mw == 0.0 {
        f64::INFINITY
    } else {
        receiver_dtt_dbm - linear_to_db(interference_mw)
    }
}

/// Estimate a platoon's minimum SINR in every band from context-database
/// information: own geometry is known, other platoons enter at their last
/// announced positions and bands, and propagation is taken at the median
/// (no shadowing).
pub fn estimate_min_sinr_db_per_band(
    own: &Platoon,
    view: &InterfererView,
    alloc: &PowerAllocation,
    acir: &AcirMatrix,
    prop: &Propagation,
    geom: &RoadGeometry,
    dtt_query: impl Fn(f64, usize) -> f64,
) -> Vec<f64> {
    let members: Vec<RadioNode> = own.members.iter().map(RadioNode::from_vehicle).collect();
    let bands = acir.size();
    (0..bands)
        .map(|k| {
            let dtt_other: Vec<(f64, f64)> = members
                .iter()
                .map(|m| {
                    let dtt_mw = db_to_linear(dtt_query(m.position_m, k));
                    let other_mw = other_platoon_interference_mw(
                        m, k, view, alloc, acir, prop, geom, None,
                    );
                    (dtt_mw, other_mw)
                })
                .collect();
            linear_to_db(platoon_min_sinr_linear(
                &members, k, alloc, prop, geom, &dtt_other, None,
            ))
        })
        .collect()
}
