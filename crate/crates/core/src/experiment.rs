//! Experiment specification: the config-file schema, scenario presets, and
//! resolution into the parameter bundle the engine consumes.
//!
//! A spec file is TOML. The `[experiment]` table must name a preset; the
//! preset supplies defaults for every other key, and any key present in the
//! file overrides the preset value. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::BaselineConfig;
use crate::learning::{LearningParams, QuantizerConfig, StateCodec};
use crate::radio::{
    AcirMatrix, DttProtectionParams, DttReceiver, Propagation, PropagationModel, TxWeights,
};
use crate::rem::{DttPowerMap, DttTransmitter};
use crate::scenario::{BandPlan, ScenarioConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioPreset {
    ThreePlatoonsSix,
    FourPlatoonsTen,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentVariant {
    Baseline,
    EpsGreedyIdeal,
    EpsGreedyFederated,
    SoftmaxIdeal,
}

impl AgentVariant {
    pub fn is_learning(&self) -> bool {
        !matches!(self, AgentVariant::Baseline)
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgentVariant::Baseline => "baseline",
            AgentVariant::EpsGreedyIdeal => "eps_greedy_ideal",
            AgentVariant::EpsGreedyFederated => "eps_greedy_federated",
            AgentVariant::SoftmaxIdeal => "softmax_ideal",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub preset: ScenarioPreset,
    #[serde(default = "default_variant")]
    pub variant: AgentVariant,
    /// Evaluation runs; the `--paper-scale` flag raises this to 200.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Reward samples to accumulate in offline training before evaluation;
    /// 0 skips training.
    #[serde(default)]
    pub training_samples_target: u64,
}

fn default_variant() -> AgentVariant {
    AgentVariant::Baseline
}

fn default_runs() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxWeightMode {
    DutyCycle,
    WorstCase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub phy_rate_mbps: f64,
    pub tx_weight_mode: TxWeightMode,
    pub decode_threshold_db: f64,
    pub shadowing_enabled: bool,
    /// Optional explicit ACIR matrix; defaults to spectral mask overlap.
    pub acir_matrix: Option<Vec<Vec<f64>>>,
}

impl Default for RadioSection {
    fn default() -> Self {
        Self {
            phy_rate_mbps: 6.0,
            tx_weight_mode: TxWeightMode::DutyCycle,
            decode_threshold_db: 8.0,
            shadowing_enabled: true,
            acir_matrix: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DttSection {
    pub transmitters: Vec<DttTransmitter>,
    pub receivers: Vec<DttReceiver>,
    pub gamma_pu_dbm: f64,
    pub sir_min_db: f64,
    pub device_max_power_dbm: f64,
    pub power_floor_dbm: f64,
    /// Knot spacing when generating the power profile from transmitters.
    pub profile_step_m: f64,
    /// Optional measured profile loaded verbatim instead of being generated.
    pub profile_file: Option<PathBuf>,
}

impl Default for DttSection {
    fn default() -> Self {
        Self {
            transmitters: Vec::new(),
            receivers: Vec::new(),
            gamma_pu_dbm: -80.0,
            sir_min_db: 39.5,
            device_max_power_dbm: 23.0,
            power_floor_dbm: -10.0,
            profile_step_m: 50.0,
            profile_file: None,
        }
    }
}

impl DttSection {
    pub fn protection(&self) -> DttProtectionParams {
        DttProtectionParams {
            protected_receivers: self.receivers.clone(),
            gamma_pu_dbm: self.gamma_pu_dbm,
            sir_min_db: self.sir_min_db,
            device_max_power_dbm: self.device_max_power_dbm,
            power_floor_dbm: self.power_floor_dbm,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemSection {
    pub info_latency_s: f64,
}

impl Default for RemSection {
    fn default() -> Self {
        Self { info_latency_s: 1.0 }
    }
}

/// The complete, merged experiment specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub band_plan: BandPlan,
    #[serde(default)]
    pub propagation: PropagationModel,
    #[serde(default)]
    pub radio: RadioSection,
    #[serde(default)]
    pub dtt: DttSection,
    #[serde(default)]
    pub rem: RemSection,
    #[serde(default)]
    pub learning: LearningParams,
    #[serde(default)]
    pub quantizer: QuantizerConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
}

/// Default DTT infrastructure shared by both paper presets: one transmitter
/// per DTT channel beyond each end of the segment, and ten protected
/// receivers clustered where their channel is strong.
fn default_dtt_section() -> DttSection {
    let transmitters = vec![
        DttTransmitter {
            position_m: -2_500.0,
            lateral_offset_m: 0.0,
            dtt_band: 0,
            eirp_dbm: 68.0,
        },
        DttTransmitter {
            position_m: 7_500.0,
            lateral_offset_m: 0.0,
            dtt_band: 1,
            eirp_dbm: 68.0,
        },
    ];
    let mut receivers = Vec::new();
    for i in 0..5 {
        receivers.push(DttReceiver {
            position_m: 250.0 + 500.0 * i as f64,
            lateral_offset_m: 100.0,
            dtt_band: 0,
        });
    }
    for i in 0..5 {
        receivers.push(DttReceiver {
            position_m: 2_750.0 + 500.0 * i as f64,
            lateral_offset_m: 100.0,
            dtt_band: 1,
        });
    }
    DttSection { transmitters, receivers, ..DttSection::default() }
}

impl ExperimentSpec {
    /// Full defaults for a preset; `[experiment]` carries the given section.
    pub fn preset(section: ExperimentSection) -> Self {
        let scenario = match section.preset {
            ScenarioPreset::ThreePlatoonsSix | ScenarioPreset::Custom => ScenarioConfig {
                num_platoons: 3,
                vehicles_per_platoon: 6,
                vehicle_length_m: 4.0,
                initial_platoon_gap_m: 80.0,
                ..ScenarioConfig::default()
            },
            ScenarioPreset::FourPlatoonsTen => ScenarioConfig {
                num_platoons: 4,
                vehicles_per_platoon: 10,
                vehicle_length_m: 3.9,
                initial_platoon_gap_m: 80.0,
                ..ScenarioConfig::default()
            },
        };
        Self {
            experiment: section,
            scenario,
            band_plan: BandPlan::default(),
            propagation: PropagationModel::default(),
            radio: RadioSection::default(),
            dtt: default_dtt_section(),
            rem: RemSection::default(),
            learning: LearningParams::default(),
            quantizer: QuantizerConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }

    /// Parse a spec file: preset defaults overlaid with the file's keys.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Value = toml::from_str(text)?;
        let section: ExperimentSection = user
            .get("experiment")
            .ok_or_else(|| Error::config("spec file is missing the [experiment] table"))?
            .clone()
            .try_into()
            .map_err(|e| Error::config(format!("[experiment]: {e}")))?;

        let defaults = Self::preset(section);
        let mut merged = toml::Value::try_from(&defaults)
            .map_err(|e| Error::config(format!("internal preset serialization: {e}")))?;
        merge_toml(&mut merged, &user);
        let spec: ExperimentSpec = merged
            .try_into()
            .map_err(|e| Error::config(format!("{e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.runs < 1 {
            return Err(Error::config("experiment.runs must be >= 1"));
        }
        self.scenario.validate()?;
        self.band_plan.validate()?;
        self.learning.validate()?;
        self.quantizer.validate()?;
        self.baseline.validate()?;
        self.dtt.protection().validate()?;
        if self.rem.info_latency_s < 0.0 {
            return Err(Error::config("rem.info_latency_s must be >= 0"));
        }
        if !(self.radio.phy_rate_mbps > 0.0) {
            return Err(Error::config("radio.phy_rate_mbps must be > 0"));
        }
        let bands = self.band_plan.num_vdsa_bands();
        if let Some(rows) = &self.radio.acir_matrix {
            if rows.len() != bands {
                return Err(Error::config("radio.acir_matrix must match the VDSA band count"));
            }
            AcirMatrix::from_rows(rows)?;
        }
        let dtt_bands = self.band_plan.dtt_centers_mhz.len();
        for t in &self.dtt.transmitters {
            if t.dtt_band >= dtt_bands {
                return Err(Error::config("dtt transmitter references an unknown DTT channel"));
            }
        }
        for r in &self.dtt.receivers {
            if r.dtt_band >= dtt_bands {
                return Err(Error::config("dtt receiver references an unknown DTT channel"));
            }
        }
        if self.dtt.transmitters.is_empty() && self.dtt.profile_file.is_none()
            && !self.dtt.receivers.is_empty()
        {
            return Err(Error::config(
                "protected receivers configured but no DTT field source (transmitters or profile_file)",
            ));
        }
        Ok(())
    }

    /// Stable digest of the fully-resolved spec.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let prop = Propagation::resolve(&self.propagation, &self.band_plan);
        let acir = match &self.radio.acir_matrix {
            Some(rows) => AcirMatrix::from_rows(rows)?,
            None => AcirMatrix::from_band_plan(&self.band_plan),
        };
        let power_map = match &self.dtt.profile_file {
            Some(path) => DttPowerMap::from_profile_file(path, &self.band_plan)?,
            None => DttPowerMap::from_transmitters(
                &self.dtt.transmitters,
                self.band_plan.dtt_centers_mhz.len(),
                self.scenario.road_length_m,
                self.dtt.profile_step_m,
                &prop,
            ),
        };
        let members = vec![self.scenario.vehicles_per_platoon; self.scenario.num_platoons];
        let weights = match self.radio.tx_weight_mode {
            TxWeightMode::DutyCycle => TxWeights::duty_cycle(
                &members,
                self.scenario.cacc_message_bytes,
                self.radio.phy_rate_mbps,
                self.scenario.cacc_period_s,
            ),
            TxWeightMode::WorstCase => TxWeights::worst_case(self.scenario.num_platoons),
        };
        let codec = StateCodec::new(self.quantizer.levels(), self.band_plan.num_vdsa_bands());
        Ok(ResolvedExperiment {
            digest: self.digest(),
            spec: self.clone(),
            params: SimParams {
                scenario: self.scenario.clone(),
                plan: self.band_plan.clone(),
                prop,
                acir,
                dtt: self.dtt.protection(),
                power_map,
                info_latency_s: self.rem.info_latency_s,
                weights,
                decode_threshold_db: self.radio.decode_threshold_db,
                shadowing: if self.radio.shadowing_enabled {
                    Some(ShadowingParams {
                        sigma_v2v_db: self.propagation.shadowing_sigma_v2v_db,
                        sigma_v2d_db: self.propagation.shadowing_sigma_v2d_db,
                        correlation_m: self.propagation.shadowing_correlation_m,
                    })
                } else {
                    None
                },
                quantizer: self.quantizer.clone(),
                codec,
                learning: self.learning.clone(),
                baseline: self.baseline.clone(),
            },
        })
    }
}

/// Overlay `from` onto `into`, recursing through tables. Non-table values
/// (including arrays) replace wholesale.
fn merge_toml(into: &mut toml::Value, from: &toml::Value) {
    match (into, from) {
        (toml::Value::Table(into_t), toml::Value::Table(from_t)) => {
            for (k, v) in from_t {
                match into_t.get_mut(k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge_toml(slot, v),
                    _ => {
                        into_t.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (into, from) => *into = from.clone(),
    }
}

/// Shadowing configuration in resolved form; absent when disabled.
#[derive(Debug, Clone, Copy)]
pub struct ShadowingParams {
    pub sigma_v2v_db: f64,
    pub sigma_v2d_db: f64,
    pub correlation_m: f64,
}

/// Everything the engine needs to run, in resolved form.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub scenario: ScenarioConfig,
    pub plan: BandPlan,
    pub prop: Propagation,
    pub acir: AcirMatrix,
    pub dtt: DttProtectionParams,
    pub power_map: DttPowerMap,
    pub info_latency_s: f64,
    pub weights: TxWeights,
    pub decode_threshold_db: f64,
    pub shadowing: Option<ShadowingParams>,
    pub quantizer: QuantizerConfig,
    pub codec: StateCodec,
    pub learning: LearningParams,
    pub baseline: BaselineConfig,
}

impl SimParams {
    pub fn num_bands(&self) -> usize {
        self.plan.num_vdsa_bands()
    }

    pub fn fresh_table(&self) -> crate::learning::QTable {
        crate::learning::QTable::new(
            self.quantizer.levels(),
            self.codec.state_count(),
            self.num_bands(),
        )
    }
}

/// A validated spec plus its digest and resolved engine parameters.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub spec: ExperimentSpec,
    pub digest: String,
    pub params: SimParams,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [experiment]
        preset = "three_platoons_six"
        variant = "baseline"
    "#;

    #[test]
    fn preset_three_platoons_six_matches_paper_layout() {
        let spec = ExperimentSpec::from_toml_str(MINIMAL).unwrap();
        assert_eq!(spec.scenario.num_platoons, 3);
        assert_eq!(spec.scenario.vehicles_per_platoon, 6);
        assert_eq!(spec.band_plan.vdsa_centers_mhz, vec![498.0, 506.0, 514.0]);
        assert_eq!(spec.band_plan.dtt_centers_mhz, vec![490.0, 522.0]);
        assert_eq!(spec.dtt.receivers.len(), 10);
        assert_eq!(spec.rem.info_latency_s, 1.0);
        assert_eq!(spec.learning.alpha, 0.1);
        assert_eq!(spec.learning.gamma, 0.7);
        assert_eq!(spec.scenario.run_duration_s, 140.0);
    }

    #[test]
    fn preset_four_platoons_ten() {
        let spec = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "four_platoons_ten"
            variant = "softmax_ideal"
            "#,
        )
        .unwrap();
        assert_eq!(spec.scenario.num_platoons, 4);
        assert_eq!(spec.scenario.vehicles_per_platoon, 10);
        assert!((spec.scenario.leader_to_last_m() - 80.1).abs() < 0.2);
    }

    #[test]
    fn file_keys_override_preset_defaults() {
        let spec = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "three_platoons_six"
            variant = "eps_greedy_ideal"
            runs = 7
            master_seed = 99

            [scenario]
            platoon_speed_mps = 25.0

            [learning]
            epsilon = 0.05
            "#,
        )
        .unwrap();
        assert_eq!(spec.experiment.runs, 7);
        assert_eq!(spec.scenario.platoon_speed_mps, 25.0);
        assert_eq!(spec.learning.epsilon, 0.05);
        // untouched defaults survive
        assert_eq!(spec.scenario.num_platoons, 3);
        assert_eq!(spec.learning.alpha, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected_with_context() {
        let err = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "three_platoons_six"

            [scenario]
            platon_speed_mps = 25.0
            "#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("platon_speed_mps"), "{msg}");
    }

    #[test]
    fn missing_preset_is_a_clear_error() {
        let err = ExperimentSpec::from_toml_str("[scenario]\nlanes = 2\n").unwrap_err();
        assert!(err.to_string().contains("experiment"), "{err}");
        let err = ExperimentSpec::from_toml_str("[experiment]\nvariant = \"baseline\"\n")
            .unwrap_err();
        assert!(err.to_string().to_lowercase().contains("preset"), "{err}");
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        let err = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "three_platoons_six"
            runs = 0
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("runs"), "{err}");

        let err = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "three_platoons_six"

            [learning]
            alpha = 1.5
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
    }

    #[test]
    fn digest_is_stable_across_reserialization() {
        let spec = ExperimentSpec::from_toml_str(MINIMAL).unwrap();
        let text = toml::to_string(&spec).unwrap();
        let reparsed = ExperimentSpec::from_toml_str(&text).unwrap();
        assert_eq!(spec.digest(), reparsed.digest());
    }

    #[test]
    fn digest_changes_with_content() {
        let a = ExperimentSpec::from_toml_str(MINIMAL).unwrap();
        let b = ExperimentSpec::from_toml_str(
            r#"
            [experiment]
            preset = "three_platoons_six"
            variant = "baseline"
            master_seed = 1
            "#,
        )
        .unwrap();
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn resolve_builds_consistent_dimensions() {
        let spec = ExperimentSpec::from_toml_str(MINIMAL).unwrap();
        let resolved = spec.resolve().unwrap();
        assert_eq!(resolved.params.codec.state_count(), 120);
        assert_eq!(resolved.params.num_bands(), 3);
        let t = resolved.params.fresh_table();
        assert_eq!(t.states(), 120);
        assert_eq!(t.actions(), 3);
    }
}
