//! Tabular Q-learning for band selection: SINR quantization, sorted-tuple
//! state encoding, throughput reward, the Q-update, ε-greedy and softmax
//! action selection, and Q-table fusion.

mod fusion;
mod policy;
mod qtable;
mod quantizer;
mod reward;
mod state;

pub use fusion::fuse_average;
pub use policy::{select_epsilon_greedy, select_softmax, temperature_for, Temperature};
pub use qtable::{q_update, QTable, UpdateRule};
pub use quantizer::QuantizerConfig;
pub use reward::{compute_reward, RewardMode, RewardSample};
pub use state::StateCodec;

use serde::{Deserialize, Serialize};

/// Learning hyper-parameters and the softmax temperature schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Below this many state samples the softmax runs fully exploratory.
    pub tau_low_samples: u64,
    /// Above this many state samples the softmax becomes pure argmax.
    pub tau_high_samples: u64,
    /// Temperature at the low-sample end of the interpolation.
    pub tau_max: f64,
    pub update_rule: UpdateRule,
    pub reward_mode: RewardMode,
}

impl Default for LearningParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.7,
            epsilon: 0.01,
            tau_low_samples: 1_000,
            tau_high_samples: 100_000,
            tau_max: 10.0,
            update_rule: UpdateRule::Standard,
            reward_mode: RewardMode::Mean,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(crate::Error::config("alpha must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(crate::Error::config("gamma must be in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(crate::Error::config("epsilon must be in [0, 1]"));
        }
        if self.tau_low_samples >= self.tau_high_samples {
            return Err(crate::Error::config(
                "tau_low_samples must be below tau_high_samples",
            ));
        }
        if !(self.tau_max >= 1.0) {
            return Err(crate::Error::config("tau_max must be >= 1"));
        }
        Ok(())
    }
}
