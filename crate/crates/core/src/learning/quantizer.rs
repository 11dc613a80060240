//! SINR quantization into R discrete levels.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizerConfig {
    /// Ascending level boundaries in dB; R = thresholds + 1 levels.
    pub thresholds_db: Vec<f64>,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            thresholds_db: vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
        }
    }
}

impl QuantizerConfig {
    pub fn levels(&self) -> u8 {
        (self.thresholds_db.len() + 1) as u8
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.thresholds_db.is_empty() {
            return Err(crate::Error::config("need at least one threshold (R >= 2)"));
        }
        if !self.thresholds_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(crate::Error::config("thresholds must be strictly ascending"));
        }
        Ok(())
    }

    /// Level = number of thresholds strictly below the input; monotone
    /// nondecreasing, and well defined for -inf inputs.
    pub fn quantize(&self, sinr_db: f64) -> u8 {
        self.thresholds_db.partition_point(|&t| t < sinr_db) as u8
    }
}
