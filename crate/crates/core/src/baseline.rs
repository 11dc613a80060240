//! The conventional distributed band-selection rule used as comparison
//! point: pick the band with the best estimated platoon-minimum SINR from
//! delayed context information, with a hysteresis margin against churn.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// A candidate band must beat the current one by more than this margin
    /// (dB) to trigger a switch.
    pub switch_margin_db: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { switch_margin_db: 1.0 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.switch_margin_db < 0.0 {
            return Err(crate::Error::config("switch_margin_db must be >= 0"));
        }
        Ok(())
    }
}

/// Decide the next band from per-band estimated minimum SINRs (dB). Keeps
/// the current band unless some band exceeds its estimate by more than the
/// margin; ties break toward the lowest band index. Pure function of its
/// inputs.
pub fn select_band_baseline(
    estimated_min_sinr_db: &[f64],
    current_band: usize,
    config: &BaselineConfig,
) -> usize {
    debug_assert!(current_band < estimated_min_sinr_db.len());
    let mut best = 0;
    for (k, &s) in estimated_min_sinr_db.iter().enumerate().skip(1) {
        if s > estimated_min_sinr_db[best] {
            best = k;
        }
    }
    if estimated_min_sinr_db[best] > estimated_min_sinr_db[current_band] + config.switch_margin_db
    {
        best
    } else {
        current_band
    }
}
