//! Federated combination of Q-tables by element-wise averaging.

use crate::{Error, Result};

use super::QTable;

/// Element-wise arithmetic mean of the tables' values; visit counts are
/// summed. Inputs are left untouched.
///
/// The mean of each cell is computed as `min + mean(sorted deviations)`,
/// which makes the operation exactly idempotent on identical inputs and
/// exactly independent of input order.
pub fn fuse_average(tables: &[&QTable]) -> Result<QTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no tables to fuse".into()))?;
    for t in tables {
        if t.states() != first.states()
            || t.actions() != first.actions()
            || t.levels() != first.levels()
        {
            return Err(Error::DimensionMismatch(format!(
                "table {}x{} does not match {}x{}",
                t.states(),
                t.actions(),
                first.states(),
                first.actions()
            )));
        }
    }
    let mut fused = QTable::new(first.levels(), first.states(), first.actions());
    let n = tables.len();
    let mut cell = vec![0.0f64; n];
    let inv = 1.0 / n as f64;
    for i in 0..first.states() * first.actions() {
        for (j, t) in tables.iter().enumerate() {
            cell[j] = t.values_slice()[i];
        }
        cell.sort_unstable_by(f64::total_cmp);
        let anchor = cell[0];
        let dev_sum: f64 = cell.iter().map(|v| v - anchor).sum();
        fused.values_mut()[i] = anchor + dev_sum * inv;
    }
    for s in 0..first.states() {
        fused.counts_mut()[s] = tables.iter().map(|t| t.counts_slice()[s]).sum();
    }
    Ok(fused)
}
