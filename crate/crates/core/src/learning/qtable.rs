//! The Q-table and its update rule, plus binary/CSV serialization.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::LearningParams;

/// Which form of the value update to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
    Standard,
    /// Q(s,a) += alpha * (r - gamma * max_a' Q(s',a') - Q(s,a))
    PaperLiteral,
}

const MAGIC: &[u8; 4] = b"QTBL";
const FORMAT_VERSION: u32 = 1;

/// Action values over S states and K bands, plus per-state sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    visit_counts: Vec<u64>,
    states: usize,
    actions: usize,
    /// Quantization level count recorded for serialization headers.
    levels: u8,
}

impl QTable {
    pub fn new(levels: u8, states: usize, actions: usize) -> Self {
        Self {
            values: vec![0.0; states * actions],
            visit_counts: vec![0; states],
            states,
            actions,
            levels,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    #[inline]
    pub fn value(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    #[inline]
    pub fn set_value(&mut self, state: usize, action: usize, v: f64) {
        self.values[state * self.actions + action] = v;
    }

    #[inline]
    pub fn visit_count(&self, state: usize) -> u64 {
        self.visit_counts[state]
    }

    pub fn total_samples(&self) -> u64 {
        self.visit_counts.iter().sum()
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    /// Greedy action with ties broken by the lowest band index.
    pub fn argmax(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn values_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.visit_counts
    }

    pub(crate) fn counts_slice(&self) -> &[u64] {
        &self.visit_counts
    }

    /// Serialize to the flat binary layout: header (magic, version, R,
    /// K, S), then S*K little-endian f64 values, then S u64 counts.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.levels as u32).to_le_bytes())?;
        w.write_all(&(self.actions as u32).to_le_bytes())?;
        w.write_all(&(self.states as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        for c in &self.visit_counts {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::QTableFormat("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != FORMAT_VERSION {
            return Err(Error::QTableFormat(format!("unsupported version {version}")));
        }
        r.read_exact(&mut u32buf)?;
        let levels = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let actions = u32::from_le_bytes(u32buf) as usize;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let states = u64::from_le_bytes(u64buf) as usize;
        if levels == 0 || levels > 255 || actions == 0 || states == 0 {
            return Err(Error::QTableFormat("degenerate dimensions".into()));
        }
        let mut values = vec![0.0; states * actions];
        for v in &mut values {
            r.read_exact(&mut u64buf)?;
            *v = f64::from_le_bytes(u64buf);
        }
        let mut visit_counts = vec![0u64; states];
        for c in &mut visit_counts {
            r.read_exact(&mut u64buf)?;
            *c = u64::from_le_bytes(u64buf);
        }
        Ok(Self { values, visit_counts, states, actions, levels: levels as u8 })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }

    /// Human-inspectable CSV: one row per state with its decoded level
    /// tuple, visit count and per-band values.
    pub fn export_csv(&self, w: &mut impl Write) -> Result<()> {
        let codec = super::StateCodec::new(self.levels, self.actions);
        write!(w, "state,levels,count")?;
        for a in 0..self.actions {
            write!(w, ",q_band{a}")?;
        }
        writeln!(w)?;
        for s in 0..self.states {
            let tuple = if codec.state_count() == self.states {
                codec
                    .decode(s)
                    .map(|t| t.iter().map(u8::to_string).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default()
            } else {
                String::new()
            };
            write!(w, "{s},{tuple},{}", self.visit_counts[s])?;
            for a in 0..self.actions {
                write!(w, ",{}", self.value(s, a))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// One Q-learning step. Touches exactly the (state, action) value plus the
/// state's visit counter.
pub fn q_update(
    table: &mut QTable,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    params: &LearningParams,
) {
    let max_next = table.row(next_state).iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let q = table.value(state, action);
    let target = match params.update_rule {
        UpdateRule::Standard => reward + params.gamma * max_next,
        UpdateRule::PaperLiteral => reward - params.gamma * max_next,
    };
    table.set_value(state, action, q + params.alpha * (target - q));
    table.counts_mut()[state] += 1;
}
