//! Per-run measurement collection and cross-run aggregation.
//!
//! Counters pool across runs (never mean-of-means), and metric merging is
//! associative and order-independent given a fixed run ordering.

/// Success/attempt counter pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counter {
    pub attempts: u64,
    pub successes: u64,
}

impl Counter {
    pub fn record(&mut self, success: bool) {
        self.attempts += 1;
        if success {
            self.successes += 1;
        }
        debug_assert!(self.successes <= self.attempts);
    }

    pub fn ratio(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.successes as f64 / self.attempts as f64)
    }
}

/// SIR samples gathered at the protected receivers of one DTT channel.
#[derive(Debug, Clone, Default)]
pub struct DttSirSamples {
    /// Finite SIR observations, dB.
    pub finite_db: Vec<f64>,
    /// Observations with zero aggregate interference.
    pub infinite: u64,
}

impl DttSirSamples {
    pub fn total(&self) -> u64 {
        self.finite_db.len() as u64 + self.infinite
    }
}

/// Everything measured during one simulation run.
#[derive(Debug, Clone)]
pub struct MetricsLog {
    /// `leader_rx[platoon][position - 1]` counts the leader-link packets of
    /// the member at that within-platoon position.
    pub leader_rx: Vec<Vec<Counter>>,
    pub band_switches: Vec<u64>,
    /// Per DTT channel.
    pub dtt_sir: Vec<DttSirSamples>,
    /// (vehicle, band) power-control results clamped up to the floor.
    pub floor_binding_events: u64,
}

impl MetricsLog {
    pub fn new(num_platoons: usize, members_per_platoon: usize, num_dtt_bands: usize) -> Self {
        Self {
            leader_rx: vec![vec![Counter::default(); members_per_platoon - 1]; num_platoons],
            band_switches: vec![0; num_platoons],
            dtt_sir: vec![DttSirSamples::default(); num_dtt_bands],
            floor_binding_events: 0,
        }
    }

    pub fn total_leader_attempts(&self) -> u64 {
        self.leader_rx
            .iter()
            .flat_map(|p| p.iter())
            .map(|c| c.attempts)
            .sum()
    }
}

/// Pooled leader-link reception ratio per within-platoon position,
/// aggregated over runs and platoons. Positions with no attempts are
/// reported as absent.
pub fn reception_rate_by_position(logs: &[&MetricsLog]) -> Vec<(usize, Counter)> {
    let max_pos = logs
        .iter()
        .flat_map(|l| l.leader_rx.iter().map(|p| p.len()))
        .max()
        .unwrap_or(0);
    let mut pooled = vec![Counter::default(); max_pos];
    for log in logs {
        for platoon in &log.leader_rx {
            for (i, c) in platoon.iter().enumerate() {
                pooled[i].attempts += c.attempts;
                pooled[i].successes += c.successes;
            }
        }
    }
    pooled
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.attempts > 0)
        .map(|(i, c)| (i + 1, c))
        .collect()
}

/// Average number of band switches per platoon per run.
pub fn band_switch_average(logs: &[&MetricsLog]) -> f64 {
    let mut switches = 0u64;
    let mut platoon_runs = 0u64;
    for log in logs {
        switches += log.band_switches.iter().sum::<u64>();
        platoon_runs += log.band_switches.len() as u64;
    }
    if platoon_runs == 0 {
        0.0
    } else {
        switches as f64 / platoon_runs as f64
    }
}

/// Per-platoon average switches per run.
pub fn band_switch_per_platoon(logs: &[&MetricsLog]) -> Vec<f64> {
    let platoons = logs.iter().map(|l| l.band_switches.len()).max().unwrap_or(0);
    let mut sums = vec![0u64; platoons];
    for log in logs {
        for (p, &s) in log.band_switches.iter().enumerate() {
            sums[p] += s;
        }
    }
    sums.into_iter().map(|s| s as f64 / logs.len() as f64).collect()
}

/// Empirical SIR distribution at the protected receivers of one DTT channel.
#[derive(Debug, Clone)]
pub struct SirCdf {
    /// (sir_db, cumulative fraction) over all samples; infinite-SIR samples
    /// keep the final fraction below 1.
    pub points: Vec<(f64, f64)>,
    pub total_samples: u64,
    pub finite_samples: u64,
}

impl SirCdf {
    /// Fraction of all samples strictly below the threshold. A small
    /// tolerance keeps boundary cases (SIR exactly at the threshold)
    /// classified as satisfied.
    pub fn violation_fraction(&self, sir_min_db: f64) -> f64 {
        if self.total_samples == 0 {
            return 0.0;
        }
        let below = self
            .points
            .iter()
            .take_while(|(s, _)| *s < sir_min_db - 1e-9)
            .count();
        below as f64 / self.total_samples as f64
    }

    pub fn is_empty(&self) -> bool {
        self.total_samples == 0
    }
}

/// Build the empirical CDF for one DTT channel from a set of runs.
pub fn dtt_sir_cdf(logs: &[&MetricsLog], dtt_band: usize) -> SirCdf {
    let mut finite: Vec<f64> = Vec::new();
    let mut infinite = 0u64;
    for log in logs {
        if let Some(samples) = log.dtt_sir.get(dtt_band) {
            finite.extend_from_slice(&samples.finite_db);
            infinite += samples.infinite;
        }
    }
    finite.sort_unstable_by(f64::total_cmp);
    let total = finite.len() as u64 + infinite;
    let points = finite
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, (i + 1) as f64 / total as f64))
        .collect();
    SirCdf { points, total_samples: total, finite_samples: finite.len() as u64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_with_counts(counts: &[(u64, u64)]) -> MetricsLog {
        let mut log = MetricsLog::new(1, counts.len() + 1, 2);
        for (i, &(attempts, successes)) in counts.iter().enumerate() {
            log.leader_rx[0][i] = Counter { attempts, successes };
        }
        log
    }

    #[test]
    fn all_success_gives_ratio_one() {
        let log = log_with_counts(&[(700, 700), (700, 700)]);
        let rates = reception_rate_by_position(&[&log]);
        assert_eq!(rates.len(), 2);
        for (_, c) in rates {
            assert_eq!(c.ratio(), Some(1.0));
        }
    }

    #[test]
    fn alternating_stream_gives_half() {
        let mut c = Counter::default();
        for i in 0..100 {
            c.record(i % 2 == 0);
        }
        assert_eq!(c.ratio(), Some(0.5));
    }

    #[test]
    fn aggregation_pools_counters_not_means() {
        // run A: 10/10 at position 1; run B: 0/30. Pooled = 10/40 = 0.25,
        // while mean-of-means would claim 0.5.
        let a = log_with_counts(&[(10, 10)]);
        let b = log_with_counts(&[(30, 0)]);
        let rates = reception_rate_by_position(&[&a, &b]);
        assert_eq!(rates[0].1.attempts, 40);
        assert_eq!(rates[0].1.ratio(), Some(0.25));
    }

    #[test]
    fn positions_without_attempts_are_absent() {
        let log = log_with_counts(&[(10, 5), (0, 0)]);
        let rates = reception_rate_by_position(&[&log]);
        assert_eq!(rates.len(), 1);
        assert_eq!(rates[0].0, 1);
    }

    #[test]
    fn switch_averages() {
        let mut log = MetricsLog::new(2, 3, 2);
        log.band_switches = vec![3, 1];
        assert_eq!(band_switch_average(&[&log]), 2.0);
        let per = band_switch_per_platoon(&[&log, &log]);
        assert_eq!(per, vec![3.0, 1.0]);
    }

    #[test]
    fn cdf_fractions_and_violations() {
        let mut log = MetricsLog::new(1, 2, 1);
        log.dtt_sir[0].finite_db = vec![30.0, 50.0, 40.0];
        let cdf = dtt_sir_cdf(&[&log], 0);
        assert_eq!(cdf.total_samples, 3);
        assert_eq!(cdf.points[0], (30.0, 1.0 / 3.0));
        assert_eq!(cdf.points[2].0, 50.0);
        assert!((cdf.violation_fraction(39.5) - 1.0 / 3.0).abs() < 1e-12);
        // all samples at or above the threshold: zero violations
        log.dtt_sir[0].finite_db = vec![39.5, 50.0];
        let cdf = dtt_sir_cdf(&[&log], 0);
        assert_eq!(cdf.violation_fraction(39.5), 0.0);
    }

    #[test]
    fn infinite_samples_dilute_but_never_violate() {
        let mut log = MetricsLog::new(1, 2, 1);
        log.dtt_sir[0].finite_db = vec![30.0];
        log.dtt_sir[0].infinite = 3;
        let cdf = dtt_sir_cdf(&[&log], 0);
        assert_eq!(cdf.total_samples, 4);
        assert!((cdf.violation_fraction(39.5) - 0.25).abs() < 1e-12);
        assert!((cdf.points[0].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_set_is_flagged() {
        let log = MetricsLog::new(1, 2, 1);
        let cdf = dtt_sir_cdf(&[&log], 0);
        assert!(cdf.is_empty());
        assert_eq!(cdf.violation_fraction(39.5), 0.0);
    }
}
