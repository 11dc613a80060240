//! Action selection: ε-greedy and Boltzmann softmax with a sample-count
//! driven temperature schedule.

use rand::Rng;

use super::{LearningParams, QTable};

/// Softmax operating regime for a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    /// Too few samples: all actions equally probable.
    Uniform,
    /// Finite Boltzmann temperature in [1, tau_max].
    Finite(f64),
    /// Enough samples: always take the highest-value action.
    Argmax,
}

/// ε-greedy selection: explore uniformly with probability ε, otherwise take
/// the greedy action (ties to the lowest band index).
pub fn select_epsilon_greedy(
    table: &QTable,
    state: usize,
    epsilon: f64,
    rng: &mut impl Rng,
) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..table.actions())
    } else {
        table.argmax(state)
    }
}

/// Temperature for a state given how many reward samples it has received.
/// Between the two breakpoints the temperature decays log-linearly from
/// `tau_max` down to 1.
pub fn temperature_for(visit_count: u64, params: &LearningParams) -> Temperature {
    if visit_count < params.tau_low_samples {
        return Temperature::Uniform;
    }
    if visit_count > params.tau_high_samples {
        return Temperature::Argmax;
    }
    let lo = (params.tau_low_samples as f64).ln();
    let hi = (params.tau_high_samples as f64).ln();
    let x = ((visit_count as f64).ln() - lo) / (hi - lo);
    Temperature::Finite(params.tau_max.powf(1.0 - x))
}

/// Boltzmann probabilities over actions, computed stably by subtracting the
/// row maximum before exponentiation.
pub fn softmax_probabilities(table: &QTable, state: usize, tau: Temperature) -> Vec<f64> {
    let k = table.actions();
    match tau {
        Temperature::Uniform => vec![1.0 / k as f64; k],
        Temperature::Argmax => {
            let mut p = vec![0.0; k];
            p[table.argmax(state)] = 1.0;
            p
        }
        Temperature::Finite(t) => {
            let row = table.row(state);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&q| ((q - max) / t).exp()).collect();
            let z: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / z).collect()
        }
    }
}

/// Sample an action from the softmax distribution.
pub fn select_softmax(
    table: &QTable,
    state: usize,
    tau: Temperature,
    rng: &mut impl Rng,
) -> usize {
    match tau {
        Temperature::Argmax => table.argmax(state),
        _ => {
            let probs = softmax_probabilities(table, state, tau);
            let u: f64 = rng.random();
            let mut cum = 0.0;
            for (a, p) in probs.iter().enumerate() {
                cum += p;
                if u < cum {
                    return a;
                }
            }
            probs.len() - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table_with_row(values: &[f64]) -> QTable {
        let mut t = QTable::new(8, 2, values.len());
        for (a, &v) in values.iter().enumerate() {
            t.set_value(0, a, v);
        }
        t
    }

    #[test]
    fn zero_epsilon_is_pure_argmax() {
        let t = table_with_row(&[1.0, 9.0, 3.0]);
        let mut r = rng::stream(1, &[99]);
        for _ in 0..1_000 {
            assert_eq!(select_epsilon_greedy(&t, 0, 0.0, &mut r), 1);
        }
    }

    #[test]
    fn unit_epsilon_is_uniform_within_three_sigma() {
        let t = table_with_row(&[1.0, 9.0, 3.0]);
        let mut r = rng::stream(2, &[99]);
        let n = 10_000usize;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[select_epsilon_greedy(&t, 0, 1.0, &mut r)] += 1;
        }
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() < 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn small_epsilon_exploration_frequency() {
        // with epsilon = 0.01 the observable non-greedy rate over k = 3
        // actions is epsilon * (k - 1) / k
        let t = table_with_row(&[1.0, 9.0, 3.0]);
        let mut r = rng::stream(3, &[99]);
        let n = 100_000usize;
        let mut non_greedy = 0usize;
        for _ in 0..n {
            if select_epsilon_greedy(&t, 0, 0.01, &mut r) != 1 {
                non_greedy += 1;
            }
        }
        let expected = 0.01 * 2.0 / 3.0;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        let freq = non_greedy as f64 / n as f64;
        assert!((freq - expected).abs() < 4.0 * sigma, "freq {freq}");
    }

    #[test]
    fn temperature_regimes() {
        let p = LearningParams::default();
        assert_eq!(temperature_for(500, &p), Temperature::Uniform);
        assert_eq!(temperature_for(999, &p), Temperature::Uniform);
        assert_eq!(temperature_for(200_000, &p), Temperature::Argmax);
        match temperature_for(10_000, &p) {
            Temperature::Finite(t) => assert!(t > 1.0 && t < p.tau_max, "tau {t}"),
            other => panic!("expected finite temperature, got {other:?}"),
        }
        // endpoints of the interpolation
        match temperature_for(1_000, &p) {
            Temperature::Finite(t) => assert_relative_eq!(t, 10.0, epsilon = 1e-9),
            other => panic!("{other:?}"),
        }
        match temperature_for(100_000, &p) {
            Temperature::Finite(t) => assert_relative_eq!(t, 1.0, epsilon = 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn temperature_decreases_with_samples() {
        let p = LearningParams::default();
        let mut last = f64::INFINITY;
        for c in [1_000u64, 3_000, 10_000, 30_000, 100_000] {
            if let Temperature::Finite(t) = temperature_for(c, &p) {
                assert!(t < last, "tau must fall: {t} !< {last}");
                last = t;
            } else {
                panic!("count {c} should be in the finite regime");
            }
        }
    }

    #[test]
    fn softmax_uniform_when_all_values_equal() {
        let t = table_with_row(&[4.0, 4.0, 4.0]);
        let p = softmax_probabilities(&t, 0, Temperature::Finite(2.0));
        for prob in p {
            assert_relative_eq!(prob, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn softmax_argmax_regime_is_deterministic() {
        let t = table_with_row(&[4.0, 7.0, 4.0]);
        let p = softmax_probabilities(&t, 0, Temperature::Argmax);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let mut r = rng::stream(5, &[99]);
        for _ in 0..100 {
            assert_eq!(select_softmax(&t, 0, Temperature::Argmax, &mut r), 1);
        }
    }

    #[test]
    fn softmax_boltzmann_value() {
        // Q = (10, 0, 0), tau = 10 -> P(a0) = e / (e + 2)
        let t = table_with_row(&[10.0, 0.0, 0.0]);
        let p = softmax_probabilities(&t, 0, Temperature::Finite(10.0));
        let want = std::f64::consts::E / (std::f64::consts::E + 2.0);
        assert_relative_eq!(p[0], want, epsilon = 1e-12);
        assert_relative_eq!(p[0], 0.576, epsilon = 1e-3);
    }

    #[test]
    fn greedy_is_invariant_under_positive_affine_rescaling() {
        let t1 = table_with_row(&[3.0, 8.0, 5.0]);
        let scaled: Vec<f64> = [3.0, 8.0, 5.0].iter().map(|q| 2.5 * q + 11.0).collect();
        let t2 = table_with_row(&scaled);
        let mut r1 = rng::stream(7, &[1]);
        let mut r2 = rng::stream(7, &[1]);
        for _ in 0..500 {
            assert_eq!(
                select_epsilon_greedy(&t1, 0, 0.0, &mut r1),
                select_epsilon_greedy(&t2, 0, 0.0, &mut r2)
            );
        }
    }

    proptest! {
        #[test]
        fn softmax_probabilities_sum_to_one_and_permute(
            q0 in -200.0f64..200.0,
            q1 in -200.0f64..200.0,
            q2 in -200.0f64..200.0,
            tau in 1.0f64..10.0,
        ) {
            let t = table_with_row(&[q0, q1, q2]);
            let p = softmax_probabilities(&t, 0, Temperature::Finite(tau));
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);

            // permutation equivariance
            let t_perm = table_with_row(&[q2, q0, q1]);
            let p_perm = softmax_probabilities(&t_perm, 0, Temperature::Finite(tau));
            prop_assert!((p_perm[0] - p[2]).abs() < 1e-12);
            prop_assert!((p_perm[1] - p[0]).abs() < 1e-12);
            prop_assert!((p_perm[2] - p[1]).abs() < 1e-12);
        }
    }
}
