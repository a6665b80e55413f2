//! Arrival generation and congestion control for the packet sources.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// Source utility function family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "utility", rename_all = "snake_case")]
pub enum UtilityKind {
    /// Logarithmic utility (proportional fairness).
    Log,
    /// U(x) = x^(1-alpha) / (1-alpha), alpha > 0.
    AlphaFair { alpha: f64 },
}

impl UtilityKind {
    /// Inverse of the marginal utility, U'^-1(y).
    pub fn marginal_inverse(&self, y: f64) -> f64 {
        match self {
            UtilityKind::Log => 1.0 / y,
            UtilityKind::AlphaFair { alpha } => y.powf(-1.0 / alpha),
        }
    }

    /// Marginal utility U'(x).
    pub fn marginal(&self, x: f64) -> f64 {
        match self {
            UtilityKind::Log => 1.0 / x,
            UtilityKind::AlphaFair { alpha } => x.powf(-alpha),
        }
    }
}

/// Congestion-controlled injection rate: min(U'^-1(backlog / m), x_max).
/// An empty ingress counter maps to x_max (the limit of the capped formula).
pub fn elastic_rate(shadow_backlog: u64, utility: &UtilityKind, m: f64, x_max: f64) -> f64 {
    if shadow_backlog == 0 {
        return x_max;
    }
    utility
        .marginal_inverse(shadow_backlog as f64 / m)
        .min(x_max)
}

/// One Poisson draw with the given mean; rate 0 yields 0.
///
/// Sampling is delegated to `rand_distr::Poisson` (inversion for small
/// means, rejection for large ones); the method is fixed by the locked
/// dependency version, so a fixed seed reproduces the exact sequence.
pub fn sample_poisson(rate: f64, rng: &mut impl Rng) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u64
}

/// Per-slot arrivals of an elastic (or fixed-rate) source whose real
/// traffic is a Bernoulli thinning of its own shadow stream: shadow count
/// ~ Poisson(rate), real count ~ Binomial(shadow, beta), so E[real] =
/// beta * E[shadow]. The pathwise coupling keeps the real FIFOs drained by
/// the very permits the shadow packets become, which is what makes a 1%
/// thinning collapse the real backlog; independently sampled streams would
/// leave every FIFO running at 99% load with large queues.
pub fn elastic_arrivals(rate: f64, beta: f64, rng: &mut impl Rng) -> (u64, u64) {
    let shadow = sample_poisson(rate, rng);
    let real = if shadow == 0 {
        0
    } else if beta >= 1.0 {
        shadow
    } else {
        Binomial::new(shadow, beta).expect("valid binomial").sample(rng)
    };
    (shadow, real)
}

/// Per-slot arrivals of an inelastic source with shadow inflation: one
/// shadow packet per real packet, plus an extra one with probability
/// epsilon, so E[shadow] = (1 + epsilon) * lambda.
pub fn inelastic_arrivals(lambda: f64, epsilon: f64, rng: &mut impl Rng) -> (u64, u64) {
    let real = sample_poisson(lambda, rng);
    let extra = if epsilon <= 0.0 || real == 0 {
        0
    } else if epsilon >= 1.0 {
        real
    } else {
        Binomial::new(real, epsilon).expect("valid binomial").sample(rng)
    };
    (real + extra, real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn elastic_rate_examples() {
        assert_eq!(elastic_rate(100, &UtilityKind::Log, 1000.0, 10.0), 10.0);
        assert!((elastic_rate(2000, &UtilityKind::Log, 1000.0, 10.0) - 0.5).abs() < 1e-12);
        let alpha2 = UtilityKind::AlphaFair { alpha: 2.0 };
        assert!((elastic_rate(4000, &alpha2, 1000.0, 10.0) - 0.5).abs() < 1e-12);
        assert_eq!(elastic_rate(0, &UtilityKind::Log, 1000.0, 10.0), 10.0);
    }

    #[test]
    fn elastic_rate_monotone_and_capped() {
        let mut prev = f64::INFINITY;
        for q in [0u64, 1, 10, 100, 1000, 10_000, 100_000] {
            let r = elastic_rate(q, &UtilityKind::Log, 1000.0, 10.0);
            assert!(r <= 10.0);
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn poisson_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_poisson(0.0, &mut rng), 0);
        }
    }

    #[test]
    fn poisson_mean_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000u64;
        let samples: Vec<u64> = (0..n).map(|_| sample_poisson(5.0, &mut rng)).collect();
        let mean = samples.iter().sum::<u64>() as f64 / n as f64;
        let var = samples
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 5.0).abs() < 0.01, "mean {mean}");
        assert!((var - 5.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_deterministic_with_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|_| sample_poisson(3.7, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn elastic_arrivals_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(elastic_arrivals(0.0, 0.99, &mut rng), (0, 0));
    }

    #[test]
    fn elastic_arrivals_thinning_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut shadow = 0u64;
        let mut real = 0u64;
        for _ in 0..1_000_000 {
            let (s, r) = elastic_arrivals(10.0, 0.99, &mut rng);
            shadow += s;
            real += r;
        }
        let ratio = real as f64 / shadow as f64;
        assert!((ratio - 0.99).abs() < 0.005, "ratio {ratio}");
    }

    #[test]
    fn elastic_arrivals_beta_one_matches_in_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut shadow = 0u64;
        let mut real = 0u64;
        for _ in 0..200_000 {
            let (s, r) = elastic_arrivals(5.0, 1.0, &mut rng);
            shadow += s;
            real += r;
        }
        // E[real] = E[shadow]; 3-sigma band on the difference of means.
        let diff = (shadow as f64 - real as f64) / 200_000.0;
        let sigma = (2.0 * 5.0 / 200_000.0f64).sqrt();
        assert!(diff.abs() < 3.0 * sigma, "diff {diff}");
    }

    #[test]
    fn elastic_arrivals_coupled() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let (s, r) = elastic_arrivals(10.0, 0.99, &mut rng);
            assert!(r <= s);
        }
        let (s, r) = elastic_arrivals(7.0, 1.0, &mut rng);
        assert_eq!(s, r);
    }

    #[test]
    fn inelastic_arrivals_epsilon_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let (s, r) = inelastic_arrivals(4.0, 0.0, &mut rng);
            assert_eq!(s, r);
            let (s, r) = inelastic_arrivals(4.0, 1.0, &mut rng);
            assert_eq!(s, 2 * r);
        }
    }

    #[test]
    fn inelastic_arrivals_inflation_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut shadow = 0u64;
        let mut real = 0u64;
        for _ in 0..1_000_000 {
            let (s, r) = inelastic_arrivals(5.0, 0.1, &mut rng);
            shadow += s;
            real += r;
        }
        let ratio = shadow as f64 / real as f64;
        assert!((ratio - 1.1).abs() < 0.01, "ratio {ratio}");
    }
}
