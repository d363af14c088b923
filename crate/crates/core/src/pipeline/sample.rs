//! Seeded reservoir sampling.

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform sample of `min(k, n)` items without replacement (Algorithm R).
///
/// The same `seed` and input order always select the same items; the
/// selection is returned in input order.
pub fn reservoir_sample<T>(items: impl IntoIterator<Item = T>, k: usize, seed: u64) -> Vec<T> {
    if k == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<(usize, T)> = Vec::with_capacity(k);
    for (seen, item) in items.into_iter().enumerate() {
        if reservoir.len() < k {
            reservoir.push((seen, item));
        } else {
            let j = rng.gen_range(0..=seen);
            if j < k {
                reservoir[j] = (seen, item);
            }
        }
    }
    reservoir.sort_unstable_by_key(|(pos, _)| *pos);
    reservoir.into_iter().map(|(_, item)| item).collect()
}

/// Independent per-day seed derived from the run seed.
pub fn day_seed(seed: u64, day: NaiveDate) -> u64 {
    splitmix64(seed ^ splitmix64(day.num_days_from_ce() as u64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_population_is_kept_whole() {
        assert_eq!(reservoir_sample(0..5, 10, 1), [0, 1, 2, 3, 4]);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = reservoir_sample(0..1000, 100, 42);
        let b = reservoir_sample(0..1000, 100, 42);
        assert_eq!(a.len(), 100);
        assert_eq!(a, b);
        assert_ne!(a, reservoir_sample(0..1000, 100, 43));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn inclusion_frequencies_are_binomial() {
        let (n, k, trials) = (200usize, 20usize, 4000u64);
        let mut hits = vec![0u32; n];
        for seed in 0..trials {
            for i in reservoir_sample(0..n, k, seed) {
                hits[i] += 1;
            }
        }
        // Binomial(4000, 0.1): mean 400, sd 19. A 5 sd band per item.
        assert!(hits.iter().all(|&h| (h as f64 - 400.0).abs() < 5.0 * 19.0), "{hits:?}");
        let z2: f64 = hits.iter().map(|&h| (h as f64 - 400.0).powi(2) / 360.0).sum();
        assert!((140.0..270.0).contains(&z2), "sum z^2 = {z2}");
    }

    #[test]
    fn zero_k() {
        assert!(reservoir_sample(0..5, 0, 1).is_empty());
    }

    #[test]
    fn day_seeds_differ() {
        let a = day_seed(7, "2020-03-24".parse().unwrap());
        let b = day_seed(7, "2020-03-31".parse().unwrap());
        assert_ne!(a, b);
    }
}
