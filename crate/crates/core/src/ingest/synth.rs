//! Deterministic synthetic datasets for tests and benchmarks.

use super::{merge, Dataset, EmotionRecord, RatingRecord};
use crate::affect::{EmotionVector, EMOTION_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Build a reproducible pseudo-random dataset.
///
/// Item vectors are drawn uniformly from the probability simplex (seven
/// unit-exponential draws, l1-normalized). Each user watches a
/// without-replacement sample of items; sample sizes follow a power law
/// capped at `ratings_per_user`, so most users watch little and a few watch
/// a lot, like real rating data. Every item is labeled and every user
/// watches at least one item, so nothing is dropped in the join.
///
/// The same seed always yields the same dataset, byte for byte; no ambient
/// entropy is consumed.
pub fn synth_dataset(
    seed: u64,
    n_users: usize,
    n_items: usize,
    ratings_per_user: usize,
) -> Dataset {
    assert!(n_users >= 1, "need at least one user");
    assert!(n_items >= 1, "need at least one item");
    assert!(ratings_per_user >= 1, "need at least one rating per user");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut labels = Vec::with_capacity(n_items);
    for movie_id in 1..=n_items as u64 {
        let mvec = random_simplex_point(&mut rng);
        labels.push(EmotionRecord {
            tmdb_id: 100_000 + movie_id,
            movie_id,
            imdb_id: None,
            mood: mvec.dominant_mood(),
            mvec,
        });
    }

    let cap = ratings_per_user.min(n_items);
    let mut ratings = Vec::new();
    let mut timestamp = 1_500_000_000i64;
    for user_id in 1..=n_users as u64 {
        let count = power_law_count(&mut rng, cap);
        let picks = rand::seq::index::sample(&mut rng, n_items, count);
        for index in picks {
            let movie_id = index as u64 + 1;
            let rating = f64::from(rng.gen_range(1..=10u32)) / 2.0;
            ratings.push(RatingRecord {
                user_id,
                movie_id,
                rating,
                timestamp,
            });
            timestamp += 60;
        }
    }

    merge(ratings, labels, &format!("synth-{seed}"))
        .expect("every synthetic user watches at least one labeled item")
}

/// A uniform draw from the 7-component probability simplex: seven
/// unit-exponential variates, normalized.
fn random_simplex_point(rng: &mut ChaCha8Rng) -> EmotionVector {
    let mut raw = [0.0f64; EMOTION_DIM];
    for slot in &mut raw {
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        *slot = -u.ln();
    }
    EmotionVector::l1_normalize(raw).expect("exponential draws are positive")
}

/// A watch-list size in [1, cap], heavily skewed toward small values:
/// log-uniform, i.e. `cap^u` for uniform `u`. Most users land near the
/// bottom of the range while the top of the ranking stays well spread out.
fn power_law_count(rng: &mut ChaCha8Rng, cap: usize) -> usize {
    let u: f64 = rng.gen();
    let count = (cap as f64).powf(u).round() as usize;
    count.clamp(1, cap)
}
