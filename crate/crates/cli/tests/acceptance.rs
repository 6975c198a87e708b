//! The acceptance gate: eight checks covering reference-value replication,
//! oracle equivalence, numerical invariants, throughput accounting, real
//! dataset ingestion, and determinism. Each check prints exactly one line,
//! `acceptance N (<label>): PASS` or `FAIL` (7 may print `SKIP` when the
//! optional real dataset is absent).
//!
//! Run with:
//!
//! ```text
//! cargo test -p affectrec-cli --test acceptance -- --nocapture
//! ```

use affectrec::affect::{EmotionLabel, EmotionVector};
use affectrec::association::{pac_item_to_item, pac_user_to_item_group, pac_user_to_user};
use affectrec::grouping::{dominant_member, form_ssg, group_uvec, least_misery_member};
use affectrec::grouping::{MultiGroup, Visibility};
use affectrec::ingest::{synth_dataset, Dataset};
use affectrec::profile::{ItemProfile, UserProfile};
use affectrec::recommend::{
    aggregate_ratings, recommend_for_group, rerank, AggregationFn, Candidate, EffectiveProfile,
    GroupRatingsSlice, GroupStrategy, RankedEntry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};
use tempfile::TempDir;

fn report(number: u32, label: &str, check: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(check)) {
        Ok(()) => println!("acceptance {number} ({label}): PASS"),
        Err(payload) => {
            println!("acceptance {number} ({label}): FAIL");
            resume_unwind(payload);
        }
    }
}

fn vec7(components: [f64; 7]) -> EmotionVector {
    EmotionVector::new(components).unwrap()
}

// ---------------------------------------------------------------------------
// 1. Cross-catalog affinity replication: published profile columns for the
//    same user matched across four catalogs.
// ---------------------------------------------------------------------------

const SMALL_400: [f64; 7] = [0.16353, 0.08874, 0.12709, 0.20332, 0.11934, 0.15881, 0.13918];
const TWENTY_M_66274: [f64; 7] = [0.16250, 0.08609, 0.12654, 0.20701, 0.11776, 0.16005, 0.14005];

#[test]
fn acceptance_1_cross_catalog_affinity() {
    report(1, "cross-catalog affinity replication", || {
        let started = Instant::now();
        let source = vec7(SMALL_400);
        let closest = vec7(TWENTY_M_66274);

        let aii = source.aii(&closest).unwrap();
        assert!(
            (aii - 0.99992).abs() < 1e-4,
            "similarity {aii} differs from the published 0.99992 by more than 1e-4"
        );
        // the 25m and 27m reference columns print identically to the source
        for twin in [vec7(SMALL_400), vec7(SMALL_400)] {
            let value = source.aii(&twin).unwrap();
            assert!(value >= 0.99999, "twin column similarity {value} below 0.99999");
        }
        assert!(started.elapsed() < Duration::from_secs(1), "runtime budget 1 s");
    });
}

// ---------------------------------------------------------------------------
// 2. Reference group replication: the published five-member group.
// ---------------------------------------------------------------------------

fn five_member_group() -> Vec<(u64, u64, EmotionVector)> {
    vec![
        (
            195,
            187,
            vec7([0.1639455, 0.0902557, 0.1176815, 0.1726736, 0.1185870, 0.1777129, 0.1591437]),
        ),
        (
            602,
            135,
            vec7([0.1639545, 0.0869860, 0.1168919, 0.16947266, 0.1156349, 0.1817310, 0.1653290]),
        ),
        (
            190,
            66,
            vec7([0.1603803, 0.0849701, 0.1254172, 0.17182250, 0.1135154, 0.1797844, 0.1641099]),
        ),
        (
            521,
            40,
            vec7([0.1574143, 0.0944750, 0.1240710, 0.14589457, 0.1083259, 0.1795868, 0.1902323]),
        ),
        (
            463,
            33,
            vec7([0.1558253, 0.0968441, 0.1140474, 0.19975860, 0.1226243, 0.1571110, 0.1537890]),
        ),
    ]
}

const FIVE_MEMBER_AVERAGE: [f64; 7] = [
    0.1603040, 0.0907061, 0.1196220, 0.17192440, 0.1157376, 0.1751852, 0.1665208,
];

#[test]
fn acceptance_2_reference_group_replication() {
    report(2, "reference group replication", || {
        let started = Instant::now();
        let dataset = Dataset::from_profiles(
            "mlsm",
            five_member_group()
                .into_iter()
                .map(|(id, watched, uvec)| UserProfile::from_summary(id, watched, uvec)),
            [],
        );
        let members = [195u64, 602, 190, 521, 463];

        assert_eq!(dominant_member(&members, &dataset).unwrap(), 195);

        let mean = group_uvec(&members, &dataset).unwrap();
        for i in 0..7 {
            let delta = (mean.components()[i] - FIVE_MEMBER_AVERAGE[i]).abs();
            assert!(
                delta < 5e-7,
                "average profile component {i} off by {delta} (budget 5e-7)"
            );
        }

        assert!(started.elapsed() < Duration::from_secs(1), "runtime budget 1 s");

        // The published reference listing names 463 here. On the published
        // vectors themselves, the member least similar to the dominant one
        // is 521 (0.99370 vs 463's 0.99558), so this check records a
        // discrepancy in the reference listing, not in the implementation.
        // See README for the full computation.
        let least = least_misery_member(&members, &dataset).unwrap();
        assert_eq!(
            least, 463,
            "published reference value is 463; the definition applied to the \
             published vectors yields {least}"
        );
    });
}

// ---------------------------------------------------------------------------
// 3. Mood label consistency: every published item row's vector argmax must
//    equal its printed mood label.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_3_mood_label_consistency() {
    report(3, "mood label consistency", || {
        let rows: Vec<(u64, EmotionLabel, EmotionVector)> = vec![
            (
                4470,
                EmotionLabel::Disgust,
                vec7([
                    0.15705037, 0.08608995, 0.15583897, 0.07506061, 0.08469571, 0.26612538,
                    0.17513901,
                ]),
            ),
            (
                189111,
                EmotionLabel::Hate,
                vec7([
                    0.11876434, 0.05086204, 0.12669845, 0.3391073, 0.13069303, 0.13746719,
                    0.096407644,
                ]),
            ),
            (4470, EmotionLabel::Disgust, vec7([0.157, 0.086, 0.156, 0.075, 0.085, 0.266, 0.175])),
            (18, EmotionLabel::Disgust, vec7([0.121, 0.060, 0.098, 0.128, 0.133, 0.244, 0.216])),
            (479, EmotionLabel::Hate, vec7([0.075, 0.114, 0.054, 0.433, 0.095, 0.128, 0.100])),
            (260, EmotionLabel::Neutral, vec7([0.299, 0.262, 0.079, 0.030, 0.017, 0.083, 0.230])),
            (6377, EmotionLabel::Surprise, vec7([0.150, 0.080, 0.055, 0.083, 0.103, 0.153, 0.376])),
        ];
        assert_eq!(rows.len(), 7);
        let mismatches = rows
            .iter()
            .filter(|(_, printed, mvec)| mvec.dominant_mood() != *printed)
            .count();
        assert_eq!(mismatches, 0, "all printed moods must equal the vector argmax");
    });
}

// ---------------------------------------------------------------------------
// 4. Oracle equivalence: library outputs equal independent brute-force
//    reimplementations on seeded synthetic datasets, tie order included.
// ---------------------------------------------------------------------------

/// Cosine similarity recomputed from raw components, summing left to right.
fn oracle_cosine(a: &[f64; 7], b: &[f64; 7]) -> f64 {
    let mut inner = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for i in 0..7 {
        inner += a[i] * b[i];
    }
    for i in 0..7 {
        norm_a += a[i] * a[i];
    }
    for i in 0..7 {
        norm_b += b[i] * b[i];
    }
    inner / (norm_a.sqrt() * norm_b.sqrt())
}

/// Sort scored ids best first, ties toward the lower id, keep k.
fn oracle_top_k(mut scored: Vec<(u64, f64)>, k: usize) -> Vec<(u64, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

fn oracle_pac_users(source: &Dataset, user: u64, target: &Dataset, k: usize) -> Vec<(u64, f64)> {
    let profile = source.user_profile(user).unwrap().uvec().components().to_owned();
    let scored = target
        .users()
        .map(|u| {
            let c = u.profile().uvec().components();
            (u.profile().user_id(), oracle_cosine(&profile, c))
        })
        .collect();
    oracle_top_k(scored, k)
}

fn oracle_pac_items(source: &Dataset, item: u64, target: &Dataset, k: usize) -> Vec<(u64, f64)> {
    let mvec = source.item(item).unwrap().mvec().components().to_owned();
    let scored = target
        .items()
        .map(|i| (i.item_id(), oracle_cosine(&mvec, i.mvec().components())))
        .collect();
    oracle_top_k(scored, k)
}

/// The vote-count-normalized stand-in profile for an item's rater group.
fn oracle_group_stand_in(item: &ItemProfile) -> [f64; 7] {
    let votes = item.vote_count().unwrap() as f64;
    let mut per_rater = [0.0f64; 7];
    for i in 0..7 {
        per_rater[i] = item.mvec().components()[i] / votes;
    }
    let mut total = 0.0;
    for i in 0..7 {
        total += per_rater[i];
    }
    let mut scaled = [0.0f64; 7];
    for i in 0..7 {
        scaled[i] = per_rater[i] / total;
    }
    scaled
}

/// Groups as (anchor, members as (user_id, similarity, watch_count)).
type OracleSsg = Vec<(u64, Vec<(u64, f64, u64)>)>;

fn oracle_form_ssg(dataset: &Dataset, g: usize, m: usize) -> OracleSsg {
    let mut by_activity: Vec<(u64, u64)> = dataset
        .users()
        .map(|u| (u.profile().user_id(), u.profile().watch_count()))
        .collect();
    by_activity.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (anchors, pool) = by_activity.split_at(g);

    anchors
        .iter()
        .map(|&(anchor_id, anchor_watched)| {
            let anchor = dataset.user_profile(anchor_id).unwrap().uvec().components().to_owned();
            let mut scored: Vec<(u64, f64, u64)> = pool
                .iter()
                .map(|&(user_id, watched)| {
                    let c = dataset.user_profile(user_id).unwrap().uvec().components();
                    (user_id, oracle_cosine(&anchor, c), watched)
                })
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            scored.truncate(m);
            let mut members = vec![(anchor_id, 1.0, anchor_watched)];
            members.extend(scored);
            (anchor_id, members)
        })
        .collect()
}

fn oracle_rerank(profile: &[f64; 7], candidates: &[Candidate], n: usize) -> Vec<(u64, f64)> {
    let mut scored: Vec<(&Candidate, f64)> = candidates
        .iter()
        .map(|c| (c, oracle_cosine(profile, c.mvec.components())))
        .collect();
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.display_rank.cmp(&b.0.display_rank))
            .then(a.0.item_id.cmp(&b.0.item_id))
    });
    scored.truncate(n);
    scored.into_iter().map(|(c, score)| (c.item_id, score)).collect()
}

fn oracle_dominant(members: &[u64], dataset: &Dataset) -> u64 {
    let mut ranked: Vec<(u64, u64)> = members
        .iter()
        .map(|&id| (id, dataset.user_profile(id).unwrap().watch_count()))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked[0].0
}

fn oracle_least_misery(members: &[u64], dataset: &Dataset) -> u64 {
    let dominant = oracle_dominant(members, dataset);
    let anchor = dataset.user_profile(dominant).unwrap().uvec().components().to_owned();
    let mut ranked: Vec<(u64, f64)> = members
        .iter()
        .filter(|&&id| id != dominant)
        .map(|&id| {
            let c = dataset.user_profile(id).unwrap().uvec().components();
            (id, oracle_cosine(&anchor, c))
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked[0].0
}

fn oracle_member_mean(members: &[u64], dataset: &Dataset) -> [f64; 7] {
    let mut sum = [0.0f64; 7];
    for &id in members {
        let c = dataset.user_profile(id).unwrap().uvec().components();
        for i in 0..7 {
            sum[i] += c[i];
        }
    }
    let n = members.len() as f64;
    let mut mean = [0.0f64; 7];
    for i in 0..7 {
        mean[i] = sum[i] / n;
    }
    mean
}

/// Aggregated (scores, ineligible items) recomputed from watch histories.
fn oracle_aggregate(
    dataset: &Dataset,
    members: &[u64],
    items: &[u64],
    function: AggregationFn,
) -> (Vec<(u64, f64)>, Vec<u64>) {
    let mut scores = Vec::new();
    let mut ineligible = Vec::new();
    for &item in items {
        let ratings: Vec<Option<f64>> = members
            .iter()
            .map(|&id| dataset.user(id).unwrap().rating_of(item))
            .collect();
        if ratings.iter().any(|r| r.is_none()) {
            ineligible.push(item);
            continue;
        }
        let values: Vec<f64> = ratings.into_iter().map(|r| r.unwrap()).collect();
        let score = match function {
            AggregationFn::LeastMisery => values.iter().copied().fold(f64::INFINITY, f64::min),
            AggregationFn::Average => values.iter().sum::<f64>() / values.len() as f64,
            AggregationFn::AverageWithoutMisery { tau } => {
                if values.iter().any(|&v| v < tau) {
                    continue;
                }
                values.iter().sum::<f64>() / values.len() as f64
            }
        };
        scores.push((item, score));
    }
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    (scores, ineligible)
}

/// Candidates over a dataset's items with rotated display ranks; every
/// fifth vector duplicates the first one so score ties actually occur.
fn tied_candidate_pool(dataset: &Dataset, rotation: usize) -> Vec<Candidate> {
    let items: Vec<&ItemProfile> = dataset.items().collect();
    let len = items.len();
    items
        .iter()
        .enumerate()
        .map(|(position, item)| Candidate {
            item_id: item.item_id(),
            mvec: if position > 0 && position % 5 == 0 {
                *items[0].mvec()
            } else {
                *item.mvec()
            },
            display_rank: ((position + rotation) % len) as u32 + 1,
            title: None,
        })
        .collect()
}

fn entries_as_pairs(entries: &[RankedEntry]) -> Vec<(u64, f64)> {
    entries.iter().map(|e| (e.item_id, e.score)).collect()
}

#[test]
fn acceptance_4_oracle_equivalence() {
    report(4, "oracle equivalence", || {
        let started = Instant::now();

        // hand-built tie cases: identical profiles force exact score ties
        let shared = vec7([0.2, 0.2, 0.1, 0.1, 0.2, 0.1, 0.1]);
        let tied_users = Dataset::from_profiles(
            "ties",
            [30u64, 10, 20].map(|id| UserProfile::from_summary(id, 1, shared)),
            [],
        );
        let probe = Dataset::from_profiles(
            "probe",
            [UserProfile::from_summary(1, 1, vec7([0.3, 0.1, 0.1, 0.1, 0.2, 0.1, 0.1]))],
            [],
        );
        let lib: Vec<(u64, f64)> = pac_user_to_user(&probe, 1, &tied_users, 3)
            .unwrap()
            .into_iter()
            .map(|m| (m.target.id, m.aii))
            .collect();
        assert_eq!(lib, oracle_pac_users(&probe, 1, &tied_users, 3));
        assert_eq!(lib[0].0, 10, "ties must resolve toward the lower id");

        let tie_pool = vec![
            Candidate { item_id: 7, mvec: shared, display_rank: 1, title: None },
            Candidate { item_id: 3, mvec: shared, display_rank: 1, title: None },
        ];
        let tied_rerank = rerank(probe.user_profile(1).unwrap().uvec(), &tie_pool, 2).unwrap();
        let probe_components = probe.user_profile(1).unwrap().uvec().components().to_owned();
        assert_eq!(
            entries_as_pairs(&tied_rerank),
            oracle_rerank(&probe_components, &tie_pool, 2)
        );
        assert_eq!(tied_rerank[0].item_id, 3, "full ties must resolve toward the lower item id");

        for seed in 0..100u64 {
            let n_users = 20 + (seed as usize * 9) % 181;
            let n_items = 30 + (seed as usize * 13) % 271;
            let per_user = 3 + (seed as usize) % 10;
            let dataset = synth_dataset(seed, n_users, n_items, per_user);
            let other = synth_dataset(
                seed + 10_000,
                15 + (seed as usize * 7) % 186,
                25 + (seed as usize * 11) % 276,
                3 + (seed as usize) % 8,
            );
            let k = 1 + (seed as usize) % 7;

            let first_user = dataset.users().next().unwrap().profile().user_id();
            let lib: Vec<(u64, f64)> = pac_user_to_user(&dataset, first_user, &other, k)
                .unwrap()
                .into_iter()
                .map(|m| (m.target.id, m.aii))
                .collect();
            assert_eq!(lib, oracle_pac_users(&dataset, first_user, &other, k), "seed {seed}");

            let first_item = dataset.items().next().unwrap().item_id();
            let lib: Vec<(u64, f64)> = pac_item_to_item(&dataset, first_item, &other, k)
                .unwrap()
                .into_iter()
                .map(|m| (m.target.id, m.aii))
                .collect();
            assert_eq!(lib, oracle_pac_items(&dataset, first_item, &other, k), "seed {seed}");

            // rater-group stand-in: give the other dataset's items vote counts
            let voted = Dataset::from_profiles(
                "voted",
                [],
                other.items().map(|item| {
                    ItemProfile::new(item.item_id(), *item.mvec())
                        .with_vote_count(item.item_id() % 50 + 1)
                }),
            );
            let target_item = voted.items().next().unwrap();
            let lib = pac_user_to_item_group(&dataset, first_user, &voted, target_item.item_id())
                .unwrap();
            let profile = dataset.user_profile(first_user).unwrap().uvec().components().to_owned();
            let stand_in = oracle_group_stand_in(target_item);
            assert_eq!(lib.aii, oracle_cosine(&profile, &stand_in), "seed {seed}");

            let g = 2 + (seed as usize) % 4;
            let m = 1 + (seed as usize) % 6;
            let groups = form_ssg(&dataset, g, m).unwrap();
            let expected = oracle_form_ssg(&dataset, g, m);
            assert_eq!(groups.len(), expected.len());
            for (group, (anchor, members)) in groups.iter().zip(&expected) {
                assert_eq!(group.anchor, *anchor, "seed {seed}");
                let got: Vec<(u64, f64, u64)> = group
                    .members()
                    .iter()
                    .map(|m| (m.user_id, m.aii_to_anchor, m.watch_count))
                    .collect();
                assert_eq!(got, *members, "seed {seed}");
            }

            let pool = tied_candidate_pool(&dataset, seed as usize);
            let n = 1 + (seed as usize) % 12;
            let uvec = dataset.user_profile(first_user).unwrap().uvec();
            let entries = rerank(uvec, &pool, n).unwrap();
            assert_eq!(
                entries_as_pairs(&entries),
                oracle_rerank(&profile, &pool, n),
                "seed {seed}"
            );

            let members: Vec<u64> = dataset
                .users()
                .map(|u| u.profile().user_id())
                .take(2 + (seed as usize) % 5)
                .collect();
            let group = MultiGroup {
                group_id: "mg-0000".to_string(),
                name: "oracle".to_string(),
                owner: members[0],
                visibility: Visibility::Pmg,
                members: members.clone(),
            };

            let dominant =
                recommend_for_group(&group, &dataset, &pool, GroupStrategy::Dominant, n).unwrap();
            let dominant_id = oracle_dominant(&members, &dataset);
            assert_eq!(dominant.effective_profile, Some(EffectiveProfile::Member(dominant_id)));
            let dominant_profile =
                dataset.user_profile(dominant_id).unwrap().uvec().components().to_owned();
            assert_eq!(
                entries_as_pairs(&dominant.entries),
                oracle_rerank(&dominant_profile, &pool, n),
                "seed {seed}"
            );

            let misery =
                recommend_for_group(&group, &dataset, &pool, GroupStrategy::LeastMisery, n)
                    .unwrap();
            let misery_id = oracle_least_misery(&members, &dataset);
            assert_eq!(misery.effective_profile, Some(EffectiveProfile::Member(misery_id)));
            let misery_profile =
                dataset.user_profile(misery_id).unwrap().uvec().components().to_owned();
            assert_eq!(
                entries_as_pairs(&misery.entries),
                oracle_rerank(&misery_profile, &pool, n),
                "seed {seed}"
            );

            let average =
                recommend_for_group(&group, &dataset, &pool, GroupStrategy::AverageProfile, n)
                    .unwrap();
            assert_eq!(average.effective_profile, Some(EffectiveProfile::GroupAverage));
            assert_eq!(
                entries_as_pairs(&average.entries),
                oracle_rerank(&oracle_member_mean(&members, &dataset), &pool, n),
                "seed {seed}"
            );

            let items: Vec<u64> = dataset.items().map(|i| i.item_id()).take(8).collect();
            let slice = GroupRatingsSlice::from_dataset(&dataset, &members, &items).unwrap();
            let tau = 2.5 + (seed % 4) as f64 * 0.5;
            for function in [
                AggregationFn::LeastMisery,
                AggregationFn::Average,
                AggregationFn::AverageWithoutMisery { tau },
            ] {
                let outcome = aggregate_ratings(&slice, function).unwrap();
                let (scores, ineligible) = oracle_aggregate(&dataset, &members, &items, function);
                assert_eq!(outcome.scores, scores, "seed {seed} {function:?}");
                assert_eq!(outcome.ineligible, ineligible, "seed {seed} {function:?}");
            }
        }

        assert!(started.elapsed() < Duration::from_secs(60), "runtime budget 60 s");
    });
}

// ---------------------------------------------------------------------------
// 5. Numerical invariants.
// ---------------------------------------------------------------------------

fn random_vector(rng: &mut ChaCha8Rng) -> EmotionVector {
    let mut raw = [0.0f64; 7];
    for component in &mut raw {
        *component = rng.gen_range(1e-6..1e3);
    }
    vec7(raw)
}

#[test]
fn acceptance_5_numerical_invariants() {
    report(5, "numerical invariants", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1151);

        // symmetry, range, and self-similarity over 1e5 random pairs
        for _ in 0..100_000 {
            let a = random_vector(&mut rng);
            let b = random_vector(&mut rng);
            let forward = a.aii(&b).unwrap();
            let backward = b.aii(&a).unwrap();
            assert_eq!(forward, backward, "similarity must be symmetric");
            assert!((0.0..=1.0 + 1e-12).contains(&forward), "out of range: {forward}");
            assert!((a.aii(&a).unwrap() - 1.0).abs() <= 1e-12);
            assert!((b.aii(&b).unwrap() - 1.0).abs() <= 1e-12);
        }

        // incremental profile vs batch mean over a 1e4-item watch sequence
        let sequence: Vec<EmotionVector> = (0..10_000).map(|_| random_vector(&mut rng)).collect();
        let mut incremental = UserProfile::empty(1);
        for (count, mvec) in sequence.iter().enumerate() {
            incremental = incremental.update(&ItemProfile::new(count as u64, *mvec));
            let length = count + 1;
            if [1, 2, 5, 10, 100, 1_000, 5_000, 10_000].contains(&length) {
                let batch = affectrec::affect::mean_profile(&sequence[..length]).unwrap();
                for i in 0..7 {
                    let delta = (incremental.uvec().components()[i] - batch.components()[i]).abs();
                    assert!(delta <= 1e-12, "length {length}, component {i}: off by {delta}");
                }
            }
        }

        // rank order is invariant under positive profile scaling
        for case in 0..1_000 {
            let profile = random_vector(&mut rng);
            let n_candidates = 2 + (case % 19);
            let candidates: Vec<Candidate> = (0..n_candidates)
                .map(|i| Candidate {
                    item_id: i as u64,
                    mvec: random_vector(&mut rng),
                    display_rank: i as u32 + 1,
                    title: None,
                })
                .collect();
            let factor = (rng.gen_range(-6.9f64..6.9)).exp();
            let mut scaled = [0.0f64; 7];
            for i in 0..7 {
                scaled[i] = profile.components()[i] * factor;
            }
            let plain = rerank(&profile, &candidates, n_candidates).unwrap();
            let rescaled = rerank(&vec7(scaled), &candidates, n_candidates).unwrap();
            let order: Vec<u64> = plain.iter().map(|e| e.item_id).collect();
            let order_scaled: Vec<u64> = rescaled.iter().map(|e| e.item_id).collect();
            assert_eq!(order, order_scaled, "case {case}, factor {factor}");
        }
    });
}

// ---------------------------------------------------------------------------
// 6. Throughput counters: one generated list per group instead of one per
//    user, counted exactly.
// ---------------------------------------------------------------------------

fn binary() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_affectrec"));
    command.env_remove("AFFECT_REC_HOME");
    command
}

#[test]
fn acceptance_6_throughput_counters() {
    report(6, "throughput counters", || {
        let started = Instant::now();
        let dir = TempDir::new().unwrap();
        let output = binary()
            .args([
                "bench",
                "--users",
                "610",
                "--items",
                "300",
                "--ratings-per-user",
                "20",
                "--m",
                "60",
                "--n",
                "10",
                "--seed",
                "0",
                "--out",
                dir.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
                .unwrap();
        assert_eq!(report["n_users"].as_u64(), Some(610));
        assert_eq!(report["groups_formed"].as_u64(), Some(10));
        assert_eq!(report["topn_generations_personalized"].as_u64(), Some(610));
        assert_eq!(report["topn_generations_grouped"].as_u64(), Some(10));
        assert_eq!(report["reduction_factor"].as_f64(), Some(61.0));
        for counter in ["aii_evaluations_personalized", "aii_evaluations_grouped"] {
            assert!(
                report[counter].as_u64().is_some(),
                "{counter} must be an exact integer"
            );
        }
        assert!(started.elapsed() < Duration::from_secs(10), "runtime budget 10 s");
    });
}

// ---------------------------------------------------------------------------
// 7. Real dataset ingestion, when the MovieLens small files are present.
// ---------------------------------------------------------------------------

fn movielens_dir() -> Option<PathBuf> {
    let base = match std::env::var_os("AFFECT_REC_DATA") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    };
    let small = base.join("ml-latest-small");
    if small.join("ratings.csv").is_file() && small.join("movies.csv").is_file() {
        Some(small)
    } else {
        None
    }
}

const MOOD_NAMES: [&str; 7] = ["neutral", "happy", "sad", "hate", "anger", "disgust", "surprise"];

fn synthetic_mvec(movie_id: u64) -> [f64; 7] {
    let mut rng = ChaCha8Rng::seed_from_u64(movie_id);
    let mut raw = [0.0f64; 7];
    for component in &mut raw {
        let mut u: f64 = rng.gen();
        while u <= 0.0 {
            u = rng.gen();
        }
        *component = -u.ln();
    }
    let total: f64 = raw.iter().sum();
    raw.map(|c| c / total)
}

fn synthetic_label_csv(movies_csv: &Path) -> String {
    let mut reader = csv::Reader::from_path(movies_csv).expect("movies.csv opens");
    let mut out = String::from(",tid,mid,iid,mood,neutral,happy,sad,hate,anger,disgust,surprise\n");
    for (index, record) in reader.records().enumerate() {
        let record = record.expect("movies.csv row parses");
        let movie_id: u64 = record[0].parse().expect("movieId is numeric");
        let mvec = synthetic_mvec(movie_id);
        let argmax = (0..7).max_by(|&a, &b| mvec[a].total_cmp(&mvec[b])).unwrap();
        write!(out, "{},{},{},,{}", index, movie_id, movie_id, MOOD_NAMES[argmax]).unwrap();
        for component in mvec {
            write!(out, ",{component}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[test]
fn acceptance_7_real_dataset_ingestion() {
    let Some(dir) = movielens_dir() else {
        println!("acceptance 7 (real dataset ingestion): SKIP (MovieLens files not present)");
        return;
    };
    report(7, "real dataset ingestion", || {
        let work = TempDir::new().unwrap();
        let labels = work.path().join("labels.csv");
        std::fs::write(&labels, synthetic_label_csv(&dir.join("movies.csv"))).unwrap();

        let output = binary()
            .args([
                "ingest",
                "--ratings",
                dir.join("ratings.csv").to_str().unwrap(),
                "--emotions",
                labels.to_str().unwrap(),
                "--dataset-id",
                "mlsm",
                "--out",
                work.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(
            stdout.contains("users=610 movies=9742 ratings=100836"),
            "unexpected stats row: {stdout}"
        );
    });
}

// ---------------------------------------------------------------------------
// 8. Determinism: every subcommand, run twice with identical inputs and
//    seed, produces byte-identical stdout and output files.
// ---------------------------------------------------------------------------

struct DeterminismFixture {
    _keep: TempDir,
    dataset: PathBuf,
    candidates: PathBuf,
    ratings: PathBuf,
    emotions: PathBuf,
}

fn determinism_fixture() -> DeterminismFixture {
    let dir = TempDir::new().unwrap();
    let dataset = synth_dataset(21, 14, 18, 6);
    let dataset_path = dir.path().join("ds.json");
    std::fs::write(&dataset_path, dataset.export().to_json()).unwrap();

    let mut csv = String::from("rank,item_id,title\n");
    for (index, item) in dataset.items().take(9).enumerate() {
        writeln!(csv, "{},{},Film {}", index + 1, item.item_id(), item.item_id()).unwrap();
    }
    let candidates = dir.path().join("candidates.csv");
    std::fs::write(&candidates, csv).unwrap();

    let ratings = dir.path().join("ratings.csv");
    std::fs::write(
        &ratings,
        "userId,movieId,rating,timestamp\n1,10,4.0,1\n2,10,5.0,2\n1,20,3.0,3\n2,20,4.5,4\n",
    )
    .unwrap();
    let emotions = dir.path().join("emotions.csv");
    std::fs::write(
        &emotions,
        ",tid,mid,iid,mood,neutral,happy,sad,hate,anger,disgust,surprise\n\
         0,1,10,,neutral,0.3,0.1,0.1,0.1,0.1,0.1,0.2\n\
         1,2,20,,happy,0.1,0.4,0.1,0.1,0.1,0.1,0.1\n",
    )
    .unwrap();

    DeterminismFixture {
        _keep: dir,
        dataset: dataset_path,
        candidates,
        ratings,
        emotions,
    }
}

/// Run one command sequence in a fresh directory; collect every stdout
/// (with the run-specific output directory masked out of any echoed
/// paths) and the full output file tree.
fn run_sequence(sequences: &[Vec<String>], out: &Path) -> (String, Vec<(PathBuf, Vec<u8>)>) {
    let mut stdout = String::new();
    for args in sequences {
        let mut full = args.clone();
        full.push("--out".into());
        full.push(out.to_str().unwrap().into());
        let output: Output = binary().args(&full).output().unwrap();
        assert!(
            output.status.success(),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&output.stderr)
        );
        stdout.push_str(
            &String::from_utf8_lossy(&output.stdout).replace(out.to_str().unwrap(), "<out>"),
        );
    }

    let mut files = Vec::new();
    let mut stack = vec![out.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).unwrap();
                files.push((path.strip_prefix(out).unwrap().to_path_buf(), bytes));
            }
        }
    }
    files.sort();
    (stdout, files)
}

#[test]
fn acceptance_8_determinism() {
    report(8, "determinism", || {
        let fx = determinism_fixture();
        let dataset = fx.dataset.to_str().unwrap().to_string();
        let candidates = fx.candidates.to_str().unwrap().to_string();

        let s = |parts: &[&str]| -> Vec<String> { parts.iter().map(|p| p.to_string()).collect() };
        let sequences: Vec<Vec<Vec<String>>> = vec![
            vec![s(&[
                "ingest",
                "--ratings",
                fx.ratings.to_str().unwrap(),
                "--emotions",
                fx.emotions.to_str().unwrap(),
                "--dataset-id",
                "demo",
            ])],
            vec![s(&["stats", "--dataset", &dataset])],
            vec![s(&["pac", "--dataset", &dataset, "--user", "1", "--target", &dataset, "--k", "4"])],
            vec![s(&["form-ssg", "--dataset", &dataset, "--g", "3", "--m", "2"])],
            vec![
                s(&["group", "create", "--name", "night", "--owner", "1", "--members", "2,3,4"]),
                s(&["group", "add", "--group", "mg-0000", "--actor", "1", "--user", "5"]),
                s(&["group", "remove", "--group", "mg-0000", "--actor", "1", "--user", "2"]),
                s(&["group", "list"]),
            ],
            vec![s(&["rerank", "--dataset", &dataset, "--user", "1", "--candidates", &candidates, "--n", "5"])],
            vec![
                s(&["group", "create", "--name", "night", "--owner", "1", "--members", "2,3"]),
                s(&[
                    "group-recommend",
                    "--dataset",
                    &dataset,
                    "--group",
                    "mg-0000",
                    "--strategy",
                    "average-profile",
                    "--candidates",
                    &candidates,
                    "--n",
                    "4",
                ]),
            ],
            vec![s(&[
                "simulcast",
                "--dataset",
                &dataset,
                "--g",
                "2",
                "--m",
                "3",
                "--candidates",
                &candidates,
                "--n",
                "4",
            ])],
            vec![s(&[
                "bench",
                "--users",
                "12",
                "--items",
                "15",
                "--ratings-per-user",
                "5",
                "--m",
                "3",
                "--n",
                "4",
                "--seed",
                "11",
            ])],
        ];

        for sequence in &sequences {
            let first = TempDir::new().unwrap();
            let second = TempDir::new().unwrap();
            let (stdout_a, files_a) = run_sequence(sequence, first.path());
            let (stdout_b, files_b) = run_sequence(sequence, second.path());
            assert_eq!(stdout_a, stdout_b, "stdout must not vary: {sequence:?}");
            assert_eq!(
                files_a.len(),
                files_b.len(),
                "file sets must match: {sequence:?}"
            );
            for ((path_a, bytes_a), (path_b, bytes_b)) in files_a.iter().zip(&files_b) {
                assert_eq!(path_a, path_b, "{sequence:?}");
                assert_eq!(bytes_a, bytes_b, "{} differs: {sequence:?}", path_a.display());
            }
        }
    });
}
