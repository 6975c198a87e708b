//! Cross-dataset matching by profile similarity.
//!
//! Two datasets never share user identities; the only way to say "user 400
//! over here looks like user 66274 over there" is to compare emotion
//! profiles. A match query scans every candidate in the target dataset,
//! scores it by similarity to the source profile, and returns the best k in
//! a canonical order: similarity descending, ties broken by ascending
//! target id. The full scan is the reference algorithm; anything cleverer
//! must produce identical output.

use crate::affect::AffectError;
use crate::ingest::{normalize_group_mvec, Dataset, IngestError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from match queries.
#[derive(Debug, Error)]
pub enum AssocError {
    /// The source or target user id is not in its dataset.
    #[error("user {user_id} not found in dataset {dataset_id:?}")]
    UnknownUser { dataset_id: String, user_id: u64 },
    /// The source or target item id is not in its dataset.
    #[error("item {item_id} not found in dataset {dataset_id:?}")]
    UnknownItem { dataset_id: String, item_id: u64 },
    /// The target dataset has no candidates of the requested kind.
    #[error("target dataset {dataset_id:?} has no candidates")]
    EmptyTarget { dataset_id: String },
    /// The target item carries no vote count, so it cannot stand in for
    /// its rater group.
    #[error("item {item_id} has no vote count")]
    MissingVoteCount { item_id: u64 },
    /// Invalid vector arithmetic (e.g. a zero-magnitude profile).
    #[error(transparent)]
    Affect(#[from] AffectError),
}

impl AssocError {
    /// Stable machine-readable name of the error variant.
    pub fn name(&self) -> &'static str {
        match self {
            AssocError::UnknownUser { .. } => "UnknownUser",
            AssocError::UnknownItem { .. } => "UnknownItem",
            AssocError::EmptyTarget { .. } => "EmptyTarget",
            AssocError::MissingVoteCount { .. } => "MissingVoteCount",
            AssocError::Affect(e) => e.name(),
        }
    }
}

/// What an entity reference points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    User,
    Item,
}

/// A dataset-scoped reference to a user or item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRef {
    pub dataset: String,
    pub id: u64,
    pub kind: EntityKind,
}

/// One similarity match between entities of two datasets.
///
/// The score is recomputable: it always equals the similarity of the two
/// referenced profiles as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacMatch {
    pub source: EntityRef,
    pub target: EntityRef,
    pub aii: f64,
}

/// Rank scored candidates descending, ties by ascending id, keep the top k.
fn top_k(mut scored: Vec<(u64, f64)>, k: usize) -> Vec<(u64, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// The k users of `target` whose profiles best match a user of `source`.
///
/// Results are sorted by similarity descending, ties by ascending target
/// user id; at most k entries. k = 1 is the pseudo-association connection
/// proper: the single best cross-dataset stand-in for the source user.
pub fn pac_user_to_user(
    source: &Dataset,
    source_user: u64,
    target: &Dataset,
    k: usize,
) -> Result<Vec<PacMatch>, AssocError> {
    let profile = source
        .user_profile(source_user)
        .ok_or_else(|| AssocError::UnknownUser {
            dataset_id: source.dataset_id().to_string(),
            user_id: source_user,
        })?;
    if target.n_users() == 0 {
        return Err(AssocError::EmptyTarget {
            dataset_id: target.dataset_id().to_string(),
        });
    }
    let mut scored = Vec::with_capacity(target.n_users());
    for candidate in target.users() {
        let aii = profile.uvec().aii(candidate.profile().uvec())?;
        scored.push((candidate.profile().user_id(), aii));
    }
    Ok(top_k(scored, k)
        .into_iter()
        .map(|(id, aii)| PacMatch {
            source: EntityRef {
                dataset: source.dataset_id().to_string(),
                id: source_user,
                kind: EntityKind::User,
            },
            target: EntityRef {
                dataset: target.dataset_id().to_string(),
                id,
                kind: EntityKind::User,
            },
            aii,
        })
        .collect())
}

/// The k items of `target` whose vectors best match an item of `source`.
///
/// Same ordering contract as [`pac_user_to_user`]; k = 1 gives the
/// one-to-one item association.
pub fn pac_item_to_item(
    source: &Dataset,
    source_item: u64,
    target: &Dataset,
    k: usize,
) -> Result<Vec<PacMatch>, AssocError> {
    let item = source
        .item(source_item)
        .ok_or_else(|| AssocError::UnknownItem {
            dataset_id: source.dataset_id().to_string(),
            item_id: source_item,
        })?;
    if target.n_items() == 0 {
        return Err(AssocError::EmptyTarget {
            dataset_id: target.dataset_id().to_string(),
        });
    }
    let mut scored = Vec::with_capacity(target.n_items());
    for candidate in target.items() {
        let aii = item.mvec().aii(candidate.mvec())?;
        scored.push((candidate.item_id(), aii));
    }
    Ok(top_k(scored, k)
        .into_iter()
        .map(|(id, aii)| PacMatch {
            source: EntityRef {
                dataset: source.dataset_id().to_string(),
                id: source_item,
                kind: EntityKind::Item,
            },
            target: EntityRef {
                dataset: target.dataset_id().to_string(),
                id,
                kind: EntityKind::Item,
            },
            aii,
        })
        .collect())
}

/// How similar a user of `source` is to the group of users who rated one
/// item of `target`: a one-to-many association, with the vote-count
/// normalized item vector standing in for the rater group's average
/// profile.
pub fn pac_user_to_item_group(
    source: &Dataset,
    source_user: u64,
    target: &Dataset,
    target_item: u64,
) -> Result<PacMatch, AssocError> {
    let profile = source
        .user_profile(source_user)
        .ok_or_else(|| AssocError::UnknownUser {
            dataset_id: source.dataset_id().to_string(),
            user_id: source_user,
        })?;
    let item = target
        .item(target_item)
        .ok_or_else(|| AssocError::UnknownItem {
            dataset_id: target.dataset_id().to_string(),
            item_id: target_item,
        })?;
    let group_vec = normalize_group_mvec(item).map_err(|e| match e {
        IngestError::MissingVoteCount { item_id } => AssocError::MissingVoteCount { item_id },
        IngestError::Affect(a) => AssocError::Affect(a),
        other => unreachable!("unexpected error from group normalization: {other}"),
    })?;
    let aii = profile.uvec().aii(&group_vec)?;
    Ok(PacMatch {
        source: EntityRef {
            dataset: source.dataset_id().to_string(),
            id: source_user,
            kind: EntityKind::User,
        },
        target: EntityRef {
            dataset: target.dataset_id().to_string(),
            id: target_item,
            kind: EntityKind::Item,
        },
        aii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affect::EmotionVector;
    use crate::profile::{ItemProfile, UserProfile};

    fn user(id: u64, raw: [f64; 7]) -> UserProfile {
        UserProfile::from_watched(id, &[EmotionVector::l1_normalize(raw).unwrap()])
    }

    fn item(id: u64, raw: [f64; 7]) -> ItemProfile {
        ItemProfile::new(id, EmotionVector::l1_normalize(raw).unwrap())
    }

    #[test]
    fn exact_duplicate_wins_with_similarity_one() {
        let source = Dataset::from_profiles("a", [user(1, [0.3, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1])], []);
        let target = Dataset::from_profiles(
            "b",
            [
                user(10, [0.1, 0.3, 0.1, 0.2, 0.1, 0.1, 0.1]),
                user(11, [0.3, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1]),
            ],
            [],
        );
        let matches = pac_user_to_user(&source, 1, &target, 1).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].target.id, 11);
        assert_eq!(matches[0].target.kind, EntityKind::User);
        assert!((matches[0].aii - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_user_and_empty_target_are_named_errors() {
        let source = Dataset::from_profiles("a", [user(1, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])], []);
        let empty = Dataset::from_profiles("b", [], []);
        assert_eq!(
            pac_user_to_user(&source, 99, &empty, 1).unwrap_err().name(),
            "UnknownUser"
        );
        assert_eq!(
            pac_user_to_user(&source, 1, &empty, 1).unwrap_err().name(),
            "EmptyTarget"
        );
    }

    #[test]
    fn ties_break_toward_ascending_id() {
        let source = Dataset::from_profiles("a", [user(1, [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0])], []);
        // two candidates with identical profiles: equal similarity
        let target = Dataset::from_profiles(
            "b",
            [
                user(30, [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
                user(20, [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ],
            [],
        );
        let matches = pac_user_to_user(&source, 1, &target, 2).unwrap();
        assert_eq!(matches[0].target.id, 20);
        assert_eq!(matches[1].target.id, 30);
    }

    #[test]
    fn item_match_finds_the_same_item_in_the_other_dataset() {
        let shared = [0.1, 0.2, 0.2, 0.2, 0.1, 0.1, 0.1];
        let source = Dataset::from_profiles("a", [], [item(5, shared)]);
        let target = Dataset::from_profiles(
            "b",
            [],
            [item(50, [0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]), item(51, shared)],
        );
        let matches = pac_item_to_item(&source, 5, &target, 1).unwrap();
        assert_eq!(matches[0].target.id, 51);
        assert!((matches[0].aii - 1.0).abs() < 1e-12);
        assert_eq!(matches[0].source.kind, EntityKind::Item);

        let empty = Dataset::from_profiles("c", [], []);
        assert_eq!(
            pac_item_to_item(&source, 5, &empty, 1).unwrap_err().name(),
            "EmptyTarget"
        );
    }

    #[test]
    fn returned_list_is_no_longer_than_k_and_non_increasing() {
        let source = Dataset::from_profiles("a", [user(1, [0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1])], []);
        let users: Vec<UserProfile> = (0..10)
            .map(|i| {
                let w = 0.1 + 0.05 * i as f64;
                user(i, [w, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1])
            })
            .collect();
        let target = Dataset::from_profiles("b", users, []);
        let matches = pac_user_to_user(&source, 1, &target, 4).unwrap();
        assert_eq!(matches.len(), 4);
        for pair in matches.windows(2) {
            assert!(pair[0].aii >= pair[1].aii);
        }
        // k larger than the candidate pool: all candidates, still sorted
        let all = pac_user_to_user(&source, 1, &target, 100).unwrap();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn user_to_item_group_recomputes_directly() {
        let source = Dataset::from_profiles("a", [user(7, [0.2, 0.2, 0.1, 0.1, 0.2, 0.1, 0.1])], []);
        let group_item = item(3, [0.25, 0.15, 0.1, 0.1, 0.2, 0.1, 0.1]).with_vote_count(12);
        let expected = {
            let uvec = source.user_profile(7).unwrap().uvec();
            uvec.aii(&normalize_group_mvec(&group_item).unwrap()).unwrap()
        };
        let target = Dataset::from_profiles("b", [], [group_item]);
        let m = pac_user_to_item_group(&source, 7, &target, 3).unwrap();
        assert_eq!(m.aii, expected);
        assert_eq!(m.target.kind, EntityKind::Item);
    }

    #[test]
    fn user_to_item_group_requires_vote_count() {
        let source = Dataset::from_profiles("a", [user(7, [0.2, 0.2, 0.1, 0.1, 0.2, 0.1, 0.1])], []);
        let target = Dataset::from_profiles("b", [], [item(3, [0.25, 0.15, 0.1, 0.1, 0.2, 0.1, 0.1])]);
        let err = pac_user_to_item_group(&source, 7, &target, 3).unwrap_err();
        assert_eq!(err.name(), "MissingVoteCount");
    }

    #[test]
    fn matches_serialize_with_nested_refs() {
        let m = PacMatch {
            source: EntityRef {
                dataset: "mlsm".into(),
                id: 400,
                kind: EntityKind::User,
            },
            target: EntityRef {
                dataset: "ml20m".into(),
                id: 66274,
                kind: EntityKind::User,
            },
            aii: 0.99992,
        };
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"source":{"dataset":"mlsm","id":400,"kind":"user"},"target":{"dataset":"ml20m","id":66274,"kind":"user"},"aii":0.99992}"#
        );
        let back: PacMatch = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
