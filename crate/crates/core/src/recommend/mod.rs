//! Top-N production and distribution.
//!
//! Everything here reduces to one operation: [`rerank`], which orders a
//! candidate pool by similarity to a profile and keeps the best n. Group
//! recommendation picks which profile to rerank with (a representative
//! member's, or the group average); simulcast reranks once per group
//! member; broadcast fans simulcast out over many groups. Rating
//! aggregation and group rating prediction work on the ratings matrix
//! instead of profiles.
//!
//! Similarity evaluations are counted per thread so callers can verify how
//! much work a distribution strategy actually did; see
//! [`take_aii_evaluations`].

mod files;

pub use files::{read_candidates, write_broadcast_dir, write_ranked_csv};

use crate::affect::{AffectError, EmotionVector};
use crate::grouping::{
    dominant_member, group_uvec, least_misery_member, GroupError, MultiGroup, SimulcastGroup,
};
use crate::ingest::Dataset;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

/// Errors from recommendation production.
#[derive(Debug, Error)]
pub enum RecommendError {
    /// The candidate pool is empty.
    #[error("no candidates to rank")]
    EmptyCandidates,
    /// The same item appears twice in the candidate pool.
    #[error("candidate item {item_id} appears more than once")]
    DuplicateCandidate { item_id: u64 },
    /// A candidate references an item absent from the dataset.
    #[error("item {item_id} not found in dataset {dataset_id:?}")]
    UnknownItem { dataset_id: String, item_id: u64 },
    /// A group member has no profile in the dataset.
    #[error("user {user_id} has no profile in dataset {dataset_id:?}")]
    UnknownUser { dataset_id: String, user_id: u64 },
    /// The ratings slice has no members or no items.
    #[error("ratings slice is empty")]
    EmptySlice,
    /// Too few members rated the item.
    #[error("item {item_id} was rated by {have} members, need {need}")]
    InsufficientRaters { item_id: u64, have: usize, need: usize },
    /// A candidates file row could not be parsed.
    #[error("parse error at line {line}: {message}")]
    ParseError { line: u64, message: String },
    /// The candidates file does not exist.
    #[error("file not found: {path}")]
    FileNotFound { path: PathBuf },
    /// Any other I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Group selection failed (wraps the grouping error).
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Invalid vector arithmetic (e.g. a zero-magnitude profile).
    #[error(transparent)]
    Affect(#[from] AffectError),
}

impl RecommendError {
    /// Stable machine-readable name of the error variant.
    pub fn name(&self) -> &'static str {
        match self {
            RecommendError::EmptyCandidates => "EmptyCandidates",
            RecommendError::DuplicateCandidate { .. } => "DuplicateCandidate",
            RecommendError::UnknownItem { .. } => "UnknownItem",
            RecommendError::UnknownUser { .. } => "UnknownUser",
            RecommendError::EmptySlice => "EmptySlice",
            RecommendError::InsufficientRaters { .. } => "InsufficientRaters",
            RecommendError::ParseError { .. } => "ParseError",
            RecommendError::FileNotFound { .. } => "FileNotFound",
            RecommendError::Io { .. } => "Io",
            RecommendError::Group(e) => e.name(),
            RecommendError::Affect(e) => e.name(),
        }
    }
}

/// One item offered for ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub item_id: u64,
    pub mvec: EmotionVector,
    /// Position in the incoming list (e.g. a published chart order); used
    /// as the tie-breaker so equal scores keep the source ordering.
    pub display_rank: u32,
    pub title: Option<String>,
}

/// One scored entry of a ranked list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub item_id: u64,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

/// Whose list this is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListOwner {
    User(u64),
    Group(String),
}

/// How a group picks the profile it ranks with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupStrategy {
    /// Rank with the most active member's profile.
    Dominant,
    /// Rank with the profile least similar to the dominant member's, so
    /// the group's outlier is served rather than ignored.
    LeastMisery,
    /// Rank with the mean of all member profiles.
    AverageProfile,
}

impl FromStr for GroupStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "dominant" => Ok(GroupStrategy::Dominant),
            "least-misery" => Ok(GroupStrategy::LeastMisery),
            "average-profile" | "average" => Ok(GroupStrategy::AverageProfile),
            other => Err(format!("unknown strategy: {other:?}")),
        }
    }
}

/// The profile a group recommendation was actually computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveProfile {
    /// One member's own profile.
    Member(u64),
    /// The mean profile of all members.
    GroupAverage,
}

/// An ordered recommendation list: scores non-increasing, items unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub owner: ListOwner,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<GroupStrategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_profile: Option<EffectiveProfile>,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// A plain personalized list.
    pub fn personalized(user_id: u64, entries: Vec<RankedEntry>) -> RankedList {
        RankedList {
            owner: ListOwner::User(user_id),
            strategy: None,
            effective_profile: None,
            entries,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ranked list serializes");
        s.push('\n');
        s
    }
}

thread_local! {
    static AII_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Read and reset this thread's count of similarity evaluations performed
/// by ranking operations since the last call.
pub fn take_aii_evaluations() -> u64 {
    AII_EVALS.with(|c| c.replace(0))
}

fn count_aii_evaluation() {
    AII_EVALS.with(|c| c.set(c.get() + 1));
}

/// Rank candidates by similarity to a profile and keep the best n.
///
/// Order: score descending; ties by ascending display rank, then ascending
/// item id. When n exceeds the pool size the whole pool is returned
/// ranked. Candidates must be unique by item.
pub fn rerank(
    uvec: &EmotionVector,
    candidates: &[Candidate],
    n: usize,
) -> Result<Vec<RankedEntry>, RecommendError> {
    if candidates.is_empty() {
        return Err(RecommendError::EmptyCandidates);
    }
    let mut seen = HashSet::with_capacity(candidates.len());
    for c in candidates {
        if !seen.insert(c.item_id) {
            return Err(RecommendError::DuplicateCandidate { item_id: c.item_id });
        }
    }

    let mut scored: Vec<(&Candidate, f64)> = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let score = uvec.aii(&candidate.mvec)?;
        count_aii_evaluation();
        scored.push((candidate, score));
    }
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.display_rank.cmp(&b.0.display_rank))
            .then(a.0.item_id.cmp(&b.0.item_id))
    });
    scored.truncate(n);
    Ok(scored
        .into_iter()
        .map(|(c, score)| RankedEntry {
            item_id: c.item_id,
            score,
            title: c.title.clone(),
        })
        .collect())
}

/// Produce a group's list under a decision strategy.
///
/// The strategy picks the effective profile: the dominant member's, the
/// least-misery member's, or the group average. Recommendation calls need
/// at least two members. The result records which strategy ran and whose
/// profile it used.
pub fn recommend_for_group(
    group: &MultiGroup,
    dataset: &Dataset,
    candidates: &[Candidate],
    strategy: GroupStrategy,
    n: usize,
) -> Result<RankedList, RecommendError> {
    if group.members.len() < 2 {
        return Err(RecommendError::Group(GroupError::GroupTooSmall {
            size: group.members.len(),
            min: 2,
        }));
    }
    let (uvec, effective) = match strategy {
        GroupStrategy::Dominant => {
            let member = dominant_member(&group.members, dataset)?;
            let profile = dataset.user_profile(member).expect("member checked");
            (*profile.uvec(), EffectiveProfile::Member(member))
        }
        GroupStrategy::LeastMisery => {
            let member = least_misery_member(&group.members, dataset)?;
            let profile = dataset.user_profile(member).expect("member checked");
            (*profile.uvec(), EffectiveProfile::Member(member))
        }
        GroupStrategy::AverageProfile => (
            group_uvec(&group.members, dataset)?,
            EffectiveProfile::GroupAverage,
        ),
    };
    let entries = rerank(&uvec, candidates, n)?;
    Ok(RankedList {
        owner: ListOwner::Group(group.group_id.clone()),
        strategy: Some(strategy),
        effective_profile: Some(effective),
        entries,
    })
}

/// One personalized list per group member, all over the same shared
/// candidate pool.
pub fn simulcast(
    group: &SimulcastGroup,
    dataset: &Dataset,
    candidates: &[Candidate],
    n: usize,
) -> Result<BTreeMap<u64, RankedList>, RecommendError> {
    let mut lists = BTreeMap::new();
    for user_id in group.member_ids() {
        let profile =
            dataset
                .user_profile(user_id)
                .ok_or_else(|| RecommendError::UnknownUser {
                    dataset_id: dataset.dataset_id().to_string(),
                    user_id,
                })?;
        let entries = rerank(profile.uvec(), candidates, n)?;
        lists.insert(user_id, RankedList::personalized(user_id, entries));
    }
    Ok(lists)
}

/// Simulcast applied to every group: the broadcast of one candidate list
/// to the whole group set.
pub fn broadcast(
    groups: &[SimulcastGroup],
    dataset: &Dataset,
    candidates: &[Candidate],
    n: usize,
) -> Result<BTreeMap<u32, BTreeMap<u64, RankedList>>, RecommendError> {
    let mut out = BTreeMap::new();
    for group in groups {
        out.insert(group.group_index, simulcast(group, dataset, candidates, n)?);
    }
    Ok(out)
}

/// A group-by-items view of ratings, for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRatingsSlice {
    members: Vec<u64>,
    items: Vec<u64>,
    /// `ratings[member_index][item_index]`; None = unrated.
    ratings: Vec<Vec<Option<f64>>>,
}

impl GroupRatingsSlice {
    /// Build a slice from explicit rows. Row and column counts must match
    /// the member and item lists.
    pub fn new(members: Vec<u64>, items: Vec<u64>, ratings: Vec<Vec<Option<f64>>>) -> GroupRatingsSlice {
        assert_eq!(ratings.len(), members.len(), "one row per member");
        for row in &ratings {
            assert_eq!(row.len(), items.len(), "one column per item");
        }
        GroupRatingsSlice {
            members,
            items,
            ratings,
        }
    }

    /// Build a slice by looking up each member's rating for each item in
    /// the dataset's watch histories.
    pub fn from_dataset(
        dataset: &Dataset,
        members: &[u64],
        items: &[u64],
    ) -> Result<GroupRatingsSlice, RecommendError> {
        let mut ratings = Vec::with_capacity(members.len());
        for &user_id in members {
            let record = dataset
                .user(user_id)
                .ok_or_else(|| RecommendError::UnknownUser {
                    dataset_id: dataset.dataset_id().to_string(),
                    user_id,
                })?;
            ratings.push(items.iter().map(|&item| record.rating_of(item)).collect());
        }
        Ok(GroupRatingsSlice {
            members: members.to_vec(),
            items: items.to_vec(),
            ratings,
        })
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }
}

/// How to collapse a group's ratings of one item into one score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregationFn {
    /// The group feels an item as its least enthusiastic member does.
    LeastMisery,
    /// Plain arithmetic mean.
    Average,
    /// Mean over items that no member rated below the threshold; items
    /// failing the threshold are dropped from the output entirely.
    AverageWithoutMisery { tau: f64 },
}

/// Aggregated scores plus the items that could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationOutcome {
    /// (item, score), score descending, ties by ascending item id.
    pub scores: Vec<(u64, f64)>,
    /// Items skipped because at least one member has not rated them.
    pub ineligible: Vec<u64>,
}

/// Collapse a ratings slice into one score per item.
///
/// An item is eligible only when every member rated it; the rest are
/// reported, not scored. Eligible items are scored by the chosen function
/// and returned best first (ties by ascending item id).
pub fn aggregate_ratings(
    slice: &GroupRatingsSlice,
    function: AggregationFn,
) -> Result<AggregationOutcome, RecommendError> {
    if slice.members.is_empty() || slice.items.is_empty() {
        return Err(RecommendError::EmptySlice);
    }
    let mut scores = Vec::with_capacity(slice.items.len());
    let mut ineligible = Vec::new();
    for (item_index, &item_id) in slice.items.iter().enumerate() {
        let mut values = Vec::with_capacity(slice.members.len());
        for row in &slice.ratings {
            match row[item_index] {
                Some(v) => values.push(v),
                None => break,
            }
        }
        if values.len() < slice.members.len() {
            ineligible.push(item_id);
            continue;
        }
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
        scores.push((item_id, score));
    }
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(AggregationOutcome { scores, ineligible })
}

/// Predict a group's rating for one item: the mean of the ratings its
/// members gave, requiring at least `min_raters` of them (and always at
/// least one).
pub fn predict_group_item_rating(
    members: &[u64],
    item_id: u64,
    dataset: &Dataset,
    min_raters: usize,
) -> Result<f64, RecommendError> {
    let need = min_raters.max(1);
    let mut values = Vec::new();
    for &user_id in members {
        let record = dataset
            .user(user_id)
            .ok_or_else(|| RecommendError::UnknownUser {
                dataset_id: dataset.dataset_id().to_string(),
                user_id,
            })?;
        if let Some(rating) = record.rating_of(item_id) {
            values.push(rating);
        }
    }
    if values.len() < need {
        return Err(RecommendError::InsufficientRaters {
            item_id,
            have: values.len(),
            need,
        });
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
