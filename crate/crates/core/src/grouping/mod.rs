//! Group formation and membership analytics.
//!
//! Two kinds of groups exist. Simulcast groups are formed by the system:
//! the most active users become anchors and each anchor collects the users
//! whose profiles sit closest to its own, so one generated list can serve
//! the whole group. Multi-groups are created and administered by users
//! (see [`MultiGroupStore`]).
//!
//! Selection operations work on any member list: the dominant member (most
//! watched), the least-misery member (profile furthest from the dominant
//! one), the median member of the similarity ranking, and the group's
//! average profile.

mod multigroup;

pub use multigroup::{MultiGroup, MultiGroupStore, RemoveOutcome, Visibility};

use crate::affect::{mean_profile, AffectError, EmotionVector};
use crate::ingest::Dataset;
use crate::profile::UserProfile;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

/// Errors from group formation, selection, and administration.
#[derive(Debug, Error)]
pub enum GroupError {
    /// The dataset has too few users for the requested formation.
    #[error("need {needed} users, dataset has {available}")]
    InsufficientUsers { needed: usize, available: usize },
    /// The operation needs a non-empty group.
    #[error("group is empty")]
    EmptyGroup,
    /// The operation needs a larger group.
    #[error("group has {size} members, needs at least {min}")]
    GroupTooSmall { size: usize, min: usize },
    /// A referenced user is not a member of the group.
    #[error("user {user_id} is not a member")]
    NotAMember { user_id: u64 },
    /// A group member has no profile in the dataset.
    #[error("user {user_id} has no profile in dataset {dataset_id:?}")]
    UnknownUser { dataset_id: String, user_id: u64 },
    /// Only the group owner may mutate it.
    #[error("user {actor} does not own group {group_id:?}")]
    NotOwner { group_id: String, actor: u64 },
    /// No group with this id.
    #[error("unknown group {group_id:?}")]
    UnknownGroup { group_id: String },
    /// The user is already in the group.
    #[error("user {user_id} is already a member")]
    AlreadyMember { user_id: u64 },
    /// Persisted group state could not be read or written.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Persisted group state does not parse.
    #[error("malformed group file {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    /// Invalid vector arithmetic (e.g. a zero-magnitude profile).
    #[error(transparent)]
    Affect(#[from] AffectError),
}

impl GroupError {
    /// Stable machine-readable name of the error variant.
    pub fn name(&self) -> &'static str {
        match self {
            GroupError::InsufficientUsers { .. } => "InsufficientUsers",
            GroupError::EmptyGroup => "EmptyGroup",
            GroupError::GroupTooSmall { .. } => "GroupTooSmall",
            GroupError::NotAMember { .. } => "NotAMember",
            GroupError::UnknownUser { .. } => "UnknownUser",
            GroupError::NotOwner { .. } => "NotOwner",
            GroupError::UnknownGroup { .. } => "UnknownGroup",
            GroupError::AlreadyMember { .. } => "AlreadyMember",
            GroupError::Io { .. } => "Io",
            GroupError::Malformed { .. } => "Malformed",
            GroupError::Affect(e) => e.name(),
        }
    }
}

/// One membership row of a simulcast group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsgMember {
    pub user_id: u64,
    /// Similarity to the group's anchor; 1 for the anchor itself.
    pub aii_to_anchor: f64,
    pub watch_count: u64,
}

/// A system-formed group: an anchor user plus the users most similar to
/// them, in similarity order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulcastGroup {
    /// 1-based position of the anchor in the activity ranking.
    pub group_index: u32,
    pub anchor: u64,
    members: Vec<SsgMember>,
}

impl SimulcastGroup {
    /// Members in canonical order: the anchor first, then by similarity to
    /// the anchor descending (ties by ascending user id).
    pub fn members(&self) -> &[SsgMember] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().map(|m| m.user_id)
    }
}

fn profile_of<'d>(dataset: &'d Dataset, user_id: u64) -> Result<&'d UserProfile, GroupError> {
    dataset
        .user_profile(user_id)
        .ok_or_else(|| GroupError::UnknownUser {
            dataset_id: dataset.dataset_id().to_string(),
            user_id,
        })
}

/// Users ranked by activity: `(user_id, watch_count)` pairs, watch count
/// descending, ties by ascending id.
pub fn activity_ranking(dataset: &Dataset) -> Vec<(u64, u64)> {
    let mut ranked: Vec<(u64, u64)> = dataset
        .users()
        .map(|u| (u.profile().user_id(), u.profile().watch_count()))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// The `budget` users from `pool` most similar to `anchor`, by similarity
/// descending, ties by ascending user id. Shared by both formation modes.
fn most_similar(
    dataset: &Dataset,
    anchor: &UserProfile,
    pool: &[(u64, u64)],
    budget: usize,
) -> Result<Vec<SsgMember>, GroupError> {
    let mut scored = Vec::with_capacity(pool.len());
    for &(user_id, watch_count) in pool {
        let profile = profile_of(dataset, user_id)?;
        let aii = anchor.uvec().aii(profile.uvec())?;
        scored.push(SsgMember {
            user_id,
            aii_to_anchor: aii,
            watch_count,
        });
    }
    scored.sort_by(|a, b| {
        b.aii_to_anchor
            .total_cmp(&a.aii_to_anchor)
            .then(a.user_id.cmp(&b.user_id))
    });
    scored.truncate(budget);
    Ok(scored)
}

/// Form `g` simulcast groups of `m` members each (plus the anchor).
///
/// The `g` most active users (watch count descending, ties by ascending
/// id) become anchors in rank order. Each anchor then draws the `m`
/// non-anchor users most similar to them. The candidate pool excludes all
/// anchors but is shared across groups, so a user may appear in several
/// groups; anchors appear only in their own.
pub fn form_ssg(dataset: &Dataset, g: usize, m: usize) -> Result<Vec<SimulcastGroup>, GroupError> {
    assert!(g >= 1, "need at least one group");
    assert!(m >= 1, "need at least one member per group");
    let ranked = activity_ranking(dataset);
    if ranked.len() < g {
        return Err(GroupError::InsufficientUsers {
            needed: g,
            available: ranked.len(),
        });
    }
    if ranked.len() - g < m {
        return Err(GroupError::InsufficientUsers {
            needed: g + m,
            available: ranked.len(),
        });
    }
    let (anchors, pool) = ranked.split_at(g);

    let mut groups = Vec::with_capacity(g);
    for (rank, &(anchor_id, watch_count)) in anchors.iter().enumerate() {
        let anchor = profile_of(dataset, anchor_id)?;
        let mut members = Vec::with_capacity(m + 1);
        members.push(SsgMember {
            user_id: anchor_id,
            aii_to_anchor: 1.0,
            watch_count,
        });
        members.extend(most_similar(dataset, anchor, pool, m)?);
        groups.push(SimulcastGroup {
            group_index: rank as u32 + 1,
            anchor: anchor_id,
            members,
        });
    }
    Ok(groups)
}

/// Form simulcast groups that partition the user base: each user lands in
/// exactly one group.
///
/// Repeatedly takes the most active remaining user as the next anchor and
/// consumes the `m` remaining users most similar to them. The final group
/// is smaller when fewer than `m` users remain. Selection logic is shared
/// with [`form_ssg`]; only the pool bookkeeping differs.
pub fn form_ssg_disjoint(dataset: &Dataset, m: usize) -> Result<Vec<SimulcastGroup>, GroupError> {
    assert!(m >= 1, "need at least one member per group");
    let mut remaining = activity_ranking(dataset);
    if remaining.is_empty() {
        return Err(GroupError::InsufficientUsers {
            needed: 1,
            available: 0,
        });
    }

    let mut groups = Vec::new();
    let mut index = 1u32;
    while !remaining.is_empty() {
        let (anchor_id, watch_count) = remaining.remove(0);
        let anchor = profile_of(dataset, anchor_id)?;
        let mut members = Vec::with_capacity(m + 1);
        members.push(SsgMember {
            user_id: anchor_id,
            aii_to_anchor: 1.0,
            watch_count,
        });
        let chosen = most_similar(dataset, anchor, &remaining, m)?;
        remaining.retain(|&(user_id, _)| !chosen.iter().any(|c| c.user_id == user_id));
        members.extend(chosen);
        groups.push(SimulcastGroup {
            group_index: index,
            anchor: anchor_id,
            members,
        });
        index += 1;
    }
    Ok(groups)
}

/// Rank group members by similarity to one reference member.
///
/// The reference comes first with similarity 1; everyone else follows in
/// descending order, ties by ascending user id.
pub fn rank_members_by_aii(
    members: &[u64],
    reference: u64,
    dataset: &Dataset,
) -> Result<Vec<(u64, f64)>, GroupError> {
    if !members.contains(&reference) {
        return Err(GroupError::NotAMember { user_id: reference });
    }
    let reference_profile = profile_of(dataset, reference)?;
    let mut rest = Vec::with_capacity(members.len().saturating_sub(1));
    for &user_id in members {
        if user_id == reference {
            continue;
        }
        let profile = profile_of(dataset, user_id)?;
        let aii = reference_profile.uvec().aii(profile.uvec())?;
        rest.push((user_id, aii));
    }
    rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut ranking = Vec::with_capacity(members.len());
    ranking.push((reference, 1.0));
    ranking.extend(rest);
    Ok(ranking)
}

/// The member who watched the most; ties go to the lower user id.
pub fn dominant_member(members: &[u64], dataset: &Dataset) -> Result<u64, GroupError> {
    if members.is_empty() {
        return Err(GroupError::EmptyGroup);
    }
    let mut best: Option<(u64, u64)> = None;
    for &user_id in members {
        let watch_count = profile_of(dataset, user_id)?.watch_count();
        let better = match best {
            None => true,
            Some((best_id, best_count)) => {
                watch_count > best_count || (watch_count == best_count && user_id < best_id)
            }
        };
        if better {
            best = Some((user_id, watch_count));
        }
    }
    Ok(best.expect("nonempty group").0)
}

/// The member whose profile is least similar to the dominant member's,
/// the dominant member itself excluded; ties go to the lower user id.
pub fn least_misery_member(members: &[u64], dataset: &Dataset) -> Result<u64, GroupError> {
    if members.len() < 2 {
        return Err(GroupError::GroupTooSmall {
            size: members.len(),
            min: 2,
        });
    }
    let dominant = dominant_member(members, dataset)?;
    let dominant_uvec = profile_of(dataset, dominant)?.uvec();
    let mut worst: Option<(u64, f64)> = None;
    for &user_id in members {
        if user_id == dominant {
            continue;
        }
        let aii = profile_of(dataset, user_id)?.uvec().aii(dominant_uvec)?;
        let more_miserable = match worst {
            None => true,
            Some((worst_id, worst_aii)) => {
                aii < worst_aii || (aii == worst_aii && user_id < worst_id)
            }
        };
        if more_miserable {
            worst = Some((user_id, aii));
        }
    }
    Ok(worst.expect("at least one non-dominant member").0)
}

/// The middle member of the similarity ranking to the dominant member:
/// position ceil(size / 2), 1-indexed. A 61-member group yields position
/// 31; a singleton yields its only member.
pub fn median_member(members: &[u64], dataset: &Dataset) -> Result<u64, GroupError> {
    if members.is_empty() {
        return Err(GroupError::EmptyGroup);
    }
    let dominant = dominant_member(members, dataset)?;
    let ranking = rank_members_by_aii(members, dominant, dataset)?;
    let position = members.len().div_ceil(2);
    Ok(ranking[position - 1].0)
}

/// The group's average profile: the mean of all member vectors.
pub fn group_uvec(members: &[u64], dataset: &Dataset) -> Result<EmotionVector, GroupError> {
    if members.is_empty() {
        return Err(GroupError::EmptyGroup);
    }
    let mut uvecs = Vec::with_capacity(members.len());
    for &user_id in members {
        uvecs.push(*profile_of(dataset, user_id)?.uvec());
    }
    Ok(mean_profile(&uvecs)?)
}

/// Write simulcast groups as CSV: one row per membership with columns
/// `group_index,rank,user_id,aii_to_anchor,watch_count`, rank 1-based
/// within each group (the anchor is rank 1).
pub fn write_ssg_csv<W: Write>(groups: &[SimulcastGroup], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "group_index,rank,user_id,aii_to_anchor,watch_count")?;
    for group in groups {
        for (rank, member) in group.members().iter().enumerate() {
            writeln!(
                writer,
                "{},{},{},{},{}",
                group.group_index,
                rank + 1,
                member.user_id,
                member.aii_to_anchor,
                member.watch_count
            )?;
        }
    }
    Ok(())
}
