//! User-created groups with owner-administered membership.

use super::GroupError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Who can see and join a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    /// Private multi-group: invitation only.
    Pmg,
    /// Open multi-group: public.
    Omg,
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::Pmg => "pmg",
            Visibility::Omg => "omg",
        })
    }
}

impl FromStr for Visibility {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pmg" | "private" => Ok(Visibility::Pmg),
            "omg" | "open" | "public" => Ok(Visibility::Omg),
            other => Err(format!("unknown visibility: {other:?}")),
        }
    }
}

/// A user-created group. The owner is always a member and is the only one
/// allowed to mutate the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGroup {
    pub group_id: String,
    pub name: String,
    pub owner: u64,
    pub visibility: Visibility,
    /// Members in join order; the owner is first.
    pub members: Vec<u64>,
}

impl MultiGroup {
    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("group serializes");
        s.push('\n');
        s
    }
}

/// What removing a member did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemoveOutcome {
    MemberRemoved,
    /// The owner was removed, which deletes the whole group.
    GroupDeleted,
}

/// In-memory store of user-created groups with sequential ids.
///
/// Single-writer: mutations take `&mut self`, so readers can never observe
/// a half-applied change.
#[derive(Debug, Default)]
pub struct MultiGroupStore {
    groups: BTreeMap<String, MultiGroup>,
    next_id: u64,
}

impl MultiGroupStore {
    pub fn new() -> MultiGroupStore {
        MultiGroupStore::default()
    }

    /// Create a group; the owner becomes its first member.
    pub fn create(&mut self, name: &str, owner: u64, visibility: Visibility) -> &MultiGroup {
        let group_id = format!("mg-{:04}", self.next_id);
        self.next_id += 1;
        let group = MultiGroup {
            group_id: group_id.clone(),
            name: name.to_string(),
            owner,
            visibility,
            members: vec![owner],
        };
        self.groups.insert(group_id.clone(), group);
        &self.groups[&group_id]
    }

    fn owned_group(&mut self, group_id: &str, actor: u64) -> Result<&mut MultiGroup, GroupError> {
        let group = self
            .groups
            .get_mut(group_id)
            .ok_or_else(|| GroupError::UnknownGroup {
                group_id: group_id.to_string(),
            })?;
        if group.owner != actor {
            return Err(GroupError::NotOwner {
                group_id: group_id.to_string(),
                actor,
            });
        }
        Ok(group)
    }

    /// Delete a group. Owner only.
    pub fn delete(&mut self, group_id: &str, actor: u64) -> Result<MultiGroup, GroupError> {
        self.owned_group(group_id, actor)?;
        Ok(self.groups.remove(group_id).expect("checked just above"))
    }

    /// Add a member. Owner only.
    pub fn add_member(&mut self, group_id: &str, actor: u64, user: u64) -> Result<(), GroupError> {
        let group = self.owned_group(group_id, actor)?;
        if group.members.contains(&user) {
            return Err(GroupError::AlreadyMember { user_id: user });
        }
        group.members.push(user);
        Ok(())
    }

    /// Remove a member. Owner only. Removing the owner deletes the group.
    pub fn remove_member(
        &mut self,
        group_id: &str,
        actor: u64,
        user: u64,
    ) -> Result<RemoveOutcome, GroupError> {
        let group = self.owned_group(group_id, actor)?;
        if user == group.owner {
            self.groups.remove(group_id);
            return Ok(RemoveOutcome::GroupDeleted);
        }
        let index = group
            .members
            .iter()
            .position(|&m| m == user)
            .ok_or(GroupError::NotAMember { user_id: user })?;
        group.members.remove(index);
        Ok(RemoveOutcome::MemberRemoved)
    }

    /// Members of a group in join order.
    pub fn members(&self, group_id: &str) -> Result<&[u64], GroupError> {
        self.groups
            .get(group_id)
            .map(|g| g.members.as_slice())
            .ok_or_else(|| GroupError::UnknownGroup {
                group_id: group_id.to_string(),
            })
    }

    pub fn get(&self, group_id: &str) -> Option<&MultiGroup> {
        self.groups.get(group_id)
    }

    /// All groups in ascending id order.
    pub fn groups(&self) -> impl Iterator<Item = &MultiGroup> {
        self.groups.values()
    }

    /// Persist every group as `<group_id>.json` in a directory. The
    /// directory becomes an exact snapshot of the store: group files with
    /// no matching group (for example after a deletion) are removed.
    pub fn save_dir(&self, dir: &Path) -> Result<(), GroupError> {
        std::fs::create_dir_all(dir).map_err(|source| GroupError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for group in self.groups.values() {
            let path = dir.join(format!("{}.json", group.group_id));
            std::fs::write(&path, group.to_json()).map_err(|source| GroupError::Io {
                path: path.clone(),
                source,
            })?;
        }
        let entries = std::fs::read_dir(dir).map_err(|source| GroupError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for path in entries.filter_map(Result::ok).map(|e| e.path()) {
            let is_group_file = path.extension().is_some_and(|e| e == "json");
            let stale = is_group_file
                && path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .is_none_or(|stem| !self.groups.contains_key(stem));
            if stale {
                std::fs::remove_file(&path).map_err(|source| GroupError::Io {
                    path: path.clone(),
                    source,
                })?;
            }
        }
        Ok(())
    }

    /// Load a store from a directory of group files, as written by
    /// [`MultiGroupStore::save_dir`]. Id assignment resumes after the
    /// highest sequential id found.
    pub fn load_dir(dir: &Path) -> Result<MultiGroupStore, GroupError> {
        let mut store = MultiGroupStore::new();
        if !dir.exists() {
            return Ok(store);
        }
        let entries = std::fs::read_dir(dir).map_err(|source| GroupError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<_> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|source| GroupError::Io {
                path: path.clone(),
                source,
            })?;
            let group: MultiGroup =
                serde_json::from_str(&text).map_err(|e| GroupError::Malformed {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            if group.members.first() != Some(&group.owner) && !group.members.contains(&group.owner)
            {
                return Err(GroupError::Malformed {
                    path: path.clone(),
                    message: format!("owner {} is not a member", group.owner),
                });
            }
            if let Some(n) = group
                .group_id
                .strip_prefix("mg-")
                .and_then(|s| s.parse::<u64>().ok())
            {
                store.next_id = store.next_id.max(n + 1);
            }
            store.groups.insert(group.group_id.clone(), group);
        }
        Ok(store)
    }
}
