//! The immutable merged store of ratings, items, and profiles.

use super::{EmotionRecord, IngestError, RatingRecord};
use crate::affect::EmotionVector;
use crate::profile::{ItemProfile, UserProfile};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Counts describing one ingested dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// Users with at least one rating that survived the join.
    pub n_users: u64,
    /// Distinct movies seen across the ratings file and the label file.
    pub n_movies: u64,
    /// Ratings that survived the join.
    pub n_ratings: u64,
    /// Movies carrying an emotion label.
    pub n_emotion_labeled: u64,
    /// Ratings dropped because their movie lacks an emotion label.
    pub n_ratings_dropped: u64,
    /// Users omitted because none of their ratings survived.
    pub n_users_dropped: u64,
}

/// One surviving rating in a user's watch history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatchEvent {
    pub movie_id: u64,
    pub rating: f64,
    pub timestamp: i64,
}

/// A user's profile together with the history it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    profile: UserProfile,
    watched: Vec<WatchEvent>,
}

impl UserRecord {
    pub fn profile(&self) -> &UserProfile {
        &self.profile
    }

    /// Surviving ratings in file order.
    pub fn watched(&self) -> &[WatchEvent] {
        &self.watched
    }

    /// This user's rating for a movie, if present.
    pub fn rating_of(&self, movie_id: u64) -> Option<f64> {
        self.watched
            .iter()
            .find(|w| w.movie_id == movie_id)
            .map(|w| w.rating)
    }
}

/// An immutable dataset: surviving ratings, item profiles, user profiles,
/// and the stats describing how it was assembled.
///
/// User ids are scoped to the dataset; the same numeric id in two datasets
/// is two unrelated people unless a cross-dataset match says otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dataset_id: String,
    ratings: Vec<RatingRecord>,
    items: BTreeMap<u64, ItemProfile>,
    users: BTreeMap<u64, UserRecord>,
    stats: DatasetStats,
}

impl Dataset {
    pub(super) fn from_join(
        ratings: Vec<RatingRecord>,
        labels: Vec<EmotionRecord>,
        dataset_id: &str,
    ) -> Result<Dataset, IngestError> {
        let labeled: BTreeMap<u64, &EmotionRecord> =
            labels.iter().map(|r| (r.movie_id, r)).collect();

        let mut movie_ids: BTreeSet<u64> = labeled.keys().copied().collect();
        let mut users_in: BTreeSet<u64> = BTreeSet::new();
        for r in &ratings {
            movie_ids.insert(r.movie_id);
            users_in.insert(r.user_id);
        }
        let n_ratings_in = ratings.len() as u64;

        let mut kept: Vec<RatingRecord> = Vec::with_capacity(ratings.len());
        let mut histories: BTreeMap<u64, Vec<WatchEvent>> = BTreeMap::new();
        let mut vote_counts: BTreeMap<u64, u64> = BTreeMap::new();
        for r in ratings {
            if !labeled.contains_key(&r.movie_id) {
                continue;
            }
            histories.entry(r.user_id).or_default().push(WatchEvent {
                movie_id: r.movie_id,
                rating: r.rating,
                timestamp: r.timestamp,
            });
            *vote_counts.entry(r.movie_id).or_insert(0) += 1;
            kept.push(r);
        }
        if kept.is_empty() {
            return Err(IngestError::EmptyJoin);
        }

        let mut items = BTreeMap::new();
        for (&movie_id, &count) in &vote_counts {
            let rec = labeled[&movie_id];
            let mut item = ItemProfile::new(movie_id, rec.mvec)
                .with_tmdb_id(rec.tmdb_id)
                .with_vote_count(count);
            if let Some(imdb_id) = rec.imdb_id {
                item = item.with_imdb_id(imdb_id);
            }
            items.insert(movie_id, item);
        }

        let mut users = BTreeMap::new();
        for (user_id, watched) in histories {
            let mvecs: Vec<EmotionVector> =
                watched.iter().map(|w| *items[&w.movie_id].mvec()).collect();
            let profile = UserProfile::from_watched(user_id, &mvecs);
            users.insert(user_id, UserRecord { profile, watched });
        }

        let stats = DatasetStats {
            n_users: users.len() as u64,
            n_movies: movie_ids.len() as u64,
            n_ratings: kept.len() as u64,
            n_emotion_labeled: labeled.len() as u64,
            n_ratings_dropped: n_ratings_in - kept.len() as u64,
            n_users_dropped: users_in.len() as u64 - users.len() as u64,
        };

        Ok(Dataset {
            dataset_id: dataset_id.to_string(),
            ratings: kept,
            items,
            users,
            stats,
        })
    }

    /// Build a dataset directly from finished profiles, bypassing file
    /// ingestion. Used for fixtures and for datasets published only as
    /// profile tables; such datasets carry no rating rows.
    pub fn from_profiles(
        dataset_id: &str,
        users: impl IntoIterator<Item = UserProfile>,
        items: impl IntoIterator<Item = ItemProfile>,
    ) -> Dataset {
        let users: BTreeMap<u64, UserRecord> = users
            .into_iter()
            .map(|profile| {
                (
                    profile.user_id(),
                    UserRecord {
                        profile,
                        watched: Vec::new(),
                    },
                )
            })
            .collect();
        let items: BTreeMap<u64, ItemProfile> =
            items.into_iter().map(|i| (i.item_id(), i)).collect();
        let stats = DatasetStats {
            n_users: users.len() as u64,
            n_movies: items.len() as u64,
            n_ratings: 0,
            n_emotion_labeled: items.len() as u64,
            n_ratings_dropped: 0,
            n_users_dropped: 0,
        };
        Dataset {
            dataset_id: dataset_id.to_string(),
            ratings: Vec::new(),
            items,
            users,
            stats,
        }
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn stats(&self) -> &DatasetStats {
        &self.stats
    }

    /// Surviving ratings in file order.
    pub fn ratings(&self) -> &[RatingRecord] {
        &self.ratings
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn user(&self, user_id: u64) -> Option<&UserRecord> {
        self.users.get(&user_id)
    }

    pub fn user_profile(&self, user_id: u64) -> Option<&UserProfile> {
        self.users.get(&user_id).map(UserRecord::profile)
    }

    /// All users in ascending id order.
    pub fn users(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values()
    }

    pub fn item(&self, movie_id: u64) -> Option<&ItemProfile> {
        self.items.get(&movie_id)
    }

    /// All items in ascending id order.
    pub fn items(&self) -> impl Iterator<Item = &ItemProfile> {
        self.items.values()
    }

    /// Rebuild a dataset from its export document. Watch histories are not
    /// part of the export, so per-rating queries on the result come back
    /// empty; profiles, items, and stats round-trip intact.
    pub fn from_export(export: DatasetExport) -> Dataset {
        let users = export
            .users
            .into_iter()
            .map(|u| UserProfile::from_summary(u.user_id, u.watch_count, u.uvec));
        let items = export.items.into_iter().map(|i| {
            let mut item = ItemProfile::new(i.movie_id, i.mvec);
            if let Some(tmdb_id) = i.tmdb_id {
                item = item.with_tmdb_id(tmdb_id);
            }
            if let Some(vote_count) = i.vote_count {
                item = item.with_vote_count(vote_count);
            }
            item
        });
        let mut dataset = Dataset::from_profiles(&export.dataset_id, users, items);
        dataset.stats = export.stats;
        dataset
    }

    /// Load a dataset from an export JSON file.
    pub fn read_json(path: &std::path::Path) -> Result<Dataset, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                IngestError::FileNotFound {
                    path: path.to_path_buf(),
                }
            } else {
                IngestError::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        let export: DatasetExport =
            serde_json::from_str(&text).map_err(|e| IngestError::ParseError {
                line: e.line() as u64,
                message: e.to_string(),
            })?;
        Ok(Dataset::from_export(export))
    }

    /// The export document for this dataset.
    pub fn export(&self) -> DatasetExport {
        DatasetExport {
            dataset_id: self.dataset_id.clone(),
            stats: self.stats,
            users: self
                .users
                .values()
                .map(|u| UserExport {
                    user_id: u.profile.user_id(),
                    watch_count: u.profile.watch_count(),
                    uvec: *u.profile.uvec(),
                })
                .collect(),
            items: self
                .items
                .values()
                .map(|i| ItemExport {
                    movie_id: i.item_id(),
                    tmdb_id: i.tmdb_id(),
                    mood: i.mood(),
                    mvec: *i.mvec(),
                    vote_count: i.vote_count(),
                })
                .collect(),
        }
    }
}

/// Serialized form of a dataset: stable key order, users and items sorted
/// by ascending id, vectors in canonical label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetExport {
    pub dataset_id: String,
    pub stats: DatasetStats,
    pub users: Vec<UserExport>,
    pub items: Vec<ItemExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserExport {
    pub user_id: u64,
    pub watch_count: u64,
    pub uvec: EmotionVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemExport {
    pub movie_id: u64,
    pub tmdb_id: Option<u64>,
    pub mood: crate::affect::EmotionLabel,
    pub mvec: EmotionVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vote_count: Option<u64>,
}

impl DatasetExport {
    /// Pretty-printed JSON with a trailing newline; byte-stable for a given
    /// dataset.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset export serializes");
        s.push('\n');
        s
    }
}
