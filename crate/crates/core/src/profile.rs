//! User and item profiles in emotion space.
//!
//! An [`ItemProfile`] carries a fixed emotion vector assigned at labeling
//! time; it never changes once constructed. A [`UserProfile`] is the running
//! mean of the emotion vectors of everything the user has watched, updated
//! one item at a time as history arrives.

use crate::affect::{mean_from_sum, EmotionLabel, EmotionVector, EMOTION_DIM};

/// An item (movie) with its fixed emotion vector.
///
/// The vector and the mood derived from it are immutable after
/// construction; re-labeling an item means building a new profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemProfile {
    item_id: u64,
    tmdb_id: Option<u64>,
    imdb_id: Option<u64>,
    mvec: EmotionVector,
    mood: EmotionLabel,
    vote_count: Option<u64>,
}

impl ItemProfile {
    /// Build an item profile. The mood is always derived from the vector,
    /// never stored independently.
    pub fn new(item_id: u64, mvec: EmotionVector) -> ItemProfile {
        ItemProfile {
            item_id,
            tmdb_id: None,
            imdb_id: None,
            mood: mvec.dominant_mood(),
            mvec,
            vote_count: None,
        }
    }

    /// Attach the item's id in the external movie database.
    pub fn with_tmdb_id(mut self, tmdb_id: u64) -> ItemProfile {
        self.tmdb_id = Some(tmdb_id);
        self
    }

    /// Attach the item's id in the film index.
    pub fn with_imdb_id(mut self, imdb_id: u64) -> ItemProfile {
        self.imdb_id = Some(imdb_id);
        self
    }

    /// Attach the number of ratings backing this item.
    pub fn with_vote_count(mut self, vote_count: u64) -> ItemProfile {
        self.vote_count = Some(vote_count);
        self
    }

    pub fn item_id(&self) -> u64 {
        self.item_id
    }

    pub fn tmdb_id(&self) -> Option<u64> {
        self.tmdb_id
    }

    pub fn imdb_id(&self) -> Option<u64> {
        self.imdb_id
    }

    /// The item's emotion vector.
    pub fn mvec(&self) -> &EmotionVector {
        &self.mvec
    }

    /// The item's dominant mood, i.e. `mvec().dominant_mood()`.
    pub fn mood(&self) -> EmotionLabel {
        self.mood
    }

    /// Number of ratings backing this item, when known.
    pub fn vote_count(&self) -> Option<u64> {
        self.vote_count
    }
}

/// A user's emotion profile: the mean of the emotion vectors of all watched
/// items, together with how many items went into it.
///
/// The profile keeps the raw componentwise sum internally, so updating one
/// item at a time and rebuilding from the full history produce bit-identical
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    user_id: u64,
    watch_count: u64,
    affect_sum: [f64; EMOTION_DIM],
    uvec: EmotionVector,
}

impl UserProfile {
    /// A profile with no history. Its vector is all zeros and cannot take
    /// part in similarity computations until at least one update.
    pub fn empty(user_id: u64) -> UserProfile {
        UserProfile {
            user_id,
            watch_count: 0,
            affect_sum: [0.0; EMOTION_DIM],
            uvec: EmotionVector::zero(),
        }
    }

    /// Build a profile directly from a watch history, in watch order.
    pub fn from_watched(user_id: u64, mvecs: &[EmotionVector]) -> UserProfile {
        let mut sum = [0.0; EMOTION_DIM];
        for mvec in mvecs {
            for i in 0..EMOTION_DIM {
                sum[i] += mvec.components()[i];
            }
        }
        let watch_count = mvecs.len() as u64;
        let uvec = if watch_count == 0 {
            EmotionVector::zero()
        } else {
            mean_from_sum(&sum, watch_count)
        };
        UserProfile {
            user_id,
            watch_count,
            affect_sum: sum,
            uvec,
        }
    }

    /// Rebuild a profile from its summarized form (id, count, and mean
    /// vector), as stored in dataset exports. The internal sum is
    /// reconstructed as `uvec * watch_count`; the mean itself is kept
    /// exactly as given, so exported vectors survive a round trip
    /// unchanged.
    pub fn from_summary(user_id: u64, watch_count: u64, uvec: EmotionVector) -> UserProfile {
        let mut sum = [0.0; EMOTION_DIM];
        for i in 0..EMOTION_DIM {
            sum[i] = uvec.components()[i] * watch_count as f64;
        }
        UserProfile {
            user_id,
            watch_count,
            affect_sum: sum,
            uvec,
        }
    }

    /// The profile after watching one more item.
    ///
    /// Returns a new profile; the original is untouched. The new vector is
    /// `(n * uvec + mvec) / (n + 1)` computed from the stored sum, so a
    /// chain of updates equals [`UserProfile::from_watched`] over the same
    /// items in the same order, bit for bit.
    pub fn update(&self, item: &ItemProfile) -> UserProfile {
        let mut sum = self.affect_sum;
        for i in 0..EMOTION_DIM {
            sum[i] += item.mvec().components()[i];
        }
        let watch_count = self.watch_count + 1;
        UserProfile {
            user_id: self.user_id,
            watch_count,
            affect_sum: sum,
            uvec: mean_from_sum(&sum, watch_count),
        }
    }

    pub fn user_id(&self) -> u64 {
        self.user_id
    }

    /// Number of items in the profile.
    pub fn watch_count(&self) -> u64 {
        self.watch_count
    }

    /// The user's emotion vector: the mean of all watched items' vectors.
    pub fn uvec(&self) -> &EmotionVector {
        &self.uvec
    }
}
