//! Dataset ingestion: ratings CSV, emotion-label CSV, and the join that
//! turns them into profiles.
//!
//! A dataset is built from two files. The ratings file is the usual
//! MovieLens layout (`userId,movieId,rating,timestamp`). The emotion-label
//! file carries one row per movie with a mood label and seven raw emotion
//! weights; rows are l1-normalized into item vectors at load time. Joining
//! the two on movie id produces the immutable [`Dataset`]: ratings whose
//! movie has no emotion label are dropped (and counted), every surviving
//! movie becomes an [`ItemProfile`], and every user with at least one
//! surviving rating gets a [`UserProfile`] averaged over their watch
//! history in file order.

mod dataset;
mod synth;

pub use dataset::{Dataset, DatasetExport, DatasetStats, ItemExport, UserExport, UserRecord, WatchEvent};
pub use synth::synth_dataset;

use crate::affect::{AffectError, EmotionLabel, EmotionVector, EMOTION_DIM};
use crate::profile::ItemProfile;
use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Errors from loading and joining dataset files.
#[derive(Debug, Error)]
pub enum IngestError {
    /// The input file does not exist.
    #[error("file not found: {path}")]
    FileNotFound { path: PathBuf },
    /// Any other I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// A row (or the header) could not be parsed.
    #[error("parse error at line {line}: {message}")]
    ParseError { line: u64, message: String },
    /// The same (user, movie) pair appeared twice in a ratings file.
    #[error("duplicate rating for user {user_id}, movie {movie_id} at line {line}")]
    DuplicateRating {
        line: u64,
        user_id: u64,
        movie_id: u64,
    },
    /// An emotion weight was negative.
    #[error("negative {label} value {value} at line {line}")]
    NegativeEmotion {
        line: u64,
        label: EmotionLabel,
        value: f64,
    },
    /// The join produced no ratings at all.
    #[error("no ratings survive the join with the emotion labels")]
    EmptyJoin,
    /// The item has no vote count to normalize by.
    #[error("item {item_id} has no vote count")]
    MissingVoteCount { item_id: u64 },
    /// Invalid vector arithmetic on ingested data.
    #[error(transparent)]
    Affect(#[from] AffectError),
}

impl IngestError {
    /// Stable machine-readable name of the error variant.
    pub fn name(&self) -> &'static str {
        match self {
            IngestError::FileNotFound { .. } => "FileNotFound",
            IngestError::Io { .. } => "Io",
            IngestError::ParseError { .. } => "ParseError",
            IngestError::DuplicateRating { .. } => "DuplicateRating",
            IngestError::NegativeEmotion { .. } => "NegativeEmotion",
            IngestError::EmptyJoin => "EmptyJoin",
            IngestError::MissingVoteCount { .. } => "MissingVoteCount",
            IngestError::Affect(e) => e.name(),
        }
    }
}

/// One row of a ratings file.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user_id: u64,
    pub movie_id: u64,
    /// Star rating in [0.5, 5.0], half-star steps.
    pub rating: f64,
    /// Seconds since the epoch; preserved but unused by any algorithm.
    pub timestamp: i64,
}

/// One row of an emotion-label file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionRecord {
    pub tmdb_id: u64,
    pub movie_id: u64,
    pub imdb_id: Option<u64>,
    /// The mood printed in the file. May disagree with the vector's argmax
    /// (published rounding can flip near-ties); see
    /// [`EmotionLabelFile::mood_mismatches`].
    pub mood: EmotionLabel,
    /// The seven emotion weights, l1-normalized.
    pub mvec: EmotionVector,
}

/// A parsed emotion-label file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionLabelFile {
    pub records: Vec<EmotionRecord>,
    /// Rows whose printed mood differs from the vector's dominant mood.
    /// Tolerated, since rounded published weights can flip near-ties.
    pub mood_mismatches: u64,
}

const RATINGS_HEADER: [&str; 4] = ["userId", "movieId", "rating", "timestamp"];
const EMOTION_HEADER: [&str; 11] = [
    "tid", "mid", "iid", "mood", "neutral", "happy", "sad", "hate", "anger", "disgust",
    "surprise",
];

fn open_csv(path: &Path) -> Result<csv::Reader<File>, IngestError> {
    let file = File::open(path).map_err(|source| {
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
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error_line(err: &csv::Error) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_error(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::ParseError {
        line,
        message: message.into(),
    }
}

fn field<'a>(record: &'a csv::StringRecord, index: usize, name: &str) -> Result<&'a str, IngestError> {
    record
        .get(index)
        .map(str::trim)
        .ok_or_else(|| parse_error(record_line(record), format!("missing {name} column")))
}

fn parse_u64(record: &csv::StringRecord, index: usize, name: &str) -> Result<u64, IngestError> {
    let raw = field(record, index, name)?;
    raw.parse::<u64>()
        .map_err(|_| parse_error(record_line(record), format!("invalid {name}: {raw:?}")))
}

fn parse_f64(record: &csv::StringRecord, index: usize, name: &str) -> Result<f64, IngestError> {
    let raw = field(record, index, name)?;
    raw.parse::<f64>()
        .map_err(|_| parse_error(record_line(record), format!("invalid {name}: {raw:?}")))
}

/// Load a MovieLens-style ratings file.
///
/// Expects the exact header `userId,movieId,rating,timestamp`. Row order is
/// preserved. Ratings must lie in [0.5, 5.0] on half-star steps, and a
/// (user, movie) pair may appear at most once.
pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>, IngestError> {
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(1, format!("unreadable header: {e}")))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != RATINGS_HEADER {
        return Err(parse_error(
            1,
            format!("expected header {RATINGS_HEADER:?}, found {names:?}"),
        ));
    }

    let mut rows = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    for result in reader.records() {
        let record = result.map_err(|e| parse_error(csv_error_line(&e), e.to_string()))?;
        let line = record_line(&record);
        let user_id = parse_u64(&record, 0, "userId")?;
        let movie_id = parse_u64(&record, 1, "movieId")?;
        let rating = parse_f64(&record, 2, "rating")?;
        let timestamp = {
            let raw = field(&record, 3, "timestamp")?;
            raw.parse::<i64>()
                .map_err(|_| parse_error(line, format!("invalid timestamp: {raw:?}")))?
        };
        let doubled = rating * 2.0;
        if !(1.0..=10.0).contains(&doubled) || doubled.fract() != 0.0 {
            return Err(parse_error(
                line,
                format!("rating {rating} outside the half-star scale [0.5, 5.0]"),
            ));
        }
        if !seen.insert((user_id, movie_id)) {
            return Err(IngestError::DuplicateRating {
                line,
                user_id,
                movie_id,
            });
        }
        rows.push(RatingRecord {
            user_id,
            movie_id,
            rating,
            timestamp,
        });
    }
    Ok(rows)
}

/// Load an emotion-label file.
///
/// Expects the columns `tid,mid,iid,mood,neutral,happy,sad,hate,anger,
/// disgust,surprise`; a leading unnamed index column is tolerated and
/// ignored. Emotion weights are validated non-negative and l1-normalized
/// into each record's vector. A mood column that disagrees with the
/// vector's dominant mood is accepted and counted, not rejected.
pub fn load_emotion_labels(path: &Path) -> Result<EmotionLabelFile, IngestError> {
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(1, format!("unreadable header: {e}")))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let offset = if names.first() == Some(&"") { 1 } else { 0 };
    if names.len() < offset + EMOTION_HEADER.len()
        || names[offset..offset + EMOTION_HEADER.len()] != EMOTION_HEADER
    {
        return Err(parse_error(
            1,
            format!("expected columns {EMOTION_HEADER:?} (optionally after an index column), found {names:?}"),
        ));
    }

    let mut records = Vec::new();
    let mut mood_mismatches = 0u64;
    let mut seen_movies: HashSet<u64> = HashSet::new();
    for result in reader.records() {
        let record = result.map_err(|e| parse_error(csv_error_line(&e), e.to_string()))?;
        let line = record_line(&record);
        let tmdb_id = parse_u64(&record, offset, "tid")?;
        let movie_id = parse_u64(&record, offset + 1, "mid")?;
        let imdb_raw = field(&record, offset + 2, "iid")?;
        let imdb_id = if imdb_raw.is_empty() {
            None
        } else {
            Some(imdb_raw.parse::<u64>().map_err(|_| {
                parse_error(line, format!("invalid iid: {imdb_raw:?}"))
            })?)
        };
        let mood_raw = field(&record, offset + 3, "mood")?;
        let mood = EmotionLabel::parse(mood_raw)
            .ok_or_else(|| parse_error(line, format!("unknown mood: {mood_raw:?}")))?;

        let mut raw = [0.0f64; EMOTION_DIM];
        for label in EmotionLabel::ALL {
            let i = label.index();
            let value = parse_f64(&record, offset + 4 + i, EMOTION_HEADER[4 + i])?;
            if !value.is_finite() {
                return Err(parse_error(line, format!("non-finite {label} value")));
            }
            if value < 0.0 {
                return Err(IngestError::NegativeEmotion { line, label, value });
            }
            raw[i] = value;
        }
        let mvec = EmotionVector::l1_normalize(raw)
            .map_err(|_| parse_error(line, "emotion weights sum to zero"))?;

        if !seen_movies.insert(movie_id) {
            return Err(parse_error(line, format!("duplicate movie id {movie_id}")));
        }
        if mvec.dominant_mood() != mood {
            mood_mismatches += 1;
        }
        records.push(EmotionRecord {
            tmdb_id,
            movie_id,
            imdb_id,
            mood,
            mvec,
        });
    }
    Ok(EmotionLabelFile {
        records,
        mood_mismatches,
    })
}

/// The emotion vector of the group of users who rated an item.
///
/// An item's stored vector is the per-rater average scaled into a
/// distribution, so dividing its affect mass by the vote count and
/// re-normalizing recovers the rater group's profile. On an
/// already-normalized vector this is numerically the identity; the
/// operation exists as the explicit boundary for treating an item as a
/// stand-in for its raters, and fails when no vote count is recorded.
pub fn normalize_group_mvec(item: &ItemProfile) -> Result<EmotionVector, IngestError> {
    let vote_count = item.vote_count().ok_or(IngestError::MissingVoteCount {
        item_id: item.item_id(),
    })?;
    let mut per_rater = [0.0f64; EMOTION_DIM];
    for i in 0..EMOTION_DIM {
        per_rater[i] = item.mvec().components()[i] / vote_count as f64;
    }
    Ok(EmotionVector::l1_normalize(per_rater)?)
}

/// Join ratings with emotion labels and build all profiles.
///
/// Inner join on movie id: ratings for unlabeled movies are dropped and
/// counted, users left with no surviving ratings are omitted and counted,
/// and labeled movies with no surviving ratings do not become items. Each
/// item's vote count is the number of surviving ratings it received; each
/// user's vector is the mean of their watched items' vectors in file
/// order.
pub fn merge(
    ratings: Vec<RatingRecord>,
    labels: Vec<EmotionRecord>,
    dataset_id: &str,
) -> Result<Dataset, IngestError> {
    Dataset::from_join(ratings, labels, dataset_id)
}
