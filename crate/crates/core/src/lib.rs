//! Emotion-profile based recommendation.
//!
//! The library models users and items as points in a seven-dimensional
//! emotion space and derives everything else from one similarity measure,
//! the affective interest indicator (cosine similarity between two emotion
//! vectors). On top of that sit:
//!
//! - [`affect`]: the vector type, similarity math, and mood classification
//! - [`profile`]: user and item profiles with incremental profile updates
//! - [`ingest`]: CSV ingestion of ratings and emotion labels, dataset
//!   assembly, stats, and synthetic dataset generation
//! - [`association`]: cross-dataset matching of users and items by profile
//!   similarity
//! - [`grouping`]: similarity-seeded broadcast groups and user-managed
//!   groups, plus representative-member selection
//! - [`recommend`]: candidate reranking for individuals and groups, group
//!   rating aggregation, and file formats for lists

pub mod affect;
pub mod association;
pub mod grouping;
pub mod ingest;
pub mod profile;
pub mod recommend;
