//! Emotion vectors and the similarity measure everything else is built on.
//!
//! An [`EmotionVector`] holds seven non-negative weights, one per
//! [`EmotionLabel`], in a fixed component order. Similarity between two
//! vectors is their cosine, exposed as [`EmotionVector::aii`] (affective
//! interest indicator). Cosine is used rather than the raw inner product so
//! that the measure is invariant to how much total emotional mass a profile
//! has accumulated; profiles built from two ratings and from two thousand
//! are directly comparable.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Number of emotion components in every vector.
pub const EMOTION_DIM: usize = 7;

/// Errors from constructing or combining emotion vectors.
#[derive(Debug, Error, PartialEq)]
pub enum AffectError {
    /// A component was negative; emotion weights are magnitudes.
    #[error("component {index} ({label}) is negative: {value}")]
    NegativeComponent {
        index: usize,
        label: EmotionLabel,
        value: f64,
    },
    /// A component was NaN or infinite.
    #[error("component {index} ({label}) is not finite")]
    NotFinite { index: usize, label: EmotionLabel },
    /// The operation needs at least one non-zero component.
    #[error("emotion vector has zero magnitude")]
    ZeroVector,
    /// The operation needs at least one vector.
    #[error("empty vector list")]
    EmptyList,
}

impl AffectError {
    /// Stable machine-readable name of the error variant.
    pub fn name(&self) -> &'static str {
        match self {
            AffectError::NegativeComponent { .. } => "NegativeComponent",
            AffectError::NotFinite { .. } => "NotFinite",
            AffectError::ZeroVector => "ZeroVector",
            AffectError::EmptyList => "EmptyList",
        }
    }
}

/// The seven emotion categories, in canonical component order.
///
/// The discriminant of each label is its index into an [`EmotionVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmotionLabel {
    Neutral = 0,
    Happiness = 1,
    Sadness = 2,
    Hate = 3,
    Anger = 4,
    Disgust = 5,
    Surprise = 6,
}

impl EmotionLabel {
    /// All labels in component order.
    pub const ALL: [EmotionLabel; EMOTION_DIM] = [
        EmotionLabel::Neutral,
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
        EmotionLabel::Hate,
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Surprise,
    ];

    /// Index of this label in the component order.
    pub const fn index(self) -> usize {
        self as usize
    }

    /// Label at a component index, if in range.
    pub const fn from_index(index: usize) -> Option<EmotionLabel> {
        match index {
            0 => Some(EmotionLabel::Neutral),
            1 => Some(EmotionLabel::Happiness),
            2 => Some(EmotionLabel::Sadness),
            3 => Some(EmotionLabel::Hate),
            4 => Some(EmotionLabel::Anger),
            5 => Some(EmotionLabel::Disgust),
            6 => Some(EmotionLabel::Surprise),
            _ => None,
        }
    }

    /// Canonical lowercase name.
    pub const fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Happiness => "happiness",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Hate => "hate",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Surprise => "surprise",
        }
    }

    /// Parse a label name, case-insensitively. Accepts the canonical names
    /// plus the short forms used in label files (`happy`, `sad`).
    pub fn parse(s: &str) -> Option<EmotionLabel> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "neutral" => Some(EmotionLabel::Neutral),
            "happiness" | "happy" => Some(EmotionLabel::Happiness),
            "sadness" | "sad" => Some(EmotionLabel::Sadness),
            "hate" => Some(EmotionLabel::Hate),
            "anger" => Some(EmotionLabel::Anger),
            "disgust" => Some(EmotionLabel::Disgust),
            "surprise" => Some(EmotionLabel::Surprise),
            _ => None,
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::parse(s).ok_or_else(|| format!("unknown emotion label: {s:?}"))
    }
}

impl Serialize for EmotionLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EmotionLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        EmotionLabel::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown emotion label: {s:?}")))
    }
}

/// A seven-component emotion weighting.
///
/// Components are non-negative and finite; the all-zero vector is allowed
/// (it is the profile of a user who has watched nothing) but cannot take
/// part in similarity computations. Serialized as a plain seven-element
/// array in component order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; EMOTION_DIM]", into = "[f64; EMOTION_DIM]")]
pub struct EmotionVector([f64; EMOTION_DIM]);

impl EmotionVector {
    /// Build a vector from raw components, validating that each is finite
    /// and non-negative.
    pub fn new(components: [f64; EMOTION_DIM]) -> Result<EmotionVector, AffectError> {
        for (index, &value) in components.iter().enumerate() {
            let label = EmotionLabel::from_index(index).unwrap();
            if !value.is_finite() {
                return Err(AffectError::NotFinite { index, label });
            }
            if value < 0.0 {
                return Err(AffectError::NegativeComponent {
                    index,
                    label,
                    value,
                });
            }
        }
        Ok(EmotionVector(components))
    }

    /// Build a vector whose components sum to one by scaling raw weights.
    ///
    /// Fails with [`AffectError::ZeroVector`] when every weight is zero,
    /// since there is nothing to scale.
    pub fn l1_normalize(raw: [f64; EMOTION_DIM]) -> Result<EmotionVector, AffectError> {
        let v = EmotionVector::new(raw)?;
        let total = v.l1_sum();
        if total == 0.0 {
            return Err(AffectError::ZeroVector);
        }
        let mut scaled = [0.0; EMOTION_DIM];
        for i in 0..EMOTION_DIM {
            scaled[i] = raw[i] / total;
        }
        Ok(EmotionVector(scaled))
    }

    /// The all-zero vector: the profile of a user with no history.
    pub const fn zero() -> EmotionVector {
        EmotionVector([0.0; EMOTION_DIM])
    }

    /// Components in canonical order.
    pub fn components(&self) -> &[f64; EMOTION_DIM] {
        &self.0
    }

    /// Weight for one emotion.
    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.0[label.index()]
    }

    /// Sum of components. Equals the L1 norm since components are
    /// non-negative.
    pub fn l1_sum(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..EMOTION_DIM {
            total += self.0[i];
        }
        total
    }

    /// True when every component is zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Inner product with another vector: the unnormalized overlap of two
    /// emotion weightings.
    pub fn inner(&self, other: &EmotionVector) -> f64 {
        let mut total = 0.0;
        for i in 0..EMOTION_DIM {
            total += self.0[i] * other.0[i];
        }
        total
    }

    /// Affective interest indicator: cosine similarity with another vector.
    ///
    /// Defined as `inner(a, b) / (|a| * |b|)` with Euclidean magnitudes.
    /// Always within 1e-12 of `[0, 1]` for valid vectors, `1.0` within
    /// 1e-12 for a vector against itself, and exactly symmetric in its
    /// arguments (the floating expression is evaluated in the same order
    /// either way). Errors with [`AffectError::ZeroVector`] when either
    /// vector has zero magnitude.
    pub fn aii(&self, other: &EmotionVector) -> Result<f64, AffectError> {
        let norm_a = self.magnitude();
        let norm_b = other.magnitude();
        if norm_a == 0.0 || norm_b == 0.0 {
            return Err(AffectError::ZeroVector);
        }
        Ok(self.inner(other) / (norm_a * norm_b))
    }

    /// Euclidean magnitude.
    pub fn magnitude(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// The emotion with the largest weight; ties go to the earlier label in
    /// component order.
    pub fn dominant_mood(&self) -> EmotionLabel {
        let mut best = EmotionLabel::Neutral;
        let mut best_value = self.0[0];
        for label in EmotionLabel::ALL {
            let value = self.0[label.index()];
            if value > best_value {
                best = label;
                best_value = value;
            }
        }
        best
    }
}

impl TryFrom<[f64; EMOTION_DIM]> for EmotionVector {
    type Error = AffectError;

    fn try_from(components: [f64; EMOTION_DIM]) -> Result<Self, Self::Error> {
        EmotionVector::new(components)
    }
}

impl From<EmotionVector> for [f64; EMOTION_DIM] {
    fn from(v: EmotionVector) -> Self {
        v.0
    }
}

impl fmt::Display for EmotionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Componentwise arithmetic mean of a non-empty list of vectors.
///
/// Sums left to right in list order before dividing, so the result is
/// bit-identical to a profile built by repeated incremental updates over
/// the same vectors in the same order.
pub fn mean_profile(vectors: &[EmotionVector]) -> Result<EmotionVector, AffectError> {
    if vectors.is_empty() {
        return Err(AffectError::EmptyList);
    }
    let mut sum = [0.0; EMOTION_DIM];
    for v in vectors {
        for i in 0..EMOTION_DIM {
            sum[i] += v.0[i];
        }
    }
    let n = vectors.len() as f64;
    let mut mean = [0.0; EMOTION_DIM];
    for i in 0..EMOTION_DIM {
        mean[i] = sum[i] / n;
    }
    // Non-negative inputs keep the mean non-negative, so this cannot fail.
    EmotionVector::new(mean)
}

/// Componentwise mean computed directly from a sum array and a count.
///
/// Shared by [`mean_profile`] and the incremental profile update so both
/// paths produce bit-identical results from the same accumulated sum.
pub(crate) fn mean_from_sum(sum: &[f64; EMOTION_DIM], n: u64) -> EmotionVector {
    debug_assert!(n > 0);
    let denom = n as f64;
    let mut mean = [0.0; EMOTION_DIM];
    for i in 0..EMOTION_DIM {
        mean[i] = sum[i] / denom;
    }
    EmotionVector(mean)
}
