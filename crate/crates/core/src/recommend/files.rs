//! File formats for candidate pools and produced lists.

use super::{Candidate, RankedList, RecommendError};
use crate::ingest::Dataset;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

fn parse_error(line: u64, message: impl Into<String>) -> RecommendError {
    RecommendError::ParseError {
        line,
        message: message.into(),
    }
}

/// Read a candidate pool from CSV with columns `rank,item_id,title` and
/// join each row against the dataset's item vectors.
///
/// The rank column is kept as the display rank (the pool's native
/// ordering); the title may be empty. Rows referencing items absent from
/// the dataset are rejected, as are duplicate items.
pub fn read_candidates(path: &Path, dataset: &Dataset) -> Result<Vec<Candidate>, RecommendError> {
    let file = File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            RecommendError::FileNotFound {
                path: path.to_path_buf(),
            }
        } else {
            RecommendError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| parse_error(1, format!("unreadable header: {e}")))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["rank", "item_id", "title"] {
        return Err(parse_error(
            1,
            format!("expected header [\"rank\", \"item_id\", \"title\"], found {names:?}"),
        ));
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            parse_error(e.position().map(|p| p.line()).unwrap_or(0), e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let rank_raw = record.get(0).map(str::trim).unwrap_or_default();
        let display_rank = rank_raw
            .parse::<u32>()
            .map_err(|_| parse_error(line, format!("invalid rank: {rank_raw:?}")))?;
        let id_raw = record.get(1).map(str::trim).unwrap_or_default();
        let item_id = id_raw
            .parse::<u64>()
            .map_err(|_| parse_error(line, format!("invalid item_id: {id_raw:?}")))?;
        let title = match record.get(2).map(str::trim) {
            None | Some("") => None,
            Some(t) => Some(t.to_string()),
        };

        let item = dataset
            .item(item_id)
            .ok_or_else(|| RecommendError::UnknownItem {
                dataset_id: dataset.dataset_id().to_string(),
                item_id,
            })?;
        if candidates.iter().any(|c| c.item_id == item_id) {
            return Err(RecommendError::DuplicateCandidate { item_id });
        }
        candidates.push(Candidate {
            item_id,
            mvec: *item.mvec(),
            display_rank,
            title,
        });
    }
    Ok(candidates)
}

/// Write a ranked list as CSV with columns `rank,item_id,score,title`,
/// rank 1-based. Scores are printed with full round-trip precision.
pub fn write_ranked_csv<W: Write>(list: &RankedList, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "item_id", "score", "title"])
        .map_err(csv_io)?;
    for (index, entry) in list.entries.iter().enumerate() {
        w.write_record([
            (index + 1).to_string(),
            entry.item_id.to_string(),
            entry.score.to_string(),
            entry.title.clone().unwrap_or_default(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()
}

fn csv_io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

#[derive(Serialize)]
struct BroadcastGroupDoc<'a> {
    group_index: u32,
    lists: &'a BTreeMap<u64, RankedList>,
}

/// Write broadcast results as one JSON file per group, named
/// `ssg_<index>.json`, into a directory. Returns the paths written, in
/// group order.
pub fn write_broadcast_dir(
    results: &BTreeMap<u32, BTreeMap<u64, RankedList>>,
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(results.len());
    for (&group_index, lists) in results {
        let doc = BroadcastGroupDoc { group_index, lists };
        let mut text = serde_json::to_string_pretty(&doc).expect("broadcast doc serializes");
        text.push('\n');
        let path = dir.join(format!("ssg_{group_index}.json"));
        std::fs::write(&path, text)?;
        paths.push(path);
    }
    Ok(paths)
}
