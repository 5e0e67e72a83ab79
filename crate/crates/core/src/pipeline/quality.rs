use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;

/// Face image quality score for one image; higher is better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityRecord {
    pub image_id: String,
    pub quality: f64,
}

impl QualityRecord {
    pub fn new(image_id: impl Into<String>, quality: f64) -> Self {
        Self {
            image_id: image_id.into(),
            quality,
        }
    }
}

/// Reads an `image_id,quality` CSV. The header line is required.
pub fn read_quality_csv(path: impl AsRef<Path>) -> Result<Vec<QualityRecord>, PipelineError> {
    let path = path.as_ref();
    let csv_err = |source| PipelineError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "quality"] {
        return Err(PipelineError::InvalidRecord {
            id: path.display().to_string(),
            reason: format!("expected header `image_id,quality`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row.map_err(csv_err)?);
    }
    Ok(out)
}

fn validate(records: &[QualityRecord]) -> Result<(), PipelineError> {
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        if !r.quality.is_finite() {
            return Err(PipelineError::InvalidRecord {
                id: r.image_id.clone(),
                reason: format!("non-finite quality {}", r.quality),
            });
        }
        if !seen.insert(r.image_id.as_str()) {
            return Err(PipelineError::InvalidRecord {
                id: r.image_id.clone(),
                reason: "duplicate image_id".into(),
            });
        }
    }
    Ok(())
}

/// The `keep` highest-quality ids, ordered by descending quality and then
/// ascending id.
pub fn filter_by_quality(records: &[QualityRecord], keep: usize) -> Result<Vec<String>, PipelineError> {
    if keep > records.len() {
        return Err(PipelineError::KeepExceedsInput {
            keep,
            available: records.len(),
        });
    }
    validate(records)?;
    let mut ranked: Vec<&QualityRecord> = records.iter().collect();
    ranked.sort_by(|a, b| match b.quality.total_cmp(&a.quality) {
        Ordering::Equal => a.image_id.cmp(&b.image_id),
        other => other,
    });
    Ok(ranked.into_iter().take(keep).map(|r| r.image_id.clone()).collect())
}
