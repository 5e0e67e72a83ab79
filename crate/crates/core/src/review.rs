//! Manual inspection of morph candidates: the pending → accepted/rejected
//! state machine over a split manifest, with an append-only audit log.
//!
//! Decisions are appended to the audit log before the manifest is
//! rewritten. Opening a store re-applies the log, so a crash between the two
//! writes is repaired on the next start.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{
    ArtifactReport, AttackEntry, AttackStatus, DatasetManifest, PipelineError, ReviewStamp, StatusCounts,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

impl Verdict {
    pub fn status(self) -> AttackStatus {
        match self {
            Verdict::Accepted => AttackStatus::Accepted,
            Verdict::Rejected => AttackStatus::Rejected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewDecision {
    pub attack_id: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub reason: Option<String>,
    pub reviewer: String,
    /// UTC seconds.
    pub timestamp: u64,
}

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown attack id {0:?}")]
    UnknownAttackId(String),
    #[error("attack {attack_id} is {from:?} and cannot become {to:?}")]
    InvalidTransition {
        attack_id: String,
        from: AttackStatus,
        to: Verdict,
    },
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("audit log {path}:{line}: {source}")]
    Audit {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Result of a submission.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubmitOutcome {
    Applied,
    /// Same verdict as already recorded; nothing was written.
    Unchanged,
}

/// A candidate as shown to the reviewer, with URLs for the morph and both
/// source images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub attack_id: String,
    pub status: AttackStatus,
    pub pair_id: String,
    pub key_id: String,
    pub partner_id: String,
    pub warp: f64,
    pub morph_url: String,
    pub source_a_url: String,
    pub source_b_url: String,
    pub auto_check: Option<ArtifactReport>,
    pub reject_reason: Option<String>,
    pub review: Option<ReviewStamp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePage {
    pub status: Option<AttackStatus>,
    /// 1-based.
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub total_pages: usize,
    pub items: Vec<Candidate>,
}

pub fn image_url(id: &str) -> String {
    format!("/image/{id}")
}

/// Candidates with `status` (all when `None`) in manifest order, cut into
/// pages of `page_size`.
pub fn review_list(manifest: &DatasetManifest, status: Option<AttackStatus>, page: usize, page_size: usize) -> CandidatePage {
    let page = page.max(1);
    let page_size = page_size.max(1);
    let matching: Vec<&AttackEntry> = manifest
        .attacks
        .iter()
        .filter(|a| status.map_or(true, |s| a.status == s))
        .collect();
    let total = matching.len();
    let items = matching
        .into_iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .map(|a| {
            let pair = manifest.pair_of(a);
            Candidate {
                attack_id: a.attack_id.clone(),
                status: a.status,
                pair_id: pair.pair_id.clone(),
                key_id: pair.key_id.clone(),
                partner_id: pair.partner_id.clone(),
                warp: pair.warp,
                morph_url: image_url(&a.attack_id),
                source_a_url: image_url(&pair.key_id),
                source_b_url: image_url(&pair.partner_id),
                auto_check: a.auto_check.clone(),
                reject_reason: a.reject_reason.clone(),
                review: a.review.clone(),
            }
        })
        .collect();
    CandidatePage {
        status,
        page,
        page_size,
        total,
        total_pages: total.div_ceil(page_size),
        items,
    }
}

/// Applies one decision in memory.
pub fn apply_decision(manifest: &mut DatasetManifest, d: &ReviewDecision) -> Result<SubmitOutcome, ReviewError> {
    if d.reviewer.trim().is_empty() {
        return Err(ReviewError::InvalidDecision("reviewer must not be empty".into()));
    }
    let entry = manifest
        .attack_mut(&d.attack_id)
        .ok_or_else(|| ReviewError::UnknownAttackId(d.attack_id.clone()))?;
    match entry.status {
        AttackStatus::Pending => {
            entry.status = d.verdict.status();
            entry.reject_reason = match d.verdict {
                Verdict::Rejected => Some(d.reason.clone().unwrap_or_else(|| "manual review".into())),
                Verdict::Accepted => None,
            };
            entry.review = Some(ReviewStamp {
                reviewer: d.reviewer.clone(),
                timestamp: d.timestamp,
            });
            Ok(SubmitOutcome::Applied)
        }
        s if s == d.verdict.status() => Ok(SubmitOutcome::Unchanged),
        from => Err(ReviewError::InvalidTransition {
            attack_id: d.attack_id.clone(),
            from,
            to: d.verdict,
        }),
    }
}

/// Copy of `manifest` with every manual decision undone.
pub fn reset_reviews(manifest: &DatasetManifest) -> DatasetManifest {
    let mut m = manifest.clone();
    for a in &mut m.attacks {
        if matches!(a.status, AttackStatus::Accepted | AttackStatus::Rejected) {
            a.status = AttackStatus::Pending;
            a.reject_reason = None;
            a.review = None;
        }
    }
    m
}

/// Applies logged decisions in order on top of `base`. Idempotent repeats
/// are skipped; conflicting entries are errors.
pub fn replay_audit(base: &DatasetManifest, log: &[ReviewDecision]) -> Result<DatasetManifest, ReviewError> {
    let mut m = base.clone();
    for d in log {
        apply_decision(&mut m, d)?;
    }
    Ok(m)
}

pub fn read_audit_log(path: impl AsRef<Path>) -> Result<Vec<ReviewDecision>, ReviewError> {
    let path = path.as_ref();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(ReviewError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| ReviewError::Audit {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })
        })
        .collect()
}

/// Default audit log location: `<manifest stem>.audit.jsonl` next to the
/// manifest.
pub fn default_audit_path(manifest_path: &Path) -> PathBuf {
    let stem = manifest_path.file_stem().unwrap_or_default().to_string_lossy();
    manifest_path.with_file_name(format!("{stem}.audit.jsonl"))
}

/// Single writer over one manifest file and its audit log.
#[derive(Debug)]
pub struct ReviewStore {
    manifest_path: PathBuf,
    audit_path: PathBuf,
    manifest: DatasetManifest,
}

impl ReviewStore {
    pub fn open(manifest_path: impl Into<PathBuf>) -> Result<Self, ReviewError> {
        let manifest_path = manifest_path.into();
        let audit_path = default_audit_path(&manifest_path);
        Self::open_with_audit(manifest_path, audit_path)
    }

    pub fn open_with_audit(manifest_path: impl Into<PathBuf>, audit_path: impl Into<PathBuf>) -> Result<Self, ReviewError> {
        let manifest_path = manifest_path.into();
        let audit_path = audit_path.into();
        let mut manifest = DatasetManifest::load(&manifest_path)?;
        let mut recovered = 0;
        for d in read_audit_log(&audit_path)? {
            if apply_decision(&mut manifest, &d)? == SubmitOutcome::Applied {
                recovered += 1;
            }
        }
        if recovered > 0 {
            log::warn!("re-applied {recovered} logged decision(s) missing from {}", manifest_path.display());
            manifest.save_atomic(&manifest_path)?;
        }
        Ok(Self {
            manifest_path,
            audit_path,
            manifest,
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    pub fn audit_path(&self) -> &Path {
        &self.audit_path
    }

    pub fn summary(&self) -> StatusCounts {
        self.manifest.status_counts()
    }

    pub fn list(&self, status: Option<AttackStatus>, page: usize, page_size: usize) -> CandidatePage {
        review_list(&self.manifest, status, page, page_size)
    }

    /// Validates and applies `decision`, appends it to the audit log and
    /// atomically rewrites the manifest. Identical repeats write nothing.
    pub fn submit(&mut self, decision: &ReviewDecision) -> Result<(AttackEntry, SubmitOutcome), ReviewError> {
        let mut next = self.manifest.clone();
        let outcome = apply_decision(&mut next, decision)?;
        if outcome == SubmitOutcome::Applied {
            self.append_audit(decision)?;
            next.save_atomic(&self.manifest_path)?;
            self.manifest = next;
        }
        let entry = self.manifest.attack(&decision.attack_id).cloned().expect("attack exists");
        Ok((entry, outcome))
    }

    fn append_audit(&self, decision: &ReviewDecision) -> Result<(), ReviewError> {
        let io = |source| ReviewError::Io {
            path: self.audit_path.clone(),
            source,
        };
        let mut line = serde_json::to_string(decision).expect("decision serializes");
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.audit_path).map_err(io)?;
        f.write_all(line.as_bytes()).map_err(io)?;
        f.sync_data().map_err(io)
    }
}
