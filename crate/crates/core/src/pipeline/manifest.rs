use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, ArtifactReport, ArtifactThresholds, MorphPair, PipelineError};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Eval => "eval",
        }
    }
}

/// Review state of a morph candidate. `Pending` moves to `Accepted` or
/// `Rejected` through manual review; `AutoRejected` is terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStatus {
    Pending,
    AutoRejected,
    Accepted,
    Rejected,
}

impl AttackStatus {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pending" => Some(Self::Pending),
            "auto_rejected" => Some(Self::AutoRejected),
            "accepted" => Some(Self::Accepted),
            "rejected" => Some(Self::Rejected),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewStamp {
    pub reviewer: String,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackEntry {
    pub attack_id: String,
    pub pair_id: String,
    pub pair_index: usize,
    /// Morph image, relative to the manifest directory.
    pub image: String,
    /// Morph landmarks, relative to the manifest directory.
    pub landmarks: String,
    pub status: AttackStatus,
    #[serde(default)]
    pub reject_reason: Option<String>,
    #[serde(default)]
    pub auto_check: Option<ArtifactReport>,
    #[serde(default)]
    pub review: Option<ReviewStamp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestParams {
    pub keep: usize,
    pub n_keys: usize,
    pub partners_per_key: usize,
    pub blend: f64,
    pub augment_boundary: bool,
    pub artifacts: ArtifactThresholds,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub pending: usize,
    pub auto_rejected: usize,
    pub accepted: usize,
    pub rejected: usize,
}

impl StatusCounts {
    pub fn total(&self) -> usize {
        self.pending + self.auto_rejected + self.accepted + self.rejected
    }
}

/// Provenance record of one split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub split: Split,
    pub seed: u64,
    pub params: ManifestParams,
    pub source_images: String,
    pub source_landmarks: String,
    pub bonafide: Vec<String>,
    pub morph_pool: Vec<String>,
    pub pairs: Vec<MorphPair>,
    pub attacks: Vec<AttackEntry>,
}

impl DatasetManifest {
    pub fn status_counts(&self) -> StatusCounts {
        let mut c = StatusCounts::default();
        for a in &self.attacks {
            match a.status {
                AttackStatus::Pending => c.pending += 1,
                AttackStatus::AutoRejected => c.auto_rejected += 1,
                AttackStatus::Accepted => c.accepted += 1,
                AttackStatus::Rejected => c.rejected += 1,
            }
        }
        c
    }

    pub fn attack(&self, attack_id: &str) -> Option<&AttackEntry> {
        self.attacks.iter().find(|a| a.attack_id == attack_id)
    }

    pub fn attack_mut(&mut self, attack_id: &str) -> Option<&mut AttackEntry> {
        self.attacks.iter_mut().find(|a| a.attack_id == attack_id)
    }

    pub fn pair_of(&self, attack: &AttackEntry) -> &MorphPair {
        &self.pairs[attack.pair_index]
    }

    /// Every image id this manifest draws on (bona fide plus morph pool).
    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.bonafide.iter().chain(&self.morph_pool).map(String::as_str)
    }

    /// Structural invariants: disjoint bona fide / pool, pairs inside the
    /// pool, one attack per pair, consistent counts and states.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Inconsistent(msg));
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return bad(format!("unsupported schema version {}", self.schema_version));
        }
        let bf: HashSet<&str> = self.bonafide.iter().map(String::as_str).collect();
        let pool: HashSet<&str> = self.morph_pool.iter().map(String::as_str).collect();
        if bf.len() != self.bonafide.len() || pool.len() != self.morph_pool.len() {
            return bad("duplicate image id in bona fide set or morph pool".into());
        }
        if let Some(id) = bf.intersection(&pool).next() {
            return bad(format!("image {id} is both bona fide and in the morph pool"));
        }

        let expected = self.params.n_keys * self.params.partners_per_key;
        if self.pairs.len() != expected {
            return bad(format!("{} pairs, expected {expected}", self.pairs.len()));
        }
        let keys: HashSet<&str> = self.pairs.iter().map(|p| p.key_id.as_str()).collect();
        let mut pair_ids = HashSet::new();
        for p in &self.pairs {
            if p.key_id == p.partner_id {
                return bad(format!("pair {} morphs an image with itself", p.pair_id));
            }
            if !pool.contains(p.key_id.as_str()) || !pool.contains(p.partner_id.as_str()) {
                return bad(format!("pair {} uses an image outside the morph pool", p.pair_id));
            }
            if keys.contains(p.partner_id.as_str()) {
                return bad(format!("pair {} has a key image as partner", p.pair_id));
            }
            if !(0.0..=1.0).contains(&p.warp) {
                return bad(format!("pair {} warp {} outside [0, 1]", p.pair_id, p.warp));
            }
            if !pair_ids.insert(p.pair_id.as_str()) {
                return bad(format!("duplicate pair id {}", p.pair_id));
            }
        }

        if self.attacks.len() != self.pairs.len() {
            return bad(format!("{} attacks for {} pairs", self.attacks.len(), self.pairs.len()));
        }
        let mut used = vec![false; self.pairs.len()];
        let mut attack_ids = HashSet::new();
        for a in &self.attacks {
            let Some(pair) = self.pairs.get(a.pair_index) else {
                return bad(format!("attack {} references missing pair {}", a.attack_id, a.pair_index));
            };
            if pair.pair_id != a.pair_id {
                return bad(format!("attack {} pair id {} != {}", a.attack_id, a.pair_id, pair.pair_id));
            }
            if std::mem::replace(&mut used[a.pair_index], true) {
                return bad(format!("pair {} referenced by more than one attack", pair.pair_id));
            }
            if !attack_ids.insert(a.attack_id.as_str()) || pool.contains(a.attack_id.as_str()) || bf.contains(a.attack_id.as_str()) {
                return bad(format!("attack id {} is not unique", a.attack_id));
            }
            match a.status {
                AttackStatus::AutoRejected if a.reject_reason.is_none() => {
                    return bad(format!("auto-rejected attack {} has no reason", a.attack_id));
                }
                AttackStatus::Accepted | AttackStatus::Rejected if a.review.is_none() => {
                    return bad(format!("reviewed attack {} has no review stamp", a.attack_id));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline; field order is fixed by the
    /// struct layout.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|source| PipelineError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Validates, writes a sibling temp file, syncs it and renames it over
    /// `path`. Readers never observe a partial manifest.
    pub fn save_atomic(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        self.validate()?;
        write_atomic(path.as_ref(), self.to_json().as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_manifest() -> DatasetManifest {
        let pool: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
        let pairs: Vec<MorphPair> = ["p1", "p2", "p3"]
            .iter()
            .map(|&partner| MorphPair {
                pair_id: format!("p0+{partner}"),
                key_id: "p0".into(),
                partner_id: partner.into(),
                warp: 0.25,
                seed: 1,
            })
            .collect();
        let attacks = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| AttackEntry {
                attack_id: format!("train-ma-{i:05}"),
                pair_id: p.pair_id.clone(),
                pair_index: i,
                image: format!("morphs/train-ma-{i:05}.png"),
                landmarks: format!("morphs/train-ma-{i:05}.json"),
                status: AttackStatus::Pending,
                reject_reason: None,
                auto_check: None,
                review: None,
            })
            .collect();
        DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            split: Split::Train,
            seed: 3,
            params: ManifestParams {
                keep: 8,
                n_keys: 1,
                partners_per_key: 3,
                blend: 0.5,
                augment_boundary: true,
                artifacts: ArtifactThresholds::default(),
            },
            source_images: "images".into(),
            source_landmarks: "landmarks".into(),
            bonafide: (0..4).map(|i| format!("b{i}")).collect(),
            morph_pool: pool,
            pairs,
            attacks,
        }
    }

    #[test]
    fn sample_is_valid_and_round_trips() {
        let m = sample_manifest();
        m.validate().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save_atomic(&path).unwrap();
        assert_eq!(DatasetManifest::load(&path).unwrap(), m);
        assert!(!dir.path().join("m.json.tmp").exists());
    }

    #[test]
    fn overlap_between_bonafide_and_pool_is_caught() {
        let mut m = sample_manifest();
        m.bonafide.push("p3".into());
        assert!(matches!(m.validate(), Err(PipelineError::Inconsistent(_))));
    }

    #[test]
    fn attack_pair_mismatch_is_caught() {
        let mut m = sample_manifest();
        m.attacks[1].pair_index = 0;
        assert!(m.validate().is_err());
        let mut m = sample_manifest();
        m.attacks.pop();
        assert!(m.validate().is_err());
        let mut m = sample_manifest();
        m.attacks[0].status = AttackStatus::AutoRejected;
        assert!(m.validate().is_err());
    }

    #[test]
    fn invalid_manifest_is_not_written() {
        let mut m = sample_manifest();
        m.pairs[0].partner_id = "p0".into();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        assert!(m.save_atomic(&path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn counts() {
        let mut m = sample_manifest();
        m.attacks[0].status = AttackStatus::AutoRejected;
        let c = m.status_counts();
        assert_eq!((c.pending, c.auto_rejected, c.total()), (2, 1, 3));
    }
}
