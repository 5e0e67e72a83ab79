use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Attack,
    Bonafide,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Attack => "attack",
            Label::Bonafide => "bonafide",
        }
    }
}

/// Orientation of scores in an external file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Polarity {
    #[default]
    HigherAttack,
    LowerAttack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub sample_id: String,
    pub label: Label,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub entries: Vec<ScoreEntry>,
}

impl ScoreSet {
    pub fn new(entries: Vec<ScoreEntry>) -> Self {
        Self { entries }
    }

    /// Entries with generated ids `s00000`, `s00001`, ...
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, f64)>) -> Self {
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (label, score))| ScoreEntry {
                sample_id: format!("s{i:05}"),
                label,
                score,
            })
            .collect();
        Self { entries }
    }

    pub fn push(&mut self, sample_id: impl Into<String>, label: Label, score: f64) {
        self.entries.push(ScoreEntry {
            sample_id: sample_id.into(),
            label,
            score,
        });
    }

    pub fn of(&self, label: Label) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().filter(move |e| e.label == label).map(|e| e.score)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
struct Row {
    sample_id: String,
    label: String,
    score: String,
}

/// Reads `sample_id,label,score`. An optional first line
/// `# polarity=higher_attack|lower_attack` declares the score orientation;
/// lower-is-attack files are negated on load.
pub fn read_scores_csv(path: impl AsRef<Path>) -> Result<ScoreSet, MetricsError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, reason: String| MetricsError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let (polarity, body, offset) = match text.strip_prefix('#') {
        Some(rest) => {
            let (first, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let polarity = match first.trim().strip_prefix("polarity=").map(str::trim) {
                Some("higher_attack") => Polarity::HigherAttack,
                Some("lower_attack") => Polarity::LowerAttack,
                _ => return Err(parse_err(1, format!("unrecognised header comment {:?}", first.trim()))),
            };
            (polarity, body, 1)
        }
        None => (Polarity::HigherAttack, text.as_str(), 0),
    };

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|source| MetricsError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if headers.iter().collect::<Vec<_>>() != ["sample_id", "label", "score"] {
        return Err(parse_err(offset + 1, format!("expected header sample_id,label,score, got {headers:?}")));
    }

    let mut set = ScoreSet::default();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = offset + i + 2;
        let row = row.map_err(|source| MetricsError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let label = match row.label.as_str() {
            "attack" => Label::Attack,
            "bonafide" => Label::Bonafide,
            other => return Err(parse_err(line, format!("unknown label {other:?}"))),
        };
        let score: f64 = row
            .score
            .parse()
            .map_err(|_| parse_err(line, format!("bad score {:?}", row.score)))?;
        if !score.is_finite() {
            return Err(MetricsError::NonFiniteScore { sample_id: row.sample_id });
        }
        let score = match polarity {
            Polarity::HigherAttack => score,
            Polarity::LowerAttack => -score,
        };
        set.push(row.sample_id, label, score);
    }
    Ok(set)
}

/// Writes the set with a `higher_attack` polarity header. Scores are printed
/// with round-trip precision.
pub fn write_scores_csv(path: impl AsRef<Path>, scores: &ScoreSet) -> Result<(), MetricsError> {
    let path = path.as_ref();
    let mut out = String::from("# polarity=higher_attack\nsample_id,label,score\n");
    for e in &scores.entries {
        out.push_str(&format!("{},{},{:?}\n", e.sample_id, e.label.as_str(), e.score));
    }
    fs::write(path, out).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
