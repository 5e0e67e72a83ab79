//! Detector evaluation: APCER, BPCER, EER, BPCER at fixed APCER and ROC
//! data.
//!
//! Scores are oriented so that higher means more attack-like, and a sample
//! is classified as an attack when `score >= threshold`. Thresholds are swept
//! over every distinct score plus the two infinite sentinels, so every rate
//! is exact on the data.

mod report;
mod scores;

use std::path::PathBuf;

use thiserror::Error;

pub use self::report::{roc_auc, write_roc_csv, MadReport, OperatingPoint, RocPoint, APCER_TARGETS, REPORT_SCHEMA};
pub use self::scores::{read_scores_csv, write_scores_csv, Label, Polarity, ScoreEntry, ScoreSet};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("score set has no attack samples")]
    NoAttackSamples,
    #[error("score set has no bona fide samples")]
    NoBonafideSamples,
    #[error("score for {sample_id:?} is not finite")]
    NonFiniteScore { sample_id: String },
    #[error("APCER target {0} is outside (0, 100)")]
    InvalidTarget(f64),
    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Scores of both classes, each sorted ascending, ready for rate queries.
#[derive(Clone, Debug)]
pub struct Sweep {
    attack: Vec<f64>,
    bonafide: Vec<f64>,
}

impl Sweep {
    pub fn new(scores: &ScoreSet) -> Result<Self, MetricsError> {
        let mut attack = Vec::new();
        let mut bonafide = Vec::new();
        for e in &scores.entries {
            if !e.score.is_finite() {
                return Err(MetricsError::NonFiniteScore {
                    sample_id: e.sample_id.clone(),
                });
            }
            match e.label {
                Label::Attack => attack.push(e.score),
                Label::Bonafide => bonafide.push(e.score),
            }
        }
        if attack.is_empty() {
            return Err(MetricsError::NoAttackSamples);
        }
        if bonafide.is_empty() {
            return Err(MetricsError::NoBonafideSamples);
        }
        attack.sort_by(f64::total_cmp);
        bonafide.sort_by(f64::total_cmp);
        Ok(Self { attack, bonafide })
    }

    pub fn n_attack(&self) -> usize {
        self.attack.len()
    }

    pub fn n_bonafide(&self) -> usize {
        self.bonafide.len()
    }

    /// Percentage of attacks scored below `threshold`.
    pub fn apcer(&self, threshold: f64) -> f64 {
        let missed = self.attack.partition_point(|&s| s < threshold);
        100.0 * missed as f64 / self.attack.len() as f64
    }

    /// Percentage of bona fide samples scored at or above `threshold`.
    pub fn bpcer(&self, threshold: f64) -> f64 {
        let flagged = self.bonafide.len() - self.bonafide.partition_point(|&s| s < threshold);
        100.0 * flagged as f64 / self.bonafide.len() as f64
    }

    /// `-inf`, every distinct score ascending, `+inf`.
    pub fn thresholds(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.attack.iter().chain(&self.bonafide).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let mut out = Vec::with_capacity(all.len() + 2);
        out.push(f64::NEG_INFINITY);
        out.extend(all);
        out.push(f64::INFINITY);
        out
    }

    /// `(threshold, apcer, bpcer)` for every threshold in the sweep.
    pub fn operating_points(&self) -> Vec<(f64, f64, f64)> {
        self.thresholds()
            .into_iter()
            .map(|t| (t, self.apcer(t), self.bpcer(t)))
            .collect()
    }

    /// `(rate, threshold)` where |APCER - BPCER| is smallest; the lowest
    /// such threshold wins ties and the rate is the midpoint of the two.
    pub fn eer(&self) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, f64::NEG_INFINITY);
        for (t, a, b) in self.operating_points() {
            let gap = (a - b).abs();
            if gap < best.0 {
                best = (gap, 0.5 * (a + b), t);
            }
        }
        (best.1, best.2)
    }

    /// BPCER at the highest threshold whose APCER stays within `target`.
    pub fn bpcer_at_apcer(&self, target: f64) -> Result<OperatingPoint, MetricsError> {
        if !(target > 0.0 && target < 100.0) {
            return Err(MetricsError::InvalidTarget(target));
        }
        // APCER is non-decreasing in the threshold and 0 at -inf
        let (threshold, apcer, bpcer) = self
            .operating_points()
            .into_iter()
            .take_while(|&(_, a, _)| a <= target)
            .last()
            .unwrap_or((f64::NEG_INFINITY, 0.0, 100.0));
        Ok(OperatingPoint {
            target_apcer: target,
            apcer,
            bpcer,
            threshold,
            saturated: target < 100.0 / self.attack.len() as f64,
        })
    }

    /// `(APCER, 100 - BPCER)` for every threshold, from `(0, 0)` at `-inf`
    /// to `(100, 100)` at `+inf`.
    pub fn roc(&self) -> Vec<RocPoint> {
        self.operating_points()
            .into_iter()
            .map(|(_, a, b)| RocPoint {
                apcer: a,
                one_minus_bpcer: 100.0 - b,
            })
            .collect()
    }
}

pub fn apcer(scores: &ScoreSet, threshold: f64) -> Result<f64, MetricsError> {
    if !scores.entries.iter().any(|e| e.label == Label::Attack) {
        return Err(MetricsError::NoAttackSamples);
    }
    let attacks: Vec<f64> = scores.of(Label::Attack).collect();
    let missed = attacks.iter().filter(|&&s| s < threshold).count();
    Ok(100.0 * missed as f64 / attacks.len() as f64)
}

pub fn bpcer(scores: &ScoreSet, threshold: f64) -> Result<f64, MetricsError> {
    if !scores.entries.iter().any(|e| e.label == Label::Bonafide) {
        return Err(MetricsError::NoBonafideSamples);
    }
    let bonafide: Vec<f64> = scores.of(Label::Bonafide).collect();
    let flagged = bonafide.iter().filter(|&&s| s >= threshold).count();
    Ok(100.0 * flagged as f64 / bonafide.len() as f64)
}

pub fn eer(scores: &ScoreSet) -> Result<(f64, f64), MetricsError> {
    Ok(Sweep::new(scores)?.eer())
}

pub fn bpcer_at_apcer(scores: &ScoreSet, target_apcer: f64) -> Result<f64, MetricsError> {
    Ok(Sweep::new(scores)?.bpcer_at_apcer(target_apcer)?.bpcer)
}

pub fn roc(scores: &ScoreSet) -> Result<Vec<RocPoint>, MetricsError> {
    Ok(Sweep::new(scores)?.roc())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(raw: &[(Label, f64)]) -> ScoreSet {
        ScoreSet::from_pairs(raw.iter().copied())
    }

    use Label::{Attack as A, Bonafide as B};

    #[test]
    fn simple_rates() {
        assert_eq!(apcer(&set(&[(A, 0.9), (A, 0.8)]), 0.5).unwrap(), 0.0);
        assert_eq!(apcer(&set(&[(A, 0.9), (A, 0.1)]), 0.5).unwrap(), 50.0);
        assert_eq!(bpcer(&set(&[(B, 0.1), (B, 0.2)]), 0.5).unwrap(), 0.0);
        assert_eq!(bpcer(&set(&[(B, 0.6), (B, 0.2)]), 0.5).unwrap(), 50.0);
        assert!(matches!(apcer(&set(&[(B, 0.1)]), 0.5), Err(MetricsError::NoAttackSamples)));
        assert!(matches!(bpcer(&set(&[(A, 0.1)]), 0.5), Err(MetricsError::NoBonafideSamples)));
    }

    #[test]
    fn separated_set() {
        let s = set(&[(A, 0.9), (A, 0.8), (A, 0.7), (B, 0.3), (B, 0.2)]);
        let (rate, t) = eer(&s).unwrap();
        assert_eq!(rate, 0.0);
        assert_eq!(t, 0.7);
        for target in [0.1, 1.0, 10.0, 20.0, 50.0] {
            assert_eq!(bpcer_at_apcer(&s, target).unwrap(), 0.0);
        }
        let curve = roc(&s).unwrap();
        assert!(curve.contains(&RocPoint {
            apcer: 0.0,
            one_minus_bpcer: 100.0
        }));
    }

    #[test]
    fn interleaved_four_entries() {
        // thresholds -inf, .1, .2, .3, .4, +inf:
        // APCER 0, 0, 0, 50, 50, 100; BPCER 100, 100, 50, 50, 0, 0
        let s = set(&[(A, 0.4), (B, 0.3), (A, 0.2), (B, 0.1)]);
        assert_eq!(eer(&s).unwrap(), (50.0, 0.3));
    }

    #[test]
    fn empty_classes_are_errors() {
        assert!(matches!(eer(&set(&[(A, 1.0)])), Err(MetricsError::NoBonafideSamples)));
        assert!(matches!(roc(&set(&[(B, 1.0)])), Err(MetricsError::NoAttackSamples)));
        assert!(matches!(
            bpcer_at_apcer(&set(&[(A, 1.0), (B, 0.0)]), 100.0),
            Err(MetricsError::InvalidTarget(_))
        ));
    }

    #[test]
    fn saturation_flags_targets_below_resolution() {
        let s = set(&[(A, 0.9), (A, 0.4), (B, 0.5), (B, 0.1)]);
        let sw = Sweep::new(&s).unwrap();
        let p = sw.bpcer_at_apcer(1.0).unwrap();
        assert!(p.saturated);
        assert_eq!((p.threshold, p.apcer, p.bpcer), (0.4, 0.0, 50.0));
        assert!(!sw.bpcer_at_apcer(50.0).unwrap().saturated);
        assert_eq!(sw.bpcer_at_apcer(50.0).unwrap().bpcer, 0.0);
    }
}
