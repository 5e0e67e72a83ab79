use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricsError, ScoreSet, Sweep};

/// APCER operating points reported alongside the EER.
pub const APCER_TARGETS: [f64; 4] = [0.1, 1.0, 10.0, 20.0];

/// JSON schema for [`MadReport`].
pub const REPORT_SCHEMA: &str = include_str!("../../schemas/mad_report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub apcer: f64,
    pub one_minus_bpcer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub target_apcer: f64,
    pub bpcer: f64,
    /// APCER actually reached at `threshold`.
    pub apcer: f64,
    #[serde(with = "threshold_repr")]
    pub threshold: f64,
    /// The target is finer than one attack sample (`100 / n_attack`), so
    /// only zero-miss thresholds qualify.
    pub saturated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MadReport {
    pub n_attack: usize,
    pub n_bonafide: usize,
    pub eer: f64,
    #[serde(with = "threshold_repr")]
    pub eer_threshold: f64,
    pub bpcer_at_apcer: Vec<OperatingPoint>,
    pub roc_auc: f64,
    pub roc: Vec<RocPoint>,
}

impl MadReport {
    pub fn compute(scores: &ScoreSet) -> Result<Self, MetricsError> {
        let sweep = Sweep::new(scores)?;
        let (eer, eer_threshold) = sweep.eer();
        let bpcer_at_apcer = APCER_TARGETS
            .iter()
            .map(|&t| sweep.bpcer_at_apcer(t))
            .collect::<Result<_, _>>()?;
        let roc = sweep.roc();
        Ok(Self {
            n_attack: sweep.n_attack(),
            n_bonafide: sweep.n_bonafide(),
            eer,
            eer_threshold,
            bpcer_at_apcer,
            roc_auc: roc_auc(&roc),
            roc,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MetricsError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| MetricsError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Trapezoidal area under the curve, normalised to the unit square.
pub fn roc_auc(roc: &[RocPoint]) -> f64 {
    roc.windows(2)
        .map(|w| (w[1].apcer - w[0].apcer) * (w[0].one_minus_bpcer + w[1].one_minus_bpcer) * 0.5)
        .sum::<f64>()
        / 10_000.0
}

/// Two-column `apcer,one_minus_bpcer` CSV for plotting.
pub fn write_roc_csv(path: impl AsRef<Path>, roc: &[RocPoint]) -> Result<(), MetricsError> {
    let path = path.as_ref();
    let mut out = String::from("apcer,one_minus_bpcer\n");
    for p in roc {
        out.push_str(&format!("{:?},{:?}\n", p.apcer, p.one_minus_bpcer));
    }
    fs::write(path, out).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Infinite thresholds are written as the strings "inf" / "-inf".
mod threshold_repr {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if t.is_infinite() {
            s.serialize_str(if *t > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*t)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(D::Error::custom(format!("bad threshold {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Label;

    #[test]
    fn report_round_trips_through_json() {
        let s = ScoreSet::from_pairs([(Label::Bonafide, 0.9), (Label::Attack, 0.1)]);
        let mut r = MadReport::compute(&s).unwrap();
        // inverted detector: both rates reach 100 together at the top score
        assert_eq!((r.eer, r.eer_threshold), (100.0, 0.9));
        r.bpcer_at_apcer[0].threshold = f64::NEG_INFINITY;
        let json = r.to_json();
        assert!(json.contains("\"threshold\": \"-inf\""));
        let back: MadReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn auc_of_ideal_and_diagonal_curves() {
        let ideal = [
            RocPoint { apcer: 0.0, one_minus_bpcer: 0.0 },
            RocPoint { apcer: 0.0, one_minus_bpcer: 100.0 },
            RocPoint { apcer: 100.0, one_minus_bpcer: 100.0 },
        ];
        assert_eq!(roc_auc(&ideal), 1.0);
        let diag = [
            RocPoint { apcer: 0.0, one_minus_bpcer: 0.0 },
            RocPoint { apcer: 100.0, one_minus_bpcer: 100.0 },
        ];
        assert_eq!(roc_auc(&diag), 0.5);
    }
}
