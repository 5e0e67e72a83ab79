//! Counting-loop references for the error rates.

use morphforge::metrics::{Label, ScoreSet};
use rand::Rng;

pub fn count_apcer(s: &ScoreSet, t: f64) -> f64 {
    let (mut miss, mut n) = (0usize, 0usize);
    for e in &s.entries {
        if e.label == Label::Attack {
            n += 1;
            if e.score < t {
                miss += 1;
            }
        }
    }
    100.0 * miss as f64 / n as f64
}

pub fn count_bpcer(s: &ScoreSet, t: f64) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for e in &s.entries {
        if e.label == Label::Bonafide {
            n += 1;
            if e.score >= t {
                hit += 1;
            }
        }
    }
    100.0 * hit as f64 / n as f64
}

pub fn candidate_thresholds(s: &ScoreSet) -> Vec<f64> {
    let mut t: Vec<f64> = s.entries.iter().map(|e| e.score).collect();
    t.push(f64::NEG_INFINITY);
    t.push(f64::INFINITY);
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup();
    t
}

pub fn oracle_eer(s: &ScoreSet) -> (f64, f64) {
    let mut best: Option<(f64, f64, f64)> = None;
    for t in candidate_thresholds(s) {
        let (a, b) = (count_apcer(s, t), count_bpcer(s, t));
        let gap = (a - b).abs();
        match best {
            Some((g, _, _)) if gap >= g => {}
            _ => best = Some((gap, (a + b) / 2.0, t)),
        }
    }
    let (_, rate, t) = best.unwrap();
    (rate, t)
}

pub fn oracle_bpcer_at(s: &ScoreSet, target: f64) -> f64 {
    let mut chosen = f64::NEG_INFINITY;
    for t in candidate_thresholds(s) {
        if count_apcer(s, t) <= target && t > chosen {
            chosen = t;
        }
    }
    count_bpcer(s, chosen)
}

/// Scores on a coarse grid so that ties between and within classes occur.
pub fn random_set(rng: &mut impl Rng, n: usize, separation: f64) -> ScoreSet {
    ScoreSet::from_pairs((0..n).map(|_| {
        let attack = rng.gen_bool(0.5);
        let base: f64 = rng.gen_range(0.0..1.0) + if attack { separation } else { 0.0 };
        let label = if attack { Label::Attack } else { Label::Bonafide };
        (label, (base * 200.0).round() / 200.0)
    }))
}
