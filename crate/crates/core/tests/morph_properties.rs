//! Morph identities, mirror symmetry and agreement with the scalar
//! reference morph.

mod common;

use common::{face_pair as pair, max_abs_diff, scalar_reference_morph};
use morphforge::morph::{interpolate_landmarks, morph, MorphEngine, MorphParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn self_morph_is_identity() {
    let ((img, lm), _) = pair(1, 64);
    for (beta, w) in [(0.5, 0.5), (0.2, 0.9), (1.0, 0.0), (0.0, 1.0), (0.37, 0.61)] {
        let (out, target) = morph(&img, &lm, &img, &lm, &MorphParams::new(beta, w, 0).unwrap()).unwrap();
        assert_eq!(out, img, "beta {beta} w {w}");
        assert_eq!(target.points.len(), lm.points.len());
    }
}

#[test]
fn zero_blend_zero_warp_returns_first_image() {
    for seed in 0..5 {
        let ((a, la), (b, lb)) = pair(100 + seed, 64);
        let (out, target) = morph(&a, &la, &b, &lb, &MorphParams::new(0.0, 0.0, 0).unwrap()).unwrap();
        assert!(max_abs_diff(&out, &a) <= 1);
        assert_eq!(target.points, la.points);
    }
}

#[test]
fn mirror_symmetry_on_ten_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..10 {
        let ((a, la), (b, lb)) = pair(200 + seed, 64);
        let (beta, w) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let (ab, _) = morph(&a, &la, &b, &lb, &MorphParams::new(beta, w, 0).unwrap()).unwrap();
        let (ba, _) = morph(&b, &lb, &a, &la, &MorphParams::new(1.0 - beta, 1.0 - w, 0).unwrap()).unwrap();
        assert!(max_abs_diff(&ab, &ba) <= 1, "pair {seed}: diff {}", max_abs_diff(&ab, &ba));
    }
}

#[test]
fn engine_matches_scalar_reference() {
    let engine = MorphEngine::default();
    for seed in 0..4 {
        let ((a, la), (b, lb)) = pair(300 + seed, 64);
        let params = MorphParams::new(0.5, 0.5, 0).unwrap();
        let (out, target) = engine.morph(&a, &la, &b, &lb, &params).unwrap();
        assert_eq!(target, interpolate_landmarks(&la, &lb, 0.5).unwrap());

        let mesh = engine.target_mesh(&target).unwrap();
        let (src_a, src_b) = engine.source_points(&target, &la, &lb);
        let reference = scalar_reference_morph(&a, &src_a, &b, &src_b, &mesh.points, &mesh.triangles, 0.5);
        assert!(max_abs_diff(&out, &reference) <= 1, "seed {seed}: diff {}", max_abs_diff(&out, &reference));
    }
}

#[test]
fn morph_is_deterministic_and_in_range() {
    let ((a, la), (b, lb)) = pair(9, 80);
    let p = MorphParams::new(0.5, 0.3, 42).unwrap();
    let first = morph(&a, &la, &b, &lb, &p).unwrap();
    let second = morph(&a, &la, &b, &lb, &p).unwrap();
    assert_eq!(first, second);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let ((a, la), _) = pair(5, 64);
    let ((c, lc), _) = pair(6, 48);
    assert!(morph(&a, &la, &c, &lc, &MorphParams::default()).is_err());
    let mut short = la.clone();
    short.points.pop();
    assert!(morph(&a, &la, &a, &short, &MorphParams::default()).is_err());
}
