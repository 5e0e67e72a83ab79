//! Synthetic morphing-attack dataset construction and morphing attack
//! detection (MAD) evaluation.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: Delaunay triangulation, affine estimation and
//!   piecewise-affine warping.
//! * [`morph`]: landmark interpolation, warp + blend morphing and the
//!   extended face crop used ahead of detection.
//! * [`pipeline`]: quality filtering, bona fide / morph-pool split, key-image
//!   pairing, batch morphing, automatic artifact rejection and manifests.
//! * [`metrics`]: APCER / BPCER / EER / BPCER@APCER and ROC data.
//! * [`baseline`]: a small residual-feature detector trained with the
//!   pixel-wise + binary cross-entropy loss.
//! * [`review`]: the manual inspection state machine backing the review
//!   service.

pub mod baseline;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod morph;
pub mod pipeline;
pub mod review;
pub mod rng;
pub mod synth;

pub use crate::geometry::{AffineTransform2, Point2, Triangle, TriangleMesh};
pub use crate::image::{FloatImage, Image};
pub use crate::morph::{LandmarkSet, MorphParams};
