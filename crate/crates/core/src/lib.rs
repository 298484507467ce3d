//! Table-tennis ball trajectory analysis: stroke segmentation, outcome and
//! stroke-type classification, tracker evaluation and synthetic data.

pub mod annotation;
pub mod classifiers;
pub mod extrema;
pub mod homography;
pub mod recognition;
pub mod segment;
pub mod synth;
pub mod tracker;
pub mod trajectory;
