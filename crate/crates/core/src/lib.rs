//! Two-stage visual object tracker with a benchmark-style evaluation harness.
//!
//! Stage one locates the target with Siamese cross-correlation and an
//! anchor-free box head; stage two segments the located region and fits a
//! rotated bounding box to the mask. The crate also ships the supervised
//! (reset) and one-shot run protocols, the accuracy / robustness / EAO and
//! AO / SR metrics, dataset and trace I/O, and a deterministic synthetic
//! sequence generator for desk-scale verification.
//!
//! Everything is CPU-only and deterministic: a fixed seed and a fixed input
//! sequence produce bit-identical traces regardless of thread count.
//!
//! # Feature flags
//! - `parallel` (default): rayon data-parallel kernels and per-sequence
//!   parallelism. Disabling it selects the sequential fallback; outputs are
//!   identical either way.

pub mod backbone;
pub mod detect;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod segment;
pub mod selftest;
pub mod synth;
pub mod tensor;

mod par;

pub use error::{Error, Result};
pub use tensor::{ConvWeights, Tensor};
