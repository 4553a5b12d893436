//! Satisfaction and procedure-anomaly analytics for recorded customer
//! service sessions.
//!
//! The crate turns three inputs per session (a machine log, per-frame visual
//! features and per-utterance audio features) into two kinds of anchors:
//!
//! * operational anchors from [`anomaly`]: services with unusual operation
//!   durations (PCA residual) or unusual operation order (Markov chain);
//! * behavioral anchors from [`satisfaction`]: a linear multimodal
//!   satisfaction score per service, plus per-operation scores whose
//!   within-service deviation exceeds two standard deviations.
//!
//! [`sim`] generates labeled synthetic corpora and [`pipeline`] wires the
//! stages together over a dataset directory.

pub mod anomaly;
pub mod event_log;
pub mod features;
pub mod pipeline;
pub mod satisfaction;
pub mod sim;
pub mod stats;
