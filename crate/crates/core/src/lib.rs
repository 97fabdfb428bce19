//! Dependency-graph contrastive representation learning for microservice
//! anomaly detection.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation: graph construction, telemetry panels, the embedding +
//! graph-convolution encoder with hand-written backpropagation, the
//! contrastive and temporal-consistency objectives, the trainer, k-NN
//! reference-bank scoring, evaluation metrics, and a deterministic
//! telemetry simulator. File formats, configuration files and the CLI live
//! in the `svcdep` companion crate.
//!
//! All arithmetic is `f64`. Every stochastic step takes an explicit seed, so
//! a run is bit-reproducible given its inputs.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod detect;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod matrix;
pub mod objective;
pub mod rng;
pub mod simgen;
pub mod telemetry;
pub mod train;

pub use detect::{AnomalyScore, DetectConfig, ReferenceBank};
pub use encoder::{Activation, EmbeddingFrame, ModelDims, ModelParams, ModelSpec};
pub use error::{Error, Result};
pub use eval::{EvalReport, SweepKnob, SweepSpec};
pub use experiment::{Dataset, ExperimentConfig, ExperimentOutcome, SplitConfig};
pub use graph::{DirectionMode, ServiceGraph};
pub use matrix::Matrix;
pub use objective::{ContrastBatch, ObjectiveConfig, PositiveMode};
pub use simgen::{FaultKind, FaultSpec, ScenarioConfig, TierCounts, Topology};
pub use telemetry::{MetricPanel, StandardizationStats};
pub use train::{OptimizerKind, TrainConfig, TrainHistory};
