//! Three-class discrimination of dysarthria, apraxia of speech and
//! neurotypical speech from handcrafted acoustic features.
//!
//! The crate covers the whole pipeline: manifest ingestion and 16 kHz
//! preprocessing ([`dataset`]), signal analysis ([`dsp`]), the 28-dimensional
//! feature vector ([`features`]), ANOVA-F feature ranking ([`selection`]),
//! RBF-kernel SVMs ([`svm`]), hierarchical and one-vs-one / one-vs-rest
//! three-class schemes ([`classifiers`]), and the repeated nested
//! cross-validation protocol with automatic-vs-perceptual reports
//! ([`evaluation`]).

// `!(x > 0.0)` is used on purpose wherever NaN must take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod selection;
pub mod signals;
pub mod svm;

pub use classifiers::{CompositeModel, HierarchicalModel, OvoModel, OvrModel, Scheme};
pub use config::Config;
pub use dataset::{ClassLabel, ManifestEntry, Waveform};
pub use error::{Error, Result};
pub use evaluation::{EvaluationReport, GroupAccuracies};
pub use features::{FeatureMatrix, FeatureVector, FEATURE_DIM, FEATURE_NAMES};
pub use selection::SelectionMask;
pub use svm::{HyperParams, SvmModel};

/// Version string embedded in reports and model artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
