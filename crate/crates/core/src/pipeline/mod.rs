//! The hierarchical fileprint pipeline: corpus handling, training of the
//! PCA → auto-associative encoder → classifier stack, classification,
//! evaluation, and model persistence.

mod corpus;
mod evaluate;
mod model;
mod synth;
mod train;

use serde::{Deserialize, Serialize};

pub use corpus::{load_corpus, split, ClassLabel, LabeledCorpus, Sample, SampleData};
pub use evaluate::{evaluate, ConfusionMatrix};
pub use model::{FileprintModel, Standardizer, FORMAT_VERSION};
pub use synth::{synth_corpus, write_corpus, SynthClass, DEFAULT_SIZE_RANGE};
pub use train::{
    classify, classify_histogram, extract_features, extract_features_histogram,
    train_feature_stack, train_model, FeatureStack, Prediction, TrainingSummary,
};

use crate::error::{Error, Result};
use crate::histogram::BINS;
use crate::mlp::TrainingConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Dimensions kept by PCA.
    pub n1: usize,
    /// Bottleneck width, i.e. the fileprint length.
    pub n2: usize,
    /// Width of the auto-associative network's second and fourth layers.
    pub aann_hidden: usize,
    pub classifier_hidden: usize,
    pub aann_training: TrainingConfig,
    pub classifier_training: TrainingConfig,
    /// Seeds network initialization.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n1: 60,
            n2: 15,
            aann_hidden: 40,
            classifier_hidden: 25,
            aann_training: TrainingConfig {
                learning_rate: 0.002,
                max_epochs: 300,
                ..TrainingConfig::default()
            },
            classifier_training: TrainingConfig {
                learning_rate: 0.02,
                max_epochs: 500,
                ..TrainingConfig::default()
            },
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Sets the initialization seed and derives the perturbation seeds of both
    /// training stages from it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.aann_training.seed = seed.wrapping_mul(2).wrapping_add(1);
        self.classifier_training.seed = seed.wrapping_mul(2).wrapping_add(2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.n2 && self.n2 < self.n1 && self.n1 <= BINS) {
            return Err(Error::InvalidConfig(format!(
                "require 1 <= N2 < N1 <= {BINS} (got N1 = {}, N2 = {})",
                self.n1, self.n2
            )));
        }
        if self.aann_hidden == 0 || self.classifier_hidden == 0 {
            return Err(Error::InvalidConfig("hidden layer sizes must be positive".into()));
        }
        self.aann_training.validate()?;
        self.classifier_training.validate()
    }
}
