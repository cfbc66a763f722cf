use crate::error::{Error, Result};
use crate::histogram::{count_bytes, ByteHistogram};
use crate::mlp::{Activation, LayerSpec, MlpNetwork, TrainingReport};
use crate::pca::{DataMatrix, PcaModel};

use super::corpus::{ClassLabel, LabeledCorpus};
use super::model::{FileprintModel, Standardizer, FORMAT_VERSION};
use super::PipelineConfig;

/// Standard deviations at or below this fraction of the largest one mark a
/// constant feature.
const DEGENERATE_STD_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    /// One score per model label, in label order.
    pub scores: Vec<f64>,
}

impl Prediction {
    pub fn score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// PCA, standardizer and bottleneck encoder, without the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    pub pca: PcaModel,
    pub standardizer: Standardizer,
    pub aann_encoder: MlpNetwork,
    /// Bottleneck features of every training sample, in corpus order.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<ClassLabel>,
    /// Indices of PCA features whose spread was zero; their std was set to 1.
    pub degenerate_features: Vec<usize>,
    pub aann_report: TrainingReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub n_samples: usize,
    pub pca_truncation_error: f64,
    pub degenerate_features: Vec<usize>,
    pub aann: TrainingReport,
    pub classifier: TrainingReport,
    pub training_accuracy: f64,
}

fn check_corpus(corpus: &LabeledCorpus) -> Result<()> {
    let n = corpus.classes().len();
    if n < 2 {
        return Err(Error::TooFewClasses(n));
    }
    for (label, samples) in corpus.classes() {
        if samples.len() < 2 {
            return Err(Error::InsufficientFiles {
                class: label.to_string(),
                needed: 2,
                available: samples.len(),
            });
        }
    }
    Ok(())
}

fn corpus_bfds(corpus: &LabeledCorpus) -> Result<(DataMatrix, Vec<ClassLabel>)> {
    let mut rows = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    for (label, sample) in corpus.iter() {
        rows.push(sample.histogram()?.normalize()?.to_vec());
        labels.push(label.clone());
    }
    Ok((DataMatrix::new(rows)?, labels))
}

/// Per-feature means and one shared scale, the spread of the leading PCA
/// component. A shared scale keeps the variance ranking PCA produced, so the
/// bottleneck still favors the dominant directions.
fn fit_standardizer(rows: &[Vec<f64>]) -> (Standardizer, Vec<usize>) {
    let n = rows.len() as f64;
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut spread = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in spread.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    spread.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    let largest = spread.iter().copied().fold(0.0, f64::max);
    let degenerate = spread
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == 0.0 || s <= DEGENERATE_STD_RATIO * largest)
        .map(|(i, _)| i)
        .collect();
    let shared = if largest > 0.0 { largest } else { 1.0 };
    (
        Standardizer {
            mean,
            std: vec![shared; dim],
        },
        degenerate,
    )
}

/// Fits PCA on the pooled BFDs, standardizes its outputs, and trains the
/// five-layer auto-associative network to reproduce them.
pub fn train_feature_stack(corpus: &LabeledCorpus, config: &PipelineConfig) -> Result<FeatureStack> {
    config.validate()?;
    check_corpus(corpus)?;
    let (bfds, labels) = corpus_bfds(corpus)?;
    let pca = PcaModel::fit(&bfds, config.n1)?;

    let projected: Vec<Vec<f64>> = bfds
        .rows()
        .map(|x| pca.project(x))
        .collect::<Result<_>>()?;
    let (standardizer, degenerate_features) = fit_standardizer(&projected);
    let standardized: Vec<Vec<f64>> = projected
        .into_iter()
        .map(|mut z| {
            standardizer.apply(&mut z);
            z
        })
        .collect();
    let inputs = DataMatrix::new(standardized)?;

    let specs = [
        LayerSpec::input(config.n1),
        LayerSpec::new(config.aann_hidden, Activation::Tanh),
        LayerSpec::new(config.n2, Activation::Linear),
        LayerSpec::new(config.aann_hidden, Activation::Tanh),
        LayerSpec::new(config.n1, Activation::Linear),
    ];
    let mut aann = MlpNetwork::init(&specs, config.seed)?;
    let aann_report = aann.train(&inputs, &inputs, &config.aann_training)?;
    let aann_encoder = aann.truncated(2)?;

    let features = inputs
        .rows()
        .map(|x| aann_encoder.predict(x))
        .collect::<Result<_>>()?;
    Ok(FeatureStack {
        pca,
        standardizer,
        aann_encoder,
        features,
        labels,
        degenerate_features,
        aann_report,
    })
}

/// Trains the full pipeline on `train`. Deterministic given `config`.
pub fn train_model(
    train: &LabeledCorpus,
    config: &PipelineConfig,
) -> Result<(FileprintModel, TrainingSummary)> {
    let stack = train_feature_stack(train, config)?;
    let labels = train.labels();
    let targets: Vec<Vec<f64>> = stack
        .labels
        .iter()
        .map(|l| labels.iter().map(|c| if c == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let inputs = DataMatrix::new(stack.features.clone())?;
    let targets = DataMatrix::new(targets)?;

    let specs = [
        LayerSpec::input(config.n2),
        LayerSpec::new(config.classifier_hidden, Activation::Tanh),
        LayerSpec::new(labels.len(), Activation::Logistic),
    ];
    let mut classifier = MlpNetwork::init(&specs, config.seed.wrapping_add(1))?;
    let classifier_report = classifier.train(&inputs, &targets, &config.classifier_training)?;

    let mut correct = 0;
    for (x, label) in inputs.rows().zip(&stack.labels) {
        let scores = classifier.predict(x)?;
        if labels[argmax(&scores)] == *label {
            correct += 1;
        }
    }

    let model = FileprintModel {
        format_version: FORMAT_VERSION,
        labels,
        pca: stack.pca,
        standardizer: stack.standardizer,
        aann_encoder: stack.aann_encoder,
        classifier,
        config: config.clone(),
    };
    let summary = TrainingSummary {
        n_samples: inputs.n_samples(),
        pca_truncation_error: model.pca.truncation_error(),
        degenerate_features: stack.degenerate_features,
        aann: stack.aann_report,
        classifier: classifier_report,
        training_accuracy: correct as f64 / inputs.n_samples() as f64,
    };
    Ok((model, summary))
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn extract_features_histogram(model: &FileprintModel, hist: &ByteHistogram) -> Result<Vec<f64>> {
    let bfd = hist.normalize()?;
    let mut z = model.pca.project(bfd.as_slice())?;
    model.standardizer.apply(&mut z);
    model.aann_encoder.predict(&z)
}

/// The `n2`-dimensional fileprint of `data`.
pub fn extract_features(model: &FileprintModel, data: &[u8]) -> Result<Vec<f64>> {
    extract_features_histogram(model, &count_bytes(data))
}

pub fn classify_histogram(model: &FileprintModel, hist: &ByteHistogram) -> Result<Prediction> {
    let features = extract_features_histogram(model, hist)?;
    let scores = model.classifier.predict(&features)?;
    Ok(Prediction {
        label: model.labels[argmax(&scores)].clone(),
        scores,
    })
}

pub fn classify(model: &FileprintModel, data: &[u8]) -> Result<Prediction> {
    classify_histogram(model, &count_bytes(data))
}
