//! Content-based file type detection from byte-frequency "fileprints".
//!
//! The pipeline turns a file's normalized byte-frequency distribution (BFD)
//! into a short feature vector in two stages, a linear PCA projection followed
//! by the bottleneck of a five-layer auto-associative network, and classifies
//! that vector with a small MLP:
//!
//! ```text
//! bytes ─► BFD (256) ─► PCA (n1) ─► standardize ─► AANN encoder (n2) ─► MLP ─► label
//! ```
//!
//! Only the BFD enters the pipeline, so results depend on neither file names
//! nor byte order.


pub mod cli;
pub mod error;
pub mod histogram;
pub mod linalg;
pub mod mlp;
pub mod pca;
pub mod pipeline;


pub use error::{Error, Result};
pub use histogram::{count_bytes, normalize, ByteHistogram, NormalizedBfd};
pub use mlp::{Activation, LayerSpec, MlpNetwork, TrainingConfig, TrainingReport};
pub use pca::{DataMatrix, EigenDecomposition, PcaModel};
pub use pipeline::{
    ClassLabel, ConfusionMatrix, FileprintModel, LabeledCorpus, PipelineConfig, Prediction,
};
