//! Command-line front end. [`run`] returns the process exit code:
//! 0 success, 1 usage error, 2 data or model error, 3 training did not
//! converge.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::histogram::{ByteHistogram, BINS};
use crate::pca::{truncation_curve, DataMatrix, PcaModel};
use crate::pipeline::{
    self, classify_histogram, evaluate, load_corpus, synth_corpus, train_feature_stack,
    train_model, write_corpus, FileprintModel, PipelineConfig, SynthClass,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fileprint", version, about = "Content-based file type detection from byte-frequency fileprints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on a `<root>/<class>/<files>` corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Classify files; prints `<path>\t<label>\t<score>` per file.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the confusion matrix (rows predicted, columns actual) and accuracy.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Print the PCA truncation error E_k for k = 1..k_max as CSV.
    PcaCurve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = BINS)]
        k_max: usize,
    },
    /// Retrain the feature stack with a 2- or 3-wide bottleneck and export
    /// the per-file features as CSV.
    Scatter {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write the built-in six-class synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 120)]
        files_per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = *pipeline::DEFAULT_SIZE_RANGE.start())]
        min_size: usize,
        #[arg(long, default_value_t = *pipeline::DEFAULT_SIZE_RANGE.end())]
        max_size: usize,
    },
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 60)]
    n1: usize,
    #[arg(long, default_value_t = 15)]
    n2: usize,
    #[arg(long, default_value_t = 40)]
    aann_hidden: usize,
    #[arg(long, default_value_t = 25)]
    classifier_hidden: usize,
    /// Override the auto-associative network's epoch budget.
    #[arg(long)]
    aann_epochs: Option<usize>,
    /// Override the classifier's epoch budget.
    #[arg(long)]
    classifier_epochs: Option<usize>,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        let mut config = PipelineConfig {
            n1: self.n1,
            n2: self.n2,
            aann_hidden: self.aann_hidden,
            classifier_hidden: self.classifier_hidden,
            ..PipelineConfig::default()
        }
        .with_seed(self.seed);
        if let Some(e) = self.aann_epochs {
            config.aann_training.max_epochs = e;
        }
        if let Some(e) = self.classifier_epochs {
            config.classifier_training.max_epochs = e;
        }
        config
    }
}

/// A failed command: exit code plus the message for the error stream.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) => EXIT_USAGE,
            Error::NonFiniteLoss { .. } | Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Train {
            corpus,
            out: model_out,
            pipeline,
        } => cmd_train(&corpus, &model_out, &pipeline.config(), out, err),
        Command::Classify { model, files } => cmd_classify(&model, &files, out),
        Command::Evaluate { model, corpus, csv } => cmd_evaluate(&model, &corpus, csv, out),
        Command::PcaCurve { corpus, k_max } => cmd_pca_curve(&corpus, k_max, out),
        Command::Scatter {
            corpus,
            dims,
            out: csv_out,
            pipeline,
        } => cmd_scatter(&corpus, dims, &csv_out, &pipeline.config(), err),
        Command::Synth {
            out: root,
            files_per_class,
            seed,
            min_size,
            max_size,
        } => cmd_synth(&root, files_per_class, seed, min_size, max_size, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn require_dir(path: &Path, flag: &str) -> CmdResult {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "{flag} {} is not a directory\n\nFor more information, try '--help'.",
            path.display()
        )))
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

fn cmd_train(
    corpus_root: &Path,
    model_out: &Path,
    config: &PipelineConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    require_dir(corpus_root, "--corpus")?;
    config.validate()?;
    let corpus = load_corpus(corpus_root)?;
    if corpus.skipped_empty() > 0 {
        let _ = writeln!(err, "warning: skipped {} empty file(s)", corpus.skipped_empty());
    }
    let (model, summary) = train_model(&corpus, config)?;
    if !summary.degenerate_features.is_empty() {
        let _ = writeln!(
            err,
            "warning: {} PCA feature(s) are constant over the training set: {:?}",
            summary.degenerate_features.len(),
            summary.degenerate_features
        );
    }
    model.save_to_path(model_out)?;
    let _ = writeln!(out, "samples={}", summary.n_samples);
    let _ = writeln!(out, "pca_truncation_error={:e}", summary.pca_truncation_error);
    let _ = writeln!(out, "aann_epochs={}", summary.aann.epochs_run);
    let _ = writeln!(out, "aann_final_mse={:e}", summary.aann.final_mse);
    let _ = writeln!(out, "classifier_epochs={}", summary.classifier.epochs_run);
    let _ = writeln!(out, "classifier_final_mse={:e}", summary.classifier.final_mse);
    let _ = writeln!(out, "training_accuracy={:.4}", summary.training_accuracy);
    Ok(())
}

fn cmd_classify(model_path: &Path, files: &[PathBuf], out: &mut dyn Write) -> CmdResult {
    let model = FileprintModel::load_from_path(model_path)?;
    let mut unreadable = 0;
    for path in files {
        let hist = fs::File::open(path).and_then(ByteHistogram::from_reader);
        let line = match hist {
            Err(e) => {
                unreadable += 1;
                format!("{}\tERROR\t{}", path.display(), e.kind())
            }
            Ok(h) if h.is_empty() => format!("{}\tERROR\tempty", path.display()),
            Ok(h) => {
                let p = classify_histogram(&model, &h)?;
                format!("{}\t{}\t{:.6}", path.display(), p.label, p.score())
            }
        };
        let _ = writeln!(out, "{line}");
    }
    if unreadable > 0 {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!("{unreadable} file(s) could not be read"),
        });
    }
    Ok(())
}

fn cmd_evaluate(model_path: &Path, corpus_root: &Path, csv: bool, out: &mut dyn Write) -> CmdResult {
    require_dir(corpus_root, "--corpus")?;
    let model = FileprintModel::load_from_path(model_path)?;
    let corpus = load_corpus(corpus_root)?;
    let (matrix, _) = evaluate(&model, &corpus)?;
    let text = if csv {
        matrix.to_csv()
    } else {
        matrix.format_table()
    };
    let _ = write!(out, "{text}");
    Ok(())
}

fn cmd_pca_curve(corpus_root: &Path, k_max: usize, out: &mut dyn Write) -> CmdResult {
    require_dir(corpus_root, "--corpus")?;
    if !(1..=BINS).contains(&k_max) {
        return Err(Failure::usage(format!("--k-max must lie in 1..={BINS}")));
    }
    let corpus = load_corpus(corpus_root)?;
    let rows = corpus
        .iter()
        .map(|(_, s)| Ok(s.histogram()?.normalize()?.to_vec()))
        .collect::<Result<Vec<_>, Error>>()?;
    let pca = PcaModel::fit(&DataMatrix::new(rows)?, BINS)?;
    let curve = truncation_curve(&pca.eigenvalues);
    let _ = writeln!(out, "k,E_k");
    for (k, e) in curve.iter().enumerate().take(k_max + 1).skip(1) {
        let _ = writeln!(out, "{k},{e}");
    }
    Ok(())
}

fn cmd_scatter(
    corpus_root: &Path,
    dims: usize,
    csv_out: &Path,
    config: &PipelineConfig,
    err: &mut dyn Write,
) -> CmdResult {
    if !(2..=3).contains(&dims) {
        return Err(Failure::usage(format!("--dims must be 2 or 3, got {dims}")));
    }
    require_dir(corpus_root, "--corpus")?;
    let config = PipelineConfig {
        n2: dims,
        ..config.clone()
    };
    config.validate()?;
    let corpus = load_corpus(corpus_root)?;
    let stack = train_feature_stack(&corpus, &config)?;
    let mut text = String::from("label");
    for i in 1..=dims {
        text.push_str(&format!(",f{i}"));
    }
    text.push('\n');
    for (label, features) in stack.labels.iter().zip(&stack.features) {
        text.push_str(label.as_str());
        for f in features {
            text.push_str(&format!(",{f}"));
        }
        text.push('\n');
    }
    fs::write(csv_out, text).map_err(|e| io_failure(csv_out, e))?;
    let _ = writeln!(
        err,
        "wrote {} rows; auto-associative final mse {:e}",
        stack.features.len(),
        stack.aann_report.final_mse
    );
    Ok(())
}

fn cmd_synth(
    root: &Path,
    files_per_class: usize,
    seed: u64,
    min_size: usize,
    max_size: usize,
    err: &mut dyn Write,
) -> CmdResult {
    let corpus = synth_corpus(&SynthClass::ALL, files_per_class, min_size..=max_size, seed)
        .map_err(|e| Failure::usage(e.to_string()))?;
    write_corpus(&corpus, root)?;
    let _ = writeln!(
        err,
        "wrote {} files in {} classes to {}",
        corpus.len(),
        corpus.classes().len(),
        root.display()
    );
    Ok(())
}
