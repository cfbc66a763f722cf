//! Confusion matrices in predicted-rows × actual-columns orientation.

use std::collections::HashMap;
use std::fmt::Write;

use super::corpus::{ClassLabel, LabeledCorpus};
use super::model::FileprintModel;
use super::train::classify_histogram;
use crate::error::{Error, Result};

const CORNER: &str = "predicted\\actual";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<ClassLabel>,
    /// `cells[p][a]`: files of actual class `a` predicted as `p`.
    cells: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<ClassLabel>) -> Self {
        let n = labels.len();
        Self {
            labels,
            cells: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(labels: Vec<ClassLabel>, cells: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if cells.len() != n {
            return Err(Error::dims("confusion matrix rows", n, cells.len()));
        }
        if let Some(row) = cells.iter().find(|r| r.len() != n) {
            return Err(Error::dims("confusion matrix columns", n, row.len()));
        }
        Ok(Self { labels, cells })
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn cells(&self) -> &[Vec<u64>] {
        &self.cells
    }

    pub fn record(&mut self, predicted: usize, actual: usize) {
        self.cells[predicted][actual] += 1;
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.cells[i][i]).sum()
    }

    /// Per actual class, the number of files tested.
    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.labels.len())
            .map(|a| self.cells.iter().map(|r| r[a]).sum())
            .collect()
    }

    /// `trace / total`, or `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.trace() as f64 / total as f64)
    }

    /// Aligned text table followed by an `accuracy=` line.
    pub fn format_table(&self) -> String {
        let width = self
            .labels
            .iter()
            .map(|l| l.as_str().len())
            .chain(self.cells.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1);
        let first = CORNER.len().max(width);
        let mut out = String::new();
        write!(out, "{CORNER:<first$}").unwrap();
        for l in &self.labels {
            write!(out, "  {:>width$}", l.as_str()).unwrap();
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.cells) {
            write!(out, "{:<first$}", label.as_str()).unwrap();
            for c in row {
                write!(out, "  {c:>width$}").unwrap();
            }
            out.push('\n');
        }
        out.push_str(&format_accuracy(self.accuracy().unwrap_or(0.0)));
        out.push('\n');
        out
    }

    /// CSV with a header row of actual classes, one row per predicted class,
    /// then the `accuracy=` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CORNER);
        for l in &self.labels {
            write!(out, ",{}", csv_field(l.as_str())).unwrap();
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.cells) {
            out.push_str(&csv_field(label.as_str()));
            for c in row {
                write!(out, ",{c}").unwrap();
            }
            out.push('\n');
        }
        out.push_str(&format_accuracy(self.accuracy().unwrap_or(0.0)));
        out.push('\n');
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn format_accuracy(accuracy: f64) -> String {
    format!("accuracy={accuracy:.4}")
}

/// Classifies every test file and tallies predictions against true labels.
pub fn evaluate(model: &FileprintModel, test: &LabeledCorpus) -> Result<(ConfusionMatrix, f64)> {
    let index: HashMap<&ClassLabel, usize> =
        model.labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    for label in test.classes().keys() {
        if !index.contains_key(label) {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }
    if test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut matrix = ConfusionMatrix::new(model.labels.clone());
    for (label, sample) in test.iter() {
        let prediction = classify_histogram(model, &sample.histogram()?)?;
        matrix.record(index[&prediction.label], index[label]);
    }
    let accuracy = matrix.accuracy().expect("non-empty");
    Ok((matrix, accuracy))
}
