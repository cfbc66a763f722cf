//! Labeled sample sets: loading from `<root>/<class>/<files>` and the
//! deterministic train/test split.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{count_bytes, ByteHistogram};

/// A file type name such as `doc` or `exe`. Case-sensitive, never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassLabel(String);

impl ClassLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidConfig("class label must not be empty".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for ClassLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        ClassLabel::new(s)
    }
}

impl From<ClassLabel> for String {
    fn from(l: ClassLabel) -> Self {
        l.0
    }
}

/// Where a sample's bytes live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleData {
    File { path: PathBuf, len: u64 },
    Bytes(Arc<[u8]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// File name, unique within its class.
    pub name: String,
    pub data: SampleData,
}

impl Sample {
    pub fn from_bytes(name: impl Into<String>, bytes: impl Into<Arc<[u8]>>) -> Self {
        Self {
            name: name.into(),
            data: SampleData::Bytes(bytes.into()),
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let len = fs::metadata(&path).map_err(|e| Error::io(&path, e))?.len();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self {
            name,
            data: SampleData::File { path, len },
        })
    }

    pub fn len(&self) -> u64 {
        match &self.data {
            SampleData::File { len, .. } => *len,
            SampleData::Bytes(b) => b.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.data {
            SampleData::File { path, .. } => Some(path),
            SampleData::Bytes(_) => None,
        }
    }

    /// Reads the sample's full content.
    pub fn read(&self) -> Result<Vec<u8>> {
        match &self.data {
            SampleData::File { path, .. } => fs::read(path).map_err(|e| Error::io(path, e)),
            SampleData::Bytes(b) => Ok(b.to_vec()),
        }
    }

    /// Histograms the sample, streaming from disk for file samples.
    pub fn histogram(&self) -> Result<ByteHistogram> {
        match &self.data {
            SampleData::File { path, .. } => {
                let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                ByteHistogram::from_reader(file).map_err(|e| Error::io(path, e))
            }
            SampleData::Bytes(b) => Ok(count_bytes(b)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledCorpus {
    classes: BTreeMap<ClassLabel, Vec<Sample>>,
    skipped_empty: usize,
}

impl LabeledCorpus {
    /// Rejects any file path listed under more than one class.
    pub fn new(classes: BTreeMap<ClassLabel, Vec<Sample>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (label, samples) in &classes {
            for path in samples.iter().filter_map(Sample::path) {
                if !seen.insert(path.to_path_buf()) {
                    return Err(Error::InvalidConfig(format!(
                        "{} is listed under more than one class (again under '{label}')",
                        path.display()
                    )));
                }
            }
        }
        Ok(Self {
            classes,
            skipped_empty: 0,
        })
    }

    pub fn classes(&self) -> &BTreeMap<ClassLabel, Vec<Sample>> {
        &self.classes
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.classes.keys().cloned().collect()
    }

    pub fn samples(&self, label: &ClassLabel) -> &[Sample] {
        self.classes.get(label).map_or(&[], Vec::as_slice)
    }

    /// Every sample with its label, in label order then sample order.
    pub fn iter(&self) -> impl Iterator<Item = (&ClassLabel, &Sample)> + '_ {
        self.classes
            .iter()
            .flat_map(|(label, samples)| samples.iter().map(move |s| (label, s)))
    }

    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Zero-length files skipped while loading.
    pub fn skipped_empty(&self) -> usize {
        self.skipped_empty
    }
}

/// Loads `<root>/<class>/<file>`: each immediate subdirectory is a class and
/// each regular file directly inside it is a sample. Dot-prefixed entries are
/// ignored; zero-length files are skipped and counted.
pub fn load_corpus(root: &Path) -> Result<LabeledCorpus> {
    let mut class_dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        if entry.path().is_dir() {
            class_dirs.push((name, entry.path()));
        }
    }
    if class_dirs.is_empty() {
        return Err(Error::NoClasses(root.to_path_buf()));
    }
    class_dirs.sort();

    let mut classes = BTreeMap::new();
    let mut skipped = 0;
    for (name, dir) in class_dirs {
        let mut files = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            if entry.file_name().to_string_lossy().starts_with('.') {
                continue;
            }
            let path = entry.path();
            if path.is_file() {
                files.push(path);
            }
        }
        files.sort();
        let mut samples = Vec::with_capacity(files.len());
        for path in files {
            let sample = Sample::from_file(path)?;
            if sample.is_empty() {
                skipped += 1;
            } else {
                samples.push(sample);
            }
        }
        if samples.is_empty() {
            return Err(Error::EmptyClass(name));
        }
        classes.insert(ClassLabel::new(name)?, samples);
    }
    let mut corpus = LabeledCorpus::new(classes)?;
    corpus.skipped_empty = skipped;
    Ok(corpus)
}

/// Per class: sort by name, shuffle with a generator seeded from `seed`, take
/// the first `train_per_class` for training and the next `test_per_class` for
/// testing.
pub fn split(
    corpus: &LabeledCorpus,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let needed = train_per_class + test_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = BTreeMap::new();
    let mut test = BTreeMap::new();
    for (label, samples) in &corpus.classes {
        if samples.len() < needed {
            return Err(Error::InsufficientFiles {
                class: label.to_string(),
                needed,
                available: samples.len(),
            });
        }
        let mut ordered = samples.clone();
        ordered.sort_by(|a, b| a.name.cmp(&b.name));
        ordered.shuffle(&mut rng);
        let rest = ordered.split_off(train_per_class);
        test.insert(label.clone(), rest.into_iter().take(test_per_class).collect());
        train.insert(label.clone(), ordered);
    }
    Ok((LabeledCorpus::new(train)?, LabeledCorpus::new(test)?))
}
