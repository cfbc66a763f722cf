//! Deterministic synthetic corpora with class-distinct byte statistics.

use std::collections::BTreeMap;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{ClassLabel, LabeledCorpus, Sample, SampleData};
use crate::error::{Error, Result};

pub const DEFAULT_SIZE_RANGE: RangeInclusive<usize> = 1024..=256 * 1024;

/// Built-in generators. The class label is the generator's name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SynthClass {
    /// Independent uniform bytes.
    UniformRandom,
    /// English-like letters, spaces and punctuation.
    AsciiText,
    /// Text interleaved with tags, heavy in `<`, `>`, `/`, `=`.
    Markup,
    /// Runs drawn from a handful of byte values.
    LowEntropy,
    /// Repeating ramp `0, 1, …, peak` with a per-file peak in 63..=191.
    Sawtooth,
    /// First half text, second half uniform random.
    Mixed,
}

impl SynthClass {
    pub const ALL: [SynthClass; 6] = [
        SynthClass::UniformRandom,
        SynthClass::AsciiText,
        SynthClass::Markup,
        SynthClass::LowEntropy,
        SynthClass::Sawtooth,
        SynthClass::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthClass::UniformRandom => "uniform-random",
            SynthClass::AsciiText => "ascii-text",
            SynthClass::Markup => "markup",
            SynthClass::LowEntropy => "low-entropy",
            SynthClass::Sawtooth => "sawtooth",
            SynthClass::Mixed => "mixed",
        }
    }

    pub fn generate<R: Rng>(self, len: usize, rng: &mut R) -> Vec<u8> {
        match self {
            SynthClass::UniformRandom => random_bytes(len, rng),
            SynthClass::AsciiText => text(len, rng),
            SynthClass::Markup => markup(len, rng),
            SynthClass::LowEntropy => low_entropy(len, rng),
            SynthClass::Sawtooth => sawtooth(len, rng),
            SynthClass::Mixed => {
                let mut out = text(len / 2, rng);
                out.extend(random_bytes(len - len / 2, rng));
                out
            }
        }
    }
}

impl FromStr for SynthClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown generator '{s}'")))
    }
}

fn random_bytes<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let mut out = vec![0u8; len];
    rng.fill_bytes(&mut out);
    out
}

// Approximate English letter frequencies (per mille), a..z.
const LETTER_WEIGHTS: [u32; 26] = [
    82, 15, 28, 43, 127, 22, 20, 61, 70, 2, 8, 40, 24, 67, 75, 19, 1, 60, 63, 91, 28, 10, 24, 2,
    20, 1,
];

fn text_alphabet() -> (Vec<u8>, WeightedIndex<u32>) {
    let mut symbols: Vec<u8> = (b'a'..=b'z').collect();
    let mut weights = LETTER_WEIGHTS.to_vec();
    for (sym, w) in [
        (b' ', 190),
        (b'.', 9),
        (b',', 10),
        (b'\n', 6),
        (b'\'', 2),
        (b'E', 3),
        (b'T', 4),
        (b'A', 3),
        (b'I', 3),
        (b'S', 2),
        (b'0', 2),
        (b'1', 2),
        (b'2', 1),
    ] {
        symbols.push(sym);
        weights.push(w);
    }
    let dist = WeightedIndex::new(&weights).expect("static weights are valid");
    (symbols, dist)
}

fn text<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let (symbols, dist) = text_alphabet();
    (0..len).map(|_| symbols[dist.sample(rng)]).collect()
}

const TAGS: [&[u8]; 12] = [
    b"<p>",
    b"</p>",
    b"<div class=\"row\">",
    b"</div>",
    b"<a href=\"/index.html\">",
    b"</a>",
    b"<br/>",
    b"<span id=\"k\">",
    b"</span>",
    b"<li>",
    b"</li>",
    b"<td width=\"50\" align=\"left\">",
];

fn markup<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let (symbols, dist) = text_alphabet();
    let max_run = rng.random_range(8..=40);
    let mut out = Vec::with_capacity(len + 32);
    while out.len() < len {
        let run = rng.random_range(1..=max_run);
        out.extend((0..run).map(|_| symbols[dist.sample(rng)]));
        out.extend_from_slice(TAGS[rng.random_range(0..TAGS.len())]);
    }
    out.truncate(len);
    out
}

const LOW_ENTROPY_SYMBOLS: [u8; 6] = [0x00, 0x01, 0x02, 0x7f, 0x80, 0xff];

fn low_entropy<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let weights: Vec<f64> = LOW_ENTROPY_SYMBOLS
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let base = if i == 0 { 4.0 } else { 1.0 };
            base * rng.random_range(0.5..1.5)
        })
        .collect();
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    let mut out = Vec::with_capacity(len + 32);
    while out.len() < len {
        let sym = LOW_ENTROPY_SYMBOLS[dist.sample(rng)];
        let run = rng.random_range(1..=32);
        out.extend(std::iter::repeat_n(sym, run));
    }
    out.truncate(len);
    out
}

fn sawtooth<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let period = rng.random_range(64usize..=192);
    let phase = rng.random_range(0..period);
    (0..len).map(|i| ((i + phase) % period) as u8).collect()
}

/// Draws a size log-uniformly from `range`.
fn draw_size<R: Rng>(range: &RangeInclusive<usize>, rng: &mut R) -> usize {
    let (lo, hi) = (*range.start(), *range.end());
    if lo == hi {
        return lo;
    }
    let t: f64 = rng.random_range(0.0..=1.0);
    let size = ((lo as f64).ln() + t * ((hi as f64).ln() - (lo as f64).ln())).exp();
    (size.round() as usize).clamp(lo, hi)
}

/// Generates `files_per_class` in-memory files for each generator.
pub fn synth_corpus(
    classes: &[SynthClass],
    files_per_class: usize,
    size_range: RangeInclusive<usize>,
    seed: u64,
) -> Result<LabeledCorpus> {
    if classes.len() < 2 {
        return Err(Error::BadSpec(format!(
            "at least 2 classes are required, got {}",
            classes.len()
        )));
    }
    let mut sorted = classes.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != classes.len() {
        return Err(Error::BadSpec("duplicate generator".into()));
    }
    if files_per_class == 0 {
        return Err(Error::BadSpec("files_per_class must be positive".into()));
    }
    if *size_range.start() == 0 || size_range.is_empty() {
        return Err(Error::BadSpec(format!(
            "size range {}..={} must be non-empty and exclude 0",
            size_range.start(),
            size_range.end()
        )));
    }

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut map = BTreeMap::new();
    for class in classes {
        let samples = (0..files_per_class)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
                let len = draw_size(&size_range, &mut rng);
                let bytes = class.generate(len, &mut rng);
                Sample::from_bytes(format!("{}-{i:04}.bin", class.name()), bytes)
            })
            .collect();
        map.insert(ClassLabel::new(class.name())?, samples);
    }
    LabeledCorpus::new(map)
}

/// Writes every in-memory sample to `<root>/<class>/<name>`.
pub fn write_corpus(corpus: &LabeledCorpus, root: &Path) -> Result<()> {
    for (label, samples) in corpus.classes() {
        let dir = root.join(label.as_str());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for sample in samples {
            let path = dir.join(&sample.name);
            match &sample.data {
                SampleData::Bytes(bytes) => {
                    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?
                }
                SampleData::File { path: src, .. } => {
                    fs::copy(src, &path).map_err(|e| Error::io(&path, e))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::bfd;

    #[test]
    fn same_seed_same_files() {
        let a = synth_corpus(&SynthClass::ALL, 3, 100..=5000, 9).unwrap();
        let b = synth_corpus(&SynthClass::ALL, 3, 100..=5000, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synth_corpus(&SynthClass::ALL, 3, 100..=5000, 10).unwrap());
        assert_eq!(a.labels().len(), 6);
    }

    #[test]
    fn sizes_respect_range() {
        let corpus = synth_corpus(&SynthClass::ALL, 20, 1024..=4096, 1).unwrap();
        for (_, s) in corpus.iter() {
            assert!((1024..=4096).contains(&(s.len() as usize)), "{}", s.len());
        }
    }

    #[test]
    fn uniform_random_bins_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 1 << 20;
        let data = SynthClass::UniformRandom.generate(n, &mut rng);
        let f = bfd(&data).unwrap();
        let p = 1.0 / 256.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for (i, &v) in f.as_slice().iter().enumerate() {
            assert!((v - p).abs() <= 3.0 * sigma, "bin {i}: {v}");
        }
    }

    #[test]
    fn generator_signatures() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let text = SynthClass::AsciiText.generate(20_000, &mut rng);
        assert!(text.iter().all(|b| b.is_ascii()));
        let markup = SynthClass::Markup.generate(20_000, &mut rng);
        let tag_mass = markup.iter().filter(|b| b"<>/=".contains(b)).count();
        assert!(tag_mass > 1000, "{tag_mass}");
        let low = SynthClass::LowEntropy.generate(20_000, &mut rng);
        assert!(low.iter().all(|b| LOW_ENTROPY_SYMBOLS.contains(b)));
        let saw = SynthClass::Sawtooth.generate(20_000, &mut rng);
        assert!(saw.iter().all(|&b| b < 192));
        assert!(saw.windows(2).all(|w| w[1] == w[0] + 1 || w[1] == 0));
        let mixed = SynthClass::Mixed.generate(20_001, &mut rng);
        assert_eq!(mixed.len(), 20_001);
        assert!(mixed[..10_000].iter().all(|b| b.is_ascii()));
    }

    #[test]
    fn bad_specs() {
        assert!(matches!(
            synth_corpus(&[SynthClass::Markup], 1, 1..=2, 0),
            Err(Error::BadSpec(_))
        ));
        assert!(matches!(
            synth_corpus(&[SynthClass::Markup, SynthClass::Markup], 1, 1..=2, 0),
            Err(Error::BadSpec(_))
        ));
        assert!(matches!(
            synth_corpus(&SynthClass::ALL, 1, 0..=2, 0),
            Err(Error::BadSpec(_))
        ));
        assert!("nope".parse::<SynthClass>().is_err());
        assert_eq!("low-entropy".parse::<SynthClass>().unwrap(), SynthClass::LowEntropy);
    }

    #[test]
    fn written_tree_reloads() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = synth_corpus(&SynthClass::ALL, 2, 64..=128, 3).unwrap();
        write_corpus(&corpus, tmp.path()).unwrap();
        let loaded = super::super::corpus::load_corpus(tmp.path()).unwrap();
        assert_eq!(loaded.labels(), corpus.labels());
        for ((_, a), (_, b)) in corpus.iter().zip(loaded.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.read().unwrap(), b.read().unwrap());
        }
    }
}
