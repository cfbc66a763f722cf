mod common;

use std::collections::BTreeMap;

use fileprint::pipeline::{
    classify, evaluate, extract_features, split, synth_corpus, train_model, ClassLabel,
    ConfusionMatrix, FileprintModel, LabeledCorpus, PipelineConfig, Sample, SynthClass,
};
use fileprint::Error;
use rand::seq::SliceRandom;
use rand::Rng;

fn label(s: &str) -> ClassLabel {
    ClassLabel::new(s).unwrap()
}

/// Files made entirely of 0x00 versus entirely of 0xFF, various lengths.
fn point_mass_corpus() -> LabeledCorpus {
    let mut map = BTreeMap::new();
    for (name, byte) in [("ones", 0xffu8), ("zeros", 0x00u8)] {
        let samples = (1..=4)
            .map(|i| Sample::from_bytes(format!("{name}{i}"), vec![byte; 100 * i]))
            .collect();
        map.insert(label(name), samples);
    }
    LabeledCorpus::new(map).unwrap()
}

fn small_config() -> PipelineConfig {
    PipelineConfig {
        n1: 6,
        n2: 2,
        aann_hidden: 5,
        classifier_hidden: 4,
        ..PipelineConfig::default()
    }
    .with_seed(3)
}

fn small_synth() -> LabeledCorpus {
    synth_corpus(&SynthClass::ALL, 12, 1024..=16 * 1024, 11).unwrap()
}

#[test]
fn point_masses_are_learned_perfectly() {
    let corpus = point_mass_corpus();
    let (model, summary) = train_model(&corpus, &small_config()).unwrap();
    assert_eq!(summary.training_accuracy, 1.0);
    // Two distinct inputs span one PCA direction; the rest are constant.
    assert_eq!(summary.degenerate_features, vec![1, 2, 3, 4, 5]);
    assert_eq!(classify(&model, &[0u8; 5000]).unwrap().label, label("zeros"));
    assert_eq!(classify(&model, &[0xffu8; 7]).unwrap().label, label("ones"));
}

#[test]
fn default_dimensions() {
    let corpus = small_synth();
    let config = PipelineConfig {
        aann_training: fileprint::TrainingConfig {
            max_epochs: 20,
            ..PipelineConfig::default().aann_training
        },
        classifier_training: fileprint::TrainingConfig {
            max_epochs: 20,
            ..PipelineConfig::default().classifier_training
        },
        ..PipelineConfig::default()
    };
    let (model, _) = train_model(&corpus, &config).unwrap();
    let sizes = |n: &fileprint::MlpNetwork| n.layers().iter().map(|l| l.size).collect::<Vec<_>>();
    assert_eq!(model.pca.dim(), 256);
    assert_eq!(model.pca.k(), 60);
    assert_eq!(sizes(&model.aann_encoder), vec![60, 40, 15]);
    assert_eq!(sizes(&model.classifier), vec![15, 25, 6]);
    assert_eq!(extract_features(&model, b"any content at all").unwrap().len(), 15);
}

#[test]
fn training_preconditions() {
    let mut one_class = BTreeMap::new();
    one_class.insert(label("a"), vec![Sample::from_bytes("x", vec![1]), Sample::from_bytes("y", vec![2])]);
    let err = train_model(&LabeledCorpus::new(one_class).unwrap(), &small_config()).unwrap_err();
    assert!(matches!(err, Error::TooFewClasses(1)));

    let corpus = point_mass_corpus();
    let (train, _) = split(&corpus, 0, 4, 0).unwrap();
    let err = train_model(&train, &small_config()).unwrap_err();
    assert!(matches!(err, Error::InsufficientFiles { available: 0, .. }));

    let bad = PipelineConfig { n1: 4, n2: 4, ..small_config() };
    assert!(matches!(train_model(&corpus, &bad), Err(Error::InvalidConfig(_))));
}

#[test]
fn classification_depends_only_on_byte_frequencies() {
    let corpus = small_synth();
    let (model, _) = train_model(&corpus, &small_config()).unwrap();
    let mut rng = common::rng(4);
    for (_, sample) in corpus.iter().take(20) {
        let original = sample.read().unwrap();
        let mut shuffled = original.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(
            extract_features(&model, &original).unwrap(),
            extract_features(&model, &shuffled).unwrap()
        );
        assert_eq!(classify(&model, &original).unwrap(), classify(&model, &shuffled).unwrap());
    }
    // Different files with the same histogram.
    assert_eq!(
        extract_features(&model, b"abcabc").unwrap(),
        extract_features(&model, b"cbacba").unwrap()
    );
    assert!(matches!(classify(&model, &[]), Err(Error::EmptyInput)));
}

#[test]
fn fake_header_does_not_change_label() {
    let corpus = small_synth();
    let (model, _) = train_model(&corpus, &small_config()).unwrap();
    let mut rng = common::rng(8);
    for class in SynthClass::ALL {
        let body = class.generate(1 << 20, &mut rng);
        let mut spoofed = b"%PDF".to_vec();
        spoofed.extend_from_slice(&body);
        assert_eq!(
            classify(&model, &body).unwrap().label,
            classify(&model, &spoofed).unwrap().label,
            "{}",
            class.name()
        );
    }
}

#[test]
fn model_document_round_trips() {
    let corpus = small_synth();
    let (model, _) = train_model(&corpus, &small_config()).unwrap();
    let json = model.to_json();
    let loaded = FileprintModel::from_json(&json).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(loaded.to_json(), json);

    let mut rng = common::rng(5);
    for _ in 0..100 {
        let len = rng.random_range(1..4096);
        let data: Vec<u8> = (0..len).map(|_| rng.random_range(0..=255u8)).collect();
        let a = classify(&model, &data).unwrap();
        let b = classify(&loaded, &data).unwrap();
        assert_eq!(a.label, b.label);
        assert!(a.scores.iter().zip(&b.scores).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    let mut sink = Vec::new();
    model.save(&mut sink).unwrap();
    assert_eq!(FileprintModel::load(&sink[..]).unwrap(), model);
}

#[test]
fn damaged_documents_are_rejected() {
    let (model, _) = train_model(&point_mass_corpus(), &small_config()).unwrap();
    let json = model.to_json();

    let truncated = &json[..json.len() / 2];
    assert!(matches!(FileprintModel::from_json(truncated), Err(Error::CorruptModel { .. })));

    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["format_version"] = serde_json::json!(2);
    assert!(matches!(
        FileprintModel::from_json(&value.to_string()),
        Err(Error::VersionMismatch { found: 2, .. })
    ));

    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["classifier"]["weights"][1] = serde_json::json!([[1.0]]);
    match FileprintModel::from_json(&value.to_string()) {
        Err(Error::CorruptModel { path, .. }) => assert!(path.starts_with("classifier"), "{path}"),
        other => panic!("unexpected {other:?}"),
    }

    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["standardizer"]["std"][0] = serde_json::json!(0.0);
    match FileprintModel::from_json(&value.to_string()) {
        Err(Error::CorruptModel { path, .. }) => assert_eq!(path, "standardizer.std[0]"),
        other => panic!("unexpected {other:?}"),
    }

    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["labels"] = serde_json::json!(["ones", ""]);
    match FileprintModel::from_json(&value.to_string()) {
        Err(Error::CorruptModel { path, .. }) => assert!(path.starts_with("labels"), "{path}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn model_document_layout() {
    let (model, _) = train_model(&point_mass_corpus(), &small_config()).unwrap();
    let json = model.to_json();
    let keys: Vec<&str> = [
        "\"format_version\"",
        "\"labels\"",
        "\"pca\"",
        "\"standardizer\"",
        "\"aann_encoder\"",
        "\"classifier\"",
        "\"config\"",
    ]
    .into_iter()
    .collect();
    let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    // Matrices are arrays of rows.
    assert_eq!(value["pca"]["basis"].as_array().unwrap().len(), 6);
    assert_eq!(value["pca"]["basis"][0].as_array().unwrap().len(), 256);
}

#[test]
fn evaluation_contract() {
    let corpus = point_mass_corpus();
    let (model, _) = train_model(&corpus, &small_config()).unwrap();
    let (matrix, accuracy) = evaluate(&model, &corpus).unwrap();
    assert_eq!(accuracy, 1.0);
    assert_eq!(matrix.column_sums(), vec![4, 4]);
    assert_eq!(matrix.trace(), 8);

    let (_, none) = split(&corpus, 0, 0, 0).unwrap();
    assert!(matches!(evaluate(&model, &none), Err(Error::EmptyCorpus)));

    let mut other = BTreeMap::new();
    other.insert(label("gif"), vec![Sample::from_bytes("g", vec![1, 2, 3])]);
    let other = LabeledCorpus::new(other).unwrap();
    assert!(matches!(evaluate(&model, &other), Err(Error::UnknownLabel(l)) if l == "gif"));
}

#[test]
fn published_confusion_counts() {
    let labels = ["doc", "exe", "gif", "htm", "jpg", "pdf"].map(label).to_vec();
    let mut cells = vec![vec![0u64; 6]; 6];
    for (i, d) in [30, 28, 29, 30, 30, 30].into_iter().enumerate() {
        cells[i][i] = d;
    }
    cells[5][1] = 2;
    cells[5][2] = 1;
    let m = ConfusionMatrix::from_counts(labels, cells).unwrap();
    assert_eq!(m.column_sums(), vec![30; 6]);
    assert_eq!((m.trace(), m.total()), (177, 180));
    assert!(m.format_table().ends_with("accuracy=0.9833\n"));
    assert!(m.to_csv().contains("\npdf,0,2,1,0,0,30\n"));
}

#[test]
fn training_is_reproducible() {
    let corpus = small_synth();
    let a = train_model(&corpus, &small_config()).unwrap().0.to_json();
    let b = train_model(&corpus, &small_config()).unwrap().0.to_json();
    assert_eq!(a, b);
}
