use ktbench::dataset::{generate_synthetic, SynthConfig};
use ktbench::neural::{encode_student, train, CellKind, EncodedStudent, RnnParams, TrainConfig};
use ktbench::segmentation::segment_sequence;

fn encoded(n_students: usize) -> (Vec<EncodedStudent>, usize) {
    let syn = generate_synthetic(&SynthConfig {
        n_students,
        attempts_per_student: 40,
        ..SynthConfig::default()
    })
    .unwrap();
    let n = syn.dataset.n_skills();
    let students = syn
        .dataset
        .sequences
        .iter()
        .map(|s| encode_student(&segment_sequence(s, 20).unwrap(), n, None).unwrap())
        .collect();
    (students, n)
}

fn small_config() -> TrainConfig {
    TrainConfig {
        hidden: 16,
        epochs: 5,
        cell: CellKind::Vanilla,
        seed: 4,
        ..TrainConfig::default()
    }
}

#[test]
fn loss_falls_within_five_epochs() {
    let (students, n) = encoded(60);
    for cell in [CellKind::Vanilla, CellKind::Gated] {
        let out = train(&students, n, &TrainConfig { cell, ..small_config() }).unwrap();
        assert_eq!(out.loss_trace.len(), 6);
        assert!(out.loss_trace[5] < out.loss_trace[0], "{cell}: {:?}", out.loss_trace);
    }
}

#[test]
fn same_seed_same_parameters() {
    let (students, n) = encoded(30);
    let a = train(&students, n, &small_config()).unwrap();
    let b = train(&students, n, &small_config()).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.loss_trace, b.loss_trace);
    let c = train(&students, n, &TrainConfig { seed: 5, ..small_config() }).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn zero_epochs_returns_initialization() {
    let (students, n) = encoded(10);
    let cfg = TrainConfig {
        epochs: 0,
        ..small_config()
    };
    let out = train(&students, n, &cfg).unwrap();
    assert_eq!(out.params, RnnParams::init(cfg.cell, 2 * n, cfg.hidden, n, cfg.seed));
    assert_eq!(out.loss_trace.len(), 1);
}

#[test]
fn rejects_bad_configuration() {
    let (students, n) = encoded(5);
    for cfg in [
        TrainConfig { dropout: 1.0, ..small_config() },
        TrainConfig { hidden: 0, ..small_config() },
        TrainConfig { batch_size: 0, ..small_config() },
    ] {
        assert!(train(&students, n, &cfg).is_err());
    }
    assert!(train(&[], n, &small_config()).is_err());
}
