use std::collections::BTreeSet;

use ktbench::dataset::{generate_synthetic, SynthConfig};
use ktbench::eval::{run_cv, sweep, ExperimentConfig, ModelKind, SweepAxis};
use ktbench::neural::CellKind;

fn quick_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.train.hidden = 8;
    cfg.train.epochs = 2;
    cfg.train.cell = CellKind::Vanilla;
    cfg.seed = 3;
    cfg
}

fn small_synth() -> ktbench::dataset::SyntheticData {
    generate_synthetic(&SynthConfig {
        n_students: 60,
        attempts_per_student: 60,
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn report_has_five_folds_and_an_aggregate() {
    let syn = small_synth();
    let cv = run_cv(&syn.dataset, &[ModelKind::Bkt], &quick_config(), "synth").unwrap();
    assert_eq!(cv.report.folds.len(), 5);
    assert_eq!(cv.report.summary.len(), 1);
    let mut csv = Vec::new();
    cv.report.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 7);
    assert!(cv.report.mean_auc(ModelKind::Bkt).unwrap() > 0.5);
}

#[test]
fn every_model_sees_the_same_test_students() {
    let syn = small_synth();
    let cv = run_cv(&syn.dataset, &ModelKind::ALL, &quick_config(), "synth").unwrap();
    for fold in 0..5 {
        let sets: Vec<BTreeSet<&str>> = ModelKind::ALL
            .iter()
            .map(|&m| {
                cv.folds
                    .iter()
                    .find(|f| f.model == m && f.fold == fold)
                    .unwrap()
                    .predictions
                    .iter()
                    .map(|r| r.student.as_str())
                    .collect()
            })
            .collect();
        assert!(sets.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn strict_mode_aligns_prediction_sets() {
    let syn = small_synth();
    let cfg = ExperimentConfig {
        strict: true,
        ..quick_config()
    };
    let cv = run_cv(&syn.dataset, &[ModelKind::Irt, ModelKind::Dkt], &cfg, "synth").unwrap();
    let keys = |m: ModelKind| -> BTreeSet<(String, usize)> {
        cv.folds
            .iter()
            .filter(|f| f.model == m)
            .flat_map(|f| f.predictions.iter().map(|r| (r.student.clone(), r.step)))
            .collect()
    };
    assert_eq!(keys(ModelKind::Irt), keys(ModelKind::Dkt));

    let loose = run_cv(&syn.dataset, &[ModelKind::Irt], &quick_config(), "synth").unwrap();
    let n_strict = cv.report.summary_for(ModelKind::Irt).unwrap().n_predictions;
    let n_loose = loose.report.summary_for(ModelKind::Irt).unwrap().n_predictions;
    assert_eq!(n_loose - n_strict, 60);
}

#[test]
fn single_cluster_runs() {
    let syn = small_synth();
    let cfg = ExperimentConfig {
        n_clusters: 1,
        ..quick_config()
    };
    let cv = run_cv(&syn.dataset, &[ModelKind::DktDsc], &cfg, "synth").unwrap();
    assert_eq!(cv.report.folds.len(), 5);
    assert!(cv.folds.iter().flat_map(|f| &f.final_labels).all(|(_, l)| *l <= 2));
}

#[test]
fn parallel_folds_match_serial() {
    let syn = small_synth();
    let models = [ModelKind::Pfa, ModelKind::DktDsc];
    let a = run_cv(&syn.dataset, &models, &quick_config(), "synth").unwrap();
    let b = run_cv(
        &syn.dataset,
        &models,
        &ExperimentConfig {
            jobs: 4,
            ..quick_config()
        },
        "synth",
    )
    .unwrap();
    assert_eq!(a.report.to_json(), b.report.to_json());
}

#[test]
fn sweep_grids_and_planted_groups() {
    let syn = generate_synthetic(&SynthConfig::default()).unwrap();
    let cfg = ExperimentConfig {
        jobs: 2,
        ..quick_config()
    };
    let rows = sweep(&syn.dataset, SweepAxis::Clusters, &cfg, "synth", Some(&syn.groups)).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
    for r in rows.iter().filter(|r| r.value <= 4) {
        let a = r.agreement.unwrap();
        assert!(a > 0.8, "K = {}: agreement {a}", r.value);
    }
    let small = small_synth();
    let rows = sweep(&small.dataset, SweepAxis::IntervalLen, &quick_config(), "synth", None).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![20, 30, 50, 100]);
    assert!(rows.iter().all(|r| r.agreement.is_none()));
}
