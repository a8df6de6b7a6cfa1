use std::fmt;
use std::str::FromStr;

use log::info;
use rayon::prelude::*;

use super::report::{EvalReport, FoldScore};
use crate::ability::ProfileNormalization;
use crate::baselines::{
    bkt_fit_em, bkt_predict, bkt_update, irt_fit, pfa_features, pfa_fit, pfa_predict, BktFitOptions,
    BktSkillFit, IrtFitOptions, IrtObservation, IrtParams, PfaCounters, PfaFitOptions, PfaParams,
};
use crate::clustering::{
    fit_kmeans, label_sequence, pooled_profiles, ClusterModel, DEFAULT_CLUSTERS, DEFAULT_KMEANS_ITERATIONS,
};
use crate::dataset::{student_level_split, Dataset, FoldSplit, SkillId, StudentSequence};
use crate::error::{Error, Result};
use crate::neural::{encode_student, forward_student, train, EncodedStudent, GroupLabels, RnnParams, TrainConfig};
use crate::segmentation::{segment_sequence, DEFAULT_INTERVAL_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Irt,
    Bkt,
    Pfa,
    Dkt,
    DktDsc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Bkt,
        ModelKind::Irt,
        ModelKind::Pfa,
        ModelKind::Dkt,
        ModelKind::DktDsc,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Irt => "irt",
            ModelKind::Bkt => "bkt",
            ModelKind::Pfa => "pfa",
            ModelKind::Dkt => "dkt",
            ModelKind::DktDsc => "dktdsc",
        }
    }

    /// Recurrent models, which have no prediction for a student's first attempt.
    pub fn is_recurrent(self) -> bool {
        matches!(self, ModelKind::Dkt | ModelKind::DktDsc)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown model {s:?}; expected irt, bkt, pfa, dkt or dktdsc")))
    }
}

/// Everything that determines a cross-validation run besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n_folds: usize,
    /// Seeds the folds; per-fold model seeds are derived from it.
    pub seed: u64,
    pub interval_len: usize,
    pub n_clusters: usize,
    pub kmeans_iterations: usize,
    pub normalization: ProfileNormalization,
    /// `train.seed` is ignored in favour of the derived per-fold seed.
    pub train: TrainConfig,
    pub irt: IrtFitOptions,
    pub bkt: BktFitOptions,
    pub pfa: PfaFitOptions,
    /// Score every model on the same steps: drop each student's first attempt.
    pub strict: bool,
    /// Worker threads for folds and models.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_folds: 5,
            seed: 0,
            interval_len: DEFAULT_INTERVAL_LEN,
            n_clusters: DEFAULT_CLUSTERS,
            kmeans_iterations: DEFAULT_KMEANS_ITERATIONS,
            normalization: ProfileNormalization::Cumulative,
            train: TrainConfig::default(),
            irt: IrtFitOptions::default(),
            bkt: BktFitOptions::default(),
            pfa: PfaFitOptions::default(),
            strict: false,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn fold_seed(&self, fold: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(fold as u64 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval_len == 0 {
            return Err(Error::config("interval length must be positive"));
        }
        if self.n_clusters == 0 {
            return Err(Error::config("need at least one cluster"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs must be positive"));
        }
        self.train.validate()
    }
}

/// One scored prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub student: String,
    /// Position of the predicted attempt in the student's sequence.
    pub step: usize,
    pub skill: SkillId,
    pub prob: f64,
    pub correct: bool,
    pub model: ModelKind,
    pub fold: usize,
}

/// Parameters fitted on one fold's training students.
#[derive(Clone, Debug)]
pub enum FittedModel {
    Irt(IrtParams),
    Bkt(Vec<BktSkillFit>),
    Pfa(PfaParams),
    Rnn {
        params: RnnParams,
        clusters: Option<ClusterModel>,
        loss_trace: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub model: ModelKind,
    pub fold: usize,
    pub predictions: Vec<PredictionRow>,
    pub fitted: FittedModel,
    /// Group label of each test student's last interval (group-conditioned model only).
    pub final_labels: Vec<(String, usize)>,
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub folds: Vec<FoldOutcome>,
}

/// Item key for the item-level model; the skill stands in when items are absent.
fn item_key(data: &Dataset, seq: &StudentSequence, i: usize) -> String {
    let r = &seq.records[i];
    match &r.item {
        Some(item) => item.clone(),
        None => format!("skill:{}", data.vocab.tag(r.skill)),
    }
}

fn rows_for(seq: &StudentSequence, probs: &[f64], first_step: usize, model: ModelKind, fold: usize) -> Vec<PredictionRow> {
    probs
        .iter()
        .zip(&seq.records[first_step..])
        .enumerate()
        .map(|(k, (&prob, r))| PredictionRow {
            student: seq.student.clone(),
            step: first_step + k,
            skill: r.skill,
            prob,
            correct: r.correct,
            model,
            fold,
        })
        .collect()
}

fn run_irt(data: &Dataset, train_seqs: &[&StudentSequence], test_seqs: &[&StudentSequence], cfg: &ExperimentConfig, fold: usize) -> Result<(Vec<PredictionRow>, FittedModel)> {
    let items: Vec<Vec<String>> = train_seqs
        .iter()
        .map(|s| (0..s.len()).map(|i| item_key(data, s, i)).collect())
        .collect();
    let obs: Vec<IrtObservation<'_>> = train_seqs
        .iter()
        .zip(&items)
        .flat_map(|(s, its)| {
            s.records.iter().zip(its).map(|(r, item)| IrtObservation {
                student: &s.student,
                item,
                correct: r.correct,
            })
        })
        .collect();
    let fit = irt_fit(&obs, cfg.irt)?;
    let mut rows = Vec::new();
    for s in test_seqs {
        let keys: Vec<String> = (0..s.len()).map(|i| item_key(data, s, i)).collect();
        let attempts: Vec<(&str, bool)> = keys.iter().map(|k| k.as_str()).zip(s.records.iter().map(|r| r.correct)).collect();
        rows.extend(rows_for(s, &fit.params.predict_sequence(&attempts), 0, ModelKind::Irt, fold));
    }
    Ok((rows, FittedModel::Irt(fit.params)))
}

fn run_bkt(data: &Dataset, train_seqs: &[&StudentSequence], test_seqs: &[&StudentSequence], cfg: &ExperimentConfig, fold: usize) -> (Vec<PredictionRow>, FittedModel) {
    let n = data.n_skills();
    let mut per_skill: Vec<Vec<Vec<bool>>> = vec![Vec::new(); n];
    for s in train_seqs {
        let mut own: Vec<Vec<bool>> = vec![Vec::new(); n];
        for r in &s.records {
            own[r.skill].push(r.correct);
        }
        for (k, answers) in own.into_iter().enumerate() {
            if !answers.is_empty() {
                per_skill[k].push(answers);
            }
        }
    }
    let seed = cfg.fold_seed(fold);
    let fits: Vec<BktSkillFit> = per_skill
        .iter()
        .enumerate()
        .map(|(k, seqs)| bkt_fit_em(seqs, cfg.bkt, seed.wrapping_add(k as u64)))
        .collect();
    let mut rows = Vec::new();
    for s in test_seqs {
        let mut mastery: Vec<f64> = fits.iter().map(|f| f.params.l0).collect();
        let probs: Vec<f64> = s
            .records
            .iter()
            .map(|r| {
                let p = &fits[r.skill].params;
                let pred = bkt_predict(mastery[r.skill], p);
                mastery[r.skill] = bkt_update(mastery[r.skill], r.correct, p).next;
                pred
            })
            .collect();
        rows.extend(rows_for(s, &probs, 0, ModelKind::Bkt, fold));
    }
    (rows, FittedModel::Bkt(fits))
}

fn run_pfa(data: &Dataset, train_seqs: &[&StudentSequence], test_seqs: &[&StudentSequence], cfg: &ExperimentConfig, fold: usize) -> (Vec<PredictionRow>, FittedModel) {
    let n = data.n_skills();
    let obs = pfa_features(train_seqs.iter().copied(), n);
    let fit = pfa_fit(&obs, n, cfg.pfa);
    let mut rows = Vec::new();
    for s in test_seqs {
        let mut counters = PfaCounters::new(n);
        let probs: Vec<f64> = s
            .records
            .iter()
            .map(|r| {
                let p = pfa_predict(&fit.params, &[r.skill], &counters);
                counters.observe(&[r.skill], r.correct);
                p
            })
            .collect();
        rows.extend(rows_for(s, &probs, 0, ModelKind::Pfa, fold));
    }
    (rows, FittedModel::Pfa(fit.params))
}

struct RnnRun {
    rows: Vec<PredictionRow>,
    fitted: FittedModel,
    final_labels: Vec<(String, usize)>,
}

fn run_rnn(
    data: &Dataset,
    train_seqs: &[&StudentSequence],
    test_seqs: &[&StudentSequence],
    cfg: &ExperimentConfig,
    fold: usize,
    grouped: bool,
) -> Result<RnnRun> {
    let n = data.n_skills();
    let seed = cfg.fold_seed(fold);
    let model = if grouped {
        ModelKind::DktDsc
    } else {
        ModelKind::Dkt
    };
    let train_segs = train_seqs
        .iter()
        .map(|s| segment_sequence(s, cfg.interval_len))
        .collect::<Result<Vec<_>>>()?;
    let test_segs = test_seqs
        .iter()
        .map(|s| segment_sequence(s, cfg.interval_len))
        .collect::<Result<Vec<_>>>()?;

    let clusters = if grouped {
        let points = pooled_profiles(train_segs.iter().map(|s| s.as_slice()), n, cfg.normalization);
        let fit = fit_kmeans(&points, cfg.n_clusters, cfg.kmeans_iterations, seed)?;
        Some(fit.model)
    } else {
        None
    };
    let encode = |segs: &[crate::segmentation::Segment<'_>]| -> Result<(EncodedStudent, Option<usize>)> {
        match &clusters {
            Some(c) => {
                let labels = label_sequence(c, segs, n, cfg.normalization)?;
                let enc = encode_student(
                    segs,
                    n,
                    Some(GroupLabels {
                        labels: &labels,
                        n_groups: c.n_labels(),
                    }),
                )?;
                Ok((enc, labels.last().copied()))
            }
            None => Ok((encode_student(segs, n, None)?, None)),
        }
    };
    let train_enc: Vec<EncodedStudent> = train_segs
        .iter()
        .map(|s| encode(s).map(|e| e.0))
        .collect::<Result<_>>()?;
    let tcfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let outcome = train(&train_enc, n, &tcfg)?;

    let mut rows = Vec::new();
    let mut final_labels = Vec::new();
    for (s, segs) in test_seqs.iter().zip(&test_segs) {
        let (enc, last) = encode(segs)?;
        let probs = forward_student(&outcome.params, &enc)?;
        rows.extend(rows_for(s, &probs, 1, model, fold));
        if let Some(l) = last {
            final_labels.push((s.student.clone(), l));
        }
    }
    Ok(RnnRun {
        rows,
        fitted: FittedModel::Rnn {
            params: outcome.params,
            clusters,
            loss_trace: outcome.loss_trace,
        },
        final_labels,
    })
}

/// Fits one model on a fold's training students and predicts its test
/// students attempt by attempt.
pub fn fit_and_predict(data: &Dataset, model: ModelKind, split: &FoldSplit, cfg: &ExperimentConfig) -> Result<FoldOutcome> {
    let train_seqs = data.select(&split.train);
    let test_seqs = data.select(&split.test);
    let fold = split.fold;
    let (mut predictions, fitted, final_labels) = match model {
        ModelKind::Irt => {
            let (r, f) = run_irt(data, &train_seqs, &test_seqs, cfg, fold)?;
            (r, f, Vec::new())
        }
        ModelKind::Bkt => {
            let (r, f) = run_bkt(data, &train_seqs, &test_seqs, cfg, fold);
            (r, f, Vec::new())
        }
        ModelKind::Pfa => {
            let (r, f) = run_pfa(data, &train_seqs, &test_seqs, cfg, fold);
            (r, f, Vec::new())
        }
        ModelKind::Dkt | ModelKind::DktDsc => {
            let run = run_rnn(data, &train_seqs, &test_seqs, cfg, fold, model == ModelKind::DktDsc)?;
            (run.rows, run.fitted, run.final_labels)
        }
    };
    if cfg.strict {
        predictions.retain(|r| r.step > 0);
    }
    Ok(FoldOutcome {
        model,
        fold,
        predictions,
        fitted,
        final_labels,
    })
}

/// Student-level k-fold cross-validation of every model in `models` on the
/// same folds.
pub fn run_cv(data: &Dataset, models: &[ModelKind], cfg: &ExperimentConfig, dataset_name: &str) -> Result<CvOutcome> {
    cfg.validate()?;
    let folds = student_level_split(&data.students(), cfg.n_folds, cfg.seed)?;
    let tasks: Vec<(ModelKind, &FoldSplit)> = models
        .iter()
        .flat_map(|&m| folds.iter().map(move |f| (m, f)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<FoldOutcome>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(m, split)| {
                info!("{m} fold {}: {} train, {} test students", split.fold, split.train.len(), split.test.len());
                fit_and_predict(data, m, split, cfg).map_err(|e| Error::Fold {
                    fold: split.fold,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let scores: Vec<FoldScore> = outcomes
        .iter()
        .map(|o| FoldScore::from_predictions(o.model, dataset_name, o.fold, &o.predictions))
        .collect();
    Ok(CvOutcome {
        report: EvalReport::new(scores, cfg.snapshot()),
        folds: outcomes,
    })
}
