use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::cv::{ModelKind, PredictionRow};
use super::metrics::{auc, macro_auc, rmse};
use crate::dataset::SkillVocabulary;
use crate::math::{mean, std_dev};

/// Scores of one model on one fold's test students.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldScore {
    pub model: String,
    pub dataset: String,
    pub fold: usize,
    /// Pooled over all predictions; absent when only one outcome occurs.
    pub auc: Option<f64>,
    pub rmse: Option<f64>,
    /// Mean of per-skill AUCs.
    pub macro_auc: Option<f64>,
    pub n_predictions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FoldScore {
    pub fn from_predictions(model: ModelKind, dataset: &str, fold: usize, rows: &[PredictionRow]) -> Self {
        let pairs: Vec<(f64, bool)> = rows.iter().map(|r| (r.prob, r.correct)).collect();
        let per_skill: Vec<_> = rows.iter().map(|r| (r.skill, r.prob, r.correct)).collect();
        let a = auc(&pairs);
        FoldScore {
            model: model.tag().into(),
            dataset: dataset.into(),
            fold,
            note: a.as_ref().err().map(|e| e.to_string()),
            auc: a.ok(),
            rmse: rmse(&pairs).ok(),
            macro_auc: macro_auc(&per_skill).ok().map(|m| m.0),
            n_predictions: rows.len(),
        }
    }
}

/// Mean and sample standard deviation across folds with a defined score.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Aggregate {
    fn of(values: impl Iterator<Item = Option<f64>>) -> Option<Self> {
        let v: Vec<f64> = values.flatten().collect();
        (!v.is_empty()).then(|| Aggregate {
            mean: mean(&v),
            std: if v.len() > 1 { std_dev(&v) } else { 0.0 },
            n: v.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: String,
    pub dataset: String,
    pub auc: Option<Aggregate>,
    pub rmse: Option<Aggregate>,
    pub macro_auc: Option<Aggregate>,
    pub n_predictions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub folds: Vec<FoldScore>,
    pub summary: Vec<ModelSummary>,
    pub config: BTreeMap<String, String>,
}

impl EvalReport {
    pub fn new(folds: Vec<FoldScore>, config: BTreeMap<String, String>) -> Self {
        let mut keys: Vec<(String, String)> = folds.iter().map(|f| (f.model.clone(), f.dataset.clone())).collect();
        keys.dedup();
        let summary = keys
            .into_iter()
            .map(|(model, dataset)| {
                let rows: Vec<&FoldScore> = folds.iter().filter(|f| f.model == model && f.dataset == dataset).collect();
                ModelSummary {
                    auc: Aggregate::of(rows.iter().map(|f| f.auc)),
                    rmse: Aggregate::of(rows.iter().map(|f| f.rmse)),
                    macro_auc: Aggregate::of(rows.iter().map(|f| f.macro_auc)),
                    n_predictions: rows.iter().map(|f| f.n_predictions).sum(),
                    model,
                    dataset,
                }
            })
            .collect();
        EvalReport { folds, summary, config }
    }

    pub fn summary_for(&self, model: ModelKind) -> Option<&ModelSummary> {
        self.summary.iter().find(|s| s.model == model.tag())
    }

    /// Mean pooled AUC of a model across folds.
    pub fn mean_auc(&self, model: ModelKind) -> Option<f64> {
        self.summary_for(model)?.auc.as_ref().map(|a| a.mean)
    }

    /// One row per fold, then an `all` row per model holding fold means
    /// and standard deviations.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "model",
            "dataset",
            "fold",
            "auc",
            "auc_std",
            "rmse",
            "rmse_std",
            "macro_auc",
            "n_predictions",
        ])?;
        for f in &self.folds {
            w.write_record([
                f.model.as_str(),
                f.dataset.as_str(),
                &f.fold.to_string(),
                &opt(f.auc),
                "",
                &opt(f.rmse),
                "",
                &opt(f.macro_auc),
                &f.n_predictions.to_string(),
            ])?;
        }
        for s in &self.summary {
            let m = |a: &Option<Aggregate>| opt(a.as_ref().map(|a| a.mean));
            let sd = |a: &Option<Aggregate>| opt(a.as_ref().map(|a| a.std));
            w.write_record([
                s.model.as_str(),
                s.dataset.as_str(),
                "all",
                &m(&s.auc),
                &sd(&s.auc),
                &m(&s.rmse),
                &sd(&s.rmse),
                &m(&s.macro_auc),
                &s.n_predictions.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes `model,fold,student,step,skill,prob,correct` rows.
pub fn write_predictions<W: Write>(out: W, vocab: &SkillVocabulary, rows: &[PredictionRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "fold", "student", "step", "skill", "prob", "correct"])?;
    for r in rows {
        w.write_record([
            r.model.tag(),
            &r.fold.to_string(),
            &r.student,
            &r.step.to_string(),
            vocab.tag(r.skill),
            &r.prob.to_string(),
            if r.correct { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}
