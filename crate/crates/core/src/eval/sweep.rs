use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::agreement::adjusted_agreement;
use super::cv::{run_cv, ExperimentConfig, ModelKind};
use crate::clustering::CLUSTER_SWEEP;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::math::mean;
use crate::segmentation::INTERVAL_SWEEP;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    IntervalLen,
    Clusters,
}

impl SweepAxis {
    pub fn grid(self) -> [usize; 4] {
        match self {
            SweepAxis::IntervalLen => INTERVAL_SWEEP,
            SweepAxis::Clusters => CLUSTER_SWEEP,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SweepAxis::IntervalLen => "interval_len",
            SweepAxis::Clusters => "clusters",
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: usize) {
        match self {
            SweepAxis::IntervalLen => cfg.interval_len = value,
            SweepAxis::Clusters => cfg.n_clusters = value,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" | "interval_len" | "interval-len" => Ok(SweepAxis::IntervalLen),
            "clusters" | "cluster" => Ok(SweepAxis::Clusters),
            other => Err(Error::config(format!(
                "unknown sweep axis `{other}` (expected interval or clusters)"
            ))),
        }
    }
}

/// Group-conditioned model scores at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
    pub rmse_mean: Option<f64>,
    /// Mean over folds of the agreement between test students' last-interval
    /// groups and known groups, when those are given.
    pub agreement: Option<f64>,
}

/// Runs the group-conditioned model at every grid point of `axis`.
pub fn sweep(
    data: &Dataset,
    axis: SweepAxis,
    cfg: &ExperimentConfig,
    dataset_name: &str,
    known_groups: Option<&BTreeMap<String, usize>>,
) -> Result<Vec<SweepRow>> {
    axis.grid()
        .into_iter()
        .map(|value| {
            let mut c = cfg.clone();
            axis.apply(&mut c, value);
            let cv = run_cv(data, &[ModelKind::DktDsc], &c, dataset_name)?;
            let s = cv.report.summary_for(ModelKind::DktDsc);
            let agreement = known_groups.and_then(|truth| {
                let per_fold: Vec<f64> = cv
                    .folds
                    .iter()
                    .filter_map(|f| fold_agreement(&f.final_labels, truth))
                    .collect();
                (!per_fold.is_empty()).then(|| mean(&per_fold))
            });
            Ok(SweepRow {
                value,
                auc_mean: s.and_then(|s| s.auc.as_ref()).map(|a| a.mean),
                auc_std: s.and_then(|s| s.auc.as_ref()).map(|a| a.std),
                rmse_mean: s.and_then(|s| s.rmse.as_ref()).map(|a| a.mean),
                agreement,
            })
        })
        .collect()
}

/// Agreement of `(student, group label)` pairs with known groups.
pub fn fold_agreement(labels: &[(String, usize)], truth: &BTreeMap<String, usize>) -> Option<f64> {
    let pairs: Vec<(usize, usize)> = labels
        .iter()
        .filter_map(|(s, l)| truth.get(s).map(|&g| (*l, g)))
        .collect();
    adjusted_agreement(&pairs)
}

pub fn write_sweep<W: Write>(out: W, axis: SweepAxis, rows: &[SweepRow]) -> csv::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([axis.tag(), "auc", "auc_std", "rmse", "agreement"])?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            opt(r.auc_mean),
            opt(r.auc_std),
            opt(r.rmse_mean),
            opt(r.agreement),
        ])?;
    }
    w.flush()?;
    Ok(())
}
