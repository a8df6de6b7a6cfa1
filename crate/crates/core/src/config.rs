//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key can also
//! be set from the command line; a run writes the full resolved set back
//! out so that it can be repeated exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ability::ProfileNormalization;
use crate::dataset::DataFormat;
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, ModelKind};

pub const SEED_ENV: &str = "KTBENCH_SEED";

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(format!("invalid value {value:?} for `{key}`"))),
    }
}

pub fn parse_normalization(s: &str) -> Result<ProfileNormalization> {
    match s.trim() {
        "cumulative" => Ok(ProfileNormalization::Cumulative),
        "per-interval" => Ok(ProfileNormalization::PerInterval),
        other => Err(Error::config(format!(
            "unknown normalization `{other}` (expected cumulative or per-interval)"
        ))),
    }
}

pub fn normalization_tag(n: ProfileNormalization) -> &'static str {
    match n {
        ProfileNormalization::Cumulative => "cumulative",
        ProfileNormalization::PerInterval => "per-interval",
    }
}

pub fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    if s.trim() == "all" {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut models = s
        .split(',')
        .map(|m| m.trim().parse())
        .collect::<Result<Vec<ModelKind>>>()?;
    models.sort();
    models.dedup();
    if models.is_empty() {
        return Err(Error::config("no model given"));
    }
    Ok(models)
}

impl ExperimentConfig {
    /// Every setting as text, keyed as in config files.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let t = &self.train;
        let caps = match self.bkt.caps {
            Some((g, s)) => format!("{g},{s}"),
            None => "none".into(),
        };
        [
            ("folds", self.n_folds.to_string()),
            ("seed", self.seed.to_string()),
            ("interval_len", self.interval_len.to_string()),
            ("clusters", self.n_clusters.to_string()),
            ("kmeans_iterations", self.kmeans_iterations.to_string()),
            ("normalization", normalization_tag(self.normalization).into()),
            ("hidden", t.hidden.to_string()),
            ("batch", t.batch_size.to_string()),
            ("lr", t.learning_rate.to_string()),
            ("epochs", t.epochs.to_string()),
            ("dropout", t.dropout.to_string()),
            ("cell", t.cell.to_string()),
            ("clip_threshold", t.clip_threshold.to_string()),
            ("clip_norm", t.clip_norm.to_string()),
            ("irt_prior_variance", self.irt.prior_variance.to_string()),
            ("irt_max_sweeps", self.irt.max_newton_steps.to_string()),
            ("irt_tol", self.irt.tol.to_string()),
            ("bkt_max_iters", self.bkt.max_iters.to_string()),
            ("bkt_tol", self.bkt.tol.to_string()),
            ("bkt_caps", caps),
            ("pfa_l2", self.pfa.l2.to_string()),
            ("pfa_lr", self.pfa.learning_rate.to_string()),
            ("pfa_max_iters", self.pfa.max_iters.to_string()),
            ("pfa_tol", self.pfa.tol.to_string()),
            ("strict", self.strict.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
    }

    /// Applies one setting. Returns `Ok(false)` for keys it does not know.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let t = &mut self.train;
        match key {
            "folds" => self.n_folds = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "interval_len" => self.interval_len = parse(key, value)?,
            "clusters" => self.n_clusters = parse(key, value)?,
            "kmeans_iterations" => self.kmeans_iterations = parse(key, value)?,
            "normalization" => self.normalization = parse_normalization(value)?,
            "hidden" => t.hidden = parse(key, value)?,
            "batch" => t.batch_size = parse(key, value)?,
            "lr" => t.learning_rate = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "dropout" => t.dropout = parse(key, value)?,
            "cell" => t.cell = value.trim().parse()?,
            "clip_threshold" => t.clip_threshold = parse(key, value)?,
            "clip_norm" => t.clip_norm = parse(key, value)?,
            "irt_prior_variance" => self.irt.prior_variance = parse(key, value)?,
            "irt_max_sweeps" => self.irt.max_newton_steps = parse(key, value)?,
            "irt_tol" => self.irt.tol = parse(key, value)?,
            "bkt_max_iters" => self.bkt.max_iters = parse(key, value)?,
            "bkt_tol" => self.bkt.tol = parse(key, value)?,
            "bkt_caps" => {
                self.bkt.caps = match value.trim() {
                    "none" => None,
                    v => {
                        let (g, s) = v
                            .split_once(',')
                            .ok_or_else(|| Error::config(format!("bkt_caps {v:?} is not `guess,slip`")))?;
                        Some((parse(key, g)?, parse(key, s)?))
                    }
                }
            }
            "pfa_l2" => self.pfa.l2 = parse(key, value)?,
            "pfa_lr" => self.pfa.learning_rate = parse(key, value)?,
            "pfa_max_iters" => self.pfa.max_iters = parse(key, value)?,
            "pfa_tol" => self.pfa.tol = parse(key, value)?,
            "strict" => self.strict = parse_bool(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// A complete `run` or `sweep` invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    /// Name used in reports and to look up published results.
    pub dataset_name: String,
    pub models: Vec<ModelKind>,
    pub out: PathBuf,
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            format: DataFormat::Canonical,
            dataset_name: String::new(),
            models: ModelKind::ALL.to_vec(),
            out: PathBuf::from("ktbench-out"),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value.trim())),
            "format" => self.format = value.trim().parse()?,
            "dataset" => self.dataset_name = value.trim().to_owned(),
            "model" | "models" => self.models = parse_models(value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            _ => {
                if !self.experiment.set(key, value)? {
                    return Err(Error::config(format!("unknown configuration key `{key}`")));
                }
            }
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Report name: the explicit one, else the data file stem.
    pub fn resolved_name(&self) -> String {
        if !self.dataset_name.is_empty() {
            return self.dataset_name.clone();
        }
        self.data
            .as_deref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    /// Sorted `key=value` lines that reproduce this configuration. Worker
    /// count is left out since it does not change results.
    pub fn to_text(&self) -> String {
        let mut all = self.experiment.snapshot();
        if let Some(d) = &self.data {
            all.insert("data".into(), d.display().to_string());
        }
        all.insert("format".into(), self.format.to_string());
        all.insert("dataset".into(), self.resolved_name());
        all.insert(
            "models".into(),
            self.models.iter().map(|m| m.tag()).collect::<Vec<_>>().join(","),
        );
        all.insert("out".into(), self.out.display().to_string());
        all.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Seed from the environment fallback, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => parse(SEED_ENV, &v).map(Some),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::CellKind;

    #[test]
    fn defaults_match_reference_setup() {
        let c = RunConfig::default();
        assert_eq!(c.experiment.interval_len, 20);
        assert_eq!(c.experiment.n_clusters, 8);
        assert_eq!(c.experiment.train.hidden, 200);
        assert_eq!(c.experiment.train.batch_size, 32);
        assert_eq!(c.experiment.train.learning_rate, 0.01);
        assert_eq!(c.experiment.train.epochs, 100);
        assert_eq!(c.experiment.n_folds, 5);
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# comment\nmodel = dkt,bkt\ninterval_len=30\nlr=0.003\ncell=vanilla\nbkt_caps=0.3,0.1\ndata=x/a09.csv\n",
        )
        .unwrap();
        assert_eq!(c.models, vec![ModelKind::Bkt, ModelKind::Dkt]);
        assert_eq!(c.experiment.train.cell, CellKind::Vanilla);
        assert_eq!(c.resolved_name(), "a09");
        let mut d = RunConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        assert_eq!(c.experiment, d.experiment);
        assert_eq!(c.to_text(), d.to_text());
    }

    #[test]
    fn bad_lines_are_rejected() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("nonsense").is_err());
        assert!(c.apply_text("colour=blue").is_err());
        assert!(c.apply_text("epochs=-1").is_err());
        assert!(c.apply_text("model=hmm").is_err());
    }
}
