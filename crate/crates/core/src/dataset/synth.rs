use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, InteractionRecord, SkillVocabulary, StudentSequence};
use crate::error::{Error, Result};
use crate::math::sigmoid;

/// Success curve of one planted ability group.
///
/// The probability of answering a skill correctly after `k` prior practices
/// of it is `ceiling - (ceiling - initial) * exp(-growth * k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    pub initial: f64,
    pub ceiling: f64,
    pub growth: f64,
}

impl GroupSpec {
    /// A group whose success probability never changes.
    pub fn constant(p: f64) -> Self {
        GroupSpec {
            initial: p,
            ceiling: p,
            growth: 0.0,
        }
    }

    pub fn success_prob(&self, practices: usize) -> f64 {
        self.ceiling - (self.ceiling - self.initial) * (-self.growth * practices as f64).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_students: usize,
    pub n_skills: usize,
    pub attempts_per_student: usize,
    pub groups: Vec<GroupSpec>,
    /// Skill difficulties are drawn uniformly from `[-spread, spread]` (logit scale).
    pub skill_spread: f64,
    /// Probability that the next attempt stays on the current skill.
    pub stay_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_students: 300,
            n_skills: 10,
            attempts_per_student: 100,
            groups: vec![
                GroupSpec {
                    initial: 0.35,
                    ceiling: 0.95,
                    growth: 0.35,
                },
                GroupSpec {
                    initial: 0.25,
                    ceiling: 0.6,
                    growth: 0.08,
                },
            ],
            skill_spread: 0.5,
            stay_prob: 0.6,
            seed: 17,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_students == 0 || self.n_skills == 0 || self.attempts_per_student == 0 {
            return Err(Error::config(
                "synthetic n_students, n_skills and attempts must be positive",
            ));
        }
        if self.groups.is_empty() {
            return Err(Error::config("synthetic data needs at least one group"));
        }
        for g in &self.groups {
            let ok = |p: f64| (0.0..=1.0).contains(&p);
            if !ok(g.initial) || !ok(g.ceiling) || g.growth.is_nan() || g.growth < 0.0 {
                return Err(Error::config(format!("invalid group curve {g:?}")));
            }
        }
        if !(0.0..=1.0).contains(&self.stay_prob) || self.skill_spread.is_nan() || self.skill_spread < 0.0 {
            return Err(Error::config("stay_prob must be in [0,1], skill_spread >= 0"));
        }
        Ok(())
    }
}

/// Generated data plus the planted group of every student (0-based).
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub groups: BTreeMap<String, usize>,
    pub skill_offsets: Vec<f64>,
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let skill_offsets: Vec<f64> = (0..cfg.n_skills)
        .map(|_| {
            if cfg.skill_spread > 0.0 {
                rng.gen_range(-cfg.skill_spread..=cfg.skill_spread)
            } else {
                0.0
            }
        })
        .collect();

    let skill_width = digits(cfg.n_skills - 1);
    let tags: Vec<String> = (0..cfg.n_skills)
        .map(|k| format!("k{k:0skill_width$}"))
        .collect();
    let vocab = SkillVocabulary::from_tags(&tags);
    let student_width = digits(cfg.n_students - 1);

    let mut sequences = Vec::with_capacity(cfg.n_students);
    let mut groups = BTreeMap::new();
    for i in 0..cfg.n_students {
        let student = format!("s{i:0student_width$}");
        let group = i % cfg.groups.len();
        let curve = &cfg.groups[group];
        let mut practices = vec![0usize; cfg.n_skills];
        let mut skill = rng.gen_range(0..cfg.n_skills);
        let mut records = Vec::with_capacity(cfg.attempts_per_student);
        for t in 0..cfg.attempts_per_student {
            if t > 0 && !rng.gen_bool(cfg.stay_prob) {
                skill = rng.gen_range(0..cfg.n_skills);
            }
            let mut p = curve.success_prob(practices[skill]);
            if skill_offsets[skill] != 0.0 && p > 0.0 && p < 1.0 {
                p = sigmoid((p / (1.0 - p)).ln() - skill_offsets[skill]);
            }
            let correct = rng.gen_bool(p.clamp(0.0, 1.0));
            records.push(InteractionRecord {
                student: student.clone(),
                skill: vocab.id(&tags[skill]).expect("synthetic tag"),
                item: Some(format!("{}-{}", tags[skill], practices[skill])),
                correct,
                order: t as u64,
            });
            practices[skill] += 1;
        }
        groups.insert(student.clone(), group);
        sequences.push(StudentSequence { student, records });
    }
    Ok(SyntheticData {
        dataset: Dataset { vocab, sequences },
        groups,
        skill_offsets,
    })
}

fn digits(max: usize) -> usize {
    max.max(1).to_string().len()
}

/// Writes `student,group` rows for the planted groups.
pub fn write_ground_truth(path: &Path, data: &SyntheticData) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut body = String::from("student,group\n");
    for (s, g) in &data.groups {
        body.push_str(&format!("{s},{g}\n"));
    }
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads `student,group` rows.
pub fn read_ground_truth(path: &Path) -> Result<BTreeMap<String, usize>> {
    let csv_err = |e| Error::Csv {
        path: path.to_owned(),
        source: e,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut out = BTreeMap::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let (Some(s), Some(g)) = (row.get(0), row.get(1)) else {
            return Err(Error::Format(format!("{}: expected student,group rows", path.display())));
        };
        let g = g
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("{}: bad group {g:?}", path.display())))?;
        out.insert(s.to_owned(), g);
    }
    Ok(out)
}
