use std::collections::{HashMap, HashSet};

use log::info;

use super::{joint_tag, Dataset, InteractionRecord, SkillVocabulary, StudentSequence};

/// How rows that repeat one attempt under different skill tags are merged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MultiSkillMode {
    /// The tag set becomes one new joint skill.
    #[default]
    Joint,
    /// Keep the first row's tag, drop the rest.
    First,
}

impl std::str::FromStr for MultiSkillMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "joint" => Ok(MultiSkillMode::Joint),
            "first" => Ok(MultiSkillMode::First),
            other => Err(crate::error::Error::config(format!(
                "unknown multi-skill mode `{other}` (expected joint or first)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CleanOptions {
    pub multiskill: MultiSkillMode,
    /// Keep only the first attempt of each (student, item) pair.
    pub first_attempt_only: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions {
            multiskill: MultiSkillMode::Joint,
            first_attempt_only: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CleanReport {
    pub rows_in: usize,
    pub rows_out: usize,
    pub exact_duplicates: usize,
    pub multiskill_merged: usize,
    pub repeat_attempts: usize,
}

impl CleanReport {
    pub fn dropped(&self) -> usize {
        self.rows_in - self.rows_out
    }
}

struct Pending {
    record: InteractionRecord,
    tags: Vec<String>,
}

/// Removes exact duplicates, merges multi-skill copies of one attempt, and
/// keeps first attempts only. Skill ids are re-densified afterwards.
pub fn clean_records(data: &Dataset, opts: CleanOptions) -> (Dataset, CleanReport) {
    let mut report = CleanReport {
        rows_in: data.n_records(),
        ..Default::default()
    };
    let mut cleaned: Vec<(String, Vec<Pending>)> = Vec::with_capacity(data.sequences.len());

    for seq in &data.sequences {
        let mut out: Vec<Pending> = Vec::with_capacity(seq.len());
        let mut exact: HashSet<(u64, Option<&str>, usize, bool)> = HashSet::new();
        let mut same_attempt: HashMap<(u64, &str), usize> = HashMap::new();

        for r in &seq.records {
            if !exact.insert((r.order, r.item.as_deref(), r.skill, r.correct)) {
                report.exact_duplicates += 1;
                continue;
            }
            if let Some(item) = r.item.as_deref() {
                if let Some(&slot) = same_attempt.get(&(r.order, item)) {
                    if out[slot].record.skill != r.skill {
                        report.multiskill_merged += 1;
                        if opts.multiskill == MultiSkillMode::Joint {
                            out[slot].tags.push(data.vocab.tag(r.skill).to_owned());
                        }
                        continue;
                    }
                } else {
                    same_attempt.insert((r.order, item), out.len());
                }
            }
            out.push(Pending {
                record: r.clone(),
                tags: vec![data.vocab.tag(r.skill).to_owned()],
            });
        }

        if opts.first_attempt_only {
            let mut seen: HashSet<String> = HashSet::new();
            let before = out.len();
            out.retain(|p| match &p.record.item {
                Some(item) => seen.insert(item.clone()),
                None => true,
            });
            report.repeat_attempts += before - out.len();
        }
        if !out.is_empty() {
            cleaned.push((seq.student.clone(), out));
        }
    }

    let joint = |p: &Pending| joint_tag(p.tags.iter());
    let vocab = SkillVocabulary::from_tags(
        cleaned
            .iter()
            .flat_map(|(_, ps)| ps.iter().map(joint))
            .collect::<Vec<_>>(),
    );
    let sequences: Vec<StudentSequence> = cleaned
        .into_iter()
        .map(|(student, ps)| StudentSequence {
            student,
            records: ps
                .into_iter()
                .map(|p| {
                    let tag = joint(&p);
                    InteractionRecord {
                        skill: vocab.id(&tag).expect("tag interned above"),
                        ..p.record
                    }
                })
                .collect(),
        })
        .collect();
    report.rows_out = sequences.iter().map(|s| s.len()).sum();
    info!(
        "clean: {} rows in, {} out ({} duplicates, {} multi-skill merged, {} repeat attempts)",
        report.rows_in,
        report.rows_out,
        report.exact_duplicates,
        report.multiskill_merged,
        report.repeat_attempts
    );
    (Dataset { vocab, sequences }, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: &[(u64, &str, Option<&str>, &str, bool)]) -> Dataset {
        let vocab = SkillVocabulary::from_tags(rows.iter().map(|r| r.3));
        let mut seqs: Vec<StudentSequence> = Vec::new();
        for &(order, student, item, tag, correct) in rows {
            let rec = InteractionRecord {
                student: student.into(),
                skill: vocab.id(tag).unwrap(),
                item: item.map(Into::into),
                correct,
                order,
            };
            match seqs.iter_mut().find(|s| s.student == student) {
                Some(s) => s.records.push(rec),
                None => seqs.push(StudentSequence {
                    student: student.into(),
                    records: vec![rec],
                }),
            }
        }
        Dataset {
            vocab,
            sequences: seqs,
        }
    }

    #[test]
    fn identical_rows_collapse() {
        let d = dataset(&[(1, "s", Some("i"), "A", true), (1, "s", Some("i"), "A", true)]);
        let (c, rep) = clean_records(&d, CleanOptions::default());
        assert_eq!(c.n_records(), 1);
        assert_eq!(rep.exact_duplicates, 1);
    }

    #[test]
    fn first_attempt_kept() {
        let d = dataset(&[
            (1, "s", Some("i"), "A", false),
            (2, "s", Some("i"), "A", true),
            (3, "s", Some("i"), "A", true),
        ]);
        let (c, rep) = clean_records(&d, CleanOptions::default());
        assert_eq!(c.n_records(), 1);
        assert_eq!(c.sequences[0].records[0].order, 1);
        assert!(!c.sequences[0].records[0].correct);
        assert_eq!(rep.repeat_attempts, 2);
    }

    #[test]
    fn multi_skill_rows_become_joint_skill() {
        let d = dataset(&[
            (1, "s", Some("i"), "B", true),
            (1, "s", Some("i"), "A", true),
            (2, "s", Some("j"), "A", false),
        ]);
        let (c, rep) = clean_records(&d, CleanOptions::default());
        assert_eq!(rep.multiskill_merged, 1);
        assert_eq!(c.vocab.tags(), &["A", "A+B"]);
        let tags: Vec<_> = c.sequences[0]
            .records
            .iter()
            .map(|r| c.vocab.tag(r.skill))
            .collect();
        assert_eq!(tags, ["A+B", "A"]);
    }

    #[test]
    fn first_mode_keeps_first_tag() {
        let d = dataset(&[(1, "s", Some("i"), "B", true), (1, "s", Some("i"), "A", true)]);
        let opts = CleanOptions {
            multiskill: MultiSkillMode::First,
            ..Default::default()
        };
        let (c, _) = clean_records(&d, opts);
        assert_eq!(c.vocab.tags(), &["B"]);
    }

    #[test]
    fn records_without_items_are_not_deduplicated_by_item() {
        let d = dataset(&[(1, "s", None, "A", true), (2, "s", None, "A", true)]);
        let (c, _) = clean_records(&d, CleanOptions::default());
        assert_eq!(c.n_records(), 2);
    }
}
