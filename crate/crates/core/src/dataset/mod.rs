//! Interaction logs: ingestion, cleaning, student-level folds and synthetic data.
//!
//! Every source format is mapped onto one canonical record layout
//! (`order,student,item,skill,correct`). Raw skill tags are interned into a
//! dense [`SkillVocabulary`]; multi-skill tags are kept as a single joint tag
//! (`"A+B"`), so each record carries exactly one skill id.

mod clean;
mod io;
mod split;
mod synth;

use std::cmp::Ordering;
use std::collections::HashMap;

pub use clean::{clean_records, CleanOptions, CleanReport, MultiSkillMode};
pub use io::{
    load_interactions, load_interactions_with, write_canonical, write_canonical_to, ColumnMap,
    DataFormat, LoadReport,
};
pub use split::{student_level_split, FoldSplit};
pub use synth::{generate_synthetic, read_ground_truth, write_ground_truth, GroupSpec, SynthConfig, SyntheticData};

pub type SkillId = usize;

/// Separator used when several raw tags form one joint skill.
pub const JOINT_SEPARATOR: char = '+';

/// One graded attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionRecord {
    pub student: String,
    pub skill: SkillId,
    /// Absent for sources without problem ids; IRT then uses the skill as the item.
    pub item: Option<String>,
    pub correct: bool,
    /// Source timestamp or row order; defines chronology within a student.
    pub order: u64,
}

impl InteractionRecord {
    pub fn outcome(&self) -> u8 {
        self.correct as u8
    }
}

/// A student's attempts in chronological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StudentSequence {
    pub student: String,
    pub records: Vec<InteractionRecord>,
}

impl StudentSequence {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Dense, bijective mapping between raw skill tags and `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkillVocabulary {
    tags: Vec<String>,
    index: HashMap<String, SkillId>,
}

impl SkillVocabulary {
    /// Builds a vocabulary over the distinct tags, ordered naturally
    /// (numeric tags by value, others lexically).
    pub fn from_tags<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tags: Vec<String> = tags.into_iter().map(|t| t.as_ref().to_owned()).collect();
        tags.sort_by(|a, b| natural_cmp(a, b));
        tags.dedup();
        let index = tags
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        SkillVocabulary { tags, index }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn id(&self, tag: &str) -> Option<SkillId> {
        self.index.get(tag).copied()
    }

    pub fn tag(&self, id: SkillId) -> &str {
        &self.tags[id]
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }
}

/// Normalizes a set of raw tags into one joint tag: sorted, deduplicated, joined.
pub fn joint_tag<I, S>(parts: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut parts: Vec<String> = parts
        .into_iter()
        .flat_map(|p| {
            p.as_ref()
                .split(JOINT_SEPARATOR)
                .map(|s| s.trim().to_owned())
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    parts.sort_by(|a, b| natural_cmp(a, b));
    parts.dedup();
    parts.join(&JOINT_SEPARATOR.to_string())
}

pub(crate) fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        _ => a.cmp(b),
    }
}

/// Cleaned or loaded data: sequences sorted by student id plus their vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub vocab: SkillVocabulary,
    pub sequences: Vec<StudentSequence>,
}

impl Dataset {
    pub fn n_skills(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_records(&self) -> usize {
        self.sequences.iter().map(|s| s.len()).sum()
    }

    pub fn students(&self) -> Vec<&str> {
        self.sequences.iter().map(|s| s.student.as_str()).collect()
    }

    pub fn sequence(&self, student: &str) -> Option<&StudentSequence> {
        self.sequences
            .binary_search_by(|s| s.student.as_str().cmp(student))
            .ok()
            .map(|i| &self.sequences[i])
    }

    /// Sequences of the named students, in the order given.
    pub fn select<'a>(&'a self, students: &[String]) -> Vec<&'a StudentSequence> {
        students.iter().filter_map(|s| self.sequence(s)).collect()
    }
}
