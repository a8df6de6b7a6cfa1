use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::fmt;

use log::warn;

use super::{joint_tag, Dataset, InteractionRecord, SkillVocabulary, StudentSequence};
use crate::error::{Error, Result};

/// Source layouts understood by [`load_interactions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    /// ASSISTments skill-builder style export.
    Assistments,
    /// KDD Cup 2010 (PSLC DataShop) tab-separated export.
    Kdd,
    /// `order,student,item,skill,correct`.
    Canonical,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "assistments" => Ok(DataFormat::Assistments),
            "kdd" => Ok(DataFormat::Kdd),
            "canonical" => Ok(DataFormat::Canonical),
            other => Err(Error::config(format!(
                "unknown data format `{other}` (expected assistments, kdd or canonical)"
            ))),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Assistments => "assistments",
            DataFormat::Kdd => "kdd",
            DataFormat::Canonical => "canonical",
        })
    }
}

/// Column adapter from a source file to the canonical record fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnMap {
    pub delimiter: u8,
    pub order: String,
    pub student: String,
    /// Columns concatenated (with `|`) to form the item id; empty means no item.
    pub item: Vec<String>,
    pub skill: String,
    pub correct: String,
    /// Splits one skill cell into several tags that form a joint skill.
    pub skill_separator: Option<String>,
    /// Keep only rows whose column equals the value, when the column exists.
    pub keep_if: Option<(String, String)>,
}

impl ColumnMap {
    pub fn for_format(format: DataFormat) -> Self {
        match format {
            DataFormat::Canonical => ColumnMap {
                delimiter: b',',
                order: "order".into(),
                student: "student".into(),
                item: vec!["item".into()],
                skill: "skill".into(),
                correct: "correct".into(),
                skill_separator: None,
                keep_if: None,
            },
            DataFormat::Assistments => ColumnMap {
                delimiter: b',',
                order: "order_id".into(),
                student: "user_id".into(),
                item: vec!["problem_id".into()],
                skill: "skill_id".into(),
                correct: "correct".into(),
                skill_separator: None,
                // main problems only, scaffolding rows have original = 0
                keep_if: Some(("original".into(), "1".into())),
            },
            DataFormat::Kdd => ColumnMap {
                delimiter: b'\t',
                order: "Row".into(),
                student: "Anon Student Id".into(),
                item: vec!["Problem Name".into(), "Step Name".into()],
                skill: "KC(Default)".into(),
                correct: "Correct First Attempt".into(),
                skill_separator: Some("~~".into()),
                keep_if: None,
            },
        }
    }
}

/// Row accounting for one ingestion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub dropped_missing: usize,
    pub dropped_invalid: usize,
    pub dropped_filtered: usize,
}

impl LoadReport {
    /// Rows dropped with a warning (missing or invalid fields).
    pub fn warnings(&self) -> usize {
        self.dropped_missing + self.dropped_invalid
    }
}

pub fn load_interactions(path: &Path, format: DataFormat) -> Result<(Dataset, LoadReport)> {
    load_interactions_with(path, &ColumnMap::for_format(format))
}

struct RawRow {
    order: u64,
    student: String,
    item: Option<String>,
    tag: String,
    correct: bool,
}

pub fn load_interactions_with(path: &Path, map: &ColumnMap) -> Result<(Dataset, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(map.delimiter)
        .flexible(true)
        .from_reader(file);
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
            Error::config(format!("{}: missing column `{name}`", path.display()))
        })
    };
    let order_col = col(&map.order)?;
    let student_col = col(&map.student)?;
    let skill_col = col(&map.skill)?;
    let correct_col = col(&map.correct)?;
    let item_cols = map
        .item
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let keep_if = match &map.keep_if {
        Some((c, v)) => headers
            .iter()
            .position(|h| h.trim() == c)
            .map(|i| (i, v.clone())),
        None => None,
    };

    let mut report = LoadReport::default();
    let mut rows: Vec<RawRow> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        report.rows_read += 1;
        let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");

        if let Some((i, v)) = &keep_if {
            if field(*i) != v {
                report.dropped_filtered += 1;
                continue;
            }
        }
        let student = field(student_col);
        let raw_skill = field(skill_col);
        let raw_correct = field(correct_col);
        if student.is_empty() || raw_skill.is_empty() || raw_correct.is_empty() {
            report.dropped_missing += 1;
            warn!("{}: row {}: missing field, dropped", path.display(), line + 2);
            continue;
        }
        let correct = match raw_correct {
            "0" | "0.0" => false,
            "1" | "1.0" => true,
            _ => {
                report.dropped_invalid += 1;
                warn!(
                    "{}: row {}: correctness `{raw_correct}` not in {{0,1}}, dropped",
                    path.display(),
                    line + 2
                );
                continue;
            }
        };
        let order = match parse_order(field(order_col)) {
            Some(o) => o,
            None => {
                report.dropped_invalid += 1;
                warn!("{}: row {}: bad order value, dropped", path.display(), line + 2);
                continue;
            }
        };
        let tag = match &map.skill_separator {
            Some(sep) => joint_tag(raw_skill.split(sep.as_str())),
            None => joint_tag([raw_skill]),
        };
        let item_parts: Vec<&str> = item_cols.iter().map(|&i| field(i)).collect();
        let item = if item_parts.iter().all(|p| p.is_empty()) {
            None
        } else {
            Some(item_parts.join("|"))
        };
        rows.push(RawRow {
            order,
            student: student.to_owned(),
            item,
            tag,
            correct,
        });
    }
    report.rows_kept = rows.len();
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{}: no valid rows",
            path.display()
        )));
    }
    Ok((assemble(rows), report))
}

fn parse_order(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    // some exports write integral ids as floats
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0 && v.fract() == 0.0)
        .map(|v| v as u64)
}

fn assemble(rows: Vec<RawRow>) -> Dataset {
    let vocab = SkillVocabulary::from_tags(rows.iter().map(|r| r.tag.as_str()));
    let mut by_student: BTreeMap<String, Vec<InteractionRecord>> = BTreeMap::new();
    for r in rows {
        let skill = vocab.id(&r.tag).expect("tag interned above");
        by_student
            .entry(r.student.clone())
            .or_default()
            .push(InteractionRecord {
                student: r.student,
                skill,
                item: r.item,
                correct: r.correct,
                order: r.order,
            });
    }
    let sequences = by_student
        .into_iter()
        .map(|(student, mut records)| {
            // stable: equal timestamps keep file order
            records.sort_by_key(|r| r.order);
            StudentSequence { student, records }
        })
        .collect();
    Dataset { vocab, sequences }
}

pub fn write_canonical(path: &Path, data: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_canonical_to(file, data).map_err(|e| Error::io(path, e))
}

pub fn write_canonical_to<W: Write>(out: W, data: &Dataset) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["order", "student", "item", "skill", "correct"])?;
    for seq in &data.sequences {
        for r in &seq.records {
            w.write_record([
                r.order.to_string().as_str(),
                r.student.as_str(),
                r.item.as_deref().unwrap_or(""),
                data.vocab.tag(r.skill),
                if r.correct { "1" } else { "0" },
            ])?;
        }
    }
    w.flush()
}
