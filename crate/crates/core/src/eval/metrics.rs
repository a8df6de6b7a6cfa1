use std::collections::BTreeMap;

use crate::dataset::SkillId;
use crate::error::{Error, Result};

/// Area under the ROC curve: the chance a random correct answer is scored
/// above a random incorrect one, ties counting half.
///
/// Sort-based; pair counts are kept doubled in integers so the result is
/// exact.
pub fn auc(pairs: &[(f64, bool)]) -> Result<f64> {
    if pairs.iter().any(|(p, _)| p.is_nan()) {
        return Err(Error::UndefinedMetric("NaN prediction".into()));
    }
    let n_pos = pairs.iter().filter(|(_, a)| *a).count() as u64;
    let n_neg = pairs.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both outcomes ({n_pos} correct, {n_neg} incorrect)"
        )));
    }
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut doubled: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        doubled += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    Ok(doubled as f64 / (2 * n_pos * n_neg) as f64)
}

pub fn rmse(pairs: &[(f64, bool)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("RMSE of no predictions".into()));
    }
    let sq: f64 = pairs
        .iter()
        .map(|&(p, a)| {
            let d = p - a as u8 as f64;
            d * d
        })
        .sum();
    Ok((sq / pairs.len() as f64).sqrt())
}

/// Mean of per-skill AUCs over the skills where it is defined, with the
/// number of such skills.
pub fn macro_auc(rows: &[(SkillId, f64, bool)]) -> Result<(f64, usize)> {
    let mut by_skill: BTreeMap<SkillId, Vec<(f64, bool)>> = BTreeMap::new();
    for &(k, p, a) in rows {
        by_skill.entry(k).or_default().push((p, a));
    }
    let values: Vec<f64> = by_skill.values().filter_map(|v| auc(v).ok()).collect();
    if values.is_empty() {
        return Err(Error::UndefinedMetric("no skill has both outcomes".into()));
    }
    Ok((values.iter().sum::<f64>() / values.len() as f64, values.len()))
}
