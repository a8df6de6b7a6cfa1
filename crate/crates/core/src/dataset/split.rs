use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One cross-validation fold over student ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub fold: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Partitions students into `n_folds` test sets of near-equal size.
///
/// Students are sorted before the seeded shuffle, so the split depends only
/// on the set of ids and the seed.
pub fn student_level_split<S: AsRef<str>>(
    students: &[S],
    n_folds: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if n_folds < 2 {
        return Err(Error::config(format!("need at least 2 folds, got {n_folds}")));
    }
    let mut ids: Vec<String> = students.iter().map(|s| s.as_ref().to_owned()).collect();
    ids.sort();
    ids.dedup();
    if ids.len() < n_folds {
        return Err(Error::config(format!(
            "{} students cannot fill {n_folds} folds",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n = ids.len();
    let bounds: Vec<usize> = (0..=n_folds).map(|f| f * n / n_folds).collect();
    Ok((0..n_folds)
        .map(|f| {
            let mut test: Vec<String> = ids[bounds[f]..bounds[f + 1]].to_vec();
            let mut train: Vec<String> = ids[..bounds[f]]
                .iter()
                .chain(&ids[bounds[f + 1]..])
                .cloned()
                .collect();
            test.sort();
            train.sort();
            FoldSplit {
                fold: f,
                train,
                test,
            }
        })
        .collect())
}
