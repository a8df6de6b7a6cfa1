use std::collections::BTreeMap;

/// Agreement between cluster labels and known groups.
///
/// Each cluster is mapped to the group most of its members belong to (ties
/// to the smaller group id), then Cohen's kappa is taken between mapped
/// and known groups. 1 is perfect recovery, 0 is chance level. `None` if
/// `pairs` is empty or holds a single known group.
pub fn adjusted_agreement(pairs: &[(usize, usize)]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let mut votes: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for &(cluster, group) in pairs {
        *votes.entry(cluster).or_default().entry(group).or_default() += 1;
    }
    let mapping: BTreeMap<usize, usize> = votes
        .iter()
        .map(|(&c, counts)| {
            let best = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&g, _)| g)
                .expect("non-empty votes");
            (c, best)
        })
        .collect();

    let n = pairs.len() as f64;
    let mut truth: BTreeMap<usize, f64> = BTreeMap::new();
    let mut mapped: BTreeMap<usize, f64> = BTreeMap::new();
    let mut agree = 0.0;
    for &(c, g) in pairs {
        let m = mapping[&c];
        *truth.entry(g).or_default() += 1.0;
        *mapped.entry(m).or_default() += 1.0;
        if m == g {
            agree += 1.0;
        }
    }
    if truth.len() < 2 {
        return None;
    }
    let observed = agree / n;
    let expected: f64 = truth
        .iter()
        .map(|(g, t)| t / n * mapped.get(g).copied().unwrap_or(0.0) / n)
        .sum();
    Some((observed - expected) / (1.0 - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_relabelled() {
        let pairs = [(5, 0), (5, 0), (2, 1), (2, 1)];
        assert_eq!(adjusted_agreement(&pairs), Some(1.0));
        // more clusters than groups still count as perfect if each is pure
        let pairs = [(2, 0), (3, 0), (4, 1), (5, 1)];
        assert_eq!(adjusted_agreement(&pairs), Some(1.0));
    }

    #[test]
    fn one_cluster_is_chance() {
        let pairs = [(2, 0), (2, 0), (2, 1), (2, 1)];
        assert_eq!(adjusted_agreement(&pairs), Some(0.0));
    }

    #[test]
    fn hand_case() {
        // cluster 2 -> group 0, cluster 3 -> group 1; observed .75, expected .5
        let pairs = [(2, 0), (2, 0), (3, 1), (2, 1)];
        assert_eq!(adjusted_agreement(&pairs), Some(0.5));
        assert_eq!(adjusted_agreement(&[(1, 0)]), None);
    }
}
