//! Student grouping by k-means over ability profiles.
//!
//! Centroids are learned once from the pooled profiles of training students
//! and then frozen. Group labels are 1-based: label 1 is reserved for every
//! student's first interval, label `c + 2` means nearest centroid `c`
//! (0-based), so a model with `K` centroids uses `K + 1` labels.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ability::{profiles_by_interval, ProfileNormalization};
use crate::error::{Error, Result};
use crate::segmentation::Segment;

pub const DEFAULT_CLUSTERS: usize = 8;
pub const DEFAULT_KMEANS_ITERATIONS: usize = 10;
pub const CLUSTER_SWEEP: [usize; 4] = [2, 4, 6, 8];

/// Label given to each student's first interval.
pub const FIRST_INTERVAL_GROUP: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Result of a k-means run.
#[derive(Clone, Debug)]
pub struct KMeansFit {
    pub model: ClusterModel,
    /// Centroid index of each training point under the final update.
    pub assignments: Vec<usize>,
    /// Objective after each update step; non-increasing.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Size of the label space, including the reserved first-interval group.
    pub fn n_labels(&self) -> usize {
        self.k() + 1
    }

    /// Nearest centroid (lowest index on ties) and its squared distance.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (c, mu) in self.centroids.iter().enumerate() {
            let d = sq_dist(x, mu);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }

    pub fn objective(&self, points: &[Vec<f64>], assignments: &[usize]) -> f64 {
        points
            .iter()
            .zip(assignments)
            .map(|(x, &c)| sq_dist(x, &self.centroids[c]))
            .sum()
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# k={}", self.k())?;
        writeln!(out, "# n={}", self.dim())?;
        writeln!(out, "# seed={}", self.seed)?;
        for mu in &self.centroids {
            let row: Vec<String> = mu.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut k = None;
        let mut n = None;
        let mut seed = None;
        let mut centroids = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("bad header line `{line}`")))?;
                let value = value.trim();
                let bad = |_| Error::Format(format!("bad header value `{line}`"));
                match key.trim() {
                    "k" => k = Some(value.parse::<usize>().map_err(bad)?),
                    "n" => n = Some(value.parse::<usize>().map_err(bad)?),
                    "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
                    _ => {}
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("centroid row: {e}")))?;
            centroids.push(row);
        }
        let (k, n) = match (k, n) {
            (Some(k), Some(n)) => (k, n),
            _ => return Err(Error::Format("cluster model header lacks k or n".into())),
        };
        if centroids.len() != k || centroids.iter().any(|c| c.len() != n) {
            return Err(Error::Format(format!(
                "expected {k} centroids of length {n}"
            )));
        }
        Ok(ClusterModel {
            centroids,
            seed: seed.unwrap_or(0),
        })
    }
}

/// Lloyd's algorithm for at most `iterations` rounds, stopping early once
/// assignments no longer change.
pub fn fit_kmeans(points: &[Vec<f64>], k: usize, iterations: usize, seed: u64) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(Error::config("k-means needs at least one profile"));
    }
    if k == 0 {
        return Err(Error::config("k-means needs K >= 1"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::config("profiles have inconsistent lengths"));
    }
    let mut seen = HashSet::new();
    let distinct: Vec<usize> = (0..points.len())
        .filter(|&i| seen.insert(points[i].iter().map(|v| v.to_bits()).collect::<Vec<_>>()))
        .collect();
    if k > distinct.len() {
        return Err(Error::config(format!(
            "K = {k} exceeds the {} distinct profiles",
            distinct.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, distinct.len(), k);
    let mut model = ClusterModel {
        centroids: picks.iter().map(|i| points[distinct[i]].clone()).collect(),
        seed,
    };

    let mut assignments: Vec<usize> = Vec::new();
    let mut objective = Vec::new();
    let mut rounds = 0;
    for _ in 0..iterations {
        let (next, dists): (Vec<usize>, Vec<f64>) =
            points.iter().map(|x| model.nearest(x)).unzip();
        if next == assignments {
            break;
        }
        assignments = next;
        rounds += 1;
        repair_empty(&mut assignments, &dists, k);
        model.centroids = means(points, &assignments, k, dim);
        objective.push(model.objective(points, &assignments));
    }
    Ok(KMeansFit {
        model,
        assignments,
        objective,
        iterations: rounds,
    })
}

/// Moves the point farthest from its centroid into each empty cluster,
/// taking only from clusters that keep at least one member.
fn repair_empty(assignments: &mut [usize], dists: &[f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut order: Vec<usize> = (0..assignments.len()).collect();
    order.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
    let mut cursor = 0;
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        while cursor < order.len() && sizes[assignments[order[cursor]]] < 2 {
            cursor += 1;
        }
        let Some(&i) = order.get(cursor) else { return };
        sizes[assignments[i]] -= 1;
        assignments[i] = c;
        sizes[c] = 1;
        cursor += 1;
    }
}

fn means(points: &[Vec<f64>], assignments: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
    sums
}

/// Group label for a profile covering the intervals before the current one.
pub fn assign_group(model: &ClusterModel, profile: &[f64]) -> Result<usize> {
    if profile.len() != model.dim() {
        return Err(Error::config(format!(
            "profile has {} entries, model expects {}",
            profile.len(),
            model.dim()
        )));
    }
    Ok(model.nearest(profile).0 + 2)
}

/// One label per interval: the reserved group first, then the group of the
/// profile accumulated over all earlier intervals.
pub fn label_sequence(
    model: &ClusterModel,
    segments: &[Segment<'_>],
    n_skills: usize,
    norm: ProfileNormalization,
) -> Result<Vec<usize>> {
    if segments.is_empty() {
        return Ok(Vec::new());
    }
    let profiles = profiles_by_interval(&segments[..segments.len() - 1], n_skills, norm);
    let mut labels = Vec::with_capacity(segments.len());
    labels.push(FIRST_INTERVAL_GROUP);
    for p in &profiles {
        labels.push(assign_group(model, p)?);
    }
    Ok(labels)
}

/// Pools every interval's profile of every given student, ignoring the
/// interval index.
pub fn pooled_profiles<'a, I>(students: I, n_skills: usize, norm: ProfileNormalization) -> Vec<Vec<f64>>
where
    I: IntoIterator<Item = &'a [Segment<'a>]>,
{
    students
        .into_iter()
        .flat_map(|segs| profiles_by_interval(segs, n_skills, norm))
        .collect()
}
