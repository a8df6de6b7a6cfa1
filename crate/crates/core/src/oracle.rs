//! Slow reference implementations used to check the fast ones, plus the
//! self-check suite run by `ktbench check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{bkt_filter, bkt_update, irt_predict, pfa_predict, BktParams, PfaCounters, PfaParams};
use crate::eval::auc;
use crate::neural::{gradient_check, random_instance, CellKind, EncodedStudent, RnnParams, Truncation};

/// AUC by counting every (correct, incorrect) pair. `None` for a single class.
pub fn pairwise_auc(pairs: &[(f64, bool)]) -> Option<f64> {
    let mut doubled: u64 = 0;
    let (mut n_pos, mut n_neg) = (0u64, 0u64);
    for &(_, a) in pairs {
        if a {
            n_pos += 1;
        } else {
            n_neg += 1;
        }
    }
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    for &(pp, _) in pairs.iter().filter(|x| x.1) {
        for &(pn, _) in pairs.iter().filter(|x| !x.1) {
            if pp > pn {
                doubled += 2;
            } else if pp == pn {
                doubled += 1;
            }
        }
    }
    Some(doubled as f64 / (2 * n_pos * n_neg) as f64)
}

/// Next-answer probabilities of the two-state mastery chain by summing over
/// every hidden path. Exponential in the sequence length.
pub fn bkt_by_paths(p: &BktParams, answers: &[bool]) -> Vec<f64> {
    let t_len = answers.len();
    let mut out = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut num = 0.0;
        let mut den = 0.0;
        // bit i of `path` is the mastery state before answer i
        for path in 0u32..(1 << (t + 1)) {
            let state = |i: usize| path >> i & 1 == 1;
            let mut w = if state(0) { p.l0 } else { 1.0 - p.l0 };
            for i in 1..=t {
                w *= match (state(i - 1), state(i)) {
                    (true, true) => 1.0,
                    (true, false) => 0.0,
                    (false, true) => p.t,
                    (false, false) => 1.0 - p.t,
                };
            }
            if w == 0.0 {
                continue;
            }
            for (i, &a) in answers.iter().enumerate().take(t) {
                let pc = if state(i) { 1.0 - p.s } else { p.g };
                w *= if a { pc } else { 1.0 - pc };
            }
            den += w;
            num += w * if state(t) { 1.0 - p.s } else { p.g };
        }
        out.push(num / den);
    }
    out
}

/// Mean of the points assigned to each cluster; `None` for empty clusters.
pub fn cluster_means(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Vec<Option<Vec<f64>>> {
    let dim = points.first().map_or(0, |p| p.len());
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
        .collect()
}

/// Vanilla-cell predictions with dense inputs and plain loops, state
/// carried across intervals.
pub fn dense_vanilla_forward(p: &RnnParams, student: &EncodedStudent) -> Vec<f64> {
    let n = p.hidden();
    let mut h = p.h0.clone();
    let mut out = Vec::new();
    for step in student.segments.iter().flatten().filter(|s| !s.padding) {
        let x = step.input.to_dense();
        let mut next = vec![0.0; n];
        for (r, v) in next.iter_mut().enumerate() {
            let mut a = p.b_h[r];
            for (c, xv) in x.iter().enumerate() {
                a += p.w_hx.get(r, c) * xv;
            }
            for (c, hv) in h.iter().enumerate() {
                a += p.w_hh.get(r, c) * hv;
            }
            *v = a.tanh();
        }
        h = next;
        if let Some(t) = step.target {
            let mut z = p.b_y[t.skill];
            for (c, hv) in h.iter().enumerate() {
                z += p.w_yh.get(t.skill, c) * hv;
            }
            out.push(1.0 / (1.0 + (-z).exp()));
        }
    }
    out
}

/// Outcome of one self-check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckLine {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        CheckLine {
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

fn random_trace(rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    let n = rng.gen_range(2..=500);
    let levels = rng.gen_range(2..=50);
    (0..n)
        .map(|_| (rng.gen_range(0..levels) as f64 / levels as f64, rng.gen_bool(0.5)))
        .collect()
}

/// Closed-form examples, reference implementations and gradient checks.
pub fn self_check(seed: u64) -> Vec<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();

    let p = BktParams {
        l0: 0.5,
        t: 0.3,
        g: 0.2,
        s: 0.1,
    };
    let hand = (bkt_update(0.5, true, &p).next - 0.87273)
        .abs()
        .max((bkt_update(0.5, false, &p).next - 0.37778).abs());
    lines.push(CheckLine::at_most("bkt update hand values", hand, 5e-6));

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = BktParams {
            l0: rng.gen_range(0.01..0.99),
            t: rng.gen_range(0.01..0.99),
            g: rng.gen_range(0.01..0.5),
            s: rng.gen_range(0.01..0.5),
        };
        for len in 1..=6 {
            for bits in 0u32..(1 << len) {
                let answers: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                for (a, b) in bkt_filter(&p, &answers).iter().zip(bkt_by_paths(&p, &answers)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    lines.push(CheckLine::at_most("bkt filter vs path enumeration", worst, 1e-9));

    lines.push(CheckLine::at_most("irt at theta = beta", (irt_predict(0.3, 0.3) - 0.5).abs(), 0.0));
    lines.push(CheckLine::at_most(
        "irt at theta - beta = 1",
        (irt_predict(1.0, 0.0) - 0.73106).abs(),
        1e-5,
    ));

    let pfa = PfaParams {
        beta: vec![0.0],
        gamma: vec![0.2],
        rho: vec![-0.1],
    };
    let counters = PfaCounters {
        success: vec![3],
        failure: vec![2],
    };
    lines.push(CheckLine::at_most(
        "pfa logit example",
        (pfa_predict(&pfa, &[0], &counters) - 0.59869).abs(),
        1e-5,
    ));

    let mut mismatches = 0.0;
    for _ in 0..100 {
        let t = random_trace(&mut rng);
        if auc(&t).ok() != pairwise_auc(&t) {
            mismatches += 1.0;
        }
    }
    lines.push(CheckLine::at_most("auc vs pairwise count (mismatches)", mismatches, 0.0));

    for (name, cell, hidden) in [
        ("gradient check, vanilla cell", CellKind::Vanilla, 8),
        ("gradient check, gated cell", CellKind::Gated, 6),
    ] {
        let mut err: f64 = 0.0;
        for s in 0..3 {
            let (params, students) = random_instance(cell, 4, hidden, 6, 3, seed.wrapping_add(s));
            let r = gradient_check(&params, &students, Truncation::None).expect("instance has targets");
            err = err.max(r.max_rel_error);
        }
        lines.push(CheckLine::at_most(name, err, 1e-4));
    }
    lines
}
