use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Cluster labels for `n` points, each in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// `k` is taken as `max(label) + 1`.
    pub fn new(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self { labels, k }
    }

    pub fn with_k(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label: bad, k });
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Relabels the used labels to `0..k'` preserving their order.
    pub fn compacted(&self) -> Self {
        let mut used = vec![false; self.k];
        for &l in &self.labels {
            used[l] = true;
        }
        let mut map = vec![0; self.k];
        let mut next = 0;
        for (l, u) in used.iter().enumerate() {
            if *u {
                map[l] = next;
                next += 1;
            }
        }
        Self {
            labels: self.labels.iter().map(|&l| map[l]).collect(),
            k: next,
        }
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Fraction of point pairs that one partition puts together and the
/// other separates.
pub fn rand_distance(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let total = pairs(a.len() as u64);
    if total == 0 {
        return Ok(0.0);
    }
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.labels.iter().zip(&b.labels) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let together_a: u64 = rows.values().map(|&c| pairs(c)).sum();
    let together_b: u64 = cols.values().map(|&c| pairs(c)).sum();
    let together_both: u64 = joint.values().map(|&c| pairs(c)).sum();
    let disagree = together_a + together_b - 2 * together_both;
    Ok(disagree as f64 / total as f64)
}

/// Minimum-cost perfect matching on a square matrix (Hungarian method with
/// potentials). Returns `assignment[row] = column`.
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_v = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = inf;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let cur = cost[r - 1][col - 1] - u[r] - v[col];
                    if cur < min_v[col] {
                        min_v[col] = cur;
                        way[col] = col0;
                    }
                    if min_v[col] < delta {
                        delta = min_v[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_v[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Relabels `other` so that its clusters overlap `reference`'s as much as
/// possible (maximum-weight matching on the confusion matrix).
pub fn align_labels(reference: &Partition, other: &Partition) -> Result<Partition> {
    if reference.len() != other.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: other.len(),
        });
    }
    let size = reference.k().max(other.k()).max(1);
    let mut overlap = vec![vec![0i64; size]; size];
    for (&r, &o) in reference.labels.iter().zip(&other.labels) {
        overlap[o][r] += 1;
    }
    let cost: Vec<Vec<i64>> = overlap
        .iter()
        .map(|row| row.iter().map(|&c| -c).collect())
        .collect();
    let map = hungarian(&cost);
    Partition::with_k(other.labels.iter().map(|&l| map[l]).collect(), size)
}

/// Per-point majority vote after aligning every partition to the first.
/// Ties go to the lowest label.
pub fn majority_vote(partitions: &[Partition]) -> Result<Partition> {
    let first = partitions.first().ok_or(Error::Empty("partitions"))?;
    let aligned: Vec<Partition> = partitions
        .iter()
        .map(|p| align_labels(first, p))
        .collect::<Result<_>>()?;
    let k = aligned.iter().map(|p| p.k()).max().unwrap_or(1);
    let mut votes = vec![0usize; k];
    let mut labels = Vec::with_capacity(first.len());
    for i in 0..first.len() {
        votes.iter_mut().for_each(|v| *v = 0);
        for p in &aligned {
            votes[p.labels[i]] += 1;
        }
        let best = votes
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (l, &v)| if v > acc.1 { (l, v) } else { acc });
        labels.push(best.0);
    }
    Partition::with_k(labels, k)
}
