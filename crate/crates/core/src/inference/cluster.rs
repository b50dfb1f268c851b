//! Hierarchical merging of mixture components into clusters by entropy.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mixture::{posterior_into, MixtureModel};

/// One merge step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Number of clusters after the merge.
    pub level: usize,
    /// Cluster absorbed (the larger id before the merge).
    pub from: usize,
    /// Cluster receiving it.
    pub to: usize,
    /// Entropy after the merge.
    pub en: f64,
    /// Entropy decrease caused by the merge.
    pub ed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// `zp[level − 1][j]`: 1-based cluster of observation `j` with `level`
    /// clusters.
    pub zp: Vec<Vec<usize>>,
    /// `en[level − 1]`.
    pub en: Vec<f64>,
    /// Merges from `c` clusters down to one.
    pub merges: Vec<Merge>,
    /// `prob[level − 1]` when true labels were supplied.
    pub prob: Option<Vec<f64>>,
}

impl ClusteringResult {
    pub fn c(&self) -> usize {
        self.en.len()
    }

    /// Level with the highest correct-clustering probability (the first
    /// on ties).
    pub fn copt(&self) -> Option<usize> {
        let p = self.prob.as_ref()?;
        let mut best = 0;
        for (i, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = i;
            }
        }
        Some(best + 1)
    }
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

fn entropy(tau: &[Vec<f64>]) -> f64 {
    -tau.iter().flat_map(|col| col.iter()).map(|&t| xlogx(t)).sum::<f64>()
}

fn argmax_labels(tau: &[Vec<f64>], n: usize) -> Vec<usize> {
    (0..n)
        .map(|j| {
            let mut best = 0;
            for l in 1..tau.len() {
                if tau[l][j] > tau[best][j] {
                    best = l;
                }
            }
            best + 1
        })
        .collect()
}

/// Merges the components of `model` pairwise, each time choosing the pair
/// whose union lowers the entropy of the responsibilities the most.
pub fn merge_clusters(model: &MixtureModel, data: &Dataset, truth: Option<&[usize]>) -> Result<ClusteringResult> {
    if data.d() != model.d() {
        return Err(Error::DimensionMismatch {
            expected: model.d(),
            got: data.d(),
        });
    }
    if let Some(t) = truth {
        if t.len() != data.n() {
            return Err(Error::LengthMismatch {
                left: data.n(),
                right: t.len(),
            });
        }
    }
    let n = data.n();
    let c = model.c();
    // Column-major responsibilities: tau[l][j].
    let mut tau = vec![vec![0.0; n]; c];
    let mut scratch = vec![0.0; model.d()];
    let mut joint = vec![0.0; c];
    for j in 0..n {
        posterior_into(model, data.row(j), &mut scratch, &mut joint).ok_or(Error::ZeroDensity(j))?;
        for l in 0..c {
            tau[l][j] = joint[l];
        }
    }
    let mut zp = vec![Vec::new(); c];
    let mut en = vec![0.0; c];
    zp[c - 1] = argmax_labels(&tau, n);
    en[c - 1] = entropy(&tau);
    let mut merges = Vec::with_capacity(c.saturating_sub(1));
    let mut self_terms: Vec<f64> = tau.iter().map(|col| col.iter().map(|&t| xlogx(t)).sum()).collect();
    for level in (1..c).rev() {
        let k = level + 1;
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for a in 0..k {
            for b in (a + 1)..k {
                let joint_term: f64 = tau[a].iter().zip(&tau[b]).map(|(&x, &y)| xlogx(x + y)).sum();
                let ed = joint_term - self_terms[a] - self_terms[b];
                if ed > best.0 {
                    best = (ed, a, b);
                }
            }
        }
        let (_, to, from) = best;
        let absorbed = tau.remove(from);
        for (t, x) in tau[to].iter_mut().zip(&absorbed) {
            *t += x;
        }
        self_terms.remove(from);
        self_terms[to] = tau[to].iter().map(|&t| xlogx(t)).sum();
        en[level - 1] = entropy(&tau);
        zp[level - 1] = argmax_labels(&tau, n);
        merges.push(Merge {
            level,
            from: from + 1,
            to: to + 1,
            en: en[level - 1],
            ed: en[level] - en[level - 1],
        });
    }
    let prob = truth
        .map(|t| {
            zp.iter()
                .map(|z| correct_clustering_prob(z, t))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(ClusteringResult { zp, en, merges, prob })
}

/// Fraction of observations whose predicted cluster maps to their true
/// cluster, each predicted cluster mapping to the true cluster holding the
/// plurality of its members.
pub fn correct_clustering_prob(zp: &[usize], zt: &[usize]) -> Result<f64> {
    if zp.len() != zt.len() {
        return Err(Error::LengthMismatch {
            left: zp.len(),
            right: zt.len(),
        });
    }
    if zp.is_empty() {
        return Ok(0.0);
    }
    let mut table: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, usize>> = Default::default();
    for (&p, &t) in zp.iter().zip(zt) {
        *table.entry(p).or_default().entry(t).or_default() += 1;
    }
    let correct: usize = table.values().map(|row| row.values().max().copied().unwrap_or(0)).sum();
    Ok(correct as f64 / zp.len() as f64)
}
