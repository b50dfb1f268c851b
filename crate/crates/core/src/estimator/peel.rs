//! Sequential component peeling and Bayes assignment of the residue.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mixture::{component_from_moments, moments_from_component, Component, MixtureModel, MomentPair};
use crate::preprocess::{global_mode, Preprocessed};

use super::rough::{enhanced_estimate, resolve_to_bins, rough_estimate, Restraints, RoughComponent};

const MAX_ITERATIONS: usize = 500;
/// Iterations without a new minimum of D before the loop gives up.
const PATIENCE: usize = 3;
/// Frequencies shrunk below this fraction of their entry are dropped.
const DROP_FRACTION: f64 = 1e-10;

/// One component taken off the residue.
#[derive(Debug, Clone)]
pub struct PeeledComponent {
    pub rough: RoughComponent,
    pub component: Component,
    pub weight: f64,
    /// Total of positive relative deviations of the component on its own
    /// support when the loop stopped.
    pub d_stat: f64,
    pub iterations: usize,
}

/// A peeling run: components in extraction order and, for every prefix,
/// the residual frequencies left after it.
#[derive(Debug, Clone)]
pub struct PeelSequence {
    pub components: Vec<PeeledComponent>,
    pub residues: Vec<Vec<f64>>,
}

impl PeelSequence {
    /// Residual weight after the first `l` components.
    pub fn residual_weight(&self, l: usize, n: usize) -> f64 {
        self.residues[l - 1].iter().sum::<f64>() / n as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PeelSettings {
    pub ar: f64,
    pub restraints: Restraints,
    pub max_components: usize,
}

struct State {
    freq: Vec<(usize, f64)>,
    component: Component,
    d_stat: f64,
}

/// Splits the component at the global mode of `residue` off it. On return
/// `residue` holds what the component did not keep.
fn peel_one(prep: &Preprocessed, residue: &mut [f64], settings: PeelSettings) -> Result<PeeledComponent> {
    let n = prep.n() as f64;
    let d = prep.d();
    let mode = global_mode(prep, residue)?;
    let mut freq = residue.to_vec();
    let mut n_l: f64 = freq.iter().sum();
    let rough = rough_estimate(prep, &freq, &mode, (n_l / n).min(1.0))?;
    let mut component = rough.component()?;
    let mut active: Vec<usize> = (0..freq.len()).filter(|&j| freq[j] > 0.0).collect();
    let mut excess = vec![0.0; freq.len()];
    let mut scratch = vec![0.0; d];
    let mut threshold: f64 = 0.0;
    let mut best: Option<State> = None;
    let mut stall = 0;
    let mut iterations = 0;

    for iter in 0..MAX_ITERATIONS {
        iterations = iter + 1;
        if iter > 0 {
            match enhanced_estimate(&rough, prep, &freq, settings.restraints) {
                Ok(c) => component = c,
                Err(Error::InsufficientSupport { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        // The first pass predicts with the mode-pinned rough weight.
        let share = if iter == 0 { rough.weight } else { n_l / n };
        let mut positive = 0.0;
        let mut eps_max: f64 = 0.0;
        for &j in &active {
            let k = freq[j];
            let expected = share * component.log_pdf_with(prep.position(j), &mut scratch).exp() / prep.unit_density(j);
            let e = k - expected;
            if e > 0.0 {
                excess[j] = e;
                positive += e;
                eps_max = eps_max.max(e / k);
            } else {
                excess[j] = 0.0;
            }
        }
        let d_stat = positive / n_l;
        if best.as_ref().is_none_or(|b| d_stat < b.d_stat) {
            best = Some(State {
                freq: active.iter().map(|&j| (j, freq[j])).collect(),
                component: component.clone(),
                d_stat,
            });
            stall = 0;
        } else {
            stall += 1;
            if stall >= PATIENCE {
                break;
            }
        }
        if positive <= 0.0 {
            break;
        }
        threshold = (1.0 - settings.ar) * threshold.max(eps_max);
        let mut moved = 0.0;
        for &j in &active {
            let k = freq[j];
            if excess[j] > 0.0 && excess[j] / k > threshold {
                let left = k - excess[j];
                if left <= DROP_FRACTION * k {
                    moved += k;
                    freq[j] = 0.0;
                } else {
                    moved += excess[j];
                    freq[j] = left;
                }
            }
        }
        n_l -= moved;
        active.retain(|&j| freq[j] > 0.0);
        if n_l < (d + 1) as f64 {
            break;
        }
    }

    let best = best.expect("at least one iteration");
    freq.iter_mut().for_each(|k| *k = 0.0);
    for &(j, k) in &best.freq {
        freq[j] = k;
    }
    let component = match enhanced_estimate(&rough, prep, &freq, settings.restraints) {
        Ok(c) => c,
        Err(Error::InsufficientSupport { .. }) => best.component,
        Err(e) => return Err(e),
    };
    let kept: f64 = best.freq.iter().map(|(_, k)| k).sum();
    for &(j, k) in &best.freq {
        residue[j] = (residue[j] - k).max(0.0);
    }
    Ok(PeeledComponent {
        rough,
        component,
        weight: kept / n,
        d_stat: best.d_stat,
        iterations,
    })
}

/// Peels components until `stop(l, w_res)` holds after the `l`-th, the
/// residue is too small to support another component, or
/// `settings.max_components` is reached.
pub(crate) fn peel_sequence<F>(prep: &Preprocessed, settings: PeelSettings, mut stop: F) -> Result<PeelSequence>
where
    F: FnMut(usize, f64) -> bool,
{
    if prep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let n = prep.n() as f64;
    let d = prep.d();
    let mut residue = prep.frequencies();
    let mut seq = PeelSequence {
        components: Vec::new(),
        residues: Vec::new(),
    };
    while seq.components.len() < settings.max_components {
        let peeled = match peel_one(prep, &mut residue, settings) {
            Ok(p) => p,
            Err(e) if seq.components.is_empty() => return Err(e),
            Err(_) => break,
        };
        seq.components.push(peeled);
        seq.residues.push(residue.clone());
        let mass: f64 = residue.iter().sum();
        if stop(seq.components.len(), mass / n) || mass < (d + 1) as f64 {
            break;
        }
    }
    Ok(seq)
}

/// Peels components with the stopping rule `w_res ≤ d_min·(l − 1)` checked
/// before the `l`-th. Returns the rough components (with their final
/// weights) and the residual weight.
pub fn peel_components(
    prep: &Preprocessed,
    d_min: f64,
    config: &super::EstimatorConfig,
) -> Result<(Vec<RoughComponent>, f64)> {
    if !(d_min > 0.0 && d_min <= 1.0) {
        return Err(Error::InvalidArgument(format!("d_min {d_min} outside (0, 1]")));
    }
    let settings = PeelSettings {
        ar: config.ar,
        restraints: config.restraints,
        max_components: config.cmax.min(super::component_limit(prep)),
    };
    let seq = peel_sequence(prep, settings, |l, w_res| w_res <= d_min * l as f64)?;
    let l = seq.components.len();
    let w_res = seq.residual_weight(l, prep.n());
    let comps = seq
        .components
        .into_iter()
        .map(|p| RoughComponent {
            weight: p.weight,
            ..p.rough
        })
        .collect();
    Ok((comps, w_res))
}

/// Adds every residual entry to the component with the highest
/// `w_l f(y_j | θ_l)` through the incremental moment updates, then converts
/// the moments back.
pub fn bayes_assign(components: &[(f64, Component)], prep: &Preprocessed, residue: &[f64]) -> Result<MixtureModel> {
    if components.is_empty() {
        return Err(Error::EmptySelection);
    }
    if residue.len() != prep.len() {
        return Err(Error::LengthMismatch {
            left: prep.len(),
            right: residue.len(),
        });
    }
    let n = prep.n() as f64;
    let d = prep.d();
    let total: f64 = components.iter().map(|(w, _)| w).sum::<f64>() + residue.iter().sum::<f64>() / n;
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "component and residual weights sum to {total}"
        )));
    }
    let mut moments: Vec<MomentPair> = components.iter().map(|(w, c)| moments_from_component(c, *w)).collect();
    let mut scratch = vec![0.0; d];
    for (j, &k) in residue.iter().enumerate() {
        if k <= 0.0 {
            continue;
        }
        let y = prep.position(j);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (l, (_, comp)) in components.iter().enumerate() {
            let score = moments[l].w.ln() + comp.log_pdf_with(y, &mut scratch);
            if score > best_score {
                best = l;
                best_score = score;
            }
        }
        update_moments(&mut moments[best], y, k / n);
    }
    let mut weights = Vec::with_capacity(moments.len());
    let mut comps = Vec::with_capacity(moments.len());
    for (l, mp) in moments.iter_mut().enumerate() {
        let sigma = resolve_to_bins(prep, mp.v.sub(&SymMatrix::outer(&mp.m))?);
        mp.v = sigma.add(&SymMatrix::outer(&mp.m))?;
        let comp = component_from_moments(mp).map_err(|e| match e {
            Error::NotPositiveDefinite => Error::ComponentNotPositiveDefinite(l),
            other => other,
        })?;
        weights.push(mp.w);
        comps.push(comp);
    }
    MixtureModel::new(weights, comps)
}

/// `w += k/n; m += k (y − m)/(n w); V += k (y yᵀ − V)/(n w)` with `share = k/n`.
fn update_moments(mp: &mut MomentPair, y: &[f64], share: f64) {
    mp.w += share;
    let step = share / mp.w;
    let d = y.len();
    for i in 0..d {
        mp.m[i] += step * (y[i] - mp.m[i]);
    }
    for a in 0..d {
        for b in 0..=a {
            let v = mp.v.get(a, b);
            mp.v.set(a, b, v + step * (y[a] * y[b] - v));
        }
    }
}
