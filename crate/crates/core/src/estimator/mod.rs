//! REBMIX estimation: components are peeled one at a time off the
//! preprocessed data (rough estimate at the global mode, ML enhancement),
//! the unassigned remainder is classified by the Bayes rule, and the number
//! of components and the smoothing parameter are chosen by an information
//! criterion.
//!
//! Each component's inner loop stops at the minimum of its own D
//! statistic, so it does not depend on `D_min`. The sweep over `D_min` is
//! therefore a sweep over prefixes of one peeling sequence: the largest
//! `D_min` that admits exactly `c` components is `w_res(c) / c`.

mod peel;
mod rough;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{degrees_of_freedom, evaluate_criterion, fit_statistics, CriterionKind, FitStatistics};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mixture::MixtureModel;
use crate::preprocess::{golden_section_refine, KGrid, Preprocessed, PreprocessingKind};

pub use peel::{bayes_assign, peel_components, PeelSequence, PeeledComponent};
pub use rough::{assemble_rough_covariance, enhanced_estimate, rough_estimate, Restraints, RoughComponent};

/// Candidate smoothing parameters.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KSpec {
    #[default]
    Auto,
    Grid(KGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub preprocessing: PreprocessingKind,
    pub cmax: usize,
    pub criterion: CriterionKind,
    pub k: KSpec,
    pub y0: Option<Vec<f64>>,
    pub ymin: Option<Vec<f64>>,
    pub ymax: Option<Vec<f64>>,
    pub ar: f64,
    pub restraints: Restraints,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            preprocessing: PreprocessingKind::Histogram,
            cmax: 15,
            criterion: CriterionKind::Aic,
            k: KSpec::Auto,
            y0: None,
            ymin: None,
            ymax: None,
            ar: 0.1,
            restraints: Restraints::Loose,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ar > 0.0 && self.ar <= 1.0) {
            return Err(Error::InvalidArgument(format!("ar = {} outside (0, 1]", self.ar)));
        }
        if self.cmax == 0 {
            return Err(Error::InvalidArgument("cmax must be at least 1".into()));
        }
        Ok(())
    }

    /// The K grid for `n` observations.
    pub fn grid(&self, n: usize) -> KGrid {
        match &self.k {
            KSpec::Grid(g) => g.clone(),
            KSpec::Auto => match self.preprocessing {
                PreprocessingKind::KNearestNeighbour => KGrid::auto(n, 2, n.max(2)),
                _ => KGrid::auto(n, 1, usize::MAX),
            },
        }
    }

    fn check_dims(&self, d: usize) -> Result<()> {
        for v in [&self.y0, &self.ymin, &self.ymax].into_iter().flatten() {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Largest admissible number of components for a preprocessed structure.
pub(crate) fn component_limit(prep: &Preprocessed) -> usize {
    match prep.kind() {
        PreprocessingKind::ParzenWindow => prep.n(),
        _ => prep.parameter(),
    }
}

/// The row printed for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub dataset: String,
    pub preprocessing: PreprocessingKind,
    pub cmax: usize,
    pub criterion: CriterionKind,
    pub ar: f64,
    pub restraints: Restraints,
    pub c: usize,
    /// Optimal `v` or `k`.
    pub k: usize,
    pub y0: Option<Vec<f64>>,
    pub ymin: Vec<f64>,
    pub ymax: Vec<f64>,
    pub h: Vec<f64>,
    pub ic: f64,
    pub log_l: f64,
    pub m: usize,
}

/// Best model for one value of `v` or `k`, with per-`c` diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedKResult {
    pub k: usize,
    pub model: MixtureModel,
    pub stats: FitStatistics,
    pub ic: f64,
    pub opt_c: Vec<usize>,
    pub opt_ic: Vec<f64>,
    pub opt_log_l: Vec<f64>,
    pub opt_d: Vec<f64>,
    /// Largest `D_min` producing each candidate.
    pub opt_d_min: Vec<f64>,
}

impl FixedKResult {
    pub fn c(&self) -> usize {
        self.model.c()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: MixtureModel,
    pub summary: FitSummary,
    pub stats: FitStatistics,
    pub opt_c: Vec<usize>,
    pub opt_ic: Vec<f64>,
    pub opt_log_l: Vec<f64>,
    pub opt_d: Vec<f64>,
    pub all_k: Vec<usize>,
    pub all_ic: Vec<f64>,
    pub n: usize,
    pub d: usize,
}

/// The full peeling sequence for one preprocessed structure: components
/// are taken off until `cmax`, the component limit or an exhausted residue
/// stops it.
pub fn peel_all(prep: &Preprocessed, config: &EstimatorConfig) -> Result<PeelSequence> {
    config.validate()?;
    let settings = peel::PeelSettings {
        ar: config.ar,
        restraints: config.restraints,
        max_components: config.cmax.min(component_limit(prep)).max(1),
    };
    peel::peel_sequence(prep, settings, |_, _| false)
}

/// Evaluates every candidate number of components for one preprocessed
/// structure and keeps the one minimizing the criterion.
pub fn fit_fixed_k(prep: &Preprocessed, config: &EstimatorConfig) -> Result<FixedKResult> {
    config.validate()?;
    let n = prep.n();
    let seq = peel_all(prep, config)?;
    let with_posterior = config.criterion.needs_posterior();

    let mut out = FixedKResult {
        k: prep.parameter(),
        model: MixtureModel::new(vec![1.0], vec![seq.components[0].component.clone()])?,
        stats: FitStatistics {
            log_l: f64::NEG_INFINITY,
            m: 0,
            n,
            entropy: 0.0,
            d: 1.0,
            sse: 0.0,
            pc_raw: 1.0,
        },
        ic: f64::INFINITY,
        opt_c: Vec::new(),
        opt_ic: Vec::new(),
        opt_log_l: Vec::new(),
        opt_d: Vec::new(),
        opt_d_min: Vec::new(),
    };
    let mut found = false;
    for c in 1..=seq.components.len() {
        let comps: Vec<_> = seq.components[..c]
            .iter()
            .map(|p| (p.weight, p.component.clone()))
            .collect();
        let w_res = seq.residual_weight(c, n);
        let evaluated = bayes_assign(&comps, prep, &seq.residues[c - 1]).and_then(|model| {
            let mut stats = fit_statistics(&model, prep, with_posterior)?;
            stats.m = degrees_of_freedom(model.c(), prep.d());
            let ic = evaluate_criterion(config.criterion, &stats)?;
            Ok((model, stats, ic))
        });
        out.opt_c.push(c);
        out.opt_d_min.push(w_res / c as f64);
        match evaluated {
            Ok((model, stats, ic)) => {
                out.opt_ic.push(ic);
                out.opt_log_l.push(stats.log_l);
                out.opt_d.push(stats.d);
                if !found || ic < out.ic {
                    found = true;
                    out.model = model;
                    out.stats = stats;
                    out.ic = ic;
                }
            }
            Err(_) => {
                out.opt_ic.push(f64::INFINITY);
                out.opt_log_l.push(f64::NAN);
                out.opt_d.push(f64::NAN);
            }
        }
    }
    if !found {
        return Err(Error::NoModel);
    }
    Ok(out)
}

fn fit_at(data: &Dataset, config: &EstimatorConfig, k: usize) -> Result<(Preprocessed, FixedKResult)> {
    let prep = Preprocessed::build(
        data,
        config.preprocessing,
        k,
        config.y0.as_deref(),
        config.ymin.as_deref(),
        config.ymax.as_deref(),
    )?;
    let res = fit_fixed_k(&prep, config)?;
    Ok((prep, res))
}

fn better(a: &FixedKResult, b: &FixedKResult) -> bool {
    a.ic < b.ic || (a.ic == b.ic && (a.c(), a.k) < (b.c(), b.k))
}

/// Full estimation: every K of the grid, golden-section refinement around
/// an interior best K, and the overall best model.
pub fn fit(data: &Dataset, config: &EstimatorConfig) -> Result<FitResult> {
    config.validate()?;
    config.check_dims(data.d())?;
    let grid = config.grid(data.n());
    let mut evaluated: BTreeMap<usize, Option<FixedKResult>> = grid
        .values()
        .par_iter()
        .map(|&k| (k, fit_at(data, config, k).ok().map(|(_, r)| r)))
        .collect();

    let best_k = |ev: &BTreeMap<usize, Option<FixedKResult>>| -> Option<usize> {
        let mut best: Option<&FixedKResult> = None;
        for r in ev.values().flatten() {
            if best.is_none_or(|b| better(r, b)) {
                best = Some(r);
            }
        }
        best.map(|r| r.k)
    };

    let ks = grid.values();
    if let Some(kb) = best_k(&evaluated) {
        let pos = ks.iter().position(|&k| k == kb).expect("grid value");
        if pos > 0 && pos + 1 < ks.len() && ks[pos + 1] - ks[pos - 1] > 2 {
            let bracket = (ks[pos - 1], kb, ks[pos + 1]);
            let bracket_ok = [bracket.0, bracket.2]
                .iter()
                .all(|k| evaluated.get(k).is_some_and(|r| r.is_some()));
            if bracket_ok {
                let mut eval = |k: usize| -> f64 {
                    evaluated
                        .entry(k)
                        .or_insert_with(|| fit_at(data, config, k).ok().map(|(_, r)| r))
                        .as_ref()
                        .map_or(f64::INFINITY, |r| r.ic)
                };
                golden_section_refine(bracket, &mut eval)?;
            }
        }
    }

    let kb = best_k(&evaluated).ok_or(Error::NoModel)?;
    let (prep, best) = fit_at(data, config, kb)?;
    let (all_k, all_ic): (Vec<usize>, Vec<f64>) = evaluated
        .iter()
        .map(|(&k, r)| (k, r.as_ref().map_or(f64::INFINITY, |r| r.ic)))
        .unzip();
    let summary = FitSummary {
        dataset: data.name().to_string(),
        preprocessing: config.preprocessing,
        cmax: config.cmax,
        criterion: config.criterion,
        ar: config.ar,
        restraints: config.restraints,
        c: best.c(),
        k: best.k,
        y0: config.y0.clone(),
        ymin: prep.ymin().to_vec(),
        ymax: prep.ymax().to_vec(),
        h: prep.h().to_vec(),
        ic: best.ic,
        log_l: best.stats.log_l,
        m: best.stats.m,
    };
    Ok(FitResult {
        model: best.model,
        summary,
        stats: best.stats,
        opt_c: best.opt_c,
        opt_ic: best.opt_ic,
        opt_log_l: best.opt_log_l,
        opt_d: best.opt_d,
        all_k,
        all_ic,
        n: data.n(),
        d: data.d(),
    })
}

#[cfg(test)]
mod tests;
