//! Parametric and nonparametric bootstrap of a fitted mixture.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{round_half_up, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{fit, EstimatorConfig, FitResult};
use crate::mixture::{sample, MixtureModel};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapMode {
    Parametric,
    Nonparametric,
}

impl std::str::FromStr for BootstrapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parametric" => Ok(Self::Parametric),
            "nonparametric" => Ok(Self::Nonparametric),
            _ => Err(Error::UnknownName {
                kind: "bootstrap mode",
                name: s.to_string(),
            }),
        }
    }
}

/// Mean, standard error and coefficient of variation of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub se: f64,
    pub cv: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            f64::NAN
        };
        Self {
            mean,
            se,
            cv: se / mean.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mode: BootstrapMode,
    /// Replicates requested.
    pub b: usize,
    /// Replicates whose fit failed.
    pub failed: usize,
    pub c_all: Vec<usize>,
    pub c_mode: usize,
    pub c_prob: f64,
    pub c_se: f64,
    pub c_cv: f64,
    /// Per component, over replicates with `c == c_mode`.
    pub w: Vec<Spread>,
    /// `mu[l][i]`.
    pub mu: Vec<Vec<Spread>>,
    /// `sigma[l]`, row-major `d × d`.
    pub sigma: Vec<Vec<Spread>>,
}

/// Pairs every component of `reference` with a distinct component of
/// `other`, repeatedly taking the closest remaining pair of means.
/// Returns `assignment[l_ref] = l_other`.
pub fn match_components(reference: &MixtureModel, other: &MixtureModel) -> Vec<usize> {
    let mut pairs = Vec::with_capacity(reference.c() * other.c());
    for (a, ca) in reference.components().iter().enumerate() {
        for (b, cb) in other.components().iter().enumerate() {
            let dist: f64 = ca.mu().iter().zip(cb.mu()).map(|(x, y)| (x - y).powi(2)).sum();
            pairs.push((dist, a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut out = vec![usize::MAX; reference.c()];
    let mut used = vec![false; other.c()];
    for (_, a, b) in pairs {
        if out[a] == usize::MAX && !used[b] {
            out[a] = b;
            used[b] = true;
        }
    }
    out
}

/// Bootstrap dataset `index`: drawn from `model` with `round(w_l n)` rows
/// per component, or `n` rows drawn with replacement from `data`.
pub fn resample(model: &MixtureModel, data: &Dataset, mode: BootstrapMode, seed: u64, index: usize) -> Result<Dataset> {
    let mut rng = substream(seed, "boot", index as u64);
    let resampled = match mode {
        BootstrapMode::Parametric => {
            let n = data.n() as f64;
            let counts: Vec<usize> = model.weights().iter().map(|w| round_half_up(w * n)).collect();
            sample(model, &counts, &mut rng)?.into_parts().0
        }
        BootstrapMode::Nonparametric => {
            let rows: Vec<usize> = (0..data.n()).map(|_| rng.random_range(0..data.n())).collect();
            data.select(&rows)
        }
    };
    Ok(resampled.with_name(format!("{}_{}", data.name(), index + 1)))
}

fn replicate(
    model: &MixtureModel,
    data: &Dataset,
    mode: BootstrapMode,
    seed: u64,
    index: usize,
    config: &EstimatorConfig,
) -> Result<MixtureModel> {
    let resampled = resample(model, data, mode, seed, index)?;
    Ok(fit(&resampled, config)?.model)
}

/// Refits `b` resampled datasets and summarizes the spread of the number
/// of components and of the parameters of the modal replicates.
pub fn bootstrap(
    fit_result: &FitResult,
    data: &Dataset,
    mode: BootstrapMode,
    b: usize,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<BootstrapResult> {
    bootstrap_model(&fit_result.model, data, mode, b, seed, config)
}

/// [`bootstrap`] around a model read back from disk; `data` is the dataset
/// it was fitted to.
pub fn bootstrap_model(
    model: &MixtureModel,
    data: &Dataset,
    mode: BootstrapMode,
    b: usize,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<BootstrapResult> {
    if b < 2 {
        return Err(Error::InvalidArgument("bootstrap needs B >= 2".into()));
    }
    let models: Vec<Result<MixtureModel>> = (0..b)
        .into_par_iter()
        .map(|i| replicate(model, data, mode, seed, i, config))
        .collect();
    let failed = models.iter().filter(|m| m.is_err()).count();
    let models: Vec<MixtureModel> = models.into_iter().filter_map(|m| m.ok()).collect();
    if models.is_empty() {
        return Err(Error::NoModel);
    }
    let c_all: Vec<usize> = models.iter().map(|m| m.c()).collect();
    let max_c = *c_all.iter().max().expect("nonempty");
    let mut counts = vec![0usize; max_c + 1];
    for &c in &c_all {
        counts[c] += 1;
    }
    // Ties go to the smaller count.
    let c_mode = (1..=max_c)
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
        .expect("nonempty");
    let c_prob = counts[c_mode] as f64 / c_all.len() as f64;
    let c_spread = Spread::of(&c_all.iter().map(|&c| c as f64).collect::<Vec<_>>());

    let modal: Vec<&MixtureModel> = models.iter().filter(|m| m.c() == c_mode).collect();
    let reference = if model.c() == c_mode { model } else { modal[0] };
    let d = reference.d();
    let mut w_vals = vec![Vec::new(); c_mode];
    let mut mu_vals = vec![vec![Vec::new(); d]; c_mode];
    let mut sigma_vals = vec![vec![Vec::new(); d * d]; c_mode];
    for m in &modal {
        let assign = match_components(reference, m);
        for (l, &o) in assign.iter().enumerate() {
            let comp = &m.components()[o];
            w_vals[l].push(m.weights()[o]);
            for i in 0..d {
                mu_vals[l][i].push(comp.mu()[i]);
                for j in 0..d {
                    sigma_vals[l][i * d + j].push(comp.sigma().get(i, j));
                }
            }
        }
    }
    Ok(BootstrapResult {
        mode,
        b,
        failed,
        c_mode,
        c_prob,
        c_se: c_spread.se,
        c_cv: c_spread.cv,
        c_all,
        w: w_vals.iter().map(|v| Spread::of(v)).collect(),
        mu: mu_vals
            .iter()
            .map(|l| l.iter().map(|v| Spread::of(v)).collect())
            .collect(),
        sigma: sigma_vals
            .iter()
            .map(|l| l.iter().map(|v| Spread::of(v)).collect())
            .collect(),
    })
}
