//! Rough component estimation at the global mode and its maximum
//! likelihood enhancement.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{correlation_from_covariance, covariance_from_correlation, inverse, SymMatrix};
use crate::mixture::Component;
use crate::preprocess::{GlobalMode, Preprocessed};

/// Half-width of the box around the mode, in conditional standard
/// deviations, whose entries feed the rough correlation estimate.
const CORRELATION_RADIUS: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restraints {
    Rigid,
    #[default]
    Loose,
}

impl Restraints {
    pub fn as_str(self) -> &'static str {
        match self {
            Restraints::Rigid => "rigid",
            Restraints::Loose => "loose",
        }
    }
}

impl std::fmt::Display for Restraints {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Restraints {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigid" => Ok(Restraints::Rigid),
            "loose" => Ok(Restraints::Loose),
            _ => Err(Error::UnknownName {
                kind: "restraints",
                name: s.to_string(),
            }),
        }
    }
}

/// Component parameters pinned to a global mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughComponent {
    pub mu: Vec<f64>,
    /// Covariance after ε-inflation.
    pub sigma: SymMatrix,
    pub weight: f64,
    /// Entries with positive frequency when the estimate was made.
    pub support: Vec<usize>,
    /// Empirical component density at the mode, `f_lm`.
    pub mode_density: f64,
    pub epsilon: f64,
}

impl RoughComponent {
    pub fn component(&self) -> Result<Component> {
        Component::new(self.mu.clone(), self.sigma.clone())
    }
}

/// Covariance from per-dimension conditional densities at the mode, a
/// scatter matrix for the correlation structure and the mode density.
///
/// Returns `(Σ, ε)` with `Σ` already inflated by `ε`. A scatter matrix that
/// yields no usable correlation falls back to independence.
pub fn assemble_rough_covariance(
    conditional: &[f64],
    scatter: Option<&SymMatrix>,
    mode_density: f64,
) -> Result<(SymMatrix, f64)> {
    let d = conditional.len();
    let sigma_cond: Vec<f64> = conditional
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            if f > 0.0 && f.is_finite() {
                Ok(1.0 / ((2.0 * PI).sqrt() * f))
            } else {
                Err(Error::SingularConditional(i))
            }
        })
        .collect::<Result<_>>()?;

    let corr = scatter
        .and_then(|c| correlation_from_covariance(c).ok())
        .and_then(|r| inverse(&r).ok().map(|g| (r, g)))
        .filter(|(_, g)| (0..d).all(|i| g.get(i, i).is_finite() && g.get(i, i) >= 1.0));
    let (r, g) = corr.unwrap_or_else(|| (SymMatrix::identity(d), SymMatrix::identity(d)));

    let var: Vec<f64> = (0..d).map(|i| g.get(i, i) * sigma_cond[i].powi(2)).collect();
    let mut sigma = covariance_from_correlation(&r, &var)?;
    let chol = sigma.cholesky()?;
    // ln(f_lm sqrt((2π)^d det Σ))
    let log_prod = mode_density.ln() + 0.5 * (d as f64 * (2.0 * PI).ln() + chol.log_determinant());
    let epsilon = (-2.0 / d as f64 * log_prod).exp().max(1.0);
    if epsilon > 1.0 {
        sigma = sigma.scaled(epsilon);
    }
    Ok((sigma, epsilon))
}

/// Rough estimate of the component centred at `mode`, using the entries
/// with positive `freq` as its support.
pub fn rough_estimate(
    prep: &Preprocessed,
    freq: &[f64],
    mode: &GlobalMode,
    weight_share: f64,
) -> Result<RoughComponent> {
    if !(mode.density > 0.0) {
        return Err(Error::EmptySelection);
    }
    if !(weight_share > 0.0 && weight_share <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "weight share {weight_share} outside (0, 1]"
        )));
    }
    let d = prep.d();
    let m = mode.index;
    let support: Vec<usize> = (0..prep.len()).filter(|&j| freq[j] > 0.0).collect();

    let mut conditional = vec![0.0; d];
    for (i, c) in conditional.iter_mut().enumerate() {
        let slice: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&j| prep.slice_membership(m, i, j).0)
            .collect();
        let (run, window) = mode_run(prep, freq, m, i, slice);
        if run <= 0.0 || window <= 0.0 {
            return Err(Error::SingularConditional(i));
        }
        *c = window / (run * prep.window_width(m, i));
    }

    let mu = mode.position.clone();
    let radius: Vec<f64> = conditional
        .iter()
        .map(|f| CORRELATION_RADIUS / ((2.0 * PI).sqrt() * f))
        .collect();
    let mut scatter = SymMatrix::zeros(d);
    let mut mass = 0.0;
    let mut dev = vec![0.0; d];
    for &j in &support {
        let y = prep.position(j);
        if (0..d).any(|i| (y[i] - mu[i]).abs() > radius[i]) {
            continue;
        }
        for i in 0..d {
            dev[i] = y[i] - mu[i];
        }
        let k = freq[j];
        mass += k;
        for a in 0..d {
            for b in 0..=a {
                scatter.set(a, b, scatter.get(a, b) + k * dev[a] * dev[b]);
            }
        }
    }
    let scatter = (mass > 0.0).then(|| scatter.scaled(1.0 / mass));

    // The weight a normal with the conditional spreads needs to reach the
    // mode density, capped by what is left to share.
    let (bare, _) = assemble_rough_covariance(&conditional, scatter.as_ref(), f64::INFINITY)?;
    let log_peak_mass = mode.density.ln() + 0.5 * (d as f64 * (2.0 * PI).ln() + bare.cholesky()?.log_determinant());
    let weight = log_peak_mass.exp().min(weight_share).min(1.0);
    let mode_density = mode.density / weight;
    let (sigma, epsilon) = assemble_rough_covariance(&conditional, scatter.as_ref(), mode_density)?;
    Ok(RoughComponent {
        mu,
        sigma,
        weight,
        support,
        mode_density,
        epsilon,
    })
}

/// Mass of the hill around the mode along dimension `i` and the mass in
/// the mode's own window.
///
/// The slice is walked outwards from the mode and stops once the residual
/// density rises clearly again (another component) or, for bins, at an
/// empty cell.
fn mode_run(prep: &Preprocessed, freq: &[f64], m: usize, i: usize, mut slice: Vec<usize>) -> (f64, f64) {
    let coord = |j: usize| prep.position(j)[i];
    slice.sort_by(|&a, &b| coord(a).total_cmp(&coord(b)));
    let Some(centre) = slice.iter().position(|&j| j == m) else {
        return (0.0, 0.0);
    };
    let level = |j: usize| freq[j] * prep.unit_density(j);
    let window = slice
        .iter()
        .filter(|&&j| prep.slice_membership(m, i, j).1)
        .map(|&j| freq[j])
        .sum::<f64>();
    let mut run = freq[m];
    for dir in [-1isize, 1] {
        let mut lowest = level(m);
        let mut prev = m;
        let mut t = centre as isize + dir;
        while t >= 0 && (t as usize) < slice.len() {
            let j = slice[t as usize];
            if let Preprocessed::Histogram(g) = prep {
                if (g.bins[j].cell[i] - g.bins[prev].cell[i]).abs() != 1 {
                    break;
                }
            }
            let f = level(j);
            if rises(prep, f, lowest) {
                break;
            }
            lowest = lowest.min(f);
            run += freq[j];
            prev = j;
            t += dir;
        }
    }
    (run.max(window), window)
}

/// Whether `f` lies significantly above the running minimum `lowest`.
fn rises(prep: &Preprocessed, f: f64, lowest: f64) -> bool {
    match prep {
        // Densities of bins are counts times a constant; allow Poisson noise.
        Preprocessed::Histogram(g) => {
            let unit = 1.0 / (g.n as f64 * g.volume());
            let (k, low) = (f / unit, lowest / unit);
            k > low + 2.0 * low.sqrt() + 1.0
        }
        Preprocessed::Points(_) => f > 1.5 * lowest,
    }
}

/// Weighted mean and population scatter of the entries with positive `freq`.
pub(crate) fn weighted_moments(prep: &Preprocessed, freq: &[f64]) -> Result<(f64, Vec<f64>, SymMatrix)> {
    let d = prep.d();
    let mut mass = 0.0;
    let mut mu = vec![0.0; d];
    for (j, &k) in freq.iter().enumerate() {
        if k > 0.0 {
            mass += k;
            for (m, y) in mu.iter_mut().zip(prep.position(j)) {
                *m += k * y;
            }
        }
    }
    if !(mass >= (d + 1) as f64) {
        return Err(Error::InsufficientSupport { mass, d });
    }
    for m in &mut mu {
        *m /= mass;
    }
    let mut scatter = SymMatrix::zeros(d);
    let mut dev = vec![0.0; d];
    for (j, &k) in freq.iter().enumerate() {
        if k > 0.0 {
            let y = prep.position(j);
            for i in 0..d {
                dev[i] = y[i] - mu[i];
            }
            for a in 0..d {
                for b in 0..=a {
                    scatter.set(a, b, scatter.get(a, b) + k * dev[a] * dev[b]);
                }
            }
        }
    }
    Ok((mass, mu, scatter.scaled(1.0 / mass)))
}

/// Maximum likelihood parameters over the support weighted by `freq`.
///
/// Loose restraints accept the estimate whenever its covariance is
/// positive definite and otherwise keep the rough parameters; rigid
/// restraints only move the mean.
pub fn enhanced_estimate(
    rough: &RoughComponent,
    prep: &Preprocessed,
    freq: &[f64],
    restraints: Restraints,
) -> Result<Component> {
    let (_, mu, scatter) = weighted_moments(prep, freq)?;
    match restraints {
        Restraints::Rigid => Component::new(mu, rough.sigma.clone()),
        Restraints::Loose => Component::new(mu, resolve_to_bins(prep, scatter)).or_else(|_| rough.component()),
    }
}

/// A histogram cannot resolve spread below its bin width: when some
/// conditional variance of `sigma` is under the within-bin variance
/// `h_i²/12`, that variance is added to every dimension.
pub(crate) fn resolve_to_bins(prep: &Preprocessed, sigma: SymMatrix) -> SymMatrix {
    let Preprocessed::Histogram(g) = prep else {
        return sigma;
    };
    let floor: Vec<f64> = g.h.iter().map(|h| h * h / 12.0).collect();
    let resolved = match inverse(&sigma) {
        Ok(p) => (0..floor.len()).all(|i| 1.0 / p.get(i, i) >= floor[i]),
        Err(_) => false,
    };
    if resolved {
        sigma
    } else {
        sigma.add(&SymMatrix::diagonal(&floor)).expect("dimensions agree")
    }
}
