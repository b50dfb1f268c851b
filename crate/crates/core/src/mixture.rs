//! Multivariate normal mixtures: densities, moments, sampling and random
//! model generation.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{round_half_up, Dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, Cholesky, SymMatrix};
use crate::preprocess::Preprocessed;
use crate::rng;

/// Multivariate normal component `N(μ, Σ)` with its factorization cached.
#[derive(Debug, Clone)]
pub struct Component {
    mu: Vec<f64>,
    sigma: SymMatrix,
    chol: Cholesky,
    log_norm: f64,
}

impl PartialEq for Component {
    fn eq(&self, other: &Self) -> bool {
        self.mu == other.mu && self.sigma == other.sigma
    }
}

impl Component {
    pub fn new(mu: Vec<f64>, sigma: SymMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: mu.len(),
            });
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite mean".into()));
        }
        let chol = sigma.cholesky()?;
        let d = mu.len() as f64;
        let log_norm = -0.5 * (d * (2.0 * PI).ln() + chol.log_determinant());
        Ok(Self {
            mu,
            sigma,
            chol,
            log_norm,
        })
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// `ln f(y | μ, Σ)`; `scratch` must hold `d` values.
    #[inline]
    pub fn log_pdf_with(&self, y: &[f64], scratch: &mut [f64]) -> f64 {
        for ((s, a), b) in scratch.iter_mut().zip(y).zip(&self.mu) {
            *s = a - b;
        }
        self.chol.forward_solve(scratch);
        let q: f64 = scratch.iter().map(|z| z * z).sum();
        self.log_norm - 0.5 * q
    }

    pub fn log_pdf(&self, y: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.d()];
        self.log_pdf_with(y, &mut scratch)
    }

    /// Density at the mean, `((2π)^d |Σ|)^{-1/2}`.
    pub fn peak_density(&self) -> f64 {
        self.log_norm.exp()
    }
}

pub fn component_pdf(comp: &Component, y: &[f64]) -> f64 {
    comp.log_pdf(y).exp()
}

/// Finite mixture `Σ w_l N(μ_l, Σ_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    d: usize,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    components: Vec<Component>,
}

impl MixtureModel {
    /// Weights must be positive and sum to one within `1e-9`; they are
    /// renormalized exactly.
    pub fn new(weights: Vec<f64>, components: Vec<Component>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: components.len(),
            });
        }
        let d = components[0].d();
        if let Some(c) = components.iter().find(|c| c.d() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.d(),
            });
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            d,
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            components,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of components `c`.
    pub fn c(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Per-component `ln w_l + ln f(y | θ_l)` written into `out`.
    #[inline]
    pub fn joint_log_densities(&self, y: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        for ((o, c), lw) in out.iter_mut().zip(&self.components).zip(&self.log_weights) {
            *o = lw + c.log_pdf_with(y, scratch);
        }
    }

    /// `ln f(y)` by log-sum-exp over components.
    pub fn log_pdf_with(&self, y: &[f64], scratch: &mut [f64], joint: &mut [f64]) -> f64 {
        self.joint_log_densities(y, scratch, joint);
        log_sum_exp(joint)
    }

    pub fn log_pdf(&self, y: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.d];
        let mut joint = vec![0.0; self.c()];
        self.log_pdf_with(y, &mut scratch, &mut joint)
    }

    /// Index of the component maximizing `w_l f(y | θ_l)`; lowest on ties.
    pub fn argmax_component(&self, y: &[f64]) -> usize {
        let mut scratch = vec![0.0; self.d];
        let mut joint = vec![0.0; self.c()];
        self.joint_log_densities(y, &mut scratch, &mut joint);
        argmax(&joint)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            d: self.d,
            c: self.c(),
            w: self.weights.clone(),
            components: self
                .components
                .iter()
                .map(|c| ComponentDocument {
                    mu: c.mu.clone(),
                    sigma: c.sigma.as_slice().to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        if doc.c != doc.components.len() || doc.c != doc.w.len() {
            return Err(Error::InvalidArgument(format!(
                "model document declares c = {} but lists {} weights and {} components",
                doc.c,
                doc.w.len(),
                doc.components.len()
            )));
        }
        let components = doc
            .components
            .iter()
            .enumerate()
            .map(|(l, c)| {
                if c.mu.len() != doc.d {
                    return Err(Error::DimensionMismatch {
                        expected: doc.d,
                        got: c.mu.len(),
                    });
                }
                let sigma = SymMatrix::from_row_major(doc.d, &c.sigma)?;
                Component::new(c.mu.clone(), sigma).map_err(|e| match e {
                    Error::NotPositiveDefinite => Error::ComponentNotPositiveDefinite(l),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.w.clone(), components)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("model document: {e}")))?;
        Self::from_document(&doc)
    }
}

/// Serialized model: `{d, c, w[], components[{mu[], sigma[]}]}` with `sigma`
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub d: usize,
    pub c: usize,
    pub w: Vec<f64>,
    pub components: Vec<ComponentDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDocument {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[inline]
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[inline]
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn mixture_pdf(model: &MixtureModel, y: &[f64]) -> f64 {
    model.log_pdf(y).exp()
}

/// A weighted set of support points: raw observations or preprocessed
/// bins/points.
pub trait Support {
    fn len(&self) -> usize;
    fn d(&self) -> usize;
    fn point(&self, j: usize) -> &[f64];
    fn weight(&self, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Support for Dataset {
    fn len(&self) -> usize {
        self.n()
    }
    fn d(&self) -> usize {
        Dataset::d(self)
    }
    fn point(&self, j: usize) -> &[f64] {
        self.row(j)
    }
    fn weight(&self, _: usize) -> f64 {
        1.0
    }
}

impl Support for Preprocessed {
    fn len(&self) -> usize {
        Preprocessed::len(self)
    }
    fn d(&self) -> usize {
        Preprocessed::d(self)
    }
    fn point(&self, j: usize) -> &[f64] {
        self.position(j)
    }
    fn weight(&self, j: usize) -> f64 {
        self.frequency(j)
    }
}

fn check_dims(model: &MixtureModel, d: usize) -> Result<()> {
    if model.d() == d {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: model.d(),
            got: d,
        })
    }
}

/// `Σ_j k_j ln f(ŷ_j)`.
pub fn log_likelihood<S: Support + ?Sized>(model: &MixtureModel, support: &S) -> Result<f64> {
    check_dims(model, support.d())?;
    let mut scratch = vec![0.0; model.d()];
    let mut joint = vec![0.0; model.c()];
    let mut total = 0.0;
    for j in 0..support.len() {
        let lp = model.log_pdf_with(support.point(j), &mut scratch, &mut joint);
        if !lp.is_finite() {
            return Err(Error::ZeroDensity(j));
        }
        total += support.weight(j) * lp;
    }
    Ok(total)
}

/// Responsibilities `τ_l = w_l f(y | θ_l) / f(y)`.
pub fn posterior_tau(model: &MixtureModel, y: &[f64]) -> Result<Vec<f64>> {
    check_dims(model, y.len())?;
    let mut scratch = vec![0.0; model.d()];
    let mut joint = vec![0.0; model.c()];
    posterior_into(model, y, &mut scratch, &mut joint).ok_or(Error::ZeroDensity(0))?;
    Ok(joint)
}

/// Overwrites `joint` with the responsibilities at `y`; `None` when every
/// component density underflows.
pub(crate) fn posterior_into(model: &MixtureModel, y: &[f64], scratch: &mut [f64], joint: &mut [f64]) -> Option<f64> {
    model.joint_log_densities(y, scratch, joint);
    let lse = log_sum_exp(joint);
    if !lse.is_finite() {
        return None;
    }
    for v in joint.iter_mut() {
        *v = (*v - lse).exp();
    }
    Some(lse)
}

/// First moment and second raw moment of a component, with its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub m: Vec<f64>,
    pub v: SymMatrix,
    pub w: f64,
}

/// `m = μ`, `V = Σ + μ μᵀ`.
pub fn moments_from_component(comp: &Component, w: f64) -> MomentPair {
    MomentPair {
        m: comp.mu.clone(),
        v: comp.sigma.add(&SymMatrix::outer(&comp.mu)).expect("dimensions agree"),
        w,
    }
}

/// `μ = m`, `Σ = V − m mᵀ`.
pub fn component_from_moments(mp: &MomentPair) -> Result<Component> {
    let sigma = mp.v.sub(&SymMatrix::outer(&mp.m))?;
    Component::new(mp.m.clone(), sigma)
}

/// Draws `n_per_component[l]` observations from every component, in
/// component order, labelling each with its component id (1-based).
pub fn sample<R: Rng + ?Sized>(model: &MixtureModel, n_per_component: &[usize], rng: &mut R) -> Result<LabeledDataset> {
    if n_per_component.len() != model.c() {
        return Err(Error::LengthMismatch {
            left: model.c(),
            right: n_per_component.len(),
        });
    }
    let d = model.d();
    let total: usize = n_per_component.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("nothing to sample".into()));
    }
    let mut values = Vec::with_capacity(total * d);
    let mut labels = Vec::with_capacity(total);
    let mut z = vec![0.0; d];
    for (l, (comp, &count)) in model.components.iter().zip(n_per_component).enumerate() {
        for _ in 0..count {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let x = comp.chol.mul_vec(&z);
            values.extend(x.iter().zip(&comp.mu).map(|(a, b)| a + b));
            labels.push(l + 1);
        }
    }
    LabeledDataset::new(Dataset::new("sample", d, values)?, labels)
}

/// Settings for a random mixture with rotated covariance matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub d: usize,
    pub c: usize,
    /// Requested total size; per-component counts are `round(w_l n)`.
    pub n: usize,
    pub mu_range: (f64, f64),
    pub lambda_range: (f64, f64),
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.c == 0 || self.n == 0 {
            return Err(Error::InvalidArgument("d, c and n must be positive".into()));
        }
        let (ml, mh) = self.mu_range;
        let (ll, lh) = self.lambda_range;
        if !(ml <= mh) || !(ll > 0.0 && ll <= lh) || !ml.is_finite() || !lh.is_finite() {
            return Err(Error::InvalidArgument(
                "ranges must be ordered and eigenvalues positive".into(),
            ));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Weights `runif(0.1, 0.9)` normalized, means uniform over `mu_range`,
/// covariances `P Λ Pᵀ` with uniform eigenvalues and a random orthonormal
/// frame `P`.
pub fn generate_random_model(spec: &GeneratorSpec) -> Result<(MixtureModel, Vec<usize>)> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, "generate");
    let raw: Vec<f64> = (0..spec.c).map(|_| rng.random_range(0.1..0.9)).collect();
    let total: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let mut components = Vec::with_capacity(spec.c);
    for _ in 0..spec.c {
        let mu: Vec<f64> = (0..spec.d)
            .map(|_| uniform(&mut rng, spec.mu_range.0, spec.mu_range.1))
            .collect();
        let lambda: Vec<f64> = (0..spec.d)
            .map(|_| uniform(&mut rng, spec.lambda_range.0, spec.lambda_range.1))
            .collect();
        let p = random_orthonormal(spec.d, &mut rng);
        components.push(Component::new(mu, p.conjugate_diagonal(&lambda)?)?);
    }
    let counts = w.iter().map(|wl| round_half_up(wl * spec.n as f64)).collect();
    Ok((MixtureModel::new(w, components)?, counts))
}

/// Generates a model and samples a dataset from it.
pub fn generate_dataset(spec: &GeneratorSpec) -> Result<(MixtureModel, LabeledDataset)> {
    let (model, counts) = generate_random_model(spec)?;
    let sample = sample(&model, &counts, &mut rng::stream(spec.seed, "sample"))?;
    Ok((model, sample))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn std_normal(d: usize) -> Component {
        Component::new(vec![0.0; d], SymMatrix::identity(d)).unwrap()
    }

    #[test]
    fn component_pdf_examples() {
        assert_abs_diff_eq!(
            component_pdf(&std_normal(2), &[0.0, 0.0]),
            0.159_154_943_091_895_35,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            component_pdf(&std_normal(1), &[0.0]),
            0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
        let c = Component::new(vec![0.0, 0.0], SymMatrix::diagonal(&[4.0, 4.0])).unwrap();
        assert_abs_diff_eq!(component_pdf(&c, &[0.0, 0.0]), 1.0 / (8.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn mixture_pdf_examples() {
        let c = Component::new(vec![1.0, -1.0], SymMatrix::diagonal(&[2.0, 0.5])).unwrap();
        let single = MixtureModel::new(vec![1.0], vec![c.clone()]).unwrap();
        let y = [0.3, 0.2];
        assert_abs_diff_eq!(mixture_pdf(&single, &y), component_pdf(&c, &y), epsilon = 1e-15);

        let twin = MixtureModel::new(vec![0.3, 0.7], vec![c.clone(), c.clone()]).unwrap();
        assert_abs_diff_eq!(mixture_pdf(&twin, &y), component_pdf(&c, &y), epsilon = 1e-15);

        let far = MixtureModel::new(
            vec![0.5, 0.5],
            vec![
                Component::new(vec![-10.0], SymMatrix::identity(1)).unwrap(),
                Component::new(vec![10.0], SymMatrix::identity(1)).unwrap(),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(
            mixture_pdf(&far, &[10.0]),
            0.5 * 0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(MixtureModel::new(vec![0.5, 0.6], vec![std_normal(1), std_normal(1)]).is_err());
        assert!(MixtureModel::new(vec![1.0, 0.0], vec![std_normal(1), std_normal(1)]).is_err());
    }

    #[test]
    fn log_likelihood_examples() {
        let m = MixtureModel::new(vec![1.0], vec![std_normal(1)]).unwrap();
        let ds = Dataset::new("t", 1, vec![0.0]).unwrap();
        assert_abs_diff_eq!(
            log_likelihood(&m, &ds).unwrap(),
            -0.918_938_533_204_672_8,
            epsilon = 1e-14
        );
        let ds2 = Dataset::new("t", 1, vec![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            log_likelihood(&m, &ds2).unwrap(),
            2.0 * -0.918_938_533_204_672_8,
            epsilon = 1e-14
        );
        let ds3 = Dataset::new("t", 2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(log_likelihood(&m, &ds3), Err(Error::DimensionMismatch { .. })));
        let far = Dataset::new("t", 1, vec![1e200]).unwrap();
        assert_eq!(log_likelihood(&m, &far), Err(Error::ZeroDensity(0)));
    }

    #[test]
    fn posterior_examples() {
        let one = MixtureModel::new(vec![1.0], vec![std_normal(1)]).unwrap();
        assert_eq!(posterior_tau(&one, &[3.0]).unwrap(), vec![1.0]);

        let sym = MixtureModel::new(
            vec![0.5, 0.5],
            vec![
                Component::new(vec![-2.0], SymMatrix::identity(1)).unwrap(),
                Component::new(vec![2.0], SymMatrix::identity(1)).unwrap(),
            ],
        )
        .unwrap();
        let t = posterior_tau(&sym, &[0.0]).unwrap();
        assert_abs_diff_eq!(t[0], 0.5, epsilon = 1e-15);

        let twin = MixtureModel::new(vec![0.9, 0.1], vec![std_normal(1), std_normal(1)]).unwrap();
        let t = posterior_tau(&twin, &[0.7]).unwrap();
        assert_abs_diff_eq!(t[0], 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn moment_examples() {
        let c = Component::new(vec![0.0, 0.0], SymMatrix::diagonal(&[2.0, 3.0])).unwrap();
        assert_eq!(moments_from_component(&c, 1.0).v, *c.sigma());

        let c = Component::new(vec![2.0], SymMatrix::diagonal(&[3.0])).unwrap();
        let mp = moments_from_component(&c, 1.0);
        assert_eq!((mp.m.clone(), mp.v.get(0, 0)), (vec![2.0], 7.0));
        let back = component_from_moments(&mp).unwrap();
        assert_eq!(back.mu(), &[2.0]);
        assert_abs_diff_eq!(back.sigma().get(0, 0), 3.0, epsilon = 1e-15);

        let c = Component::new(vec![1.0, 0.0], SymMatrix::identity(2)).unwrap();
        assert_eq!(moments_from_component(&c, 1.0).v, SymMatrix::diagonal(&[2.0, 1.0]));

        let zero = MomentPair {
            m: vec![0.0, 0.0],
            v: SymMatrix::identity(2),
            w: 1.0,
        };
        let c = component_from_moments(&zero).unwrap();
        assert_eq!(c.sigma(), &SymMatrix::identity(2));

        let collapsed = MomentPair {
            m: vec![1.0, 2.0],
            v: SymMatrix::outer(&[1.0, 2.0]),
            w: 1.0,
        };
        assert_eq!(component_from_moments(&collapsed), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn sampling_law_of_large_numbers() {
        let m = MixtureModel::new(vec![1.0], vec![std_normal(2)]).unwrap();
        let s = sample(&m, &[1000], &mut rng::stream(42, "sample")).unwrap();
        let n = s.data().n() as f64;
        let mean: Vec<f64> = (0..2).map(|i| s.data().rows().map(|r| r[i]).sum::<f64>() / n).collect();
        for i in 0..2 {
            assert!(mean[i].abs() < 0.1);
            for k in 0..2 {
                let cov = s
                    .data()
                    .rows()
                    .map(|r| (r[i] - mean[i]) * (r[k] - mean[k]))
                    .sum::<f64>()
                    / n;
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((cov - want).abs() < 0.1, "cov[{i}][{k}] = {cov}");
            }
        }
    }

    #[test]
    fn sampling_labels_and_determinism() {
        let m = MixtureModel::new(vec![0.5, 0.5], vec![std_normal(1), std_normal(1)]).unwrap();
        let s = sample(&m, &[0, 5], &mut rng::stream(1, "s")).unwrap();
        assert!(s.labels().iter().all(|&l| l == 2));
        let a = sample(&m, &[3, 4], &mut rng::stream(9, "s")).unwrap();
        let b = sample(&m, &[3, 4], &mut rng::stream(9, "s")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generator_examples() {
        let spec = GeneratorSpec {
            d: 2,
            c: 1,
            n: 100,
            mu_range: (-1.0, 1.0),
            lambda_range: (5.0, 5.0),
            seed: 4,
        };
        let (m, counts) = generate_random_model(&spec).unwrap();
        assert_eq!(m.weights(), &[1.0]);
        assert_eq!(counts, vec![100]);
        let s = m.components()[0].sigma();
        assert_abs_diff_eq!(s.get(0, 0), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(0, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn generated_eigenvalues_stay_in_range() {
        let spec = GeneratorSpec {
            d: 2,
            c: 20,
            n: 50000,
            mu_range: (-100.0, 100.0),
            lambda_range: (1.0, 100.0),
            seed: 123,
        };
        let (m, counts) = generate_random_model(&spec).unwrap();
        let wmax = m.weights().iter().cloned().fold(0.0, f64::max);
        let wmin = m.weights().iter().cloned().fold(1.0, f64::min);
        // runif(0.1, 0.9) normalized over 20 draws: max/min bounded by 9.
        assert!(wmax / wmin < 9.0 && wmax < 0.1 && wmin > 0.005);
        let total: usize = counts.iter().sum();
        assert!((total as i64 - 50000).abs() <= 20);
        for c in m.components() {
            let s = c.sigma();
            let tr = s.get(0, 0) + s.get(1, 1);
            let det = s.get(0, 0) * s.get(1, 1) - s.get(0, 1) * s.get(1, 0);
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let (l1, l2) = (tr / 2.0 - disc, tr / 2.0 + disc);
            assert!(l1 >= 1.0 - 1e-9 && l2 <= 100.0 + 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = GeneratorSpec {
            d: 3,
            c: 4,
            n: 10,
            mu_range: (-5.0, 5.0),
            lambda_range: (0.5, 2.0),
            seed: 8,
        };
        let (m, _) = generate_random_model(&spec).unwrap();
        let back = MixtureModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back.to_json(), m.to_json());
        assert!(MixtureModel::from_json("{\"d\":1}").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn posterior_sums_to_one_and_ignores_weight_scale(
                w in proptest::collection::vec(0.05f64..1.0, 3),
                y in proptest::collection::vec(-4.0f64..4.0, 2),
                scale in 0.1f64..10.0,
            ) {
                let comps: Vec<Component> = (0..3)
                    .map(|l| Component::new(vec![l as f64, -(l as f64)], SymMatrix::diagonal(&[1.0 + l as f64, 0.5])).unwrap())
                    .collect();
                let total: f64 = w.iter().sum();
                let a = MixtureModel::new(w.iter().map(|x| x / total).collect(), comps.clone()).unwrap();
                let scaled: Vec<f64> = w.iter().map(|x| x * scale).collect();
                let st: f64 = scaled.iter().sum();
                let b = MixtureModel::new(scaled.iter().map(|x| x / st).collect(), comps).unwrap();
                let ta = posterior_tau(&a, &y).unwrap();
                let tb = posterior_tau(&b, &y).unwrap();
                prop_assert!((ta.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                for (x, z) in ta.iter().zip(&tb) {
                    prop_assert!((x - z).abs() <= 1e-12);
                }
            }
        }
    }
}
