use super::*;
use crate::data::Dataset;
use crate::linalg::SymMatrix;
use crate::mixture::{generate_dataset, log_likelihood, sample, Component, GeneratorSpec};
use crate::rng::stream;

fn two_clusters(n_each: usize, seed: u64) -> Dataset {
    let comps = vec![
        Component::new(vec![0.0, 0.0], SymMatrix::identity(2)).unwrap(),
        Component::new(vec![30.0, 0.0], SymMatrix::identity(2)).unwrap(),
    ];
    let model = MixtureModel::new(vec![0.5, 0.5], comps).unwrap();
    let mut rng = stream(seed, "sample");
    sample(&model, &[n_each, n_each], &mut rng).unwrap().into_parts().0
}

fn hist(data: &Dataset, v: usize) -> Preprocessed {
    Preprocessed::build(data, PreprocessingKind::Histogram, v, None, None, None).unwrap()
}

#[test]
fn d_min_one_gives_one_component() {
    let data = two_clusters(500, 1);
    let prep = hist(&data, 20);
    let (comps, w_res) = peel_components(&prep, 1.0, &EstimatorConfig::default()).unwrap();
    assert_eq!(comps.len(), 1);
    assert!(w_res <= 1.0);
}

#[test]
fn separated_clusters_peel_into_two() {
    let data = two_clusters(2000, 2);
    let prep = hist(&data, 30);
    let (comps, w_res) = peel_components(&prep, 0.4, &EstimatorConfig::default()).unwrap();
    assert_eq!(comps.len(), 2, "residual {w_res}");
    let total: f64 = comps.iter().map(|c| c.weight).sum::<f64>() + w_res;
    assert!((total - 1.0).abs() < 1e-9);
    for c in &comps {
        assert!((c.weight - 0.5).abs() < 0.1, "weight {}", c.weight);
    }
}

#[test]
fn cmax_one_gives_single_component() {
    let data = two_clusters(500, 3);
    let config = EstimatorConfig {
        cmax: 1,
        k: KSpec::Grid(KGrid::new(vec![15]).unwrap()),
        ..Default::default()
    };
    let fit = fit(&data, &config).unwrap();
    assert_eq!(fit.model.c(), 1);
    assert_eq!(fit.all_k, vec![15]);
    assert_eq!(fit.opt_c.len(), 1);
}

#[test]
fn single_gaussian_prefers_one_component() {
    let comp = Component::new(
        vec![1.0, -2.0],
        SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
    )
    .unwrap();
    let model = MixtureModel::new(vec![1.0], vec![comp]).unwrap();
    let data = sample(&model, &[3000], &mut stream(4, "sample"))
        .unwrap()
        .into_parts()
        .0;
    let prep = hist(&data, 15);
    let config = EstimatorConfig {
        criterion: CriterionKind::Bic,
        cmax: 4,
        ..Default::default()
    };
    let res = fit_fixed_k(&prep, &config).unwrap();
    assert!(res.opt_c.len() <= 4);
    assert_eq!(res.c(), 1, "IC {:?}", res.opt_ic);
    let imin = (0..res.opt_ic.len())
        .min_by(|&a, &b| res.opt_ic[a].total_cmp(&res.opt_ic[b]))
        .unwrap();
    assert_eq!(res.opt_c[imin], res.c());
}

#[test]
fn summary_is_consistent() {
    let spec = GeneratorSpec {
        d: 2,
        c: 3,
        n: 3000,
        mu_range: (-50.0, 50.0),
        lambda_range: (1.0, 10.0),
        seed: 5,
    };
    let (_, labeled) = generate_dataset(&spec).unwrap();
    let data = labeled.into_parts().0;
    let config = EstimatorConfig {
        criterion: CriterionKind::Bic,
        cmax: 6,
        ..Default::default()
    };
    let fit = fit(&data, &config).unwrap();
    let w: f64 = fit.model.weights().iter().sum();
    assert!((w - 1.0).abs() < 1e-9);
    assert!(fit.all_k.windows(2).all(|p| p[0] < p[1]));
    assert_eq!(fit.opt_c.len(), fit.opt_ic.len());
    let prep = hist(&data, fit.summary.k);
    let ll = log_likelihood(&fit.model, &prep).unwrap();
    assert!((ll - fit.summary.log_l).abs() <= 1e-8 * ll.abs());
    let mut stats = fit.stats;
    stats.log_l = ll;
    let ic = evaluate_criterion(CriterionKind::Bic, &stats).unwrap();
    assert!((ic - fit.summary.ic).abs() <= 1e-8 * ic.abs());
    assert!(fit.summary.ic <= fit.opt_ic[0]);
    // Predicted mass over occupied bins.
    let vol: f64 = prep.h().iter().product();
    let mass: f64 = (0..prep.len())
        .map(|j| crate::mixture::mixture_pdf(&fit.model, prep.position(j)) * vol)
        .sum();
    assert!(mass <= 1.0 + 1e-6, "mass {mass}");
    let again = super::fit(&data, &config).unwrap();
    assert_eq!(again.summary, fit.summary);
}
