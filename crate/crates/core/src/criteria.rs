//! Information criteria and the goodness-of-fit statistics they consume.
//!
//! Every criterion is arranged so that smaller is better. The likelihood
//! penalties follow the usual conventions of the mixture-selection
//! literature:
//!
//! | name    | value                                   |
//! |---------|-----------------------------------------|
//! | AIC     | −2 logL + 2M                            |
//! | AIC3    | −2 logL + 3M                            |
//! | AIC4    | −2 logL + 4M                            |
//! | AICc    | −2 logL + 2M n / (n − M − 1)            |
//! | BIC     | −2 logL + M ln n                        |
//! | CAIC    | −2 logL + M (ln n + 1)                  |
//! | HQC     | −2 logL + 2M ln ln n                    |
//! | MDL2    | −2 logL + 2M ln n                       |
//! | MDL5    | −2 logL + 5M ln n                       |
//! | AWE     | −2 (logL − EN) + 2M (3/2 + ln n)        |
//! | CLC     | −2 logL + 2 EN                          |
//! | ICL     | −2 logL + 2 EN + M ln n                 |
//! | ICL-BIC | −2 logL + 2 EN + M ln n                 |
//! | PC      | −(1/n) Σ_j k_j Σ_l τ_jl²                |
//! | D       | total of positive relative deviations   |
//! | SSE     | Σ_j k_j (f_j − f̂_j)²                    |
//!
//! MDL2/MDL5 and the ICL/ICL-BIC pair are conventional choices; ICL and
//! ICL-BIC coincide here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{posterior_into, MixtureModel, Support};
use crate::preprocess::Preprocessed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    #[serde(rename = "AIC")]
    Aic,
    #[serde(rename = "AIC3")]
    Aic3,
    #[serde(rename = "AIC4")]
    Aic4,
    #[serde(rename = "AICc")]
    Aicc,
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "CAIC")]
    Caic,
    #[serde(rename = "HQC")]
    Hqc,
    #[serde(rename = "MDL2")]
    Mdl2,
    #[serde(rename = "MDL5")]
    Mdl5,
    #[serde(rename = "AWE")]
    Awe,
    #[serde(rename = "CLC")]
    Clc,
    #[serde(rename = "ICL")]
    Icl,
    #[serde(rename = "ICL-BIC")]
    IclBic,
    #[serde(rename = "PC")]
    Pc,
    #[serde(rename = "D")]
    D,
    #[serde(rename = "SSE")]
    Sse,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 16] = [
        Self::Aic,
        Self::Aic3,
        Self::Aic4,
        Self::Aicc,
        Self::Bic,
        Self::Caic,
        Self::Hqc,
        Self::Mdl2,
        Self::Mdl5,
        Self::Awe,
        Self::Clc,
        Self::Icl,
        Self::IclBic,
        Self::Pc,
        Self::D,
        Self::Sse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Aic => "AIC",
            Self::Aic3 => "AIC3",
            Self::Aic4 => "AIC4",
            Self::Aicc => "AICc",
            Self::Bic => "BIC",
            Self::Caic => "CAIC",
            Self::Hqc => "HQC",
            Self::Mdl2 => "MDL2",
            Self::Mdl5 => "MDL5",
            Self::Awe => "AWE",
            Self::Clc => "CLC",
            Self::Icl => "ICL",
            Self::IclBic => "ICL-BIC",
            Self::Pc => "PC",
            Self::D => "D",
            Self::Sse => "SSE",
        }
    }

    /// Whether the criterion needs responsibilities (entropy or PC).
    pub fn needs_posterior(self) -> bool {
        matches!(self, Self::Awe | Self::Clc | Self::Icl | Self::IclBic | Self::Pc)
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "criterion",
                name: s.to_owned(),
            })
    }
}

/// Inputs shared by all criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStatistics {
    pub log_l: f64,
    pub m: usize,
    pub n: usize,
    pub entropy: f64,
    pub d: f64,
    pub sse: f64,
    pub pc_raw: f64,
}

/// `(c − 1) + c (d + d (d + 1) / 2)`.
pub fn degrees_of_freedom(c: usize, d: usize) -> usize {
    (c - 1) + c * (d + d * (d + 1) / 2)
}

pub fn evaluate_criterion(kind: CriterionKind, stats: &FitStatistics) -> Result<f64> {
    let m = stats.m as f64;
    let n = stats.n as f64;
    let dev = -2.0 * stats.log_l;
    let ln_n = n.ln();
    Ok(match kind {
        CriterionKind::Aic => dev + 2.0 * m,
        CriterionKind::Aic3 => dev + 3.0 * m,
        CriterionKind::Aic4 => dev + 4.0 * m,
        CriterionKind::Aicc => {
            if stats.n <= stats.m + 1 {
                return Err(Error::InsufficientN { n: stats.n, m: stats.m });
            }
            dev + 2.0 * m * n / (n - m - 1.0)
        }
        CriterionKind::Bic => dev + m * ln_n,
        CriterionKind::Caic => dev + m * (ln_n + 1.0),
        CriterionKind::Hqc => dev + 2.0 * m * ln_n.ln(),
        CriterionKind::Mdl2 => dev + 2.0 * m * ln_n,
        CriterionKind::Mdl5 => dev + 5.0 * m * ln_n,
        CriterionKind::Awe => -2.0 * (stats.log_l - stats.entropy) + 2.0 * m * (1.5 + ln_n),
        CriterionKind::Clc => dev + 2.0 * stats.entropy,
        CriterionKind::Icl | CriterionKind::IclBic => dev + 2.0 * stats.entropy + m * ln_n,
        CriterionKind::Pc => -stats.pc_raw,
        CriterionKind::D => stats.d,
        CriterionKind::Sse => stats.sse,
    })
}

/// `EN = −Σ_j k_j Σ_l τ_jl ln τ_jl`.
pub fn assignment_entropy<S: Support + ?Sized>(model: &MixtureModel, support: &S) -> Result<f64> {
    Ok(posterior_summaries(model, support)?.0)
}

/// `(1/n) Σ_j k_j Σ_l τ_jl²`.
pub fn partition_coefficient<S: Support + ?Sized>(model: &MixtureModel, support: &S) -> Result<f64> {
    Ok(posterior_summaries(model, support)?.1)
}

/// `(EN, PC_raw)` in one pass.
fn posterior_summaries<S: Support + ?Sized>(model: &MixtureModel, support: &S) -> Result<(f64, f64)> {
    let mut scratch = vec![0.0; model.d()];
    let mut tau = vec![0.0; model.c()];
    let mut entropy = 0.0;
    let mut pc = 0.0;
    let mut total = 0.0;
    for j in 0..support.len() {
        posterior_into(model, support.point(j), &mut scratch, &mut tau).ok_or(Error::ZeroDensity(j))?;
        let k = support.weight(j);
        entropy -= k * tau.iter().filter(|t| **t > 0.0).map(|t| t * t.ln()).sum::<f64>();
        pc += k * tau.iter().map(|t| t * t).sum::<f64>();
        total += k;
    }
    Ok((entropy.max(0.0), pc / total))
}

/// `D = Σ_j max(0, (f_j − f̂_j) / f_j) k_j / n` for an arbitrary predictive
/// density `f̂`.
pub fn positive_relative_deviation_by<F>(prep: &Preprocessed, mut predictive: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let n = prep.n() as f64;
    (0..prep.len())
        .map(|j| {
            let f = prep.density(j);
            let rel = (f - predictive(prep.position(j))) / f;
            if rel > 0.0 {
                rel * prep.frequency(j) / n
            } else {
                0.0
            }
        })
        .sum()
}

pub fn total_positive_relative_deviation(model: &MixtureModel, prep: &Preprocessed) -> f64 {
    let mut scratch = vec![0.0; model.d()];
    let mut joint = vec![0.0; model.c()];
    positive_relative_deviation_by(prep, |y| model.log_pdf_with(y, &mut scratch, &mut joint).exp())
}

/// `Σ_j k_j (f_j − f̂_j)²`.
pub fn sse(model: &MixtureModel, prep: &Preprocessed) -> f64 {
    let mut scratch = vec![0.0; model.d()];
    let mut joint = vec![0.0; model.c()];
    (0..prep.len())
        .map(|j| {
            let fhat = model.log_pdf_with(prep.position(j), &mut scratch, &mut joint).exp();
            prep.frequency(j) * (prep.density(j) - fhat).powi(2)
        })
        .sum()
}

/// All statistics of `model` against `prep`. Responsibilities are only
/// evaluated when `with_posterior` is set; otherwise entropy is zero and
/// PC is one.
pub fn fit_statistics(model: &MixtureModel, prep: &Preprocessed, with_posterior: bool) -> Result<FitStatistics> {
    let d = model.d();
    let c = model.c();
    let mut scratch = vec![0.0; d];
    let mut joint = vec![0.0; c];
    let n = prep.n() as f64;
    let mut log_l = 0.0;
    let mut entropy = 0.0;
    let mut pc = 0.0;
    let mut dstat = 0.0;
    let mut sse = 0.0;
    for j in 0..prep.len() {
        let y = prep.position(j);
        let k = prep.frequency(j);
        let lse = posterior_into(model, y, &mut scratch, &mut joint).ok_or(Error::ZeroDensity(j))?;
        log_l += k * lse;
        if with_posterior {
            entropy -= k * joint.iter().filter(|t| **t > 0.0).map(|t| t * t.ln()).sum::<f64>();
            pc += k * joint.iter().map(|t| t * t).sum::<f64>();
        }
        let f = prep.density(j);
        let fhat = lse.exp();
        let rel = (f - fhat) / f;
        if rel > 0.0 {
            dstat += rel * k / n;
        }
        sse += k * (f - fhat).powi(2);
    }
    Ok(FitStatistics {
        log_l,
        m: degrees_of_freedom(c, d),
        n: prep.n(),
        entropy: entropy.max(0.0),
        d: dstat,
        sse,
        pc_raw: if with_posterior { pc / n } else { 1.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::linalg::SymMatrix;
    use crate::mixture::Component;
    use crate::preprocess::build_histogram;
    use approx::assert_abs_diff_eq;

    fn stats(log_l: f64, m: usize, n: usize) -> FitStatistics {
        FitStatistics {
            log_l,
            m,
            n,
            entropy: 0.0,
            d: 0.0,
            sse: 0.0,
            pc_raw: 1.0,
        }
    }

    #[test]
    fn names_round_trip() {
        for k in CriterionKind::ALL {
            assert_eq!(k.as_str().parse::<CriterionKind>().unwrap(), k);
        }
        assert!("bic".parse::<CriterionKind>().is_err());
    }

    #[test]
    fn degrees_of_freedom_examples() {
        assert_eq!(degrees_of_freedom(24, 2), 143);
        assert_eq!(degrees_of_freedom(1, 1), 2);
        assert_eq!(degrees_of_freedom(3, 3), 29);
    }

    #[test]
    fn criterion_examples() {
        let bic = evaluate_criterion(CriterionKind::Bic, &stats(-464822.0, 143, 50000)).unwrap();
        assert!((bic - 931191.0).abs() <= 1.0, "{bic}");
        assert_eq!(evaluate_criterion(CriterionKind::Aic, &stats(0.0, 1, 10)).unwrap(), 2.0);
        let s = stats(-1234.5, 17, 900);
        let caic = evaluate_criterion(CriterionKind::Caic, &s).unwrap();
        let bic = evaluate_criterion(CriterionKind::Bic, &s).unwrap();
        assert_abs_diff_eq!(caic - bic, 17.0, epsilon = 1e-9);
        assert_eq!(
            evaluate_criterion(CriterionKind::Aicc, &stats(-1.0, 10, 11)),
            Err(Error::InsufficientN { n: 11, m: 10 })
        );
    }

    #[test]
    fn aic_family_is_ordered() {
        let s = stats(-100.0, 5, 200);
        let a = evaluate_criterion(CriterionKind::Aic, &s).unwrap();
        let a3 = evaluate_criterion(CriterionKind::Aic3, &s).unwrap();
        let a4 = evaluate_criterion(CriterionKind::Aic4, &s).unwrap();
        assert!(a < a3 && a3 < a4);
    }

    fn two_component(sep: f64) -> MixtureModel {
        MixtureModel::new(
            vec![0.5, 0.5],
            vec![
                Component::new(vec![-sep], SymMatrix::identity(1)).unwrap(),
                Component::new(vec![sep], SymMatrix::identity(1)).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let one = MixtureModel::new(
            vec![1.0],
            vec![Component::new(vec![0.0], SymMatrix::identity(1)).unwrap()],
        )
        .unwrap();
        let ds = Dataset::new("t", 1, vec![0.0, 1.0, -3.0]).unwrap();
        assert_eq!(assignment_entropy(&one, &ds).unwrap(), 0.0);

        let mid = Dataset::new("t", 1, vec![0.0]).unwrap();
        assert_abs_diff_eq!(
            assignment_entropy(&two_component(2.0), &mid).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-12
        );

        let far: Vec<f64> = (0..200)
            .map(|j| if j % 2 == 0 { -50.0 } else { 50.0 } + (j as f64 * 0.37).sin())
            .collect();
        let n = far.len() as f64;
        let ds = Dataset::new("t", 1, far).unwrap();
        assert!(assignment_entropy(&two_component(50.0), &ds).unwrap() < 1e-6 * n);
    }

    fn single_bin_prep() -> Preprocessed {
        // four points in one bin of width 1 → f = 4 / (4 · 1) = 1
        let ds = Dataset::new("t", 1, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        Preprocessed::Histogram(build_histogram(&ds, 1, None, Some(&[0.0]), Some(&[1.0])).unwrap())
    }

    #[test]
    fn deviation_examples() {
        let prep = single_bin_prep();
        assert_eq!(positive_relative_deviation_by(&prep, |_| 2.0), 0.0);
        assert_eq!(positive_relative_deviation_by(&prep, |_| 0.0), 1.0);
        assert_abs_diff_eq!(positive_relative_deviation_by(&prep, |_| 0.75), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn sse_examples() {
        let ds = Dataset::new("t", 1, vec![0.25, 0.75]).unwrap();
        let prep = Preprocessed::Histogram(build_histogram(&ds, 2, None, Some(&[0.0]), Some(&[1.0])).unwrap());
        // f = 1 in both bins
        let resid = [0.1, -0.2];
        let total: f64 = (0..2).map(|j| prep.frequency(j) * resid[j] * resid[j]).sum();
        assert_abs_diff_eq!(total, 0.05, epsilon = 1e-15);
        let model = MixtureModel::new(
            vec![1.0],
            vec![Component::new(vec![0.5], SymMatrix::diagonal(&[1e6])).unwrap()],
        )
        .unwrap();
        let fhat = (-0.5f64 * (2.0 * std::f64::consts::PI * 1e6).ln()).exp();
        assert_abs_diff_eq!(sse(&model, &prep), 2.0 * (1.0 - fhat).powi(2), epsilon = 1e-9);
    }

    #[test]
    fn fit_statistics_agree_with_separate_functions() {
        let ds = Dataset::new("t", 1, (0..60).map(|j| (j as f64 * 0.71).sin() * 4.0).collect()).unwrap();
        let prep = Preprocessed::Histogram(build_histogram(&ds, 6, None, None, None).unwrap());
        let model = two_component(1.5);
        let s = fit_statistics(&model, &prep, true).unwrap();
        assert_abs_diff_eq!(
            s.log_l,
            crate::mixture::log_likelihood(&model, &prep).unwrap(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(s.entropy, assignment_entropy(&model, &prep).unwrap(), epsilon = 1e-9);
        assert_abs_diff_eq!(s.pc_raw, partition_coefficient(&model, &prep).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.d, total_positive_relative_deviation(&model, &prep), epsilon = 1e-12);
        assert_abs_diff_eq!(s.sse, sse(&model, &prep), epsilon = 1e-12);
        assert!(s.pc_raw <= 1.0 && s.pc_raw >= 0.5);
        assert!((0.0..=1.0).contains(&s.d));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_stats() -> impl Strategy<Value = FitStatistics> {
            (-1e6f64..0.0, 1usize..500, 600usize..100000, 0.0f64..1e4).prop_map(|(log_l, m, n, entropy)| {
                FitStatistics {
                    log_l,
                    m,
                    n,
                    entropy,
                    d: 0.1,
                    sse: 0.0,
                    pc_raw: 0.9,
                }
            })
        }

        proptest! {
            #[test]
            fn penalty_identities(s in any_stats()) {
                let ev = |k| evaluate_criterion(k, &s).unwrap();
                let m = s.m as f64;
                let ln_n = (s.n as f64).ln();
                let tol = |x: f64| 1e-9 * x.abs().max(1.0);
                let lhs = ev(CriterionKind::Bic) - ev(CriterionKind::Aic);
                prop_assert!((lhs - m * (ln_n - 2.0)).abs() <= tol(ev(CriterionKind::Bic)));
                let lhs = ev(CriterionKind::Caic) - ev(CriterionKind::Bic);
                prop_assert!((lhs - m).abs() <= tol(ev(CriterionKind::Bic)));
                let lhs = ev(CriterionKind::Icl) - ev(CriterionKind::Clc);
                prop_assert!((lhs - m * ln_n).abs() <= tol(ev(CriterionKind::Icl)));
            }

            #[test]
            fn likelihood_criteria_decrease_in_log_l(s in any_stats(), delta in 0.1f64..100.0) {
                let better = FitStatistics { log_l: s.log_l + delta, ..s };
                for k in CriterionKind::ALL {
                    if matches!(k, CriterionKind::Pc | CriterionKind::D | CriterionKind::Sse) {
                        continue;
                    }
                    if k == CriterionKind::Aicc && s.n <= s.m + 1 {
                        continue;
                    }
                    prop_assert!(evaluate_criterion(k, &better).unwrap() < evaluate_criterion(k, &s).unwrap());
                }
            }
        }
    }
}
