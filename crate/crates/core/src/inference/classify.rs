//! Bayes classification with one fitted mixture per class.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mixture::MixtureModel;

/// A class model with its prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub class: usize,
    pub prior: f64,
    pub model: MixtureModel,
}

/// Per-class one-vs-rest metrics; `None` where the ratio is `0/0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub accuracy: f64,
    pub error: f64,
    pub precision: Vec<Option<f64>>,
    pub sensitivity: Vec<Option<f64>>,
    pub specificity: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub classes: Vec<usize>,
    pub priors: Vec<f64>,
    pub zp: Vec<usize>,
    /// `cm[true][predicted]`, rows and columns in `classes` order.
    pub cm: Option<Vec<Vec<usize>>>,
    pub metrics: Option<ConfusionMetrics>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion_metrics(cm: &[Vec<usize>]) -> ConfusionMetrics {
    let s = cm.len();
    let total: usize = cm.iter().flatten().sum();
    let diag: usize = (0..s).map(|i| cm[i][i]).sum();
    let row: Vec<usize> = cm.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..s).map(|j| cm.iter().map(|r| r[j]).sum()).collect();
    let accuracy = ratio(diag, total).unwrap_or(f64::NAN);
    ConfusionMetrics {
        accuracy,
        error: ratio(total - diag, total).unwrap_or(f64::NAN),
        precision: (0..s).map(|i| ratio(cm[i][i], col[i])).collect(),
        sensitivity: (0..s).map(|i| ratio(cm[i][i], row[i])).collect(),
        specificity: (0..s)
            .map(|i| ratio(total + cm[i][i] - row[i] - col[i], total - row[i]))
            .collect(),
    }
}

/// Assigns every test row to the class maximizing `ln P_s + ln f_s(y)`.
/// With `truth` the confusion matrix and metrics are filled in; true labels
/// outside the trained classes are rejected.
pub fn classify(models: &[ClassModel], test: &Dataset, truth: Option<&[usize]>) -> Result<ClassificationResult> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidArgument("no class models".into()))?;
    let d = first.model.d();
    for m in models {
        if m.model.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.model.d(),
            });
        }
        if !(m.prior > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "class {} prior must be positive",
                m.class
            )));
        }
    }
    if test.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: test.d(),
        });
    }
    let log_priors: Vec<f64> = models.iter().map(|m| m.prior.ln()).collect();
    let cmax = models.iter().map(|m| m.model.c()).max().unwrap_or(1);
    let mut scratch = vec![0.0; d];
    let mut joint = vec![0.0; cmax];
    let zp: Vec<usize> = test
        .rows()
        .map(|y| {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (s, m) in models.iter().enumerate() {
                let score = log_priors[s] + m.model.log_pdf_with(y, &mut scratch, &mut joint[..m.model.c()]);
                if score > best_score {
                    best = s;
                    best_score = score;
                }
            }
            models[best].class
        })
        .collect();
    let classes: Vec<usize> = models.iter().map(|m| m.class).collect();
    let (cm, metrics) = match truth {
        None => (None, None),
        Some(t) => {
            if t.len() != test.n() {
                return Err(Error::LengthMismatch {
                    left: test.n(),
                    right: t.len(),
                });
            }
            let index = |c: usize| {
                classes
                    .iter()
                    .position(|&x| x == c)
                    .ok_or_else(|| Error::InvalidArgument(format!("class {c} has no model")))
            };
            let s = classes.len();
            let mut cm = vec![vec![0usize; s]; s];
            for (&a, &p) in t.iter().zip(&zp) {
                cm[index(a)?][index(p)?] += 1;
            }
            let metrics = confusion_metrics(&cm);
            (Some(cm), Some(metrics))
        }
    };
    Ok(ClassificationResult {
        classes,
        priors: models.iter().map(|m| m.prior).collect(),
        zp,
        cm,
        metrics,
    })
}
