use serde::{Deserialize, Serialize};

use crate::dataio::{ActivitySpace, SparseSegment};
use crate::model::{AnyModel, DenseBaselineModel, SetModel};
use crate::{Error, Result};

/// Anything that maps segments to activity indices.
pub trait Classifier {
    fn activity_space(&self) -> &ActivitySpace;
    fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>>;
}

impl Classifier for SetModel {
    fn activity_space(&self) -> &ActivitySpace {
        SetModel::activity_space(self)
    }
    fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>> {
        SetModel::predict_batch(self, segments)
    }
}

impl Classifier for DenseBaselineModel {
    fn activity_space(&self) -> &ActivitySpace {
        DenseBaselineModel::activity_space(self)
    }
    fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>> {
        DenseBaselineModel::predict_batch(self, segments)
    }
}

impl Classifier for AnyModel {
    fn activity_space(&self) -> &ActivitySpace {
        AnyModel::activity_space(self)
    }
    fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>> {
        match self {
            AnyModel::Set(m) => m.predict_batch(segments),
            AnyModel::Baseline(m) => m.predict_batch(segments),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub support: usize,
    /// Absent from both truth and predictions; its metrics are all 0.
    pub degenerate: bool,
}

/// Confusion matrix (rows = truth, columns = prediction) and derived scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub activities: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_confusion(space: &ActivitySpace, confusion: Vec<Vec<usize>>) -> Result<Self> {
        let c = space.len();
        if confusion.len() != c || confusion.iter().any(|r| r.len() != c) {
            return Err(Error::dim(format!("confusion matrix must be {c}×{c}")));
        }
        let mut per_class = Vec::with_capacity(c);
        for k in 0..c {
            let tp = confusion[k][k];
            let support: usize = confusion[k].iter().sum();
            let predicted: usize = confusion.iter().map(|r| r[k]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f_score = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            per_class.push(ClassMetrics {
                precision,
                recall,
                f_score,
                support,
                degenerate: support == 0 && predicted == 0,
            });
        }
        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / c as f64;
        let total: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..c).map(|k| confusion[k][k]).sum();
        Ok(Self {
            activities: space.names().to_vec(),
            macro_precision: mean(|m| m.precision),
            macro_recall: mean(|m| m.recall),
            macro_f: mean(|m| m.f_score),
            accuracy: ratio(correct, total),
            confusion,
            per_class,
        })
    }

    pub fn from_predictions(space: &ActivitySpace, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::dim("truth and prediction lengths differ"));
        }
        let c = space.len();
        let mut confusion = vec![vec![0usize; c]; c];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= c || p >= c {
                return Err(Error::Index(format!("label {} outside activity space", t.max(p))));
            }
            confusion[t][p] += 1;
        }
        Self::from_confusion(space, confusion)
    }

    pub fn degenerate_classes(&self) -> Vec<&str> {
        self.per_class
            .iter()
            .zip(&self.activities)
            .filter(|(m, _)| m.degenerate)
            .map(|(_, a)| a.as_str())
            .collect()
    }
}

/// Predicts every segment and scores the predictions.
pub fn evaluate<M: Classifier + ?Sized>(model: &M, segments: &[SparseSegment]) -> Result<EvalReport> {
    let truth: Vec<usize> = segments.iter().map(|s| s.label).collect();
    let predicted = model.predict_batch(segments)?;
    EvalReport::from_predictions(model.activity_space(), &truth, &predicted)
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        if values.iter().all(|&v| v == values[0]) {
            return Self {
                mean: values[0],
                std: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space2() -> ActivitySpace {
        ActivitySpace::new(["a", "b"]).unwrap()
    }

    #[test]
    fn perfect_predictions() {
        let r = EvalReport::from_predictions(&space2(), &[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_eq!(r.confusion, vec![vec![2, 0], vec![0, 2]]);
        assert_eq!((r.macro_precision, r.macro_recall, r.macro_f), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_worked_confusion() {
        let r = EvalReport::from_confusion(&space2(), vec![vec![5, 0], vec![2, 3]]).unwrap();
        assert!((r.per_class[0].precision - 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(r.per_class[0].recall, 1.0);
        assert_eq!(r.per_class[1].precision, 1.0);
        assert!((r.per_class[1].recall - 0.6).abs() < 1e-15);
        // F0 = 2·(5/7)/(12/7) = 5/6, F1 = 1.2/1.6 = 3/4
        assert!((r.macro_f - (5.0 / 6.0 + 0.75) / 2.0).abs() < 1e-15);
        assert!((r.macro_f - 0.7916666666666666).abs() < 1e-12);
    }

    #[test]
    fn absent_class_is_flagged() {
        let space = ActivitySpace::new(["a", "b", "c"]).unwrap();
        let r = EvalReport::from_predictions(&space, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(r.degenerate_classes(), vec!["c"]);
        assert_eq!(r.per_class[2].f_score, 0.0);
        assert!((r.macro_f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mean_std_population() {
        let s = MeanStd::of(&[0.9; 7]);
        assert_eq!(s.std, 0.0);
        let s = MeanStd::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
    }
}
