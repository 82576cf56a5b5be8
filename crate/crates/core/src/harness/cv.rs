use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::metrics::{evaluate, EvalReport, MeanStd};
use super::train::{fit, ModelSpec};
use crate::dataio::{stratified_folds, ActivitySpace, FoldPlan, NormStats, SparseSegment};
use crate::model::AnyModel;
use crate::Result;

/// Per-fold reports and their aggregate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub plan: FoldPlan,
    pub folds: Vec<EvalReport>,
    /// Normalizer fitted on each fold's training part.
    pub norms: Vec<NormStats>,
    pub final_losses: Vec<f64>,
    pub macro_precision: MeanStd,
    pub macro_recall: MeanStd,
    pub macro_f: MeanStd,
}

impl CvReport {
    pub fn from_folds(
        plan: FoldPlan,
        folds: Vec<EvalReport>,
        norms: Vec<NormStats>,
        final_losses: Vec<f64>,
    ) -> Self {
        let collect = |f: fn(&EvalReport) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
        Self {
            macro_precision: collect(|r| r.macro_precision),
            macro_recall: collect(|r| r.macro_recall),
            macro_f: collect(|r| r.macro_f),
            plan,
            folds,
            norms,
            final_losses,
        }
    }
}

/// Stratified `k`-fold cross-validation. Each fold trains a fresh model
/// (normalizer included) on the other `k−1` folds and is scored once.
pub fn cross_validate(
    segments: &[SparseSegment],
    space: &ActivitySpace,
    k: usize,
    config: &TrainConfig,
    spec: &ModelSpec,
) -> Result<CvReport> {
    config.validate()?;
    let plan = stratified_folds(segments, space, k, config.seed)?;
    let mut folds = Vec::with_capacity(k);
    let mut norms = Vec::with_capacity(k);
    let mut losses = Vec::with_capacity(k);
    for fold in 0..k {
        let train: Vec<SparseSegment> = plan
            .training_indices(fold)
            .into_iter()
            .map(|i| segments[i].clone())
            .collect();
        let valid: Vec<SparseSegment> = plan
            .validation_indices(fold)
            .into_iter()
            .map(|i| segments[i].clone())
            .collect();
        let trained = fit(spec, &train, space, config)?;
        folds.push(evaluate(&trained.model, &valid)?);
        norms.push(match &trained.model {
            AnyModel::Set(m) => m.norm().clone(),
            AnyModel::Baseline(m) => m.norm().clone(),
        });
        losses.push(*trained.loss_trace.last().expect("at least one epoch"));
    }
    Ok(CvReport::from_folds(plan, folds, norms, losses))
}
