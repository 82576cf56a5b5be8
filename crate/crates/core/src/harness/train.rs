use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use crate::dataio::{ActivitySpace, NormStats, SparseSegment};
use crate::interp::InterpKind;
use crate::model::{AnyModel, DenseBaselineModel, SetArchitecture, SetModel};
use crate::nncore::{layer_seed, Matrix, RmsPropState};
use crate::{Error, Result};

/// Which model family to fit, with its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Set(SetArchitecture),
    DenseBaseline {
        hidden: Vec<usize>,
        interp: InterpKind,
        target_rate_hz: f64,
    },
}

impl ModelSpec {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Set(_) => "set".to_string(),
            ModelSpec::DenseBaseline { interp, .. } => format!("dense_{}", interp.name()),
        }
    }
}

/// A fitted model and its mean training loss per epoch.
#[derive(Debug, Clone)]
pub struct Trained<M> {
    pub model: M,
    pub loss_trace: Vec<f64>,
}

fn check_training_set(segments: &[SparseSegment], space: &ActivitySpace) -> Result<usize> {
    let first = segments
        .first()
        .ok_or_else(|| Error::TrainingData("no training segments".into()))?;
    let d = first.dim();
    let mut counts = vec![0usize; space.len()];
    for s in segments {
        if s.is_empty() {
            return Err(Error::EmptySegment);
        }
        if s.dim() != d {
            return Err(Error::dim("training segments differ in channel count"));
        }
        *counts
            .get_mut(s.label)
            .ok_or_else(|| Error::Index(format!("label {} outside activity space", s.label)))? += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::TrainingData(format!(
            "activity '{}' has no training segments",
            space.names()[c]
        )));
    }
    Ok(d)
}

fn shuffler(config: &TrainConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(layer_seed(config.seed, 500))
}

/// Fits a set model with mini-batch RMSProp on the mean NLL.
///
/// The normalizer is fitted on `segments` only. Batches are drawn from a
/// fresh seeded shuffle each epoch; every segment is pooled over its own
/// readings.
pub fn train(
    segments: &[SparseSegment],
    space: &ActivitySpace,
    config: &TrainConfig,
    arch: &SetArchitecture,
) -> Result<Trained<SetModel>> {
    config.validate()?;
    let d = check_training_set(segments, space)?;
    let norm = NormStats::fit_segments(segments)?;
    let mut model = SetModel::new(d, arch, space.clone(), norm, config.seed)?;
    let (phi, rho) = model.nets_mut();
    let mut phi_opt = RmsPropState::new(config.optimizer(), phi);
    let mut rho_opt = RmsPropState::new(config.optimizer(), rho);
    let mut rng = shuffler(config);
    let mut order: Vec<usize> = (0..segments.len()).collect();
    let mut trace = Vec::with_capacity(config.total_epochs);

    for epoch in 0..config.total_epochs {
        let lr = config.lr_at(epoch);
        phi_opt.set_lr(lr);
        rho_opt.set_lr(lr);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let refs: Vec<&SparseSegment> = batch.iter().map(|&i| &segments[i]).collect();
            let (loss, phi_grads, rho_grads) = model.loss_and_gradients(&refs)?;
            total += loss * batch.len() as f64;
            let (phi, rho) = model.nets_mut();
            phi_opt.step(phi, &phi_grads)?;
            rho_opt.step(rho, &rho_grads)?;
        }
        let mean = total / segments.len() as f64;
        if !mean.is_finite() || !model.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        trace.push(mean);
    }
    Ok(Trained {
        model,
        loss_trace: trace,
    })
}

/// Fits the fixed-grid baseline. Segments are normalized and resampled once
/// up front; the schedule matches [`train`].
pub fn train_baseline(
    segments: &[SparseSegment],
    space: &ActivitySpace,
    config: &TrainConfig,
    hidden: &[usize],
    interp: InterpKind,
    target_rate: f64,
) -> Result<Trained<DenseBaselineModel>> {
    config.validate()?;
    let d = check_training_set(segments, space)?;
    let norm = NormStats::fit_segments(segments)?;
    let mut model = DenseBaselineModel::new(
        d,
        hidden,
        interp,
        target_rate,
        config.window_len,
        space.clone(),
        norm,
        config.seed,
    )?;
    let dense = segments
        .iter()
        .map(|s| model.resample(s))
        .collect::<Result<Vec<_>>>()?;
    let x = model.design_matrix(&dense)?;
    let labels: Vec<usize> = segments.iter().map(|s| s.label).collect();
    let width = x.cols();
    let mut opt = RmsPropState::new(config.optimizer(), model.mlp());
    let mut rng = shuffler(config);
    let mut order: Vec<usize> = (0..segments.len()).collect();
    let mut trace = Vec::with_capacity(config.total_epochs);

    for epoch in 0..config.total_epochs {
        opt.set_lr(config.lr_at(epoch));
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut data = Vec::with_capacity(batch.len() * width);
            for &i in batch {
                data.extend_from_slice(x.row(i));
            }
            let xb = Matrix::from_vec(batch.len(), width, data)?;
            let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.mlp().loss_and_gradients(&xb, &yb)?;
            total += loss * batch.len() as f64;
            opt.step(model.mlp_mut(), &grads)?;
        }
        let mean = total / segments.len() as f64;
        if !mean.is_finite() || !model.mlp().is_finite() {
            return Err(Error::NonFinite("training loss"));
        }
        trace.push(mean);
    }
    Ok(Trained {
        model,
        loss_trace: trace,
    })
}

/// Trains whichever family `spec` names.
pub fn fit(
    spec: &ModelSpec,
    segments: &[SparseSegment],
    space: &ActivitySpace,
    config: &TrainConfig,
) -> Result<Trained<AnyModel>> {
    Ok(match spec {
        ModelSpec::Set(arch) => {
            let t = train(segments, space, config, arch)?;
            Trained {
                model: AnyModel::Set(t.model),
                loss_trace: t.loss_trace,
            }
        }
        ModelSpec::DenseBaseline {
            hidden,
            interp,
            target_rate_hz,
        } => {
            let t = train_baseline(segments, space, config, hidden, *interp, *target_rate_hz)?;
            Trained {
                model: AnyModel::Baseline(t.model),
                loss_trace: t.loss_trace,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::SensorReading;

    fn toy(n: usize) -> (Vec<SparseSegment>, ActivitySpace) {
        let space = ActivitySpace::new(["lo", "hi"]).unwrap();
        let segs = (0..n)
            .map(|i| {
                let label = i % 2;
                let base = if label == 0 { 0.1 } else { 0.9 };
                SparseSegment {
                    readings: (0..3)
                        .map(|k| SensorReading::new(k as f64 * 0.5, vec![base + 0.01 * k as f64, 1.0 - base]))
                        .collect(),
                    window_start: 0.0,
                    window_len: 2.0,
                    label,
                }
            })
            .collect();
        (segs, space)
    }

    fn quick() -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            lr: 1e-2,
            total_epochs: 6,
            lr_drop_epoch: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn missing_class_is_training_error() {
        let (segs, space) = toy(6);
        let only_lo: Vec<_> = segs.into_iter().filter(|s| s.label == 0).collect();
        let arch = SetArchitecture {
            phi: vec![4],
            rho: vec![4],
        };
        let err = train(&only_lo, &space, &quick(), &arch).unwrap_err();
        assert!(matches!(err, Error::TrainingData(_)));
        assert!(err.to_string().contains("hi"));
    }

    #[test]
    fn trace_length_matches_epochs() {
        let (segs, space) = toy(10);
        let arch = SetArchitecture {
            phi: vec![4],
            rho: vec![4],
        };
        let t = train(&segs, &space, &quick(), &arch).unwrap();
        assert_eq!(t.loss_trace.len(), 6);
        let b = train_baseline(&segs, &space, &quick(), &[5], InterpKind::Linear, 2.0).unwrap();
        assert_eq!(b.loss_trace.len(), 6);
        assert!(b.loss_trace.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn spec_json_shape() {
        let s: ModelSpec = serde_json::from_str(r#"{"kind":"set","phi":[8],"rho":[4]}"#).unwrap();
        assert_eq!(s.label(), "set");
        let b: ModelSpec = serde_json::from_str(
            r#"{"kind":"dense_baseline","hidden":[8],"interp":"cubic","target_rate_hz":10}"#,
        )
        .unwrap();
        assert_eq!(b.label(), "dense_cubic_spline");
    }
}
