use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sparse_har::dataio::{
    ingest_csv, segment, synth_with_episodes, ActivitySpace, IngestStats, SegmentArchive, SensorStream,
    SparseSegment,
};
use sparse_har::harness::{
    self, contributing_density, cross_validate, density_csv, embeddings_csv, evaluate, fit, latency_bench,
    sparsify_all, sparsity_sweep, window_sweep, ModelSpec,
};
use sparse_har::model::{load_any, load_baseline, load_model, save_baseline, save_model, AnyModel};
use sparse_har::report::write_atomic;

use crate::config::{DataSource, RunConfig};
use crate::InputError;

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Self {
        Self {
            dir,
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, text: &str) -> anyhow::Result<()> {
        write_atomic(&self.dir.join(name), text.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Written last, so a manifest only exists next to complete outputs.
    fn finish(mut self, command: &str, config: &RunConfig) -> anyhow::Result<()> {
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "outputs": self.files,
        });
        self.json("manifest.json", &manifest)
    }
}

#[derive(Debug, Serialize)]
struct IngestReport {
    #[serde(flatten)]
    stats: IngestStats,
    empty_windows: usize,
    segments: usize,
    /// Number of segments per cardinality.
    cardinality: BTreeMap<usize, usize>,
}

fn load_streams(cfg: &RunConfig) -> anyhow::Result<(ActivitySpace, Vec<SensorStream>, IngestStats)> {
    match &cfg.data {
        None => Err(InputError("no data source: set \"data\" in the config".into()).into()),
        Some(DataSource::Csv { path, schema }) => {
            let ingested = ingest_csv(path, &schema.resolve()?)?;
            Ok((ingested.space, ingested.streams, ingested.stats))
        }
        Some(DataSource::Synthetic { generator, subjects }) => {
            let space = generator.space()?;
            let mut streams = Vec::with_capacity(*subjects);
            for i in 0..*subjects {
                let seed = cfg.seed.wrapping_add(i as u64);
                streams.push(synth_with_episodes(generator, seed, &format!("s{i}"))?.stream);
            }
            let records = streams.iter().map(SensorStream::len).sum();
            let stats = IngestStats {
                records_read: records,
                records_skipped: 0,
                streams: streams.len(),
            };
            Ok((space, streams, stats))
        }
    }
}

fn segment_streams(
    cfg: &RunConfig,
    space: &ActivitySpace,
    streams: &[SensorStream],
) -> anyhow::Result<(SegmentArchive, usize)> {
    let mut segments = Vec::new();
    let mut empty = 0;
    for s in streams {
        s.validate(space)?;
        let seg = segment(s, cfg.train.window_len, cfg.train.stride)?;
        empty += seg.empty_windows;
        segments.extend(seg.segments);
    }
    let dim = streams.first().map_or(0, SensorStream::dim);
    Ok((
        SegmentArchive {
            space: space.clone(),
            dim,
            segments,
        },
        empty,
    ))
}

/// Segments from the archive input, or freshly cut from the data source.
fn load_segments(cfg: &RunConfig) -> anyhow::Result<SegmentArchive> {
    match (&cfg.inputs.segments, &cfg.data) {
        (Some(_), Some(_)) => Err(InputError(
            "both a segment archive and a data source were given; use exactly one".into(),
        )
        .into()),
        (Some(p), None) => Ok(SegmentArchive::read(p)?),
        (None, Some(_)) => {
            let (space, streams, _) = load_streams(cfg)?;
            Ok(segment_streams(cfg, &space, &streams)?.0)
        }
        (None, None) => Err(InputError("no segments: pass --segments or set \"data\"".into()).into()),
    }
}

fn require<'a>(p: &'a Option<std::path::PathBuf>, what: &str) -> anyhow::Result<&'a Path> {
    Ok(p.as_deref()
        .ok_or_else(|| InputError(format!("{what} required: pass --{what}")))?)
}

fn check_compatible(
    space: &ActivitySpace,
    dim: usize,
    archive: &SegmentArchive,
    what: &str,
) -> anyhow::Result<()> {
    if space != &archive.space {
        return Err(InputError(format!(
            "{what} activities {:?} differ from segment activities {:?}",
            space.names(),
            archive.space.names()
        ))
        .into());
    }
    if dim != archive.dim {
        return Err(InputError(format!(
            "{what} expects {dim} channels but segments have {}",
            archive.dim
        ))
        .into());
    }
    Ok(())
}

fn any_dim(m: &AnyModel) -> usize {
    match m {
        AnyModel::Set(m) => m.dim(),
        AnyModel::Baseline(m) => m.dim(),
    }
}

pub fn ingest(cfg: &RunConfig) -> anyhow::Result<()> {
    let (space, streams, stats) = load_streams(cfg)?;
    let (archive, empty_windows) = segment_streams(cfg, &space, &streams)?;
    let mut cardinality = BTreeMap::new();
    for s in &archive.segments {
        *cardinality.entry(s.len()).or_insert(0) += 1;
    }
    let report = IngestReport {
        stats,
        empty_windows,
        segments: archive.segments.len(),
        cardinality,
    };
    let mut out = Output::new(cfg.out_dir()?);
    out.write("segments.csv", &archive.to_csv())?;
    out.json("ingest_stats.json", &report)?;
    out.finish("ingest", cfg)
}

pub fn train(cfg: &RunConfig) -> anyhow::Result<()> {
    let archive = load_segments(cfg)?;
    let mut out = Output::new(cfg.out_dir()?);
    let trained = fit(&cfg.model, &archive.segments, &archive.space, &cfg.train)?;
    let path = out.dir.join("model.json");
    match &trained.model {
        AnyModel::Set(m) => save_model(m, &path)?,
        AnyModel::Baseline(m) => save_baseline(m, &path)?,
    }
    out.files.push("model.json".into());
    out.write("loss.csv", &harness::csv::loss_csv(&trained.loss_trace))?;
    if cfg.train_baseline {
        let spec = cfg.baseline.spec(cfg.baseline.interp);
        let b = fit(&spec, &archive.segments, &archive.space, &cfg.train)?;
        if let AnyModel::Baseline(m) = &b.model {
            save_baseline(m, &out.dir.join("baseline.json"))?;
            out.files.push("baseline.json".into());
        }
        out.write("baseline_loss.csv", &harness::csv::loss_csv(&b.loss_trace))?;
    }
    out.finish("train", cfg)
}

pub fn eval(cfg: &RunConfig) -> anyhow::Result<()> {
    let archive = load_segments(cfg)?;
    let mut out = Output::new(cfg.out_dir()?);
    if cfg.cross_validate {
        let cv = cross_validate(
            &archive.segments,
            &archive.space,
            cfg.folds,
            &cfg.train,
            &cfg.model,
        )?;
        out.write("cv.csv", &harness::csv::cv_csv(&cv))?;
        for (i, fold) in cv.folds.iter().enumerate() {
            out.write(&format!("fold{i}_metrics.csv"), &harness::csv::eval_csv(fold))?;
        }
    } else {
        let path = require(&cfg.inputs.model, "model")?;
        let model = load_any(path)?;
        check_compatible(model.activity_space(), any_dim(&model), &archive, "model")?;
        let report = evaluate(&model, &archive.segments)?;
        out.write("metrics.csv", &harness::csv::eval_csv(&report))?;
        out.write("confusion.csv", &harness::csv::confusion_csv(&report))?;
    }
    out.finish("eval", cfg)
}

pub fn sweep(cfg: &RunConfig) -> anyhow::Result<()> {
    let mut out = Output::new(cfg.out_dir()?);
    let mut did_work = false;
    if cfg.inputs.model.is_some() || cfg.inputs.baseline.is_some() {
        let archive = load_segments(cfg)?;
        let model = load_model(require(&cfg.inputs.model, "model")?)?;
        let baseline = load_baseline(require(&cfg.inputs.baseline, "baseline")?)?;
        check_compatible(model.activity_space(), model.dim(), &archive, "model")?;
        check_compatible(baseline.activity_space(), baseline.dim(), &archive, "baseline")?;
        let r = sparsity_sweep(
            &model,
            &baseline,
            &archive.segments,
            &cfg.sweep.drop_rates,
            cfg.seed,
        )?;
        out.write("sweep.csv", &harness::csv::sweep_csv(&r, &cfg.train))?;
        out.write("sweep_timing.csv", &harness::csv::sweep_timing_csv(&r))?;
        did_work = true;
    }
    if cfg.sweep.grid {
        let (space, streams, _) = load_streams(cfg)?;
        let mut specs: Vec<ModelSpec> = vec![cfg.model.clone()];
        specs.extend(cfg.sweep.interp_kinds.iter().map(|&k| cfg.baseline.spec(k)));
        let rows = window_sweep(
            &streams,
            &space,
            &cfg.sweep.windows,
            &specs,
            &cfg.train,
            cfg.folds,
        )?;
        out.write("grid.csv", &harness::csv::grid_csv(&rows, &cfg.train))?;
        did_work = true;
    }
    if !did_work {
        return Err(
            InputError("sweep needs --model and --baseline, or --grid with a data source".into()).into(),
        );
    }
    out.finish("sweep", cfg)
}

pub fn latency(cfg: &RunConfig) -> anyhow::Result<()> {
    let archive = load_segments(cfg)?;
    let model = load_model(require(&cfg.inputs.model, "model")?)?;
    let baseline = load_baseline(require(&cfg.inputs.baseline, "baseline")?)?;
    check_compatible(model.activity_space(), model.dim(), &archive, "model")?;
    check_compatible(baseline.activity_space(), baseline.dim(), &archive, "baseline")?;
    let n = cfg.latency.batch_size.min(archive.segments.len());
    let batch: Vec<SparseSegment> = sparsify_all(&archive.segments[..n], cfg.latency.drop_rate, cfg.seed, 0)?;
    let r = latency_bench(&model, &baseline, &batch, cfg.latency.repetitions)?;
    let mut out = Output::new(cfg.out_dir()?);
    out.write("latency.csv", &harness::csv::latency_csv(&r))?;
    out.json("latency_samples.json", &r)?;
    out.finish("latency", cfg)
}

pub fn embed(cfg: &RunConfig) -> anyhow::Result<()> {
    let archive = load_segments(cfg)?;
    let model = load_model(require(&cfg.inputs.model, "model")?)?;
    check_compatible(model.activity_space(), model.dim(), &archive, "model")?;
    let csv = embeddings_csv(&model, &archive.segments).context("exporting embeddings")?;
    let mut out = Output::new(cfg.out_dir()?);
    out.write("embeddings.csv", &csv)?;
    out.finish("embed", cfg)
}

pub fn density(cfg: &RunConfig) -> anyhow::Result<()> {
    let archive = load_segments(cfg)?;
    let model = load_model(require(&cfg.inputs.model, "model")?)?;
    check_compatible(model.activity_space(), model.dim(), &archive, "model")?;
    let hist = contributing_density(&model, &archive.segments)?;
    let mut out = Output::new(cfg.out_dir()?);
    out.write("density.csv", &density_csv(&hist))?;
    out.finish("density", cfg)
}
