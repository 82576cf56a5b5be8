//! Acceptance suite. Runs every criterion in sequence (timings stay free of
//! interference from parallel tests) and prints one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_har::dataio::{
    segment, synth_sparse_stream, ActivitySpace, NormStats, Oscillation, SensorReading, SparseSegment,
    SynthConfig,
};
use sparse_har::harness::{
    contributing_density, cross_validate, evaluate, latency_bench, sparsify_all, sparsity_sweep, train,
    train_baseline, Classifier, EvalReport, ModelSpec, TrainConfig,
};
use sparse_har::interp::{resample, InterpKind};
use sparse_har::model::{SetArchitecture, SetModel};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let t = started.elapsed();
    check(
        t < limit,
        format!("{detail}; {:.2} s (limit {} s)", t.as_secs_f64(), limit.as_secs()),
    )
}

fn random_segment(rng: &mut ChaCha8Rng, d: usize, m: usize) -> SparseSegment {
    let mut ts: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
    ts.sort_by(f64::total_cmp);
    SparseSegment {
        readings: ts
            .into_iter()
            .map(|t| SensorReading::new(t, (0..d).map(|_| rng.gen_range(-0.5..1.5)).collect()))
            .collect(),
        window_start: 0.0,
        window_len: 2.0,
        label: 0,
    }
}

fn permutation_invariance() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let space = ActivitySpace::new(["a", "b", "c", "d"]).unwrap();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=6);
        let arch = SetArchitecture {
            phi: (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=32)).collect(),
            rho: (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(2..=32)).collect(),
        };
        let model = SetModel::new(d, &arch, space.clone(), NormStats::unit(d), rng.gen()).unwrap();
        let m = rng.gen_range(1..=40);
        let seg = random_segment(&mut rng, d, m);
        let mut perm = seg.clone();
        perm.readings.shuffle(&mut rng);
        if model.forward(&seg).unwrap() != model.forward(&perm).unwrap() {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        return Err(format!("{mismatches} of 1000 triples changed under permutation"));
    }
    within(
        Duration::from_secs(10),
        started,
        "1000/1000 triples bitwise equal".into(),
    )
}

fn gradient_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (net, x, labels) = common::fd::random_net(&mut rng);
        worst = worst.max(common::fd::max_relative_error(&net, &x, &labels));
    }
    if worst >= 1e-4 {
        return Err(format!("max relative error {worst:.3e} ≥ 1e-4"));
    }
    within(
        Duration::from_secs(60),
        started,
        format!("50 nets, max relative error {worst:.3e}"),
    )
}

fn knots(points: &[(f64, f64)], len: f64) -> SparseSegment {
    SparseSegment {
        readings: points
            .iter()
            .map(|&(t, v)| SensorReading::new(t, vec![v]))
            .collect(),
        window_start: 0.0,
        window_len: len,
        label: 0,
    }
}

fn interpolation_oracles() -> Outcome {
    let started = Instant::now();
    // 1 Hz over 2 s → grid {0, 1}
    let lin = resample(&knots(&[(0.0, 0.0), (2.0, 4.0)], 2.0), InterpKind::Linear, 1.0).unwrap();
    if lin.values.get(0, 0) != 0.0 || lin.values.get(1, 0) != 2.0 {
        return Err(format!("linear gave {:?}", lin.values.as_slice()));
    }
    let prev = resample(&knots(&[(0.0, 1.0), (2.0, 5.0)], 2.0), InterpKind::Previous, 1.0).unwrap();
    if prev.values.get(0, 0) != 1.0 || prev.values.get(1, 0) != 1.0 {
        return Err(format!("previous gave {:?}", prev.values.as_slice()));
    }
    let x = [0.0, 0.5, 1.0, 1.5, 2.0];
    let y: Vec<f64> = x.iter().map(|t| t * t * t - 2.0 * t).collect();
    let pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    let dense = resample(&knots(&pts, 2.0), InterpKind::CubicSpline, 200.0).unwrap();
    let oracle = common::spline_oracle(&x, &y, 0.0, 0.0, &dense.grid);
    let err = oracle
        .iter()
        .enumerate()
        .map(|(i, o)| (dense.values.get(i, 0) - o).abs())
        .fold(0.0, f64::max);
    if err >= 1e-8 {
        return Err(format!("cubic spline deviates from oracle by {err:.3e}"));
    }
    within(
        Duration::from_secs(5),
        started,
        format!(
            "linear/previous exact, cubic max deviation {err:.3e} over {} grid points",
            oracle.len()
        ),
    )
}

/// Replays fixed predictions so `evaluate` can be driven from a confusion
/// matrix.
struct Replay {
    space: ActivitySpace,
    predictions: Vec<usize>,
}

impl Classifier for Replay {
    fn activity_space(&self) -> &ActivitySpace {
        &self.space
    }
    fn predict_batch(&self, segments: &[SparseSegment]) -> sparse_har::Result<Vec<usize>> {
        Ok(self.predictions[..segments.len()].to_vec())
    }
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = rng.gen_range(2..=8);
        let confusion: Vec<Vec<u64>> = (0..c)
            .map(|_| {
                (0..c)
                    .map(|_| {
                        if rng.gen_bool(0.25) {
                            0
                        } else {
                            rng.gen_range(0..40)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut pairs = Vec::new();
        for (t, row) in confusion.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                pairs.extend(std::iter::repeat((t, p)).take(n as usize));
            }
        }
        pairs.shuffle(&mut rng);
        let space = ActivitySpace::new((0..c).map(|i| format!("k{i}"))).unwrap();
        let segments: Vec<SparseSegment> = pairs
            .iter()
            .map(|&(t, _)| SparseSegment {
                readings: vec![SensorReading::new(0.0, vec![0.0])],
                window_start: 0.0,
                window_len: 1.0,
                label: t,
            })
            .collect();
        let model = Replay {
            space,
            predictions: pairs.iter().map(|p| p.1).collect(),
        };
        let r: EvalReport = evaluate(&model, &segments).unwrap();
        let (p, rc, f) = common::metric_oracle(&confusion);
        for k in 0..c {
            worst = worst
                .max((r.per_class[k].precision - p[k]).abs())
                .max((r.per_class[k].recall - rc[k]).abs())
                .max((r.per_class[k].f_score - f[k]).abs());
        }
        worst = worst
            .max((r.macro_precision - common::mean(&p)).abs())
            .max((r.macro_recall - common::mean(&rc)).abs())
            .max((r.macro_f - common::mean(&f)).abs());
    }
    check(
        worst < 1e-12,
        format!("100 matrices, max deviation {worst:.3e} (limit 1e-12)"),
    )
}

fn separable_config() -> SynthConfig {
    SynthConfig {
        activities: vec!["lie".into(), "sit".into(), "walk".into()],
        means: vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]],
        noise_scale: 0.2,
        activity_noise: None,
        oscillations: None,
        mean_gap: 0.5,
        duration: 1200.0,
        mean_dwell: 20.0,
        nominal_rate_hz: 20.0,
        regular: false,
    }
}

fn separable_segments() -> (Vec<SparseSegment>, ActivitySpace) {
    let cfg = separable_config();
    let stream = synth_sparse_stream(&cfg, 1).unwrap();
    (segment(&stream, 2.0, 2.0).unwrap().segments, cfg.space().unwrap())
}

fn synthetic_end_to_end() -> Outcome {
    let started = Instant::now();
    let (segs, space) = separable_segments();
    let cfg = TrainConfig::default();
    let cv = cross_validate(
        &segs,
        &space,
        7,
        &cfg,
        &ModelSpec::Set(SetArchitecture::default()),
    )
    .unwrap();
    let f = cv.macro_f;
    if f.mean < 0.95 {
        return Err(format!("7-fold macro F {:.4} ± {:.4} < 0.95", f.mean, f.std));
    }
    within(
        Duration::from_secs(300),
        started,
        format!(
            "{} segments, 7-fold macro F {:.4} ± {:.4} (≥ 0.95)",
            segs.len(),
            f.mean,
            f.std
        ),
    )
}

/// Activities share a zero mean and differ only in oscillation amplitude,
/// sampled regularly at 20 Hz so training sees full-cardinality windows.
fn oscillation_config() -> SynthConfig {
    SynthConfig {
        activities: vec!["still".into(), "sway".into(), "swing".into()],
        means: vec![vec![0.0; 3]; 3],
        noise_scale: 0.05,
        activity_noise: None,
        oscillations: Some(vec![
            Oscillation {
                amplitude: 0.3,
                frequency_hz: 1.0,
            },
            Oscillation {
                amplitude: 0.6,
                frequency_hz: 1.0,
            },
            Oscillation {
                amplitude: 1.0,
                frequency_hz: 1.0,
            },
        ]),
        mean_gap: 0.05,
        duration: 1200.0,
        mean_dwell: 20.0,
        nominal_rate_hz: 20.0,
        regular: true,
    }
}

fn sparsity_robustness() -> Outcome {
    let cfg = oscillation_config();
    let space = cfg.space().unwrap();
    let train_segs = segment(&synth_sparse_stream(&cfg, 1).unwrap(), 2.0, 2.0)
        .unwrap()
        .segments;
    let test_segs = segment(&synth_sparse_stream(&cfg, 2).unwrap(), 2.0, 2.0)
        .unwrap()
        .segments;
    let tc = TrainConfig::default();
    let model = train(&train_segs, &space, &tc, &SetArchitecture::default())
        .unwrap()
        .model;
    let baseline = train_baseline(&train_segs, &space, &tc, &[256, 128], InterpKind::Linear, 20.0)
        .unwrap()
        .model;
    let r = sparsity_sweep(&model, &baseline, &test_segs, &[0.0, 0.75], 3).unwrap();
    let f = |m: &str, p: f64| r.row(m, p).unwrap().report.macro_f;
    let set_drop = f("set", 0.0) - f("set", 0.75);
    let base_drop = f("dense_linear", 0.0) - f("dense_linear", 0.75);
    check(
        set_drop < base_drop,
        format!(
            "macro F at rate 0 → 0.75: set {:.4} → {:.4} (drop {set_drop:.4}), dense+linear {:.4} → {:.4} (drop {base_drop:.4})",
            f("set", 0.0),
            f("set", 0.75),
            f("dense_linear", 0.0),
            f("dense_linear", 0.75)
        ),
    )
}

fn latency_direction() -> Outcome {
    let (segs, space) = separable_segments();
    let tc = TrainConfig::default();
    let model = train(&segs, &space, &tc, &SetArchitecture::default())
        .unwrap()
        .model;
    let baseline = train_baseline(&segs, &space, &tc, &[256, 128], InterpKind::Linear, 20.0)
        .unwrap()
        .model;
    let batch = sparsify_all(&segs[..128], 0.0, 0, 0).unwrap();
    let mean_m = batch.iter().map(SparseSegment::len).sum::<usize>() as f64 / 128.0;
    let r = latency_bench(&model, &baseline, &batch, 30).unwrap();
    let (a, b, i) = (r.set(), r.baseline(), r.interp());
    check(
        a.mean < b.mean && i.mean > 0.0,
        format!(
            "batch 128 (mean m {mean_m:.2}): set {:.3} ± {:.3} ms, resample+dense {:.3} ± {:.3} ms of which interpolation {:.3} ms ({:.0}%)",
            a.mean,
            a.std,
            b.mean,
            b.std,
            i.mean,
            100.0 * i.mean / b.mean
        ),
    )
}

fn clinical_reproduction() -> Option<Outcome> {
    // the clinical room datasets are not distributed with this repository
    None
}

fn contributing_sanity() -> Outcome {
    let cfg = SynthConfig {
        activities: vec!["static".into(), "dynamic".into()],
        means: vec![vec![0.2, 0.5, 0.8], vec![0.5, 0.5, 0.5]],
        noise_scale: 0.0,
        activity_noise: Some(vec![0.01, 0.3]),
        oscillations: Some(vec![
            Oscillation {
                amplitude: 0.0,
                frequency_hz: 0.0,
            },
            Oscillation {
                amplitude: 1.0,
                frequency_hz: 1.5,
            },
        ]),
        mean_gap: 0.05,
        duration: 600.0,
        mean_dwell: 20.0,
        nominal_rate_hz: 20.0,
        regular: true,
    };
    let space = cfg.space().unwrap();
    let segs = segment(&synth_sparse_stream(&cfg, 9).unwrap(), 2.0, 2.0)
        .unwrap()
        .segments;
    let model = train(
        &segs,
        &space,
        &TrainConfig::default(),
        &SetArchitecture::default(),
    )
    .unwrap()
    .model;
    let hist = contributing_density(&model, &segs).unwrap();
    let (s, d) = (hist[0].mean(), hist[1].mean());
    check(
        s <= d,
        format!("mean contributing readings: static {s:.2}, dynamic {d:.2}"),
    )
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sparse-har"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = r#"{
      "data": {"synthetic": {"generator": {
        "activities": ["lie", "sit", "walk"],
        "means": [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        "noise_scale": 0.2, "mean_gap": 0.5, "duration": 400,
        "mean_dwell": 20, "nominal_rate_hz": 20}}},
      "seed": 11
    }"#;
    let run_config = r#"{
      "train": {"total_epochs": 12, "lr_drop_epoch": 8, "lr": 1e-3, "batch_size": 32},
      "model": {"kind": "set", "phi": [16, 32], "rho": [16]},
      "baseline": {"hidden": [32], "interp": "cubic_spline", "target_rate_hz": 10},
      "seed": 11
    }"#;
    std::fs::write(root.join("ingest.json"), config).unwrap();
    std::fs::write(root.join("run.json"), run_config).unwrap();
    let seg = ["--segments", "ing/segments.csv"];
    let models = ["--model", "tr/model.json", "--baseline", "tr/baseline.json"];
    let steps: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        (
            "ing",
            vec!["ingest", "--config", "ingest.json"],
            vec!["segments.csv", "ingest_stats.json"],
        ),
        (
            "tr",
            [&["train", "--config", "run.json", "--with-baseline"][..], &seg].concat(),
            vec!["model.json", "baseline.json", "loss.csv", "baseline_loss.csv"],
        ),
        (
            "ev",
            [&["eval", "--config", "run.json"][..], &seg, &models[..2]].concat(),
            vec!["metrics.csv", "confusion.csv"],
        ),
        (
            "cv",
            [&["eval", "--config", "run.json", "--cross-validate"][..], &seg].concat(),
            vec!["cv.csv"],
        ),
        (
            "sw",
            [&["sweep", "--config", "run.json"][..], &seg, &models].concat(),
            vec!["sweep.csv"],
        ),
        (
            "em",
            [&["embed", "--config", "run.json"][..], &seg, &models[..2]].concat(),
            vec!["embeddings.csv"],
        ),
        (
            "de",
            [&["density", "--config", "run.json"][..], &seg, &models[..2]].concat(),
            vec!["density.csv"],
        ),
    ];
    let mut compared = 0;
    for (out, args, files) in &steps {
        run_cli(&[&args[..], &["--out", out]].concat(), root)?;
        let manifest = format!("{out}/manifest.json");
        let rerun = format!("{out}_rerun");
        let cmd = args[0];
        run_cli(&[cmd, "--config", &manifest, "--out", &rerun], root)?;
        for f in files {
            let a = std::fs::read(root.join(out).join(f)).map_err(|e| format!("{out}/{f}: {e}"))?;
            let b = std::fs::read(root.join(&rerun).join(f)).map_err(|e| format!("{rerun}/{f}: {e}"))?;
            if a != b {
                return Err(format!("{out}/{f} differs after rerun from manifest"));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{} commands rerun from manifests, {compared} output files bitwise identical",
        steps.len()
    ))
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Option<Outcome>>)> = vec![
        (
            "1 permutation invariance",
            Box::new(|| Some(permutation_invariance())),
        ),
        ("2 gradient oracle", Box::new(|| Some(gradient_oracle()))),
        (
            "3 interpolation oracles",
            Box::new(|| Some(interpolation_oracles())),
        ),
        ("4 metric oracle", Box::new(|| Some(metric_oracle()))),
        (
            "5 synthetic end-to-end",
            Box::new(|| Some(synthetic_end_to_end())),
        ),
        ("6 sparsity robustness", Box::new(|| Some(sparsity_robustness()))),
        ("7 latency direction", Box::new(|| Some(latency_direction()))),
        ("8 clinical reproduction", Box::new(clinical_reproduction)),
        (
            "9 contributing-sample sanity",
            Box::new(|| Some(contributing_sanity())),
        ),
        ("10 determinism", Box::new(|| Some(determinism()))),
    ];
    let mut failed = Vec::new();
    for (name, run) in &criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Some(Err("panicked".into())));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Some(Ok(detail)) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Some(Err(detail)) => {
                println!("FAIL  {name}: {detail} [{secs:.1} s]");
                failed.push(*name);
            }
            None => {
                println!("N/A   {name}: clinical room datasets not available; criteria 1-7 form acceptance")
            }
        }
    }
    if !failed.is_empty() {
        println!("{} criteria failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("all applicable criteria passed");
}
