//! CSV renderings of harness results. Floats use 9 significant digits.

use std::fmt::Write as _;

use super::config::TrainConfig;
use super::cv::CvReport;
use super::latency::LatencyReport;
use super::metrics::EvalReport;
use super::sweep::{GridRow, SweepResult};
use crate::report::sig9;

const ECHO_HEADER: &str =
    "seed,window_len,stride,batch_size,lr,lr_drop_factor,lr_drop_epoch,total_epochs,weight_decay";

fn echo(c: &TrainConfig) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        c.seed,
        sig9(c.window_len),
        sig9(c.stride),
        c.batch_size,
        sig9(c.lr),
        sig9(c.lr_drop_factor),
        c.lr_drop_epoch,
        c.total_epochs,
        sig9(c.weight_decay)
    )
}

/// `scope,precision,recall,f_score,support,degenerate`, one row per
/// activity and a final `macro` row.
pub fn eval_csv(r: &EvalReport) -> String {
    let mut out = String::from("scope,precision,recall,f_score,support,degenerate\n");
    for (a, m) in r.activities.iter().zip(&r.per_class) {
        let _ = writeln!(
            out,
            "{a},{},{},{},{},{}",
            sig9(m.precision),
            sig9(m.recall),
            sig9(m.f_score),
            m.support,
            m.degenerate
        );
    }
    let support: usize = r.per_class.iter().map(|m| m.support).sum();
    let _ = writeln!(
        out,
        "macro,{},{},{},{support},false",
        sig9(r.macro_precision),
        sig9(r.macro_recall),
        sig9(r.macro_f)
    );
    out
}

/// Confusion matrix with truth in rows: `truth,<pred activity...>`.
pub fn confusion_csv(r: &EvalReport) -> String {
    let mut out = format!("truth,{}\n", r.activities.join(","));
    for (a, row) in r.activities.iter().zip(&r.confusion) {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{a},{}", cells.join(","));
    }
    out
}

/// `fold,macro_precision,macro_recall,macro_f,final_loss` plus `mean` and
/// `std` rows.
pub fn cv_csv(r: &CvReport) -> String {
    let mut out = String::from("fold,macro_precision,macro_recall,macro_f,final_loss\n");
    for (i, (f, l)) in r.folds.iter().zip(&r.final_losses).enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            sig9(f.macro_precision),
            sig9(f.macro_recall),
            sig9(f.macro_f),
            sig9(*l)
        );
    }
    let _ = writeln!(
        out,
        "mean,{},{},{},",
        sig9(r.macro_precision.mean),
        sig9(r.macro_recall.mean),
        sig9(r.macro_f.mean)
    );
    let _ = writeln!(
        out,
        "std,{},{},{},",
        sig9(r.macro_precision.std),
        sig9(r.macro_recall.std),
        sig9(r.macro_f.std)
    );
    out
}

/// Deterministic sweep metrics with the training config echoed per row.
pub fn sweep_csv(r: &SweepResult, config: &TrainConfig) -> String {
    let mut out =
        format!("{ECHO_HEADER},sweep_seed,model,drop_rate,macro_precision,macro_recall,macro_f,accuracy\n");
    let e = echo(config);
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{e},{},{},{},{},{},{},{}",
            r.seed,
            row.model,
            sig9(row.drop_rate),
            sig9(row.report.macro_precision),
            sig9(row.report.macro_recall),
            sig9(row.report.macro_f),
            sig9(row.report.accuracy)
        );
    }
    out
}

/// Wall-clock side of a sweep, kept apart from the deterministic metrics.
pub fn sweep_timing_csv(r: &SweepResult) -> String {
    let mut out = String::from("model,drop_rate,latency_ms_per_batch\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            row.model,
            sig9(row.drop_rate),
            sig9(row.latency_ms)
        );
    }
    out
}

pub fn grid_csv(rows: &[GridRow], config: &TrainConfig) -> String {
    let mut out = format!(
        "{ECHO_HEADER},model,grid_window_len,segments,macro_precision_mean,macro_precision_std,macro_recall_mean,macro_recall_std,macro_f_mean,macro_f_std\n"
    );
    let e = echo(config);
    for r in rows {
        let _ = writeln!(
            out,
            "{e},{},{},{},{},{},{},{},{},{}",
            r.model,
            sig9(r.window_len),
            r.segments,
            sig9(r.macro_precision.mean),
            sig9(r.macro_precision.std),
            sig9(r.macro_recall.mean),
            sig9(r.macro_recall.std),
            sig9(r.macro_f.mean),
            sig9(r.macro_f.std)
        );
    }
    out
}

/// `pipeline,batch_size,repetitions,mean_ms,std_ms`.
pub fn latency_csv(r: &LatencyReport) -> String {
    let mut out = String::from("pipeline,batch_size,repetitions,mean_ms,std_ms\n");
    for (name, s) in [
        ("set_direct", r.set()),
        ("resample_then_dense", r.baseline()),
        ("interpolation_only", r.interp()),
    ] {
        let _ = writeln!(
            out,
            "{name},{},{},{},{}",
            r.batch_size,
            r.repetitions,
            sig9(s.mean),
            sig9(s.std)
        );
    }
    out
}

/// `epoch,loss` for a training trace.
pub fn loss_csv(trace: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (i, l) in trace.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", sig9(*l));
    }
    out
}
