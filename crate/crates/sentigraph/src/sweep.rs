//! Parameter sweeps over the full pipeline. Every cell runs in its own
//! output directory; a failing cell is recorded and the sweep moves on.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::pipeline::run_pipeline;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub p: f64,
    pub q: f64,
    pub window: usize,
    pub directed: bool,
    pub weighted: bool,
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub error: Option<String>,
    /// Wall-clock time of the cell.
    pub seconds: f64,
}

fn run_cell(base: &PipelineConfig, label: String, edit: impl FnOnce(&mut PipelineConfig)) -> SweepRow {
    let mut cfg = base.clone();
    edit(&mut cfg);
    cfg.out = base.out.join("sweep").join(&label);
    let start = Instant::now();
    let result = run_pipeline(&cfg);
    let seconds = start.elapsed().as_secs_f64();
    let (accuracy, macro_f1, error) = match result {
        Ok(report) => (Some(report.accuracy), Some(report.macro_f1), None),
        Err(e) => {
            log::error!("sweep cell {label} failed: {e}");
            (None, None, Some(e.to_string()))
        }
    };
    SweepRow {
        label,
        p: cfg.p,
        q: cfg.q,
        window: cfg.window,
        directed: cfg.directed,
        weighted: cfg.weighted,
        accuracy,
        macro_f1,
        error,
        seconds,
    }
}

/// Drops repeated values, keeping first occurrences in order.
fn dedup_by<T: Copy>(values: &[T], same: impl Fn(&T, &T) -> bool, what: &str) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for v in values {
        if out.iter().any(|o| same(o, v)) {
            log::warn!("ignoring duplicate {what} value in sweep");
        } else {
            out.push(*v);
        }
    }
    out
}

pub fn sweep_pq(base: &PipelineConfig, ps: &[f64], qs: &[f64]) -> Vec<SweepRow> {
    let same = |a: &f64, b: &f64| a.total_cmp(b).is_eq();
    let ps = dedup_by(ps, same, "p");
    let qs = dedup_by(qs, same, "q");
    let mut rows = Vec::with_capacity(ps.len() * qs.len());
    for &p in &ps {
        for &q in &qs {
            rows.push(run_cell(base, format!("p{p}_q{q}"), |c| {
                c.p = p;
                c.q = q;
            }));
        }
    }
    rows
}

pub fn sweep_window(base: &PipelineConfig, windows: &[usize]) -> Vec<SweepRow> {
    dedup_by(windows, |a, b| a == b, "window")
        .into_iter()
        .map(|w| run_cell(base, format!("window{w}"), |c| c.window = w))
        .collect()
}

/// The four combinations of directed/undirected and weighted/unweighted.
pub fn sweep_graph_kind(base: &PipelineConfig) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(4);
    for directed in [true, false] {
        for weighted in [true, false] {
            let label = format!(
                "{}-{}",
                if directed { "directed" } else { "undirected" },
                if weighted { "weighted" } else { "unweighted" }
            );
            rows.push(run_cell(base, label, |c| {
                c.directed = directed;
                c.weighted = weighted;
            }));
        }
    }
    rows
}

/// Tab-separated table with a header line.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let mut out = String::from("setting\tp\tq\twindow\tdirected\tweighted\taccuracy\tmacro_f1\tseconds\terror\n");
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{}",
            r.label,
            r.p,
            r.q,
            r.window,
            r.directed,
            r.weighted,
            fmt(r.accuracy),
            fmt(r.macro_f1),
            r.seconds,
            r.error.as_deref().unwrap_or("")
        )
        .unwrap();
    }
    out
}
