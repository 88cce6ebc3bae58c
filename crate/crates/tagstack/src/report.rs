//! CSV tables. Values use six fixed decimals; rows are in canonical order
//! (ascending K, then method name) so diffs between runs are meaningful.

use std::fmt::Write;

use tagstack_core::corpus::{
    common_tag_stack_fraction, stacked_fraction, tag_overlap_ratio, Dataset, OverlapAveraging, UndefinedStatistic,
};
use tagstack_core::eval::{BenchmarkReport, MacroScores, SweepResult};

fn value(v: Result<f64, UndefinedStatistic>) -> String {
    match v {
        Ok(x) => format!("{x:.6}"),
        Err(_) => "NA".to_string(),
    }
}

pub fn stats_csv(d: &Dataset, overlap: OverlapAveraging) -> String {
    let mut out = String::from("metric,value\n");
    for (name, v) in [
        ("stacked_fraction", stacked_fraction(d)),
        ("tag_overlap_ratio", tag_overlap_ratio(d, overlap)),
        ("common_tag_stack_fraction", common_tag_stack_fraction(d)),
    ] {
        writeln!(out, "{name},{}", value(v)).unwrap();
    }
    out
}

fn scores(m: &MacroScores) -> String {
    format!("{:.6},{:.6},{:.6}", m.precision, m.recall, m.f1)
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut out = String::from("k,macro_p,macro_r,macro_f1\n");
    for e in &r.entries {
        writeln!(out, "{},{}", e.k, scores(&e.scores)).unwrap();
    }
    out
}

/// The K-independent methods (`random_k`, `optimal_k`) repeat their scalar
/// on every K row, which keeps the table rectangular for plotting.
pub fn bench_csv(r: &BenchmarkReport) -> String {
    let mut out = String::from("k,method,macro_p,macro_r,macro_f1\n");
    for e in &r.sweep.entries {
        let baseline = r.baseline_at(e.k).expect("baseline shares the sweep's K axis");
        for (method, m) in [
            ("optimal_k", &r.optimal_k),
            ("random_baseline", &baseline),
            ("random_k", &r.random_k),
            ("rbr", &e.scores),
        ] {
            writeln!(out, "{},{method},{}", e.k, scores(m)).unwrap();
        }
    }
    out
}
