//! Report rendering: an aligned text table, a JSON document, and a
//! per-fold CSV. The table layout is byte-stable so golden-file tests can
//! pin it.

use crate::{CvReport, MetricStats};

pub fn render_table(report: &CvReport) -> String {
    let rows: [(&str, MetricStats); 6] = [
        ("acc", report.summary.acc),
        ("auc", report.summary.auc),
        ("precision", report.summary.precision),
        ("recall", report.summary.recall),
        ("f1", report.summary.f1),
        ("far", report.summary.far),
    ];
    let mut out = String::new();
    out.push_str(&format!("{:<10}{:>10}{:>10}\n", "metric", "mean", "std"));
    for (name, stats) in rows {
        out.push_str(&format!("{:<10}{:>10.4}{:>10.4}\n", name, stats.mean, stats.std));
    }
    out
}

pub fn report_to_json(report: &CvReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

pub fn folds_to_csv(report: &CvReport) -> String {
    let mut out = String::from("fold,tp,fp,tn,fn,acc,precision,recall,f1,far,auc\n");
    for f in &report.folds {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            f.fold_index,
            f.confusion.tp,
            f.confusion.fp,
            f.confusion.tn,
            f.confusion.fn_,
            f.acc,
            f.precision,
            f.recall,
            f.f1,
            f.far,
            f.auc
        ));
    }
    out
}
