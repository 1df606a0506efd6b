//! CSV, aligned-text and markdown renderings of evaluation results.

use std::fmt::Write as _;

use super::compare::ClusteringComparison;
use super::pipeline::{Aggregation, EvalReport, PipelineKind};

/// Written in place of a metric whose denominator is zero.
pub const UNDEFINED: &str = "undefined";

const METRIC_HEADS: [&str; 3] = ["Accuracy", "Recall/TPR", "Specificity/TNR"];

fn raw(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |v| v.to_string())
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |v| format!("{:.2}", 100.0 * v))
}

fn score(v: Option<f64>) -> String {
    match v {
        None => UNDEFINED.to_string(),
        Some(v) if v.is_infinite() => "inf".to_string(),
        Some(v) => format!("{v:.4}"),
    }
}

/// Renders rows as a left-aligned text table with a dashed rule.
fn aligned(heads: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = heads.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(heads.to_vec());
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// One row per classifier: `classifier,accuracy,tpr,tnr,tp,tn,fp,fn`.
/// Holds only results, so two pipelines that agree render identically.
pub fn report_csv(report: &EvalReport) -> String {
    let mut out = String::from("classifier,accuracy,tpr,tnr,tp,tn,fp,fn\n");
    for r in &report.rows {
        let c = r.counts;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.kind,
            raw(r.metrics.accuracy),
            raw(r.metrics.tpr),
            raw(r.metrics.tnr),
            c.tp,
            c.tn,
            c.fp,
            c.fn_
        )
        .expect("writing to a String");
    }
    out
}

fn pipeline_title(kind: PipelineKind) -> &'static str {
    match kind {
        PipelineKind::Plain => "Without clustering",
        PipelineKind::Clustered => "After clustering",
    }
}

fn aggregation_name(a: Aggregation) -> &'static str {
    match a {
        Aggregation::Pooled => "pooled counts",
        Aggregation::PerFoldMean => "mean of folds",
    }
}

/// Metrics in percent under the column heads Accuracy, Recall/TPR and
/// Specificity/TNR.
pub fn report_table(report: &EvalReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.kind.display_name().to_string(),
                percent(r.metrics.accuracy),
                percent(r.metrics.tpr),
                percent(r.metrics.tnr),
            ]
        })
        .collect();
    let mut heads = vec!["Classifier"];
    heads.extend(METRIC_HEADS);
    format!(
        "{} ({}-fold, {}, seed {})\n{}",
        pipeline_title(report.pipeline),
        report.folds,
        aggregation_name(report.aggregation),
        report.seed,
        aligned(&heads, &rows)
    )
}

fn markdown_rows(out: &mut String, report: &EvalReport) {
    writeln!(out, "| Classifier | {} |", METRIC_HEADS.join(" | ")).expect("writing to a String");
    out.push_str("|---|---:|---:|---:|\n");
    for r in &report.rows {
        writeln!(
            out,
            "| {} | {} | {} | {} |",
            r.kind.display_name(),
            percent(r.metrics.accuracy),
            percent(r.metrics.tpr),
            percent(r.metrics.tnr)
        )
        .expect("writing to a String");
    }
}

/// Plain and clustered results as two markdown tables, followed by the
/// accuracy difference per classifier.
pub fn summary_markdown(plain: &EvalReport, clustered: &EvalReport) -> String {
    let mut out = String::from("# Plain vs clustered evaluation\n\n");
    writeln!(
        out,
        "{}-fold cross-validation, {}, seed {}. Metrics in percent.\n",
        plain.folds,
        aggregation_name(plain.aggregation),
        plain.seed
    )
    .expect("writing to a String");
    for report in [plain, clustered] {
        writeln!(out, "## {}\n", pipeline_title(report.pipeline)).expect("writing to a String");
        markdown_rows(&mut out, report);
        out.push('\n');
    }
    out.push_str("## Accuracy change\n\n| Classifier | Clustered − plain |\n|---|---:|\n");
    for (p, c) in plain.rows.iter().zip(&clustered.rows) {
        let delta = match (p.metrics.accuracy, c.metrics.accuracy) {
            (Some(a), Some(b)) => format!("{:+.2}", 100.0 * (b - a)),
            _ => UNDEFINED.to_string(),
        };
        writeln!(out, "| {} | {} |", p.kind.display_name(), delta).expect("writing to a String");
    }
    out
}

/// `algorithm,parameter,clusters,noise_fraction,calinski_harabasz,silhouette,winner`.
pub fn comparison_csv(cmp: &ClusteringComparison) -> String {
    let mut out = String::from(
        "algorithm,parameter,clusters,noise_fraction,calinski_harabasz,silhouette,winner\n",
    );
    for (i, r) in cmp.rows.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm.key(),
            r.param.to_string().replace(' ', ""),
            r.clusters,
            r.noise_fraction,
            raw(r.calinski_harabasz),
            raw(r.silhouette),
            cmp.winner == Some(i)
        )
        .expect("writing to a String");
    }
    out
}

/// Table with heads No of Clusters, Calinski Harabaz Score, Silhouette
/// Score; the winning row is starred.
pub fn comparison_table(cmp: &ClusteringComparison) -> String {
    let rows: Vec<Vec<String>> = cmp
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                format!(
                    "{}{}",
                    r.algorithm.display_name(),
                    if cmp.winner == Some(i) { " *" } else { "" }
                ),
                r.param.to_string(),
                r.clusters.to_string(),
                score(r.calinski_harabasz),
                score(r.silhouette),
            ]
        })
        .collect();
    aligned(
        &[
            "Algorithm",
            "Parameter",
            "No of Clusters",
            "Calinski Harabaz Score",
            "Silhouette Score",
        ],
        &rows,
    )
}

/// `k,sse` lines.
pub fn sse_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("k,sse\n");
    for (k, sse) in curve {
        writeln!(out, "{k},{sse}").expect("writing to a String");
    }
    out
}
