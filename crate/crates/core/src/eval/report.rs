//! Text rendering and the on-disk matrix / metrics formats.

use std::fmt::Write as _;
use std::path::Path;

use super::{macro_f1, ClassMetrics, ConfusionMatrix, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    PlainText,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "plain" | "plaintext" | "txt" => Ok(ReportFormat::PlainText),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// `count (xx.x%)`, percentage rounded half away from zero in integer
/// arithmetic.
fn with_pct(count: u64, total: u64) -> String {
    if total == 0 {
        return format!("{count} (0.0%)");
    }
    let tenths = (count * 2000 + total) / (2 * total);
    format!("{count} ({}.{}%)", tenths / 10, tenths % 10)
}

fn table(header: Vec<String>, rows: Vec<Vec<String>>, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(
                out,
                "|{}|",
                header.iter().map(|_| "---").collect::<Vec<_>>().join("|")
            );
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
        }
        ReportFormat::PlainText => {
            let ncol = header.len();
            let widths: Vec<usize> = (0..ncol)
                .map(|c| {
                    std::iter::once(&header)
                        .chain(rows.iter())
                        .map(|r| r[c].chars().count())
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            for r in std::iter::once(&header).chain(rows.iter()) {
                let line: Vec<String> = r
                    .iter()
                    .enumerate()
                    .map(|(c, cell)| {
                        if c == 0 {
                            format!("{cell:<w$}", w = widths[c])
                        } else {
                            format!("{cell:>w$}", w = widths[c])
                        }
                    })
                    .collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
        }
    }
    out
}

/// Counts with row/column totals and percentages, per-class P/R/F1 and
/// macro F1. Output depends only on the matrix contents.
pub fn render_report(m: &ConfusionMatrix, metrics: &[ClassMetrics], format: ReportFormat) -> String {
    let total = m.total();
    let rows_t = m.row_totals();
    let cols_t = m.col_totals();

    let mut header = vec!["true \\ predicted".to_string()];
    header.extend(m.label_names.iter().cloned());
    header.push("Total".into());
    let mut rows: Vec<Vec<String>> = m
        .counts
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut cells = vec![m.label_names[i].clone()];
            cells.extend(r.iter().map(u64::to_string));
            cells.push(with_pct(rows_t[i], total));
            cells
        })
        .collect();
    let mut totals = vec!["Total".to_string()];
    totals.extend(cols_t.iter().map(|&c| with_pct(c, total)));
    totals.push(total.to_string());
    rows.push(totals);

    let prf_header = ["Label", "Precision", "Recall", "F1", "Support"]
        .map(String::from)
        .to_vec();
    let prf_rows: Vec<Vec<String>> = metrics
        .iter()
        .zip(&m.label_names)
        .map(|(c, name)| {
            vec![
                name.clone(),
                format!("{:.4}", c.precision),
                format!("{:.4}", c.recall),
                format!("{:.4}", c.f1),
                c.support.to_string(),
            ]
        })
        .collect();

    let mut out = String::new();
    let (h1, h2) = match format {
        ReportFormat::Markdown => ("## Confusion matrix\n\n", "\n## Per-class metrics\n\n"),
        ReportFormat::PlainText => (
            "Confusion matrix (rows = true labels, columns = predictions)\n",
            "\nPer-class metrics\n",
        ),
    };
    out.push_str(h1);
    out.push_str(&table(header, rows, format));
    out.push_str(h2);
    out.push_str(&table(prf_header, prf_rows, format));
    let macro_f1 = if metrics.is_empty() {
        0.0
    } else {
        metrics.iter().map(|c| c.f1).sum::<f64>() / metrics.len() as f64
    };
    let _ = writeln!(out, "\nMacro F1: {macro_f1:.4}");
    let _ = writeln!(out, "Accuracy: {:.4}", super::accuracy(m));
    out
}

fn metric_key(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Machine-readable `key=value` metrics.
pub fn render_metrics_file(m: &ConfusionMatrix, metrics: &[ClassMetrics]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "macro_f1={}", macro_f1(m));
    let _ = writeln!(out, "accuracy={}", super::accuracy(m));
    let _ = writeln!(out, "total={}", m.total());
    let _ = writeln!(out, "errors={}", m.errors());
    for (name, c) in m.label_names.iter().zip(metrics) {
        let k = metric_key(name);
        let _ = writeln!(out, "precision.{k}={}", c.precision);
        let _ = writeln!(out, "recall.{k}={}", c.recall);
        let _ = writeln!(out, "f1.{k}={}", c.f1);
        let _ = writeln!(out, "support.{k}={}", c.support);
    }
    out
}

/// Tab-separated matrix: a header of label names, then one row per true label.
pub fn write_matrix(m: &ConfusionMatrix, path: &Path) -> Result<(), EvalError> {
    let mut out = String::from("true\\pred");
    for n in &m.label_names {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    for (name, row) in m.label_names.iter().zip(&m.counts) {
        out.push_str(name);
        for c in row {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<ConfusionMatrix, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| EvalError::MalformedMatrix("empty file".into()))?;
    let names: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
    let mut counts = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut cells = line.split('\t');
        let name = cells.next().unwrap_or("");
        if names.get(i).map(String::as_str) != Some(name) {
            return Err(EvalError::MalformedMatrix(format!(
                "row {} label {name:?} does not match header",
                i + 1
            )));
        }
        let row = cells
            .map(|c| {
                c.trim()
                    .parse::<u64>()
                    .map_err(|e| EvalError::MalformedMatrix(format!("{c:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        counts.push(row);
    }
    ConfusionMatrix::from_counts(counts, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::per_class_prf;

    fn names() -> Vec<String> {
        ["Amb", "Clear", "Clear-N"].map(String::from).to_vec()
    }

    #[test]
    fn percentages_round_half_away_from_zero() {
        assert_eq!(with_pct(206, 308), "206 (66.9%)");
        assert_eq!(with_pct(1, 8), "1 (12.5%)");
        assert_eq!(with_pct(1, 16), "1 (6.3%)");
        assert_eq!(with_pct(0, 0), "0 (0.0%)");
    }

    #[test]
    fn renders_totals_for_both_reference_matrices() {
        let test = ConfusionMatrix::from_counts(
            vec![vec![136, 58, 12], vec![23, 53, 3], vec![6, 0, 17]],
            names(),
        )
        .unwrap();
        let text = render_report(&test, &per_class_prf(&test), ReportFormat::PlainText);
        for s in ["206 (66.9%)", "79 (25.6%)", "23 (7.5%)", "165 (53.6%)", "111 (36.0%)", "32 (10.4%)", "Macro F1: 0.6364"] {
            assert!(text.contains(s), "missing {s} in\n{text}");
        }
        let eval = ConfusionMatrix::from_counts(
            vec![vec![91, 20, 6], vec![16, 68, 1], vec![12, 0, 23]],
            names(),
        )
        .unwrap();
        let md = render_report(&eval, &per_class_prf(&eval), ReportFormat::Markdown);
        for s in ["117 (49.4%)", "85 (35.9%)", "35 (14.8%)", "| Amb | 91 | 20 | 6 |"] {
            assert!(md.contains(s), "missing {s} in\n{md}");
        }
    }

    #[test]
    fn zero_matrix_renders_zero_totals() {
        let z = ConfusionMatrix::zeros(names());
        let text = render_report(&z, &per_class_prf(&z), ReportFormat::PlainText);
        assert_eq!(text.matches("0 (0.0%)").count(), 6);
    }

    #[test]
    fn matrix_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tsv");
        let m = ConfusionMatrix::from_counts(
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            ["Clear Reply", "Ambivalent", "Clear Non-Reply"].map(String::from).to_vec(),
        )
        .unwrap();
        write_matrix(&m, &p).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
    }

    #[test]
    fn metrics_file_keys() {
        let m = ConfusionMatrix::from_counts(vec![vec![1, 0], vec![0, 1]], vec!["Clear Reply".into(), "B".into()]).unwrap();
        let text = render_metrics_file(&m, &per_class_prf(&m));
        assert!(text.contains("macro_f1=1\n"));
        assert!(text.contains("f1.clear_reply=1\n"));
    }
}
