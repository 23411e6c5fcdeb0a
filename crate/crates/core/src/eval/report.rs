//! Human-readable tables: correctness, cost and paired-test layouts.

use super::{ContingencyTable, McNemarResult, MetricsReport, UsageReport};
use crate::classify::Label;
use crate::llm::DisplayCost;

/// Metric values are shown to three decimals.
pub fn format_metric(x: f64) -> String {
    format!("{x:.3}")
}

/// Two significant figures; scientific notation below 0.001.
pub fn format_p(p: f64) -> String {
    if p >= 1e-3 {
        let decimals = (1 - p.log10().floor() as i32).max(1) as usize;
        format!("{p:.decimals$}")
    } else {
        format!("{p:.1e}")
    }
}

/// `1234567` → `1,234,567`.
pub fn format_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn render(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(headers.to_vec())];
    out.push(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    out.extend(rows.iter().map(|r| line(r.iter().map(String::as_str).collect())));
    out.join("\n") + "\n"
}

/// Method / Class / Accuracy / Precision / Recall / F1-score, three rows per method.
pub fn metrics_table(rows: &[(&str, &MetricsReport)]) -> String {
    let mut cells = Vec::new();
    for (method, report) in rows {
        for (i, label) in Label::ALL.iter().enumerate() {
            let m = report.class(*label);
            cells.push(vec![
                if i == 0 { method.to_string() } else { String::new() },
                label.to_string(),
                "--".to_string(),
                format_metric(m.precision),
                format_metric(m.recall),
                format_metric(m.f1),
            ]);
        }
        cells.push(vec![
            String::new(),
            "Total".to_string(),
            format_metric(report.accuracy),
            format_metric(report.weighted.precision),
            format_metric(report.weighted.recall),
            format_metric(report.weighted.f1),
        ]);
    }
    render(
        &["Method", "Class", "Accuracy", "Precision", "Recall", "F1-score"],
        &cells,
    )
}

/// Method / I-Tokens / O-Tokens / Tokens / Cost / Time.
pub fn cost_table(rows: &[(&str, &UsageReport)]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(method, r)| {
            vec![
                method.to_string(),
                format_thousands(r.input_tokens),
                format_thousands(r.output_tokens),
                format_thousands(r.total_tokens),
                format!("{} {}", DisplayCost(r.cost), r.currency),
                r.wall_time_secs
                    .map(|s| format!("{:.1} h", s / 3600.0))
                    .unwrap_or_else(|| "--".to_string()),
            ]
        })
        .collect();
    render(&["Method", "I-Tokens", "O-Tokens", "Tokens", "Cost", "Time"], &cells)
}

/// Comparison / a / b / c / d / statistic / p-value.
pub fn mcnemar_table(rows: &[(&str, &ContingencyTable, &McNemarResult)]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, t, r)| {
            vec![
                name.to_string(),
                t.a.to_string(),
                t.b.to_string(),
                t.c.to_string(),
                t.d.to_string(),
                format!("{:.3}", r.statistic),
                format_p(r.p_value),
            ]
        })
        .collect();
    render(&["Comparison", "a", "b", "c", "d", "statistic", "p-value"], &cells)
}
