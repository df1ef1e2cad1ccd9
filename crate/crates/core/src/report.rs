//! Deterministic text and CSV renderings of cross-tabs, regression tables,
//! screening audits and transfer results. Every rendering ends with exactly
//! one newline.

use std::fmt::Write as _;

use serde::Serialize;

use crate::design::{NominalField, SiteAttributes, INTERCEPT};
use crate::ols::{significance_stars, RegressionFit};
use crate::screening::ScreeningReport;
use crate::transfer::{ErrorSummary, LoocvReport, TransferPrediction};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("{0:?} is not a nominal field (expected one of biome, wetland_type, service, method, value_basis)")]
    NotNominalField(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Text => "txt",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossTab {
    pub row_dim: NominalField,
    pub col_dim: NominalField,
    pub row_labels: Vec<&'static str>,
    pub col_labels: Vec<&'static str>,
    /// `cells[i][j]`: count for row label i and column label j.
    pub cells: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
    pub grand_total: usize,
}

impl CrossTab {
    pub fn cell(&self, row: &str, col: &str) -> Option<usize> {
        let i = self
            .row_labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(row))?;
        let j = self
            .col_labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(col))?;
        Some(self.cells[i][j])
    }

    pub fn row_total(&self, row: &str) -> Option<usize> {
        let i = self
            .row_labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(row))?;
        Some(self.row_totals[i])
    }

    pub fn col_total(&self, col: &str) -> Option<usize> {
        let j = self
            .col_labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(col))?;
        Some(self.col_totals[j])
    }
}

fn field(name: &str) -> Result<NominalField, ReportError> {
    NominalField::from_name(name).ok_or_else(|| ReportError::NotNominalField(name.to_string()))
}

/// Counts of `sites` by two nominal fields. Every declared level appears,
/// including empty ones.
pub fn crosstab<S: SiteAttributes>(
    sites: &[S],
    row_dim: &str,
    col_dim: &str,
) -> Result<CrossTab, ReportError> {
    let (rf, cf) = (field(row_dim)?, field(col_dim)?);
    let row_labels = rf.levels();
    let col_labels = cf.levels();
    let mut cells = vec![vec![0usize; col_labels.len()]; row_labels.len()];
    for s in sites {
        let i = row_labels.iter().position(|l| *l == s.nominal(rf));
        let j = col_labels.iter().position(|l| *l == s.nominal(cf));
        if let (Some(i), Some(j)) = (i, j) {
            cells[i][j] += 1;
        }
    }
    let row_totals: Vec<usize> = cells.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<usize> = (0..col_labels.len())
        .map(|j| cells.iter().map(|r| r[j]).sum())
        .collect();
    Ok(CrossTab {
        row_dim: rf,
        col_dim: cf,
        grand_total: row_totals.iter().sum(),
        row_labels,
        col_labels,
        cells,
        row_totals,
        col_totals,
    })
}

/// Three decimals, no leading zero (`.038`, `-.254`).
pub fn fmt3(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.3}");
    let s = if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    };
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

/// Full-precision, round-trippable float for CSV output.
fn fmt_full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        fmt3(x)
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory csv writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Right-aligned columns after a left-aligned first column.
fn layout(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|j| {
            rows.iter()
                .filter_map(|r| r.get(j))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[j]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn ensure_single_newline(mut s: String) -> String {
    while s.ends_with("\n\n") {
        s.pop();
    }
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

pub fn render_crosstab(tab: &CrossTab, format: OutputFormat, suppress_empty: bool) -> String {
    let rows: Vec<usize> = (0..tab.row_labels.len())
        .filter(|&i| !suppress_empty || tab.row_totals[i] > 0)
        .collect();
    let cols: Vec<usize> = (0..tab.col_labels.len())
        .filter(|&j| !suppress_empty || tab.col_totals[j] > 0)
        .collect();
    let corner = format!("{} \\ {}", tab.row_dim.name(), tab.col_dim.name());

    match format {
        OutputFormat::Text => {
            let mut grid = Vec::with_capacity(rows.len() + 2);
            let mut header = vec![corner];
            header.extend(
                cols.iter()
                    .map(|&j| display(tab.col_dim, tab.col_labels[j])),
            );
            header.push("Total".into());
            grid.push(header);
            for &i in &rows {
                let mut line = vec![display(tab.row_dim, tab.row_labels[i])];
                line.extend(cols.iter().map(|&j| tab.cells[i][j].to_string()));
                line.push(tab.row_totals[i].to_string());
                grid.push(line);
            }
            let mut footer = vec!["Total".to_string()];
            footer.extend(cols.iter().map(|&j| tab.col_totals[j].to_string()));
            footer.push(tab.grand_total.to_string());
            grid.push(footer);
            layout(&grid)
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            let mut header = vec![tab.row_dim.name().to_string()];
            header.extend(cols.iter().map(|&j| tab.col_labels[j].to_string()));
            header.push("total".into());
            w.write_record(&header).expect("in-memory write");
            for &i in &rows {
                let mut line = vec![tab.row_labels[i].to_string()];
                line.extend(cols.iter().map(|&j| tab.cells[i][j].to_string()));
                line.push(tab.row_totals[i].to_string());
                w.write_record(&line).expect("in-memory write");
            }
            let mut footer = vec!["total".to_string()];
            footer.extend(cols.iter().map(|&j| tab.col_totals[j].to_string()));
            footer.push(tab.grand_total.to_string());
            w.write_record(&footer).expect("in-memory write");
            finish_csv(w)
        }
    }
}

fn display(field: NominalField, level: &str) -> String {
    field.display_name(level).unwrap_or(level).to_string()
}

fn variable_name(label: &str) -> &str {
    if label == INTERCEPT {
        "(Constant)"
    } else {
        label
    }
}

pub fn render_regression(fit: &RegressionFit, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => {
            let mut grid = vec![vec![
                "Variable".to_string(),
                "Coefficient".to_string(),
                "p-value".to_string(),
            ]];
            for (i, label) in fit.column_labels.iter().enumerate() {
                let stars = significance_stars(fit.p_values[i]);
                grid.push(vec![
                    variable_name(label).to_string(),
                    format!("{}{stars:<3}", fmt3(fit.coefficients[i])),
                    fmt3(fit.p_values[i]),
                ]);
            }
            let mut out = String::from("Dependent variable: ln value (2007 US$/ha/yr)\n");
            out.push_str(&layout(&grid));
            let _ = writeln!(
                out,
                "N = {}  R2 = {}  Adjusted R2 = {}  F = {} (p = {})  df = {}",
                fit.n,
                fmt3(fit.r2),
                fmt3(fit.adj_r2),
                fmt3(fit.f_stat),
                fmt3(fit.f_p_value),
                fit.df_residual
            );
            out.push_str("*** p < .01, ** p < .05, * p < .10\n");
            out
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record([
                "variable",
                "coefficient",
                "std_error",
                "t_value",
                "p_value",
                "stars",
            ])
            .expect("in-memory write");
            for (i, label) in fit.column_labels.iter().enumerate() {
                w.write_record([
                    label.clone(),
                    fmt_full(fit.coefficients[i]),
                    fmt_full(fit.std_errors[i]),
                    fmt_full(fit.t_values[i]),
                    fmt_full(fit.p_values[i]),
                    significance_stars(fit.p_values[i]).to_string(),
                ])
                .expect("in-memory write");
            }
            finish_csv(w)
        }
    }
}

pub fn render_screening(report: &ScreeningReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => {
            let mut grid = vec![vec![
                "Stage".to_string(),
                "Removed".to_string(),
                "Remaining".to_string(),
                "Articles".to_string(),
            ]];
            grid.push(vec![
                "ingested".into(),
                "-".into(),
                report.ingested.to_string(),
                report.ingested_articles.to_string(),
            ]);
            for s in &report.stages {
                grid.push(vec![
                    s.name.clone(),
                    s.removed.to_string(),
                    s.remaining.to_string(),
                    s.articles.to_string(),
                ]);
            }
            let mut out = layout(&grid);
            let _ = writeln!(
                out,
                "Retained {} records from {} articles",
                report.remaining(),
                report.article_count
            );
            out
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(["stage", "removed", "remaining", "articles"])
                .expect("in-memory write");
            w.write_record([
                "ingested".to_string(),
                "0".into(),
                report.ingested.to_string(),
                report.ingested_articles.to_string(),
            ])
            .expect("in-memory write");
            for s in &report.stages {
                w.write_record([
                    s.name.clone(),
                    s.removed.to_string(),
                    s.remaining.to_string(),
                    s.articles.to_string(),
                ])
                .expect("in-memory write");
            }
            finish_csv(w)
        }
    }
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map_or_else(|| "NA".to_string(), f)
}

fn summary_line(name: &str, s: &ErrorSummary) -> String {
    format!(
        "{name}: n = {}  mean = {}  median = {}",
        s.count,
        fmt3(s.mean),
        fmt3(s.median)
    )
}

pub fn render_loocv(report: &LoocvReport, format: OutputFormat) -> String {
    let out = match format {
        OutputFormat::Text => {
            let mut grid = vec![vec![
                "record_id".to_string(),
                "function_error".to_string(),
                "unit_error".to_string(),
            ]];
            for f in &report.folds {
                grid.push(vec![
                    f.record_id.clone(),
                    fmt3(f.function_error),
                    opt(f.unit_error, fmt3),
                ]);
            }
            let mut out = layout(&grid);
            let _ = writeln!(out, "back-transform: {}", report.mode.label());
            let _ = writeln!(
                out,
                "{}",
                summary_line("function transfer", &report.function_summary)
            );
            let _ = writeln!(
                out,
                "{}",
                summary_line("unit transfer", &report.unit_summary)
            );
            let _ = writeln!(out, "skipped folds: {}", report.skipped.len());
            for s in &report.skipped {
                let _ = writeln!(out, "  {}: {}", s.record_id, s.reason);
            }
            out
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record(["record_id", "function_error", "unit_error"])
                .expect("in-memory write");
            for f in &report.folds {
                w.write_record([
                    f.record_id.clone(),
                    fmt_full(f.function_error),
                    opt(f.unit_error, fmt_full),
                ])
                .expect("in-memory write");
            }
            for s in &report.skipped {
                w.write_record([s.record_id.clone(), "skipped".into(), s.reason.clone()])
                    .expect("in-memory write");
            }
            let mut out = finish_csv(w);
            for (name, s) in [
                ("function", &report.function_summary),
                ("unit", &report.unit_summary),
            ] {
                let _ = writeln!(
                    out,
                    "# {name}: n={} mean={} median={}",
                    s.count,
                    fmt_full(s.mean),
                    fmt_full(s.median)
                );
            }
            out
        }
    };
    ensure_single_newline(out)
}

pub fn render_predictions(predictions: &[TransferPrediction], format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => {
            let mut grid = vec![vec![
                "site_id".to_string(),
                "log_prediction".to_string(),
                "value_prediction".to_string(),
                "mode".to_string(),
            ]];
            for p in predictions {
                grid.push(vec![
                    p.site_id.clone(),
                    fmt3(p.log_prediction),
                    format!("{:.2}", p.value_prediction),
                    p.mode.label().to_string(),
                ]);
            }
            let mut out = layout(&grid);
            if let Some(p) = predictions.first() {
                let _ = writeln!(out, "model: {}", p.model_id);
            }
            out
        }
        OutputFormat::Csv => {
            let mut w = csv_writer();
            w.write_record([
                "site_id",
                "log_prediction",
                "value_prediction",
                "mode",
                "model_id",
            ])
            .expect("in-memory write");
            for p in predictions {
                w.write_record([
                    p.site_id.clone(),
                    fmt_full(p.log_prediction),
                    fmt_full(p.value_prediction),
                    p.mode.label().to_string(),
                    p.model_id.clone(),
                ])
                .expect("in-memory write");
            }
            finish_csv(w)
        }
    }
}
