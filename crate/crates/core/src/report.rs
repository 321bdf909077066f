//! Result tables, skill tables and CSV exports built from stored results.
//!
//! None of these paths ever see a question, so no answer key can leak
//! through them.

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exam::{Category, LabelStyle, SkillProfile};
use crate::store::StoredResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(
        "row {row} ({candidate}): category scores sum to {sum} but final score is {final_score}"
    )]
    Integrity {
        row: usize,
        candidate: String,
        sum: u32,
        final_score: u32,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Renders seconds as `M.SS`, so 3517 s becomes `58.37`.
pub fn format_elapsed(secs: u64) -> String {
    format!("{}.{:02}", secs / 60, secs % 60)
}

fn columns(results: &[StoredResult]) -> Vec<Category> {
    if results.is_empty() {
        return Category::canonical();
    }
    let set: IndexSet<Category> = results
        .iter()
        .flat_map(|r| r.per_category_score.keys().cloned())
        .collect();
    set.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultsRow {
    pub first_name: String,
    pub last_name: String,
    pub scores: Vec<u32>,
    pub final_score: u32,
    pub elapsed_secs: u64,
}

/// One row per stored result, in append order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultsTable {
    pub categories: Vec<Category>,
    pub rows: Vec<ResultsRow>,
}

impl ResultsTable {
    /// Builds the table, checking each row's category scores add up to its
    /// final score.
    pub fn from_results(results: &[StoredResult]) -> Result<Self, ReportError> {
        let categories = columns(results);
        let mut rows = Vec::with_capacity(results.len());
        for (i, r) in results.iter().enumerate() {
            let sum: u32 = r.per_category_score.values().sum();
            if sum != r.final_score {
                return Err(ReportError::Integrity {
                    row: i + 1,
                    candidate: r.display_name(),
                    sum,
                    final_score: r.final_score,
                });
            }
            rows.push(ResultsRow {
                first_name: r.first_name.clone(),
                last_name: r.last_name.clone(),
                scores: categories
                    .iter()
                    .map(|c| r.per_category_score.get(c).copied().unwrap_or(0))
                    .collect(),
                final_score: r.final_score,
                elapsed_secs: r.elapsed_secs,
            });
        }
        Ok(ResultsTable { categories, rows })
    }

    pub fn render_text(&self) -> String {
        let mut header = vec!["First Name".to_owned(), "Last Name".to_owned()];
        header.extend(self.categories.iter().map(|c| format!("{c} Score")));
        header.push("Final Score".into());
        header.push("Time".into());
        let body = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![r.first_name.clone(), r.last_name.clone()];
                cells.extend(r.scores.iter().map(u32::to_string));
                cells.push(r.final_score.to_string());
                cells.push(format!("{} Sec", format_elapsed(r.elapsed_secs)));
                cells
            })
            .collect::<Vec<_>>();
        render_aligned(&header, &body, 2)
    }

    /// `first_name,last_name,<category...>,final,elapsed_seconds`.
    pub fn render_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["first_name".to_owned(), "last_name".to_owned()];
        header.extend(self.categories.iter().map(|c| c.as_str().to_lowercase()));
        header.push("final".into());
        header.push("elapsed_seconds".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.first_name.clone(), r.last_name.clone()];
            rec.extend(r.scores.iter().map(u32::to_string));
            rec.push(r.final_score.to_string());
            rec.push(r.elapsed_secs.to_string());
            w.write_record(&rec)?;
        }
        Ok(into_string(w))
    }
}

/// Results export for downloads.
pub fn export_results_csv(results: &[StoredResult]) -> Result<String, ReportError> {
    ResultsTable::from_results(results)?.render_csv()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillsRow {
    pub candidate: String,
    pub best_label: String,
    pub poor_label: String,
}

/// Best and poor subjects per candidate, sorted by candidate name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillsTable {
    pub rows: Vec<SkillsRow>,
}

impl SkillsTable {
    pub fn from_results(results: &[StoredResult], style: &LabelStyle) -> Self {
        let mut rows: Vec<SkillsRow> = results
            .iter()
            .map(|r| {
                let p = SkillProfile::from_scores(&r.per_category_score, style);
                SkillsRow {
                    candidate: r.display_name(),
                    best_label: p.best_label,
                    poor_label: p.poor_label,
                }
            })
            .collect();
        rows.sort_by(|a, b| a.candidate.cmp(&b.candidate));
        SkillsTable { rows }
    }

    pub fn render_text(&self) -> String {
        let header = ["Student Name", "Best Skills", "Poor Skills"].map(String::from);
        let body = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.candidate.clone(),
                    r.best_label.clone(),
                    r.poor_label.clone(),
                ]
            })
            .collect::<Vec<_>>();
        render_aligned(&header, &body, 0)
    }

    pub fn render_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["candidate", "best", "poor"])?;
        for r in &self.rows {
            w.write_record([&r.candidate, &r.best_label, &r.poor_label])?;
        }
        Ok(into_string(w))
    }
}

/// Long-format chart data: `candidate,category,score` with one row per
/// category and a `final` row per candidate.
pub fn chart_csv(results: &[StoredResult]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["candidate", "category", "score"])?;
    for r in results {
        let name = r.display_name();
        for (c, s) in &r.per_category_score {
            w.write_record([name.as_str(), c.as_str(), &s.to_string()])?;
        }
    }
    for r in results {
        w.write_record([
            r.display_name().as_str(),
            "final",
            &r.final_score.to_string(),
        ])?;
    }
    Ok(into_string(w))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("csv from strings is utf-8")
}

/// Column-aligned text. The first `left` columns are left-aligned, the rest
/// right-aligned; a `left` of 0 left-aligns everything.
fn render_aligned(header: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let left = if left == 0 { header.len() } else { left };
    let line = |cells: &[String]| {
        let s = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, &w))| {
                if i < left {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ");
        s.trim_end().to_owned()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}
