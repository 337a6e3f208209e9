use serde::{Deserialize, Serialize};
use std::fmt::Write;

use super::reference::{published, Reference};
use crate::problems::{Category, ProblemId, VariantKind};
use crate::Result;

/// One trained-and-evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: ProblemId,
    pub variant: VariantKind,
    pub image_size: u32,
    /// Training images per class.
    pub n_train: usize,
    pub accuracy: f64,
    pub category: Category,
    pub seed: u64,
    pub wall_time_s: f64,
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record([
            "problem",
            "variant",
            "image_size",
            "n_train",
            "accuracy",
            "category",
            "seed",
            "wall_time_s",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

const HEADER: [&str; 10] = [
    "problem",
    "variant",
    "size",
    "n/class",
    "measured",
    "LeNet",
    "GoogLeNet",
    "Fleuret",
    "Human",
    "difference",
];

fn cells(row: &ResultRow, r: &Reference) -> Vec<String> {
    vec![
        row.problem.get().to_string(),
        row.variant.name(),
        row.image_size.to_string(),
        row.n_train.to_string(),
        format!("{:.3}", row.accuracy),
        format!("{:.2}", r.lenet),
        format!("{:.2}", r.googlenet),
        format!("{:.2}", r.fleuret),
        format!("{:.2}", r.human),
        r.difference.to_string(),
    ]
}

fn average_cells(label: &str, rows: &[&ResultRow]) -> Vec<String> {
    let mean = |f: &dyn Fn(&ResultRow) -> f64| {
        if rows.is_empty() {
            "-".to_string()
        } else {
            format!("{:.3}", rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64)
        }
    };
    let reference = |f: fn(&Reference) -> f64| mean(&|r: &ResultRow| f(published(r.problem)));
    vec![
        label.to_string(),
        String::new(),
        String::new(),
        String::new(),
        mean(&|r| r.accuracy),
        reference(|r| r.lenet),
        reference(|r| r.googlenet),
        reference(|r| r.fleuret),
        reference(|r| r.human),
        String::new(),
    ]
}

/// Aligned plain-text table: comparison problems, then the rest, each block
/// closed by its average, then the overall average. Published accuracies
/// sit next to the measured ones.
pub fn render_table(rows: &[ResultRow]) -> String {
    let (comparison, other): (Vec<&ResultRow>, Vec<&ResultRow>) =
        rows.iter().partition(|r| r.category.is_comparison());
    let mut lines: Vec<Option<Vec<String>>> = vec![Some(HEADER.iter().map(|s| s.to_string()).collect()), None];
    for (block, label) in [(&comparison, "average (comparison)"), (&other, "average (non-comparison)")] {
        let mut sorted = block.clone();
        sorted.sort_by_key(|r| (r.problem, r.variant, r.image_size, r.n_train));
        lines.extend(sorted.iter().map(|r| Some(cells(r, published(r.problem)))));
        lines.push(Some(average_cells(label, block)));
        lines.push(None);
    }
    let all: Vec<&ResultRow> = rows.iter().collect();
    lines.push(Some(average_cells("average (all)", &all)));

    let mut widths = [0usize; HEADER.len()];
    for line in lines.iter().flatten() {
        for (w, c) in widths.iter_mut().zip(line) {
            *w = (*w).max(c.chars().count());
        }
    }
    let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let mut out = String::new();
    for line in &lines {
        match line {
            None => out.push_str(&"-".repeat(total)),
            Some(cells) => {
                let mut text = String::new();
                for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                    if i > 0 {
                        text.push_str("  ");
                    }
                    // Labels left-aligned, numbers right-aligned.
                    if matches!(i, 0 | 1 | 9) {
                        let _ = write!(text, "{c:<w$}");
                    } else {
                        let _ = write!(text, "{c:>w$}");
                    }
                }
                out.push_str(text.trim_end());
            }
        }
        out.push('\n');
    }
    out
}
