//! CSV outputs: per-point affinities, field grids and `metric,value` reports.

use std::path::Path;

use affinity_core::field::ScalarFieldGrid;
use affinity_core::AffinityVector;

use crate::{format_sig9, FormatError, FormatResult};

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// `id,score,stable,alpha_0..alpha_{k-1},clipped`, one row per point.
pub fn affinity_csv(k: usize, rows: &[AffinityVector]) -> String {
    let mut out = String::from("id,score,stable");
    for i in 0..k {
        out.push_str(&format!(",alpha_{i}"));
    }
    out.push_str(",clipped\n");
    for (id, a) in rows.iter().enumerate() {
        out.push_str(&format!("{id},{},{}", format_sig9(a.score), flag(a.stable)));
        for &v in &a.alphas {
            out.push(',');
            out.push_str(&format_sig9(v));
        }
        out.push_str(&format!(",{}\n", flag(a.clipped)));
    }
    out
}

/// Alpha vectors of an affinity CSV, indexed by row order.
pub fn parse_affinity_csv(text: &str, source: &Path) -> FormatResult<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| FormatError::parse(source, 1, "empty affinity file"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let alpha_cols: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.starts_with("alpha_"))
        .map(|(i, _)| i)
        .collect();
    if alpha_cols.is_empty() {
        return Err(FormatError::parse(source, 1, "no alpha_ columns in header"));
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(FormatError::parse(
                source,
                n + 1,
                format!("expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let alphas = alpha_cols
            .iter()
            .map(|&c| {
                fields[c]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        FormatError::parse(source, n + 1, format!("bad alpha {:?}", fields[c]))
                    })
            })
            .collect::<FormatResult<Vec<f64>>>()?;
        out.push(alphas);
    }
    Ok(out)
}

pub fn read_affinity_csv(path: &Path) -> FormatResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_affinity_csv(&text, path)
}

/// `x,y,score` for every node, row-major from the smallest y.
pub fn grid_csv(grid: &ScalarFieldGrid) -> String {
    let spec = grid.spec();
    let mut out = String::from("x,y,score\n");
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let p = spec.node(i, j);
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig9(p[0]),
                format_sig9(p[1]),
                format_sig9(grid.score(i, j))
            ));
        }
    }
    out
}

/// Two-column `metric,value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    rows: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, metric: impl Into<String>, value: impl ToString) -> &mut Self {
        self.rows.push((metric.into(), value.to_string()));
        self
    }

    pub fn push_real(&mut self, metric: impl Into<String>, value: f64) -> &mut Self {
        self.push(metric, format_sig9(value))
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (m, v) in &self.rows {
            out.push_str(&format!("{m},{v}\n"));
        }
        out
    }
}
