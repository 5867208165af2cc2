//! Plain comma-separated input files.

use std::fs;
use std::io::Write;
use std::path::Path;

use affinity_core::apps::Partition;
use affinity_core::Dataset;

use crate::{FormatError, FormatResult};

fn read(path: &Path) -> FormatResult<String> {
    fs::read_to_string(path).map_err(|e| FormatError::io(path, e))
}

/// Data lines as `(line number, fields)`, skipping blank lines and a
/// leading header row (one whose fields are not all numbers).
fn rows<'a>(text: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    let mut first = true;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .filter_map(move |(n, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            let header = first && fields.iter().any(|f| f.parse::<f64>().is_err());
            first = false;
            (!header).then_some((n, fields))
        })
}

/// Parses point rows. `source` names the input in error messages.
pub fn parse_points(
    text: &str,
    source: &Path,
    expected_dim: Option<usize>,
) -> FormatResult<Dataset> {
    let mut flat = Vec::new();
    let mut dim = expected_dim;
    for (line, fields) in rows(text) {
        match dim {
            Some(d) if d != fields.len() => {
                return Err(FormatError::parse(
                    source,
                    line,
                    format!("expected {d} fields, found {}", fields.len()),
                ))
            }
            None => dim = Some(fields.len()),
            _ => {}
        }
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| FormatError::parse(source, line, format!("not a number: {f:?}")))?;
            if !v.is_finite() {
                return Err(FormatError::parse(
                    source,
                    line,
                    format!("non-finite value: {f}"),
                ));
            }
            flat.push(v);
        }
    }
    let dim = dim.ok_or_else(|| FormatError::parse(source, 0, "no data rows"))?;
    Dataset::from_flat(flat, dim).map_err(|e| FormatError::Core {
        path: source.into(),
        source: e,
    })
}

/// Reads a point file: one point per row, comma separated.
pub fn ingest_csv(path: &Path, expected_dim: Option<usize>) -> FormatResult<Dataset> {
    parse_points(&read(path)?, path, expected_dim)
}

fn parse_column<T: std::str::FromStr>(
    text: &str,
    source: &Path,
    what: &str,
) -> FormatResult<Vec<T>> {
    rows(text)
        .map(|(line, fields)| {
            if fields.len() != 1 {
                return Err(FormatError::parse(
                    source,
                    line,
                    format!("expected one {what} per row, found {} fields", fields.len()),
                ));
            }
            fields[0].parse().map_err(|_| {
                FormatError::parse(source, line, format!("not a {what}: {:?}", fields[0]))
            })
        })
        .collect()
}

pub fn parse_labels(text: &str, source: &Path) -> FormatResult<Partition> {
    let labels: Vec<usize> = parse_column(text, source, "label")?;
    if labels.is_empty() {
        return Err(FormatError::parse(source, 0, "no labels"));
    }
    Ok(Partition::new(labels))
}

/// Reads a label (partition) file: one non-negative integer per row.
pub fn read_labels(path: &Path) -> FormatResult<Partition> {
    parse_labels(&read(path)?, path)
}

/// Reads a weight file: one finite number per row.
pub fn read_weights(path: &Path) -> FormatResult<Vec<f64>> {
    let text = read(path)?;
    let weights: Vec<f64> = parse_column(&text, path, "number")?;
    if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
        return Err(FormatError::parse(path, i + 1, "non-finite weight"));
    }
    Ok(weights)
}

pub fn write_text(path: &Path, text: &str) -> FormatResult<()> {
    let mut f = fs::File::create(path).map_err(|e| FormatError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| FormatError::io(path, e))
}

pub fn labels_text(labels: &[usize]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

pub fn points_text<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|&v| crate::format_sig9(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
