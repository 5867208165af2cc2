//! File formats and the `affinity` command-line tool built on
//! [`affinity_core`].
//!
//! Points are plain CSV (one point per row, optional header), labels and
//! weights one value per row, heatmaps binary PGM, contours SVG and reports
//! `metric,value` CSV.

pub mod cli;
pub mod csv;
pub mod pgm;
pub mod report;
pub mod svg;

use std::path::PathBuf;

pub use affinity_core as core;

/// Failure reading or writing one of the supported file formats.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        source: affinity_core::Error,
    },
}

impl FormatError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

/// Shortest decimal text of `v` rounded to 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{}", if v == 0.0 { 0.0 } else { v });
    }
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::format_sig9;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.123456789123), "0.123456789");
        assert_eq!(format_sig9(1.5), "1.5");
        assert_eq!(format_sig9(-0.0), "0");
        assert_eq!(format_sig9(123456789012.0), "123456789000");
        assert_eq!(format_sig9(1e-12), "0.000000000001");
    }
}
