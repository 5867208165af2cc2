//! Contour plots as SVG 1.1, one `<g>` per level.

use std::fmt::Write;
use std::path::Path;

use affinity_core::field::{ContourLevel, ScalarFieldGrid};

use crate::FormatResult;

/// Longest side of the drawing in SVG user units.
const CANVAS: f64 = 800.0;

struct Frame {
    origin: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            (p[0] - self.origin[0]) * self.scale,
            self.height - (p[1] - self.origin[1]) * self.scale,
        )
    }
}

/// Renders the contours of `grid`. Deeper (lower) levels are drawn darker.
/// `centers`, if given, are marked with small circles.
pub fn contours_svg(
    grid: &ScalarFieldGrid,
    contours: &[ContourLevel],
    centers: &[[f64; 2]],
) -> String {
    let spec = grid.spec();
    let span = [
        spec.spacing[0] * (spec.nx - 1) as f64,
        spec.spacing[1] * (spec.ny - 1) as f64,
    ];
    let scale = CANVAS / span[0].max(span[1]);
    let (width, height) = (span[0] * scale, span[1] * scale);
    let frame = Frame {
        origin: spec.origin,
        scale,
        height,
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.3}\" height=\"{height:.3}\" viewBox=\"0 0 {width:.3} {height:.3}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{width:.3}\" height=\"{height:.3}\" fill=\"white\"/>"
    );
    for level in contours {
        let grey = (200.0 * level.level).round() as u8;
        let _ = writeln!(
            out,
            "<g class=\"level\" data-level=\"{}\" fill=\"none\" stroke=\"rgb({grey},{grey},{grey})\" stroke-width=\"1.5\">",
            level.level
        );
        for line in &level.polylines {
            let mut d = String::new();
            for (n, &p) in line.points.iter().enumerate() {
                let (x, y) = frame.map(p);
                let _ = write!(d, "{}{x:.3},{y:.3}", if n == 0 { "M" } else { " L" });
            }
            if line.closed {
                d.push_str(" Z");
            }
            let _ = writeln!(out, "<path d=\"{d}\"/>");
        }
        out.push_str("</g>\n");
    }
    if !centers.is_empty() {
        out.push_str("<g class=\"centers\" fill=\"black\">\n");
        for &c in centers {
            let (x, y) = frame.map(c);
            let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\"/>");
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_contours_svg(
    grid: &ScalarFieldGrid,
    contours: &[ContourLevel],
    centers: &[[f64; 2]],
    path: &Path,
) -> FormatResult<()> {
    crate::csv::write_text(path, &contours_svg(grid, contours, centers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use affinity_core::field::{extract_contours, GridSpec};

    #[test]
    fn one_group_per_level() {
        let spec = GridSpec::spanning([-2.0, -2.0], [2.0, 2.0], 41, 41).unwrap();
        let grid = ScalarFieldGrid::from_fn(spec, |p| (-(p[0] * p[0] + p[1] * p[1]).sqrt()).exp())
            .unwrap();
        let levels = [0.3, 0.5, 0.7];
        let contours = extract_contours(&grid, &levels).unwrap();
        let svg = contours_svg(&grid, &contours, &[[0.0, 0.0]]);
        assert_eq!(svg.matches("<g class=\"level\"").count(), 3);
        assert_eq!(svg.matches("<path").count(), 3);
        assert!(svg.contains(" Z\"/>"));
        assert!(svg.contains("<circle cx=\"400.000\" cy=\"400.000\""));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn constant_field_has_empty_groups() {
        let spec = GridSpec::spanning([0.0, 0.0], [1.0, 1.0], 3, 3).unwrap();
        let grid = ScalarFieldGrid::from_fn(spec, |_| 1.0).unwrap();
        let contours = extract_contours(&grid, &[0.5]).unwrap();
        let svg = contours_svg(&grid, &contours, &[]);
        assert_eq!(svg.matches("<g class=\"level\"").count(), 1);
        assert_eq!(svg.matches("<path").count(), 0);
    }
}
