//! Report artifacts: CSV tables, PGM saliency maps, and optional SVG
//! charts.
//!
//! CSV files are the machine-readable contract — plain UTF-8, `\n` line
//! endings, one header row, values formatted with Rust's shortest
//! round-trip float formatting so files are byte-stable across runs.
//! SVG charts are a best-effort convenience view of the same numbers.

use std::fs;
use std::io::Write;
use std::path::Path;

use fnbound_core::{Error, Result};

fn io_err(path: &Path, err: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(err.kind(), format!("{}: {err}", path.display())))
}

/// Creates the directory (and parents) if needed.
pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// Writes a header line plus preformatted rows. Callers own all value
/// formatting; this only guarantees the framing.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Min-max scales values onto 0..=255. A constant input maps to all zeros.
pub fn normalize_to_bytes(values: &[f64]) -> Vec<u8> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![0; values.len()];
    }
    values
        .iter()
        .map(|&v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Binary PGM (P5), one byte per pixel, row-major.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::Shape(format!(
            "pgm needs {width}x{height} = {} pixels, got {}",
            width * height,
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(32 + pixels.len());
    write!(out, "P5\n{width} {height}\n255\n").expect("writing to a Vec cannot fail");
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// One named polyline on a chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const CHART_COLORS: [&str; 6] = ["#1b6ca8", "#d1495b", "#2e8b57", "#8d6a9f", "#c77d2e", "#4a4a4a"];

/// Renders series as a simple line chart. Skips silently-empty input with
/// an error instead of producing a blank file.
pub fn write_line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<()> {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if points.is_empty() {
        return Err(Error::Shape("chart needs at least one data point".into()));
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }

    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const ML: f64 = 64.0; // left margin, leaves room for y tick labels
    const MR: f64 = 16.0;
    const MT: f64 = 36.0;
    const MB: f64 = 48.0;
    let px = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"#333\"/>\n\
         <line x1=\"{ML}\" y1=\"{0}\" x2=\"{}\" y2=\"{0}\" stroke=\"#333\"/>\n",
        H - MB,
        W - MR,
    ));
    // min/max tick labels on each axis
    svg.push_str(&format!(
        "<text x=\"{ML}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
         <text x=\"{4}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
        H - MB + 18.0,
        trim_tick(x_lo),
        px(x_hi),
        trim_tick(x_hi),
        ML - 8.0,
        py(y_lo) + 4.0,
        trim_tick(y_lo),
        py(y_hi) + 4.0,
        trim_tick(y_hi),
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {3})\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 10.0,
        xml_escape(x_label),
        (MT + H - MB) / 2.0,
        xml_escape(y_label),
    ));
    for (i, s) in series.iter().enumerate() {
        let color = CHART_COLORS[i % CHART_COLORS.len()];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                px(x),
                py(y)
            ));
        } else {
            let path: Vec<String> =
                s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            W - MR - 150.0,
            MT + 16.0 * (i as f64 + 1.0),
            xml_escape(&s.name)
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| io_err(path, e))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn trim_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_framing_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "a,b", &["1,2".into(), "3,4".into()]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n1,2\n3,4\n");
    }

    #[test]
    fn normalization_spans_full_byte_range() {
        let bytes = normalize_to_bytes(&[-1.0, 0.0, 1.0]);
        assert_eq!(bytes, vec![0, 128, 255]);
        assert_eq!(normalize_to_bytes(&[0.7, 0.7, 0.7]), vec![0, 0, 0]);
        assert!(normalize_to_bytes(&[]).is_empty());
    }

    #[test]
    fn pgm_bytes_are_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        write_pgm(&path, 2, 2, &[0, 64, 128, 255]).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"P5\n2 2\n255\n\x00\x40\x80\xff");
        assert!(write_pgm(&path, 2, 2, &[1, 2, 3]).is_err());
    }

    #[test]
    fn chart_writer_produces_svg_with_all_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.svg");
        let series = vec![
            Series { name: "first".into(), points: vec![(0.0, 0.1), (1.0, 0.9)] },
            Series { name: "second".into(), points: vec![(0.0, 0.5), (1.0, 0.4)] },
        ];
        write_line_chart(&path, "demo", "x", "accuracy", &series).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("first") && text.contains("second"));
        assert!(text.contains("polyline"));
        assert!(write_line_chart(&path, "empty", "x", "y", &[]).is_err());
    }
}
