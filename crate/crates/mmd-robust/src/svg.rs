//! Self-contained SVG line charts for the experiment artifacts.
//!
//! Deliberately minimal: axes, a light grid, one polyline per series, round
//! point markers, a legend. Everything is rendered with `format!` into a
//! single `<svg>` string — no plotting dependency, no timestamps, no
//! randomness — so chart bytes are a pure function of the data and rerunning
//! an experiment reproduces its plots exactly.

use crate::{Error, Result};

/// One plotted curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(x, y)` pairs in data coordinates, drawn in the given order.
    pub points: Vec<(f64, f64)>,
    /// Dashed stroke — used for analytic envelopes and theoretical bounds.
    pub dashed: bool,
}

impl Series {
    pub fn solid(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, dashed: false }
    }

    pub fn dashed(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points, dashed: true }
    }
}

/// Chart frame: title, axis labels, pixel size.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: f64,
    pub height: f64,
}

impl ChartSpec {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        ChartSpec {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 760.0,
            height: 480.0,
        }
    }
}

const MARGIN_TOP: f64 = 56.0;
const MARGIN_RIGHT: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 64.0;
const MARGIN_LEFT: f64 = 76.0;
const N_TICKS: usize = 5;

const COLOR_AXIS: &str = "#2c3e50";
const COLOR_GRID: &str = "#e4e8eb";
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Render a line chart to an SVG document string.
///
/// Errors when no series has a point or any coordinate is non-finite; a
/// degenerate axis range (all x or all y equal) is widened symmetrically.
pub fn line_chart(spec: &ChartSpec, series: &[Series]) -> Result<String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "series",
                    reason: format!("non-finite point ({x}, {y}) in series '{}'", s.label),
                });
            }
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: "nothing to plot: every series is empty".into(),
        });
    }
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);

    let plot_w = spec.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = spec.height - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}" font-family="Helvetica, Arial, sans-serif">"#,
        w = fmt(spec.width),
        h = fmt(spec.height)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<rect width="{}" height="{}" fill="white"/>"#,
        fmt(spec.width),
        fmt(spec.height)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{}" y="30" text-anchor="middle" font-size="17" font-weight="bold" fill="{COLOR_AXIS}">{}</text>"#,
        fmt(spec.width / 2.0),
        escape_xml(&spec.title)
    ));
    svg.push('\n');

    // Horizontal grid plus y tick labels.
    for i in 0..=N_TICKS {
        let frac = i as f64 / N_TICKS as f64;
        let y_val = y_min + frac * (y_max - y_min);
        let y_px = MARGIN_TOP + plot_h - frac * plot_h;
        svg.push_str(&format!(
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{COLOR_GRID}" stroke-width="1"/>"#,
            fmt(MARGIN_LEFT),
            fmt(y_px),
            fmt(MARGIN_LEFT + plot_w),
            fmt(y_px)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-size="11" fill="{COLOR_AXIS}">{}</text>"#,
            fmt(MARGIN_LEFT - 8.0),
            fmt(y_px + 4.0),
            tick_label(y_val, y_max - y_min)
        ));
        svg.push('\n');
    }
    // X tick labels along the bottom.
    for i in 0..=N_TICKS {
        let frac = i as f64 / N_TICKS as f64;
        let x_val = x_min + frac * (x_max - x_min);
        let x_px = MARGIN_LEFT + frac * plot_w;
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="11" fill="{COLOR_AXIS}">{}</text>"#,
            fmt(x_px),
            fmt(MARGIN_TOP + plot_h + 18.0),
            tick_label(x_val, x_max - x_min)
        ));
        svg.push('\n');
    }

    // Axes.
    svg.push_str(&format!(
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="{COLOR_AXIS}" stroke-width="1.5"/>"#,
        l = fmt(MARGIN_LEFT),
        r = fmt(MARGIN_LEFT + plot_w),
        b = fmt(MARGIN_TOP + plot_h)
    ));
    svg.push_str(&format!(
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="{COLOR_AXIS}" stroke-width="1.5"/>"#,
        l = fmt(MARGIN_LEFT),
        t = fmt(MARGIN_TOP),
        b = fmt(MARGIN_TOP + plot_h)
    ));
    svg.push('\n');

    // Axis labels.
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13" fill="{COLOR_AXIS}">{}</text>"#,
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(spec.height - 18.0),
        escape_xml(&spec.x_label)
    ));
    svg.push_str(&format!(
        r#"<text x="20" y="{mid}" text-anchor="middle" font-size="13" fill="{COLOR_AXIS}" transform="rotate(-90 20 {mid})">{}</text>"#,
        escape_xml(&spec.y_label),
        mid = fmt(MARGIN_TOP + plot_h / 2.0)
    ));
    svg.push('\n');

    // Curves.
    for (si, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[si % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{},{}", fmt(px), fmt(py))
            })
            .collect();
        svg.push_str(&format!(
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            path.join(" ")
        ));
        svg.push('\n');
        if !s.dashed {
            for &(x, y) in &s.points {
                let (px, py) = to_px(x, y);
                svg.push_str(&format!(
                    r#"<circle cx="{}" cy="{}" r="3.2" fill="{color}"/>"#,
                    fmt(px),
                    fmt(py)
                ));
            }
            svg.push('\n');
        }
    }

    // Legend, top-right inside the plot area.
    let legend_x = MARGIN_LEFT + plot_w - 180.0;
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 + si as f64 * 18.0;
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        svg.push_str(&format!(
            r#"<line x1="{x1}" y1="{y}" x2="{x2}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            x1 = fmt(legend_x),
            x2 = fmt(legend_x + 22.0),
            y = fmt(y)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" font-size="12" fill="{COLOR_AXIS}">{}</text>"#,
            fmt(legend_x + 28.0),
            fmt(y + 4.0),
            escape_xml(&s.label)
        ));
        svg.push('\n');
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Data range padded by 5% on each side; a zero-width range is widened by
/// ±1 (or ±|v|) so the projection stays well-defined.
fn padded_range(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo <= 0.0 {
        let pad = lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Tick text sized to the axis span: plain decimals in a comfortable range,
/// scientific notation outside it.
fn tick_label(v: f64, span: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let digits = if span >= 1.0 {
        2
    } else {
        // Enough decimals to separate neighboring ticks.
        (-(span / N_TICKS as f64).log10().floor() as i32 + 1).clamp(1, 6) as usize
    };
    if v.abs() >= 0.001 && v.abs() < 10_000.0 {
        let s = format!("{v:.digits$}");
        // Trim trailing zeros but keep at least one decimal-free digit.
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        if trimmed.is_empty() || trimmed == "-" { "0".into() } else { trimmed.to_string() }
    } else {
        format!("{v:.1e}")
    }
}

/// Minimal pixel-coordinate formatting: two decimals, trailing zeros kept —
/// fixed width keeps diffs readable.
fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> (ChartSpec, Vec<Series>) {
        let spec = ChartSpec::new("Error vs ε", "outlier ratio ε", "MSE");
        let series = vec![
            Series::solid("estimator", vec![(0.0, 0.002), (0.1, 0.0025), (0.2, 0.003)]),
            Series::dashed("bound", vec![(0.0, 0.004), (0.2, 0.006)]),
        ];
        (spec, series)
    }

    #[test]
    fn chart_contains_frame_curves_and_legend() {
        let (spec, series) = demo();
        let svg = line_chart(&spec, &series).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("estimator"));
        assert!(svg.contains("bound"));
        assert!(svg.contains("outlier ratio ε"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn chart_bytes_are_deterministic() {
        let (spec, series) = demo();
        assert_eq!(line_chart(&spec, &series).unwrap(), line_chart(&spec, &series).unwrap());
    }

    #[test]
    fn special_characters_are_escaped() {
        let spec = ChartSpec::new("a < b & c", "x", "y");
        let series = vec![Series::solid("q\"quote\"", vec![(0.0, 1.0), (1.0, 2.0)])];
        let svg = line_chart(&spec, &series).unwrap();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(svg.contains("q&quot;quote&quot;"));
        assert!(!svg.contains("a < b"));
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let spec = ChartSpec::new("flat", "x", "y");
        let one_point = vec![Series::solid("p", vec![(1.0, 3.0)])];
        let svg = line_chart(&spec, &one_point).unwrap();
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));

        let flat_y = vec![Series::solid("c", vec![(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)])];
        assert!(line_chart(&spec, &flat_y).is_ok());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let spec = ChartSpec::new("t", "x", "y");
        assert!(line_chart(&spec, &[]).is_err());
        assert!(line_chart(&spec, &[Series::solid("e", vec![])]).is_err());
        assert!(line_chart(&spec, &[Series::solid("n", vec![(0.0, f64::NAN)])]).is_err());
    }

    #[test]
    fn tick_labels_adapt_to_scale() {
        assert_eq!(tick_label(0.0, 1.0), "0");
        assert_eq!(tick_label(2.5, 10.0), "2.5");
        assert_eq!(tick_label(2.0, 10.0), "2");
        assert_eq!(tick_label(0.004, 0.02), "0.004");
        assert_eq!(tick_label(1.0e-5, 1e-4), "1.0e-5");
    }

    #[test]
    fn markup_is_well_formed() {
        // Tiny stack parser: escaped text content contains no raw '<', so
        // splitting on '<' visits each tag once.
        let (spec, series) = demo();
        let svg = line_chart(&spec, &series).unwrap();
        let mut stack: Vec<String> = Vec::new();
        for piece in svg.split('<').skip(1) {
            if let Some(rest) = piece.strip_prefix('/') {
                let name = rest.split('>').next().unwrap();
                assert_eq!(stack.pop().as_deref(), Some(name), "close </{name}> mismatched");
            } else {
                let gt = piece.find('>').expect("tag never closed");
                let name: String =
                    piece.chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
                if !piece[..gt].ends_with('/') {
                    stack.push(name);
                }
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }
}
