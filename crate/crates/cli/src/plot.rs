//! Minimal static SVG line plots (log-scale y) for the error sweeps.
//!
//! No interactive machinery: the benchmark artifacts are offline vector
//! files rendered straight from the CSV data.

use anyhow::Result;
use std::fmt::Write as _;
use std::path::Path;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Writes a log10-y line plot. Non-finite or non-positive values are
/// skipped (they have no place on a log axis).
pub fn write_log_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<()> {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for (x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() || *y <= 0.0 {
                continue;
            }
            x_min = x_min.min(*x);
            x_max = x_max.max(*x);
            y_min = y_min.min(y.log10());
            y_max = y_max.max(y.log10());
        }
    }
    if !x_min.is_finite() || !y_min.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = -1.0;
        y_max = 0.0;
    }
    if (x_max - x_min).abs() < 1e-300 {
        x_max = x_min + 1.0;
    }
    y_min = y_min.floor();
    y_max = y_max.ceil();
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |logy: f64| MARGIN_T + (y_max - logy) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        svg,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )?;

    // Axes frame.
    writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>"##
    )?;

    // Horizontal gridlines at integer decades.
    let mut decade = y_min as i64;
    while decade as f64 <= y_max {
        let y = sy(decade as f64);
        writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd" stroke-width="0.7"/>"##,
            MARGIN_L + plot_w
        )?;
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">1e{decade}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0
        )?;
        decade += 1;
    }

    // X ticks: five evenly spaced.
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let px = sx(x);
        writeln!(
            svg,
            r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#333" stroke-width="1"/>"##,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 4.0
        )?;
        writeln!(
            svg,
            r#"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{x:.1}</text>"#,
            MARGIN_T + plot_h + 18.0
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )?;
    writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    )?;

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // Decimate long series; the plot cannot resolve more anyway.
        let stride = (s.points.len() / 2000).max(1);
        let mut d = String::new();
        let mut pen_down = false;
        for (x, y) in s.points.iter().step_by(stride) {
            if !x.is_finite() || !y.is_finite() || *y <= 0.0 {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(d, "{cmd}{:.2} {:.2} ", sx(*x), sy(y.log10()))?;
            pen_down = true;
        }
        if !d.is_empty() {
            writeln!(
                svg,
                r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.4"/>"#
            )?;
        }
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            WIDTH - MARGIN_R + 8.0,
            WIDTH - MARGIN_R + 34.0
        )?;
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            WIDTH - MARGIN_R + 40.0,
            ly + 4.0,
            escape(&s.label)
        )?;
    }
    writeln!(svg, "</svg>")?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_valid_svg_and_skips_bad_points() {
        let dir = std::env::temp_dir().join("liftquad_plot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        let series = vec![
            Series {
                label: "N = 5".into(),
                points: vec![(0.0, 1e-3), (1.0, f64::NAN), (2.0, 2e-3), (3.0, 0.0)],
            },
            Series {
                label: "N = 15".into(),
                points: (0..100).map(|i| (i as f64, 1e-6 * (i + 1) as f64)).collect(),
            },
        ];
        write_log_plot(&path, "errors", "time (s)", "relative error", &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("N = 15"));
        assert!(text.trim_end().ends_with("</svg>"));
    }
}
