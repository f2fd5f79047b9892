//! Minimal static SVG charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axis_labels(s: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let cy = MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="16" y="{cy}" text-anchor="middle" transform="rotate(-90 16 {cy})">{}</text>"#,
        escape(y_label)
    );
}

/// Named polyline for [`line_plot`].
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Line chart; with `log_y` the y axis is base-10 logarithmic and
/// nonpositive values are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>], log_y: bool) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, ty(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil();
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = open(title);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(x),
            MARGIN_TOP + ph + 16.0,
            tick(x)
        );
    }
    let y_ticks: Vec<f64> = if log_y {
        let step = ((y1 - y0) / 6.0).ceil().max(1.0);
        let mut v = Vec::new();
        let mut y = y0;
        while y <= y1 + 1e-9 {
            v.push(y);
            y += step;
        }
        v
    } else {
        (0..=4).map(|i| y0 + (y1 - y0) * i as f64 / 4.0).collect()
    };
    for y in y_ticks {
        let label = if log_y { format!("1e{}", y as i64) } else { tick(y) };
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            MARGIN_LEFT + pw,
            sy(y),
            sy(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
            MARGIN_LEFT - 6.0,
            sy(y) + 4.0
        );
    }
    for (i, (series, p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !p.is_empty() {
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(series.name)
        );
    }
    axis_labels(&mut s, x_label, y_label);
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        let t = format!("{v:.2}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Greyscale grid; `values[row][col]` in `[0, 1]` maps black (0) to white
/// (1). Rows are drawn bottom-up so the first row sits on the x axis; `None`
/// cells are hatched grey.
pub fn heat_map(
    title: &str,
    x_label: &str,
    y_label: &str,
    col_labels: &[String],
    row_labels: &[String],
    values: &[Vec<Option<f64>>],
) -> String {
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cols = col_labels.len().max(1) as f64;
    let rows = row_labels.len().max(1) as f64;
    let (cw, ch) = (pw / cols, ph / rows);
    let mut s = open(title);
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let x = MARGIN_LEFT + j as f64 * cw;
            let y = MARGIN_TOP + ph - (i + 1) as f64 * ch;
            let fill = match v {
                Some(v) => {
                    let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
                    format!("rgb({g},{g},{g})")
                }
                None => "#bbbbbb".into(),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}" stroke="#888" stroke-width="0.5"/>"##
            );
        }
    }
    for (j, label) in col_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + (j as f64 + 0.5) * cw,
            MARGIN_TOP + ph + 16.0,
            escape(label)
        );
    }
    for (i, label) in row_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            MARGIN_TOP + ph - (i as f64 + 0.5) * ch + 4.0,
            escape(label)
        );
    }
    axis_labels(&mut s, x_label, y_label);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot(
            "t",
            "x",
            "y",
            &[
                Series { name: "a<b", points: vec![(1.0, 1.0), (2.0, 0.01), (3.0, 0.0)] },
                Series { name: "empty", points: vec![] },
            ],
            true,
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn heat_map_cells() {
        let s = heat_map(
            "p",
            "sr",
            "r",
            &["0.1".into(), "0.2".into()],
            &["1".into()],
            &[vec![Some(1.0), None]],
        );
        assert!(s.contains("rgb(255,255,255)"));
        assert!(s.contains("#bbbbbb"));
    }
}
