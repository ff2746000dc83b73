use std::fmt::Write;

use crate::sim::TrajectorySample;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 50.0;
const SERIES: [(&str, &str); 4] = [
    ("qw", "#1f77b4"),
    ("qx", "#d62728"),
    ("qy", "#2ca02c"),
    ("qz", "#9467bd"),
];

/// Line plot of the four quaternion components against time on a fixed `[-1, 1]` axis.
pub fn render_svg(samples: &[TrajectorySample]) -> String {
    let t_end = samples.last().map_or(0.0, |s| s.t).max(f64::MIN_POSITIVE);
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |t: f64| MARGIN + pw * t / t_end;
    let y = |v: f64| MARGIN + ph * (1.0 - v) / 2.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#999" stroke-dasharray="4 4"/>"##,
        y0 = y(0.0),
        x1 = WIDTH - MARGIN
    );
    for (v, label) in [(1.0, "1"), (0.0, "0"), (-1.0, "-1")] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{label}</text>"#,
            MARGIN - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t = {t_end:.3} s</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 20.0
    );
    for (c, (name, color)) in SERIES.iter().enumerate() {
        let points: Vec<String> = samples
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.t), y(r.q.to_array()[c])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14" fill="{color}">{name}</text>"#,
            MARGIN + 10.0 + 60.0 * c as f64,
            MARGIN - 15.0
        );
    }
    s.push_str("</svg>\n");
    s
}
