//! Minimal polyline chart.

use std::fmt::Write as _;

use crate::simgen::{SolverKind, SweepRow};

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of several series sharing linear axes. Non-finite points are
/// skipped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 400.0, 70.0, 150.0, 40.0, 50.0);
    let finite = || series.iter().flat_map(|s| &s.points).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if !(y1 > 0.0) {
        y1 = 1.0;
    }
    let y0 = 0.0;
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (ml + w - mr) / 2.0, escape(title));
    let _ = writeln!(s, r#"<path d="M{ml} {mt} V{} H{}" fill="none" stroke="black"/>"#, h - mb, w - mr);
    for i in 0..=4 {
        let (fx, fy) = (x0 + (x1 - x0) * i as f64 / 4.0, y0 + (y1 - y0) * i as f64 / 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.3}</text>"#, px(fx), h - mb + 16.0, fx);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2e}</text>"#, ml - 4.0, py(fy) + 4.0, fy);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ml + w - mr) / 2.0, h - 10.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (mt + h - mb) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> =
            ser.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let ly = mt + 18.0 * i as f64;
        let _ =
            writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - mr + 10.0, w - mr + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - mr + 35.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Mean `e_T` and `e_R` of both solvers against the swept value.
pub fn sweep_chart(variable: &str, rows: &[SweepRow]) -> String {
    let pick = |kind: SolverKind, f: fn(&SweepRow) -> f64| Series {
        name: String::new(),
        points: rows.iter().filter(|r| r.solver == kind).map(|r| (r.value, f(r))).collect(),
    };
    let series = vec![
        Series { name: "RS e_T".into(), ..pick(SolverKind::RollingShutter, |r| r.mean_e_t) },
        Series { name: "GS e_T".into(), ..pick(SolverKind::GlobalShutter, |r| r.mean_e_t) },
        Series { name: "RS e_R".into(), ..pick(SolverKind::RollingShutter, |r| r.mean_e_r) },
        Series { name: "GS e_R".into(), ..pick(SolverKind::GlobalShutter, |r| r.mean_e_r) },
    ];
    line_chart(&format!("{variable} sweep"), variable, "mean error (rad)", &series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_structure() {
        let s = line_chart(
            "a<b",
            "x",
            "y",
            &[
                Series { name: "one".into(), points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)] },
                Series { name: "two".into(), points: vec![] },
            ],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a&lt;b"));
        assert!(!s.contains("NaN"));
    }

    #[test]
    fn degenerate_ranges() {
        let s = line_chart("t", "x", "y", &[Series { name: "c".into(), points: vec![(1.0, 0.0)] }]);
        assert!(!s.contains("NaN") && !s.contains("inf"));
    }
}
