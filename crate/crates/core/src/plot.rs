//! Minimal self-contained SVG charts. CSV outputs are the contract; these are for eyeballing.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 1.5 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 1.5 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn axes(out: &mut String, f: &Frame, x_ticks: &[f64], y_ticks: &[(f64, String)]) {
    let (x0, x1) = (f.px(f.x.0), f.px(f.x.1));
    let (y0, y1) = (f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for &t in x_ticks {
        let x = f.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            y0 + 4.0,
            y0 + 16.0
        );
    }
    for (t, label) in y_ticks {
        let y = f.py(*t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        );
    }
}

/// Estimated against true angle, both in degrees over `[0, 360)`, with the identity line.
pub fn aoa_scatter_svg(title: &str, points: &[(f64, f64)]) -> String {
    let f = Frame {
        x: (0.0, 360.0),
        y: (0.0, 360.0),
    };
    let mut out = String::new();
    open(&mut out, title, "incident angle (deg)", "estimated angle (deg)");
    let ticks = [0.0, 90.0, 180.0, 270.0, 360.0];
    let y_ticks: Vec<(f64, String)> = ticks.iter().map(|&t| (t, t.to_string())).collect();
    axes(&mut out, &f, &ticks, &y_ticks);
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        f.px(0.0),
        f.py(0.0),
        f.px(360.0),
        f.py(360.0)
    );
    for &(t, e) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
            f.px(t),
            f.py(e),
            COLOURS[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Normalized singular-value curves on a log axis; values below `1e-6` are clipped.
pub fn svd_curves_svg(title: &str, series: &[(String, Vec<f64>)]) -> String {
    const FLOOR: f64 = 1e-6;
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(1).max(2);
    let f = Frame {
        x: (0.0, (n - 1) as f64),
        y: (FLOOR.log10(), 0.0),
    };
    let mut out = String::new();
    open(&mut out, title, "index", "normalized singular value");
    let step = ((n - 1) as f64 / 4.0).ceil().max(1.0);
    let x_ticks: Vec<f64> = (0..=4)
        .map(|k| k as f64 * step)
        .filter(|&t| t <= (n - 1) as f64)
        .collect();
    let y_ticks: Vec<(f64, String)> = (-6..=0).map(|e| (e as f64, format!("1e{e}"))).collect();
    axes(&mut out, &f, &x_ticks, &y_ticks);
    for (k, (label, values)) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", f.px(i as f64), f.py(v.max(FLOOR).log10())))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{}</text>"#,
            W - 1.5 * MARGIN - 120.0,
            MARGIN + 16.0 * k as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}
