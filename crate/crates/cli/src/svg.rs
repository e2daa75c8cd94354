use std::fmt::Write;

const SIZE: f64 = 480.0;
const SPAN: f64 = 1.25;

fn to_px(p: [f64; 2]) -> (f64, f64) {
    let s = SIZE / (2.0 * SPAN);
    ((p[0] + SPAN) * s, (SPAN - p[1]) * s)
}

/// A closed plane curve drawn over the unit circle and axes.
pub fn curve_svg(points: &[[f64; 2]], title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let (cx, cy) = to_px([0.0, 0.0]);
    let r = SIZE / (2.0 * SPAN);
    let _ = writeln!(
        out,
        r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="none" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##
    );
    let _ = writeln!(
        out,
        r##"<path d="M 0 {cy:.3} H {SIZE} M {cx:.3} 0 V {SIZE}" stroke="#dddddd"/>"##
    );
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = to_px(*p);
        let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M " } else { "L " });
    }
    let _ = writeln!(
        out,
        r##"<path d="{}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>"##,
        d.trim_end()
    );
    if let Some(&p) = points.first() {
        let (x, y) = to_px(p);
        let _ = writeln!(out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="#c23b22"/>"##);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
