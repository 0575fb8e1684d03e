//! CSV and SVG emission.
//!
//! CSV files start with a `# config_hash=<sha256>` comment line, followed by
//! a header row. Reals are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Real number with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Integer vector as space-separated components.
pub fn vector(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut out = format!("# config_hash={config_hash}\n");
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// One zero in a scatter plot; `weight` selects the colour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub re: f64,
    pub im: f64,
    pub weight: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn colour(t: f64) -> String {
    // blue for weight 0 through red for the largest weight
    let t = t.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t).round() as u8;
    let b = (220.0 - 180.0 * t).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-12 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

/// Static scatter of zeros in the `s`-plane with δ marked. Each zero gets
/// exactly one `circle` element of class `zero`.
pub fn scatter_svg(title: &str, points: &[Point], delta: f64, weight_label: &str) -> String {
    let mut re_lo = delta;
    let mut re_hi = delta;
    let mut im_lo = 0.0f64;
    let mut im_hi = 0.0f64;
    for p in points {
        re_lo = re_lo.min(p.re);
        re_hi = re_hi.max(p.re);
        im_lo = im_lo.min(p.im);
        im_hi = im_hi.max(p.im);
    }
    let pad = |lo: f64, hi: f64| {
        let w = (hi - lo).max(0.1);
        (lo - 0.1 * w, hi + 0.1 * w)
    };
    let (re_lo, re_hi) = pad(re_lo, re_hi);
    let (im_lo, im_hi) = pad(im_lo, im_hi);
    let x = |re: f64| MARGIN + (re - re_lo) / (re_hi - re_lo) * (WIDTH - 2.0 * MARGIN);
    let y = |im: f64| HEIGHT - MARGIN - (im - im_lo) / (im_hi - im_lo) * (HEIGHT - 2.0 * MARGIN);
    let wmax = points.iter().map(|p| p.weight).fold(0.0, f64::max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes frame
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x1:.1}" y2="{y0:.1}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0:.1}" y1="{y0:.1}" x2="{x0:.1}" y2="{y1:.1}"/>"#);
    for t in ticks(re_lo, re_hi) {
        let xt = x(t);
        let _ = writeln!(s, r#"<line x1="{xt:.1}" y1="{y0:.1}" x2="{xt:.1}" y2="{:.1}"/>"#, y0 + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{xt:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="10" stroke="none">{}</text>"#,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(im_lo, im_hi) {
        let yt = y(t);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{yt:.1}" x2="{x0:.1}" y2="{yt:.1}"/>"#, x0 - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="10" stroke="none">{}</text>"#,
            x0 - 8.0,
            yt + 3.0,
            tick_label(t)
        );
    }
    let _ = writeln!(s, "</g>");
    if im_lo < 0.0 && im_hi > 0.0 {
        let _ = writeln!(
            s,
            r##"<line class="real-axis" x1="{x0:.1}" y1="{:.1}" x2="{x1:.1}" y2="{:.1}" stroke="#999999" stroke-dasharray="4 3"/>"##,
            y(0.0),
            y(0.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">Re s</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.1})">Im s</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(s, r#"<g class="zeros">"#);
    for p in points {
        let t = if wmax > 0.0 { p.weight / wmax } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<circle class="zero" cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.8"/>"#,
            x(p.re),
            y(p.im),
            colour(t)
        );
    }
    let _ = writeln!(s, "</g>");
    let (dx, dy) = (x(delta), y(0.0));
    let _ = writeln!(
        s,
        r#"<path class="delta" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="black" stroke-width="2"/>"#,
        dx - 7.0,
        dy - 7.0,
        dx + 7.0,
        dy + 7.0,
        dx - 7.0,
        dy + 7.0,
        dx + 7.0,
        dy - 7.0
    );
    // legend
    let lx = WIDTH - MARGIN - 170.0;
    let ly = MARGIN + 10.0;
    let _ = writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="180" height="62" fill="white" stroke="#cccccc"/>"##,
        lx - 10.0,
        ly - 14.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M {:.1} {:.1} L {:.1} {:.1} M {:.1} {:.1} L {:.1} {:.1}" stroke="black" stroke-width="2"/>"#,
        lx - 4.0,
        ly - 4.0,
        lx + 4.0,
        ly + 4.0,
        lx - 4.0,
        ly + 4.0,
        lx + 4.0,
        ly - 4.0
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">δ = {:.6}</text>"#, lx + 12.0, ly + 4.0, delta);
    let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="8" height="8" fill="{}"/>"#, lx - 4.0, ly + 14.0, colour(0.0));
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">zero, {} = 0</text>"#,
        lx + 12.0,
        ly + 22.0,
        escape(weight_label)
    );
    let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="8" height="8" fill="{}"/>"#, lx - 4.0, ly + 30.0, colour(1.0));
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">zero, {} = {:.4}</text>"#,
        lx + 12.0,
        ly + 38.0,
        escape(weight_label),
        wmax
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_seventeen_digits() {
        let s = real(0.1);
        let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn empty_table_has_header_only() {
        let t = Table::new(vec!["a", "b"]);
        assert_eq!(t.render("abc"), "# config_hash=abc\na,b\n");
    }

    #[test]
    fn one_circle_per_point() {
        let pts = [
            Point { re: 0.1, im: 0.2, weight: 0.0 },
            Point { re: -0.1, im: -0.2, weight: 0.5 },
            Point { re: 0.0, im: 0.0, weight: 0.25 },
        ];
        let svg = scatter_svg("t", &pts, 0.15, "|a/N|");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches(r#"class="delta""#).count(), 1);
        assert!(svg.contains(r#"class="legend""#));
        assert!(svg.contains(r#"class="axes""#));
    }

    #[test]
    fn ticks_cover_range() {
        let t = ticks(-0.73, 0.41);
        assert!(t.len() >= 3);
        assert!(t.iter().all(|x| *x >= -0.73 && *x <= 0.41));
    }
}
