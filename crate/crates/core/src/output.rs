//! CSV and SVG renderings of curvature curves.

use std::fmt::Write as _;

use crate::analysis::CurvePoint;

pub const CSV_HEADER: &str = "T,theta,x,psi,g11,g12,g22,det_g,R1212,R,quality";

/// Shortest representation that parses back to the same double; scientific notation
/// outside `[1e-4, 1e16)`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if v == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// The curve as CSV with LF line endings.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let fields = [
            p.t, p.theta, p.x, p.psi, p.g11, p.g12, p.g22, p.det_g, p.r1212, p.scalar_r,
        ];
        for f in fields {
            out.push_str(&format_f64(f));
            out.push(',');
        }
        out.push_str(p.quality.as_str());
        out.push('\n');
    }
    out
}

/// One labelled line of a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub width: f64,
    pub height: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "T".into(),
            y_label: "R".into(),
            log_y: false,
            width: 720.0,
            height: 480.0,
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;

fn r3(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    // avoid "-0"
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        if !log {
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 8 + 1).max(1);
            (a..=b)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let span = self.hi - self.lo;
            let raw = span / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|i| {
                    let v = i as f64 * step;
                    (v, format_tick(v))
                })
                .collect()
        }
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Line chart with a logarithmic x axis.
///
/// Each series becomes one `<polyline>`. On a linear y axis the parts below zero are
/// drawn dashed; on a logarithmic y axis non-positive and non-finite samples are
/// dropped.
pub fn render_svg(series: &[Series], opts: &SvgOptions) -> String {
    let keep = |&(x, y): &(f64, f64)| {
        x.is_finite() && x > 0.0 && y.is_finite() && (!opts.log_y || y > 0.0)
    };
    let cleaned: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().copied().filter(keep).collect())
        .collect();
    let all = || cleaned.iter().flatten();
    let xa = Axis::fit(all().map(|p| p.0), true);
    let ya = Axis::fit(all().map(|p| p.1), opts.log_y);

    let (w, h) = (opts.width, opts.height);
    let pw = w - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = h - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + xa.unit(x) * pw;
    let py = |y: f64| MARGIN_TOP + (1.0 - ya.unit(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        r3(w),
        r3(h),
        r3(w),
        r3(h)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let zero_in_view = !opts.log_y && ya.lo < 0.0 && ya.hi > 0.0;
    let y0 = if opts.log_y {
        MARGIN_TOP + ph
    } else {
        py(0.0).clamp(MARGIN_TOP, MARGIN_TOP + ph)
    };
    if !opts.log_y {
        let _ = writeln!(s, "<defs>");
        let _ = writeln!(
            s,
            r#"<clipPath id="above"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
            r3(MARGIN_LEFT),
            r3(MARGIN_TOP),
            r3(pw),
            r3(y0 - MARGIN_TOP)
        );
        let _ = writeln!(
            s,
            r#"<clipPath id="below"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
            r3(MARGIN_LEFT),
            r3(y0),
            r3(pw),
            r3(MARGIN_TOP + ph - y0)
        );
        let _ = writeln!(s, "</defs>");
    }

    // axes
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/></g>"#,
        l = r3(MARGIN_LEFT),
        r = r3(MARGIN_LEFT + pw),
        t = r3(MARGIN_TOP),
        b = r3(MARGIN_TOP + ph)
    );
    for (v, label) in xa.ticks() {
        let x = r3(px(v));
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b5}" stroke="black"/><text x="{x}" y="{ty}" text-anchor="middle">{label}</text>"#,
            b = r3(MARGIN_TOP + ph),
            b5 = r3(MARGIN_TOP + ph + 5.0),
            ty = r3(MARGIN_TOP + ph + 18.0),
        );
    }
    for (v, label) in ya.ticks() {
        let y = r3(py(v));
        let _ = writeln!(
            s,
            r#"<line x1="{l5}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/><text x="{tx}" y="{y}" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            l = r3(MARGIN_LEFT),
            l5 = r3(MARGIN_LEFT - 5.0),
            tx = r3(MARGIN_LEFT - 8.0),
        );
    }
    if zero_in_view {
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#999" stroke-width="0.5"/>"##,
            r3(MARGIN_LEFT),
            r3(MARGIN_LEFT + pw),
            y = r3(y0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        r3(MARGIN_LEFT + pw / 2.0),
        r3(h - 12.0),
        escape(&opts.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        r3(MARGIN_TOP + ph / 2.0),
        r3(MARGIN_TOP + ph / 2.0),
        escape(&opts.y_label)
    );
    if !opts.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            r3(w / 2.0),
            escape(&opts.title)
        );
    }

    for (i, (ser, pts)) in series.iter().zip(&cleaned).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", r3(px(x)), r3(py(y))))
            .collect();
        let coords = coords.join(" ");
        let clip = if opts.log_y {
            String::new()
        } else {
            r#" clip-path="url(#above)""#.to_string()
        };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{clip} points="{coords}"/>"#
        );
        if !opts.log_y && pts.iter().any(|p| p.1 < 0.0) {
            let mut d = String::new();
            for (k, c) in coords.split(' ').enumerate() {
                d.push_str(if k == 0 { "M" } else { " L" });
                d.push_str(c);
            }
            let _ = writeln!(
                s,
                r#"<path fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4" clip-path="url(#below)" d="{d}"/>"#
            );
        }
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let lx = MARGIN_LEFT + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
            r3(lx),
            r3(lx + 20.0),
            r3(lx + 26.0),
            escape(&ser.label),
            y = r3(ly)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// R(T) of a curve as a chart series, using only `ok` points.
pub fn curve_series(label: &str, points: &[CurvePoint]) -> Series {
    Series {
        label: label.to_string(),
        points: points
            .iter()
            .filter(|p| p.quality == crate::analysis::Quality::Ok)
            .map(|p| (p.t, p.scalar_r))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Quality;

    fn point(t: f64, r: f64, quality: Quality) -> CurvePoint {
        CurvePoint {
            t,
            theta: 1.0 / t,
            x: 2.0 / t,
            psi: 0.5,
            g11: 1.0,
            g12: 0.0,
            g22: 1.0,
            det_g: 1.0,
            r1212: 0.5 * r,
            scalar_r: r,
            scalar_r_contraction: r,
            quality,
        }
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-300, 6.02e23, -1.5e-5, 123456.789, 0.0, -0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(0.25), "0.25");
        assert_eq!(format_f64(3e-7), "3e-7");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let csv = curve_csv(&[
            point(0.5, 2.0, Quality::Ok),
            point(1.0, f64::NAN, Quality::Degenerate),
        ]);
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "0.5,2,4,0.5,1,0,1,1,1,2,ok");
        assert!(lines[2].ends_with(",NaN,degenerate"));
        assert_eq!(lines[3], "");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn svg_structure() {
        let pts: Vec<(f64, f64)> = (1..50).map(|i| (0.1 * i as f64, 1.0 - 0.1 * i as f64)).collect();
        let svg = render_svg(
            &[
                Series {
                    label: "a<b".into(),
                    points: pts.clone(),
                },
                Series {
                    label: "c".into(),
                    points: pts,
                },
            ],
            &SvgOptions::default(),
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("href"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_y_drops_non_positive_points() {
        let svg = render_svg(
            &[Series {
                label: "r".into(),
                points: vec![(0.1, 10.0), (1.0, -1.0), (10.0, 0.1)],
            }],
            &SvgOptions {
                log_y: true,
                ..Default::default()
            },
        );
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let n = poly.split("points=\"").nth(1).unwrap().split(' ').count();
        assert_eq!(n, 2);
        assert!(!svg.contains("dasharray"));
    }

    #[test]
    fn coordinates_have_at_most_three_decimals() {
        let svg = render_svg(
            &[Series {
                label: "r".into(),
                points: vec![(0.05, 1.0 / 3.0), (0.7, 2.0 / 7.0), (50.0, 1e-3)],
            }],
            &SvgOptions::default(),
        );
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = poly.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        for num in pts.split([' ', ',']) {
            let decimals = num.split('.').nth(1).map_or(0, str::len);
            assert!(decimals <= 3, "{num}");
        }
    }
}
