//! Minimal SVG line chart of `P(tau)`.

use std::fmt::Write;

use crate::dynamics::Sample;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const P_MAX: f64 = 1.05;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("trajectory has no samples")]
    Empty,
    #[error("trajectory contains non-finite values")]
    NonFinite,
}

/// Round-number tick spacing giving roughly `target` intervals over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `P` against `tau`. The tau axis fits the data; the P axis is fixed to
/// `[0, 1.05]`. Output depends only on the inputs.
pub fn render_svg(samples: &[Sample], title: &str) -> Result<String, PlotError> {
    if samples.is_empty() {
        return Err(PlotError::Empty);
    }
    if samples.iter().any(|s| !s.tau.is_finite() || !s.p.is_finite()) {
        return Err(PlotError::NonFinite);
    }
    let t0 = samples.iter().map(|s| s.tau).fold(f64::INFINITY, f64::min);
    let mut t1 = samples.iter().map(|s| s.tau).fold(f64::NEG_INFINITY, f64::max);
    if t1 <= t0 {
        t1 = t0 + 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |t: f64| MARGIN_LEFT + (t - t0) / (t1 - t0) * plot_w;
    let y = |p: f64| MARGIN_TOP + (1.0 - p.clamp(0.0, P_MAX) / P_MAX) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    let step = tick_step(t1 - t0, 8.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (t0 / step).ceil() as i64;
    let last = (t1 / step + 1e-9).floor() as i64;
    for k in first..=last {
        let t = k as f64 * step;
        let xt = x(t);
        let _ = writeln!(svg, r##"<line x1="{xt:.2}" y1="{:.2}" x2="{xt:.2}" y2="{:.2}" stroke="#ddd"/>"##, MARGIN_TOP, MARGIN_TOP + plot_h);
        let _ = writeln!(svg, r#"<text x="{xt:.2}" y="{:.2}" text-anchor="middle">{t:.decimals$}</text>"#, MARGIN_TOP + plot_h + 16.0);
    }
    for k in 0..=5 {
        let p = 0.2 * k as f64;
        let yp = y(p);
        let _ = writeln!(svg, r##"<line x1="{MARGIN_LEFT}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="#ddd"/>"##, MARGIN_LEFT + plot_w);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"#, MARGIN_LEFT - 6.0, yp + 4.0);
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">τ</text>"#, MARGIN_LEFT + plot_w / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">P(τ)</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );

    svg.push_str(r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points=""##);
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            svg.push(' ');
        }
        let _ = write!(svg, "{:.2},{:.2}", x(s.tau), y(s.p));
    }
    svg.push_str("\"/>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample(tau: f64, p: f64) -> Sample {
        Sample { tau, s: Complex64::new(1.0, 0.0), i: Complex64::new(0.0, 0.0), p }
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(render_svg(&[], "x"), Err(PlotError::Empty));
    }

    #[test]
    fn deterministic_and_clamped() {
        let s: Vec<Sample> = (0..50).map(|k| sample(k as f64 - 25.0, (k as f64 / 49.0).powi(2))).collect();
        let a = render_svg(&s, "a < b").unwrap();
        assert_eq!(a, render_svg(&s, "a < b").unwrap());
        assert!(a.contains("a &lt; b"));
        assert!(a.contains(">1.0</text>"));
        assert!(!a.contains(">1.2</text>"));
        let over = render_svg(&[sample(0.0, 3.0), sample(1.0, -1.0)], "").unwrap();
        let y_top = MARGIN_TOP;
        assert!(over.contains(&format!("{:.2},{:.2}", MARGIN_LEFT, y_top)));
    }

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(80.0, 8.0), 10.0);
        assert_eq!(tick_step(250.0, 8.0), 50.0);
        assert_eq!(tick_step(1.0, 8.0), 0.1);
    }
}
