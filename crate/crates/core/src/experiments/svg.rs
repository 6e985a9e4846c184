//! Minimal self-contained SVG line plots of the error curves.

use std::fmt::Write;

use crate::experiments::fig1::Fig1Panel;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const TEST_COLOR: &str = "#1f4e9e";
const SIMPLE_COLOR: &str = "#c0392b";
const NESTED_COLOR: &str = "#1e8449";

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        // x runs from 0 (lambda_max) down to log10(min ratio); plot it
        // increasing to the right like the usual log-lambda axis.
        LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], color: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
        pts.join(" ")
    );
}

fn markers(out: &mut String, frame: &Frame, x: f64, y: f64, color: &str) {
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="3,3"/>"#,
        frame.py(frame.y_min),
        frame.py(frame.y_max),
        x = frame.px(x)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-dasharray="3,3"/>"#,
        frame.px(frame.x_min),
        frame.px(frame.x_max),
        y = frame.py(y)
    );
}

/// Test error (blue), simple-CV error (red) and nested-CV error (green)
/// against `log10(lambda / lambda_max)`. Dotted lines mark each curve's
/// minimizer and the test error reached there.
pub fn render_panel(panel: &Fig1Panel) -> String {
    let r = panel.lambdas.len();
    let xs: Vec<f64> = (0..r).map(|i| panel.lambda_ratio(i).log10()).collect();
    let mut all: Vec<f64> = panel
        .test_error
        .iter()
        .chain(&panel.cv_simple)
        .copied()
        .collect();
    if let Some(n) = &panel.cv_nested {
        all.extend(n);
    }
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.05).max(1e-9);
    let frame = Frame {
        x_min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
        x_max: 0.0,
        y_min: lo - pad,
        y_max: hi + pad,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        panel.label()
    );
    // axes
    let (x0, x1) = (frame.px(frame.x_min), frame.px(frame.x_max));
    let (y0, y1) = (frame.py(frame.y_min), frame.py(frame.y_max));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for t in 0..=4 {
        let y = frame.y_min + (frame.y_max - frame.y_min) * t as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            x0 - 6.0,
            frame.py(y) + 4.0
        );
    }
    let mut decade = frame.x_min.ceil();
    while decade <= 0.0 {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#,
            frame.px(decade),
            y0 + 18.0
        );
        decade += 1.0;
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">lambda / lambda_max</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">prediction error</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    polyline(&mut out, &frame, &xs, &panel.test_error, TEST_COLOR);
    polyline(&mut out, &frame, &xs, &panel.cv_simple, SIMPLE_COLOR);
    markers(
        &mut out,
        &frame,
        xs[panel.test_index],
        panel.test_error[panel.test_index],
        TEST_COLOR,
    );
    markers(
        &mut out,
        &frame,
        xs[panel.simple_index],
        panel.test_error[panel.simple_index],
        SIMPLE_COLOR,
    );
    if let (Some(nested), Some(idx)) = (&panel.cv_nested, panel.nested_index) {
        polyline(&mut out, &frame, &xs, nested, NESTED_COLOR);
        markers(
            &mut out,
            &frame,
            xs[idx],
            panel.test_error[idx],
            NESTED_COLOR,
        );
    }

    let legend = [
        ("test sample", TEST_COLOR, true),
        ("simple CV", SIMPLE_COLOR, true),
        ("nested CV", NESTED_COLOR, panel.cv_nested.is_some()),
    ];
    let mut ly = TOP + 10.0;
    for (name, color, shown) in legend {
        if !shown {
            continue;
        }
        let lx = WIDTH - RIGHT - 120.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
        ly += 16.0;
    }
    out.push_str("</svg>\n");
    out
}
