use super::{OutputFormat, RunnerError, SweepResult};
use std::fmt::Write;
use std::path::Path;

/// Shortest round-trip decimal, switching to exponent form for small or huge values.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `#`-prefixed config echo, then `axis,eta` rows. Numbers use the shortest
/// representation that round-trips.
pub fn render_csv(r: &SweepResult) -> String {
    let mut out = String::new();
    for line in r.metadata.config.to_toml().lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "# version = {}", r.metadata.version).unwrap();
    for (k, v) in &r.metadata.extras {
        writeln!(out, "# {k} = {}", format_number(*v)).unwrap();
    }
    writeln!(out, "{},{}", r.axis_label, r.eta_label).unwrap();
    for (x, y) in r.axis.iter().zip(&r.eta) {
        writeln!(out, "{},{}", format_number(*x), format_number(*y)).unwrap();
    }
    out
}

pub fn render_json(r: &SweepResult) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("results always serialise");
    s.push('\n');
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Polyline of the curve with a framed axis box and end-point labels.
pub fn render_svg(r: &SweepResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let (x0, x1) = bounds(&r.axis);
    let (y0, y1) = bounds(&r.eta);
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let points: Vec<String> =
        r.axis.iter().zip(&r.eta).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(out, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M)
        .unwrap();
    writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, points.join(" "))
        .unwrap();
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-size="12" text-anchor="{anchor}">{}</text>"#, escape(text))
            .unwrap();
    };
    label(&mut out, W / 2.0, H - 15.0, "middle", &r.axis_label);
    label(&mut out, M, H - M + 16.0, "start", &format!("{x0:.4e}"));
    label(&mut out, W - M, H - M + 16.0, "end", &format!("{x1:.4e}"));
    label(&mut out, M - 4.0, H - M, "end", &format!("{y0:.3e}"));
    label(&mut out, M - 4.0, M + 4.0, "end", &format!("{y1:.3e}"));
    label(&mut out, M, M - 10.0, "start", &format!("{} ({})", r.eta_label, r.metadata.config.experiment_name()));
    writeln!(out, "</svg>").unwrap();
    out
}

pub fn emit(r: &SweepResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(r),
        OutputFormat::Json => render_json(r),
        OutputFormat::Svg => render_svg(r),
    }
}

/// Write `r` to `path`, or to standard output when `path` is `None`.
pub fn write_output(r: &SweepResult, format: OutputFormat, path: Option<&Path>) -> Result<(), RunnerError> {
    let text = emit(r, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| RunnerError::Io { path: p.to_path_buf(), source }),
        None => {
            use std::io::Write as _;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| RunnerError::Io { path: "<stdout>".into(), source })
        }
    }
}
