//! CSV and SVG emitters for per-model time series.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

pub const CSV_HEADER: &str = "t,model,population_norm,coherence_abs_norm,min_choi_eig,trace_dev";

/// One model's series on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSet {
    pub model: String,
    pub t: Vec<f64>,
    pub population_norm: Vec<f64>,
    pub coherence_abs_norm: Vec<f64>,
    pub min_choi_eig: Vec<f64>,
    pub trace_dev: Vec<f64>,
}

fn check_series(series: &[SeriesSet]) -> Result<(), CliError> {
    let first = series
        .first()
        .ok_or_else(|| CliError::Validation("no series to write (empty model list)".into()))?;
    for s in series {
        let n = s.t.len();
        if n == 0 {
            return Err(CliError::Validation(format!("series `{}` is empty", s.model)));
        }
        if s.t != first.t {
            return Err(CliError::Validation(format!(
                "series `{}` is not on the grid of `{}`",
                s.model, first.model
            )));
        }
        if [&s.population_norm, &s.coherence_abs_norm, &s.min_choi_eig, &s.trace_dev]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(CliError::Validation(format!("series `{}` has ragged columns", s.model)));
        }
    }
    Ok(())
}

/// `%.{digits}g`: fixed notation for moderate exponents, scientific otherwise,
/// trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The CSV document: rows sorted by model name, then time.
pub fn render_csv(series: &[SeriesSet]) -> Result<String, CliError> {
    check_series(series)?;
    let mut sorted: Vec<&SeriesSet> = series.iter().collect();
    sorted.sort_by(|a, b| a.model.cmp(&b.model));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in sorted {
        for i in 0..s.t.len() {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
                format_significant(s.t[i], 12),
                s.model,
                s.population_norm[i],
                s.coherence_abs_norm[i],
                s.min_choi_eig[i],
                s.trace_dev[i]
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

pub fn emit_csv(series: &[SeriesSet], path: &Path) -> Result<(), CliError> {
    let text = render_csv(series)?;
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Normalized excited population against time, one polyline per model.
pub fn render_svg(series: &[SeriesSet]) -> Result<String, CliError> {
    check_series(series)?;
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 150.0, 20.0, 50.0);
    let t = &series[0].t;
    let t_min = t[0];
    let t_max = t[t.len() - 1];
    let values = series.iter().flat_map(|s| s.population_norm.iter().copied());
    let (mut y_min, mut y_max) = values
        .filter(|v| v.is_finite())
        .fold((0.0f64, 1.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if y_max - y_min < 1e-12 {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
    let span_t = if t_max > t_min { t_max - t_min } else { 1.0 };
    let px = |x: f64| left + (x - t_min) / span_t * (w - left - right);
    let py = |y: f64| top + (y_max - y) / (y_max - y_min) * (h - top - bottom);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" style="fill:#ffffff"/>"#).unwrap();
    writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" style="fill:none;stroke:#444444;stroke-width:1"/>"#,
        w - left - right,
        h - top - bottom
    )
    .unwrap();
    for (y, label) in [(0.0, "0"), (1.0, "1")] {
        if y >= y_min && y <= y_max {
            writeln!(
                out,
                r#"<line x1="{left}" y1="{y0:.2}" x2="{x1}" y2="{y0:.2}" style="stroke:#bbbbbb;stroke-dasharray:4 3"/>"#,
                y0 = py(y),
                x1 = w - right
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{}" y="{:.2}" style="font-family:sans-serif;font-size:12px;text-anchor:end">{label}</text>"#,
                left - 6.0,
                py(y) + 4.0
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{}" style="font-family:sans-serif;font-size:12px;text-anchor:middle">t (0 to {})</text>"#,
        left + (w - left - right) / 2.0,
        h - 15.0,
        format_significant(t_max, 6)
    )
    .unwrap();
    let mut sorted: Vec<&SeriesSet> = series.iter().collect();
    sorted.sort_by(|a, b| a.model.cmp(&b.model));
    for (k, s) in sorted.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s
            .t
            .iter()
            .zip(&s.population_norm)
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" style="fill:none;stroke:{colour};stroke-width:1.5"/>"#,
            points.join(" ")
        )
        .unwrap();
        let ly = top + 16.0 * (k as f64 + 1.0);
        writeln!(
            out,
            r#"<text x="{}" y="{ly}" style="font-family:sans-serif;font-size:12px;fill:{colour}">{}</text>"#,
            w - right + 10.0,
            s.model
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(series: &[SeriesSet], path: &Path) -> Result<(), CliError> {
    let text = render_svg(series)?;
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
