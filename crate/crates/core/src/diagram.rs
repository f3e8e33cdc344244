//! Static SVG bifurcation diagrams: `λ` against `‖u − ũ0‖_{H¹}`.

use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One branch as `(λ, norm)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the `lambda` and `h1_norm` columns of a branch CSV.
pub fn read_branch_csv(path: &Path) -> Result<BranchCurve> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Contract(format!("cannot read branch CSV {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Contract(format!("{}: no '{name}' column", path.display())))
    };
    let (li, ni) = (col("lambda")?, col("h1_norm")?);
    let mut points = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::Contract(format!("{}: bad value on row {}", path.display(), row + 2)))
        };
        points.push((parse(li)?, parse(ni)?));
    }
    let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(BranchCurve { label, points })
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn marker(out: &mut String, kind: usize, x: f64, y: f64, color: &str) {
    let r = 3.5;
    let _ = match kind % 5 {
        0 => writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#),
        1 => writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{color}"/>"#, x - r, y - r, 2.0 * r, 2.0 * r),
        2 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            x, y - r, x - r, y + r, x + r, y + r
        ),
        3 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            x, y - r, x + r, y, x, y + r, x - r, y
        ),
        _ => writeln!(
            out,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            x - r, y - r, x + r, y + r, x - r, y + r, x + r, y - r
        ),
    };
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders branches over the trivial family (the zero line), with the
/// flagged `λ0` marked on it.
pub fn render_svg(branches: &[BranchCurve], flagged: &[f64]) -> String {
    let lambdas = branches.iter().flat_map(|b| b.points.iter().map(|p| p.0)).chain(flagged.iter().copied());
    let (mut lmin, mut lmax) = lambdas.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lmin.is_finite() {
        (lmin, lmax) = (-1.0, 1.0);
    }
    let (x0, x1) = nice_range(lmin, lmax);
    let nmax = branches.iter().flat_map(|b| b.points.iter().map(|p| p.1)).fold(0.0f64, f64::max);
    let (_, y1) = nice_range(0.0, if nmax > 0.0 { nmax } else { 1.0 });
    let y0 = 0.0;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // Axes.
    let (ax0, ax1, ay0, ay1) = (sx(x0), sx(x1), sy(y0), sy(y1));
    let _ = writeln!(out, r#"<g id="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}"/>"#);
    let _ = writeln!(out, r#"<line x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax0:.2}" y2="{ay1:.2}"/>"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{ay0:.2}" x2="{:.2}" y2="{:.2}"/>"#, sx(xv), sx(xv), ay0 + 5.0);
        let _ = writeln!(out, r#"<line x1="{ax0:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, sy(yv), ax0 - 5.0, sy(yv));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" stroke="none">{xv:.3}</text>"#,
            sx(xv),
            ay0 + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{yv:.3}</text>"#,
            ax0 - 8.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ</text>"#,
        (ax0 + ax1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">‖u − ũ0‖ (H¹)</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );
    // Trivial family.
    let _ = writeln!(
        out,
        r#"<line id="trivial" x1="{ax0:.2}" y1="{ay0:.2}" x2="{ax1:.2}" y2="{ay0:.2}" stroke="gray" stroke-width="3"/>"#
    );
    for l in flagged {
        let _ = writeln!(
            out,
            r#"<circle class="lambda0" cx="{:.2}" cy="{ay0:.2}" r="5" fill="none" stroke="black" stroke-width="1.5"/>"#,
            sx(*l)
        );
    }
    for (i, b) in branches.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(out, r#"<g class="branch" id="branch-{i}">"#);
        let pts: Vec<String> = b.points.iter().map(|(l, n)| format!("{:.2},{:.2}", sx(*l), sy(*n))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        let stride = (b.points.len() / 12).max(1);
        for (l, n) in b.points.iter().step_by(stride) {
            marker(&mut out, i, sx(*l), sy(*n), color);
        }
        let _ = writeln!(out, "</g>");
        // Legend entry.
        let ly = MARGIN + 18.0 * i as f64;
        marker(&mut out, i, WIDTH - MARGIN - 150.0, ly, color);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, WIDTH - MARGIN - 140.0, ly + 4.0, escape(&b.label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
