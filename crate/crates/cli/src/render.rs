//! Standalone SVG rendering of landscape and heatmap tables.
//!
//! Output depends only on the input table: coordinates are printed with a
//! fixed precision and elements are emitted in grid order.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{CliError, CliResult};
use crate::output::{parse_float, ReadTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RenderKind {
    /// `decohere` table on the `(γ, η)` plane.
    Heatmap,
    /// `landscape` table on the `(x, β)` plane with iso-lines.
    Contour,
}

impl RenderKind {
    fn schema(self) -> &'static str {
        match self {
            RenderKind::Heatmap => "decohere",
            RenderKind::Contour => "landscape",
        }
    }

    fn default_field(self) -> &'static str {
        match self {
            RenderKind::Heatmap => "f_eff",
            RenderKind::Contour => "trace",
        }
    }
}

const PLOT: (f64, f64, f64, f64) = (80.0, 50.0, 440.0, 440.0);
const CONTOUR_LEVELS: usize = 6;
const MISSING_FILL: &str = "#c8c8c8";
const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

/// Values on a rectangular grid; `values[i][j]` sits at `(xs[j], ys[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn render(table: &ReadTable, kind: RenderKind, field: Option<&str>, probe: Option<&str>) -> CliResult<String> {
    if table.kind != kind.schema() {
        return Err(CliError::Config(format!(
            "{kind:?} rendering needs a `{}` table, got `{}`",
            kind.schema(),
            table.kind
        )));
    }
    if table.rows.is_empty() {
        return Err(CliError::Config(format!("`{}` table has no data rows", table.kind)));
    }
    let field = field.unwrap_or(kind.default_field());
    match kind {
        RenderKind::Heatmap => {
            let probes = table.column("probe")?;
            let chosen = probe.map(str::to_string).unwrap_or_else(|| table.rows[0][probes].clone());
            let rows: Vec<&Vec<String>> = table.rows.iter().filter(|r| r[probes] == chosen).collect();
            if rows.is_empty() {
                return Err(CliError::Config(format!("no rows for probe `{chosen}`")));
            }
            let grid = collect(table, &rows, "gamma", "eta", field)?;
            Ok(svg(&grid, &format!("{chosen}: {field}"), "gamma", "eta", false))
        }
        RenderKind::Contour => {
            let rows: Vec<&Vec<String>> = table.rows.iter().collect();
            let grid = collect(table, &rows, "x", "beta", field)?;
            Ok(svg(&grid, field, "x", "beta", true))
        }
    }
}

fn collect(table: &ReadTable, rows: &[&Vec<String>], x: &str, y: &str, field: &str) -> CliResult<GridData> {
    let (ix, iy, iv) = (table.column(x)?, table.column(y)?, table.column(field)?);
    let num = |s: &str, name: &str| {
        parse_float(s).map_err(|_| CliError::Config(format!("`{name}` value `{s}` is not a number")))
    };
    let mut cells = BTreeMap::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        let (xv, yv, v) = (num(&r[ix], x)?, num(&r[iy], y)?, num(&r[iv], field)?);
        if !(xv.is_finite() && yv.is_finite()) {
            return Err(CliError::Config(format!("non-finite coordinate in `{x}`/`{y}`")));
        }
        xs.push(xv);
        ys.push(yv);
        cells.insert((yv.to_bits(), xv.to_bits()), v);
    }
    let uniq = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup();
    };
    uniq(&mut xs);
    uniq(&mut ys);
    if xs.len() * ys.len() < cells.len() || xs.is_empty() {
        return Err(CliError::Config("rows do not form a rectangular grid".into()));
    }
    let values = ys
        .iter()
        .map(|yv| {
            xs.iter()
                .map(|xv| cells.get(&(yv.to_bits(), xv.to_bits())).copied().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    Ok(GridData { xs, ys, values })
}

fn color(t: f64) -> String {
    let s = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let k = (s.floor() as usize).min(VIRIDIS.len() - 2);
    let f = s - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn label(v: f64) -> String {
    format!("{v:.3}")
}

pub fn svg(grid: &GridData, title: &str, x_label: &str, y_label: &str, contours: bool) -> String {
    let (left, top, w, h) = PLOT;
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let (cw, ch) = (w / nx as f64, h / ny as f64);
    let finite: Vec<f64> = grid.values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="560" viewBox="0 0 640 560" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="640" height="560" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="320" y="30" text-anchor="middle" font-size="15">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<g id="cells">"#);
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let fill = if v.is_finite() { color(norm(v)) } else { MISSING_FILL.to_string() };
            let _ = writeln!(
                s,
                r#"<rect class="cell" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                left + j as f64 * cw,
                top + h - (i + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(s, "</g>");

    if contours && finite.len() > 1 && hi > lo {
        let _ = writeln!(s, r#"<g id="contours" fill="none" stroke="white" stroke-width="1">"#);
        for k in 1..=CONTOUR_LEVELS {
            let level = lo + (hi - lo) * k as f64 / (CONTOUR_LEVELS + 1) as f64;
            let d = contour_path(grid, level, |j| left + (j + 0.5) * cw, |i| top + h - (i + 0.5) * ch);
            if !d.is_empty() {
                let _ = writeln!(s, r#"<path class="contour" data-level="{}" d="{d}"/>"#, label(level));
            }
        }
        let _ = writeln!(s, "</g>");
    }

    // Axes: frame, three ticks per axis, labels.
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    let ticks = |v: &[f64]| [v[0], v[v.len() / 2], v[v.len() - 1]];
    for (k, xv) in ticks(&grid.xs).iter().enumerate() {
        let j = [0, nx / 2, nx - 1][k];
        let px = left + (j as f64 + 0.5) * cw;
        let _ = writeln!(
            s,
            r#"<line x1="{px:.3}" y1="{:.3}" x2="{px:.3}" y2="{:.3}" stroke="black"/><text x="{px:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            top + h,
            top + h + 5.0,
            top + h + 20.0,
            label(*xv)
        );
    }
    for (k, yv) in ticks(&grid.ys).iter().enumerate() {
        let i = [0, ny / 2, ny - 1][k];
        let py = top + h - (i as f64 + 0.5) * ch;
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{py:.3}" x2="{left:.3}" y2="{py:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0,
            label(*yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        left + w / 2.0,
        top + h + 40.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.3}" text-anchor="middle" transform="rotate(-90 20 {:.3})">{}</text>"#,
        top + h / 2.0,
        top + h / 2.0,
        escape(y_label)
    );

    // Colour scale.
    let (bx, steps) = (left + w + 30.0, 32usize);
    let _ = writeln!(s, r#"<g id="scale">"#);
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let _ = writeln!(
            s,
            r#"<rect class="scale" x="{bx:.3}" y="{:.3}" width="20" height="{:.3}" fill="{}"/>"#,
            top + h - (k + 1) as f64 * h / steps as f64,
            h / steps as f64,
            color(t)
        );
    }
    let (lo_txt, hi_txt) = if finite.is_empty() { ("n/a".into(), "n/a".into()) } else { (label(lo), label(hi)) };
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{hi_txt}</text>"#, bx + 25.0, top + 10.0);
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{lo_txt}</text>"#, bx + 25.0, top + h);
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// Marching squares over the cell centres.
fn contour_path(grid: &GridData, level: f64, px: impl Fn(f64) -> f64, py: impl Fn(f64) -> f64) -> String {
    let mut d = String::new();
    let v = &grid.values;
    for i in 0..grid.ys.len().saturating_sub(1) {
        for j in 0..grid.xs.len().saturating_sub(1) {
            // Corners counter-clockwise from (i, j).
            let c = [(i, j), (i, j + 1), (i + 1, j + 1), (i + 1, j)];
            let z: Vec<f64> = c.iter().map(|&(a, b)| v[a][b]).collect();
            if z.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let mut pts = Vec::new();
            for e in 0..4 {
                let (a, b) = (e, (e + 1) % 4);
                if (z[a] >= level) != (z[b] >= level) {
                    let t = (level - z[a]) / (z[b] - z[a]);
                    let (ia, ja) = (c[a].0 as f64, c[a].1 as f64);
                    let (ib, jb) = (c[b].0 as f64, c[b].1 as f64);
                    pts.push((px(ja + t * (jb - ja)), py(ia + t * (ib - ia))));
                }
            }
            for pair in pts.chunks_exact(2) {
                let _ = write!(d, "M{:.3} {:.3}L{:.3} {:.3}", pair[0].0, pair[0].1, pair[1].0, pair[1].1);
            }
        }
    }
    d
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridData {
        GridData {
            xs: vec![0.0, 1.0, 2.0],
            ys: vec![0.0, 1.0],
            values: vec![vec![0.0, 1.0, 2.0], vec![1.0, 2.0, f64::NAN]],
        }
    }

    #[test]
    fn one_rect_per_cell() {
        let out = svg(&grid(), "t", "x", "y", true);
        assert_eq!(out.matches(r#"class="cell""#).count(), 6);
        assert!(out.contains(MISSING_FILL));
        assert_eq!(out, svg(&grid(), "t", "x", "y", true));
    }

    #[test]
    fn colour_map_ends() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
    }

    #[test]
    fn contour_crosses_between_centres() {
        let g = GridData {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            values: vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        };
        let d = contour_path(&g, 0.5, |j| j, |i| i);
        assert_eq!(d, "M0.500 0.000L0.500 1.000");
    }
}
