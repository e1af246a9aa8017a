//! SVG rendering of labelled grid regions.

use std::fmt::Write;

use roughlim::geometry::{Grid, GridRegion, Label};

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 40.0;
const LEGEND: f64 = 36.0;
const IN_FILL: &str = "#3465a4";
const HATCH: &str = "#e69f00";
const OVERLAY: &str = "#cc0000";

#[derive(Debug)]
pub struct PlotError(pub usize);

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cannot plot a {}-dimensional region (k ≤ 2)", self.0)
    }
}

/// Maximal runs `(row, start, end)` of consecutive cells along the last axis
/// whose label satisfies `keep`; `row` is the index along the first axis.
fn runs(region: &GridRegion, keep: impl Fn(Label) -> bool) -> Vec<(usize, usize, usize)> {
    let grid = region.grid();
    let (rows, cols) = match grid.shape() {
        [n] => (1, *n),
        [m, n] => (*m, *n),
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    for row in 0..rows {
        let mut start = None;
        for col in 0..=cols {
            let hit = col < cols && keep(region.label(row * cols + col));
            match (hit, start) {
                (true, None) => start = Some(col),
                (false, Some(s)) => {
                    out.push((row, s, col));
                    start = None;
                }
                _ => {}
            }
        }
    }
    out
}

struct Frame {
    lo: Vec<f64>,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(grid: &Grid) -> Self {
        let ext = grid.extent();
        let scale = (WIDTH - 2.0 * MARGIN) / ext.side(0);
        let height = match grid.dim() {
            1 => 2.0 * MARGIN + 60.0,
            _ => 2.0 * MARGIN + ext.side(1) * scale,
        };
        Frame {
            lo: ext.lo,
            scale,
            height,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo[0]) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        self.height - MARGIN - (v - self.lo[1]) * self.scale
    }
}

/// Cell-run rectangles. In 1-D the runs are drawn in the band `[top, top + thick]`.
fn rects(out: &mut String, region: &GridRegion, frame: &Frame, keep: impl Fn(Label) -> bool, fill: &str, top: f64, thick: f64) {
    let grid = region.grid();
    let h = grid.h();
    for (row, s, e) in runs(region, keep) {
        let (x, y, w, ht) = if grid.dim() == 1 {
            let a = grid.center(s)[0] - h / 2.0;
            (frame.x(a), top, (e - s) as f64 * h * frame.scale, thick)
        } else {
            let cols = grid.shape()[1];
            let c0 = grid.center(row * cols + s);
            let x = frame.x(c0[0] - h / 2.0);
            let y_top = frame.y(c0[1] - h / 2.0 + (e - s) as f64 * h);
            (x, y_top, h * frame.scale, (e - s) as f64 * h * frame.scale)
        };
        writeln!(
            out,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{ht:.3}" fill="{fill}"/>"#
        )
        .unwrap();
    }
}

/// In-cells filled, uncertain cells hatched, optional cluster-set overlay.
/// Output depends only on the inputs.
pub fn render_svg(region: &GridRegion, title: &str, overlay: Option<&GridRegion>) -> Result<String, PlotError> {
    let k = region.grid().dim();
    if k > 2 {
        return Err(PlotError(k));
    }
    if let Some(o) = overlay {
        if o.grid().dim() != k {
            return Err(PlotError(o.grid().dim()));
        }
    }
    let frame = Frame::new(region.grid());
    let height = frame.height + LEGEND;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.3}" viewBox="0 0 {WIDTH} {height:.3}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="{HATCH}" stroke-width="2"/></pattern></defs>"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    )
    .unwrap();

    let ext = region.grid().extent();
    let (x0, x1) = (frame.x(ext.lo[0]), frame.x(ext.hi[0]));
    if k == 1 {
        let mid = MARGIN + 30.0;
        writeln!(
            s,
            r##"<line x1="{x0:.3}" y1="{mid:.3}" x2="{x1:.3}" y2="{mid:.3}" stroke="#555"/>"##
        )
        .unwrap();
        rects(&mut s, region, &frame, |l| l == Label::In, IN_FILL, mid - 10.0, 20.0);
        rects(&mut s, region, &frame, |l| l == Label::Uncertain, "url(#hatch)", mid - 10.0, 20.0);
        if let Some(o) = overlay {
            rects(&mut s, o, &frame, |l| l == Label::In, OVERLAY, mid + 14.0, 6.0);
        }
        for (v, x) in [(ext.lo[0], x0), (ext.hi[0], x1)] {
            writeln!(
                s,
                r#"<text x="{x:.3}" y="{:.3}" font-family="sans-serif" font-size="11" text-anchor="middle">{v:.3}</text>"#,
                mid + 36.0
            )
            .unwrap();
        }
    } else {
        let (y0, y1) = (frame.y(ext.lo[1]), frame.y(ext.hi[1]));
        writeln!(
            s,
            r##"<rect x="{x0:.3}" y="{y1:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#555"/>"##,
            x1 - x0,
            y0 - y1
        )
        .unwrap();
        rects(&mut s, region, &frame, |l| l == Label::In, IN_FILL, 0.0, 0.0);
        rects(&mut s, region, &frame, |l| l == Label::Uncertain, "url(#hatch)", 0.0, 0.0);
        if let Some(o) = overlay {
            s.push_str(r#"<g opacity="0.6">"#);
            s.push('\n');
            rects(&mut s, o, &frame, |l| l == Label::In, OVERLAY, 0.0, 0.0);
            s.push_str("</g>\n");
        }
        writeln!(
            s,
            r#"<text x="{x0:.3}" y="{:.3}" font-family="sans-serif" font-size="11">({:.3}, {:.3}) to ({:.3}, {:.3})</text>"#,
            y0 + 14.0,
            ext.lo[0],
            ext.lo[1],
            ext.hi[0],
            ext.hi[1]
        )
        .unwrap();
    }

    let mut entries = vec![(IN_FILL, "in"), ("url(#hatch)", "uncertain")];
    if overlay.is_some() {
        entries.push((OVERLAY, "cluster set"));
    }
    let ly = height - LEGEND + 10.0;
    for (i, (fill, name)) in entries.iter().enumerate() {
        let lx = MARGIN + 120.0 * i as f64;
        writeln!(
            s,
            r##"<rect x="{lx:.3}" y="{ly:.3}" width="14" height="14" fill="{fill}" stroke="#555"/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{name}</text>"##,
            lx + 20.0,
            ly + 12.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
