//! Deterministic chart rendering: canonical JSON or an SVG picture.
//!
//! Both formats are byte-stable: JSON object keys are emitted in sorted
//! order, and every SVG coordinate is written with six fixed decimals, so
//! rendering the same chart twice yields identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Chart, ChartError, SideRef};

/// Output format for [`render_chart`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Svg,
}

impl FromStr for RenderFormat {
    type Err = ChartError;

    fn from_str(s: &str) -> Result<Self, ChartError> {
        match s {
            "json" => Ok(RenderFormat::Json),
            "svg" => Ok(RenderFormat::Svg),
            other => Err(ChartError::UnsupportedFormat { format: other.to_string() }),
        }
    }
}

/// Render a chart to bytes in the requested format.
pub fn render_chart(chart: &Chart, format: RenderFormat) -> Vec<u8> {
    match format {
        RenderFormat::Json => {
            let mut out =
                serde_json::to_vec_pretty(&chart.to_json()).expect("chart JSON serializes");
            out.push(b'\n');
            out
        }
        RenderFormat::Svg => render_svg(chart).into_bytes(),
    }
}

/// Pixels per unit of transverse measure.
const SCALE: f64 = 600.0;
/// Canvas margin and inter-rectangle gap, in pixels.
const MARGIN: f64 = 40.0;
const GAP: f64 = 40.0;
/// Horizontal reach of the identification arcs, in pixels.
const ARC_REACH: f64 = 40.0;

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

/// Bottom-aligned row of rectangles with dotted identification arcs, thick
/// gray boundary segments, and one glyph per singular point class.
fn render_svg(chart: &Chart) -> String {
    let n = chart.rectangles.len();
    let mut x0 = vec![0.0f64; n];
    let mut x = MARGIN;
    let mut max_h = 0.0f64;
    for (i, r) in chart.rectangles.iter().enumerate() {
        x0[i] = x;
        x += r.width * SCALE;
        if i + 1 < n {
            x += GAP;
        }
        max_h = max_h.max(r.height * SCALE);
    }
    let width = x + MARGIN;
    let height = 2.0 * MARGIN + max_h;
    let y_bottom = MARGIN + max_h;

    // A point on a vertical side, `h` measured upward from the bottom.
    let side_point = |s: &SideRef, h: f64| -> (f64, f64) {
        let r = &chart.rectangles[s.strip.0];
        let px = if s.end == 0 { x0[s.strip.0] } else { x0[s.strip.0] + r.width * SCALE };
        (px, y_bottom - h * SCALE)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt6(width),
        fmt6(height),
        fmt6(width),
        fmt6(height)
    );
    let _ = writeln!(svg, "  <g font-family=\"monospace\" font-size=\"10\">");

    for (i, r) in chart.rectangles.iter().enumerate() {
        let w = r.width * SCALE;
        let h = r.height * SCALE;
        let _ = writeln!(
            svg,
            "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\"/>",
            fmt6(x0[i]),
            fmt6(y_bottom - h),
            fmt6(w),
            fmt6(h)
        );
        let _ = writeln!(
            svg,
            "    <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt6(x0[i] + w / 2.0),
            fmt6(y_bottom - h - 6.0),
            r.name
        );
    }

    for ident in &chart.identifications {
        let (ax, ay) = side_point(&ident.side, (ident.from + ident.to) / 2.0);
        let (bx, by) = side_point(&ident.partner_side, (ident.partner_from + ident.partner_to) / 2.0);
        let ac = if ident.side.end == 0 { ax - ARC_REACH } else { ax + ARC_REACH };
        let bc = if ident.partner_side.end == 0 { bx - ARC_REACH } else { bx + ARC_REACH };
        let _ = writeln!(
            svg,
            "    <path d=\"M {} {} C {} {}, {} {}, {} {}\" fill=\"none\" stroke=\"#555\" stroke-width=\"0.75\" stroke-dasharray=\"4 3\"/>",
            fmt6(ax),
            fmt6(ay),
            fmt6(ac),
            fmt6(ay),
            fmt6(bc),
            fmt6(by),
            fmt6(bx),
            fmt6(by)
        );
    }

    for seg in &chart.boundary_polygon {
        let (px, py0) = side_point(&seg.side, seg.from);
        let (_, py1) = side_point(&seg.side, seg.to);
        let _ = writeln!(
            svg,
            "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" stroke-width=\"4\" stroke-linecap=\"butt\"/>",
            fmt6(px),
            fmt6(py0),
            fmt6(px),
            fmt6(py1)
        );
    }

    for class in &chart.classes {
        if class.marked_orbit.is_none() && class.prongs == 2 && !class.open {
            continue;
        }
        let (strip, end, h) = class.anchor;
        let (px, py) = side_point(&SideRef { strip, end }, h);
        let colour = if class.marked_orbit.is_some() { "#c33" } else { "#333" };
        let _ = writeln!(
            svg,
            "    <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>",
            fmt6(px),
            fmt6(py),
            colour
        );
        let _ = writeln!(
            svg,
            "    <text x=\"{}\" y=\"{}\">{}</text>",
            fmt6(px + 5.0),
            fmt6(py - 5.0),
            class.prongs
        );
    }

    let _ = writeln!(svg, "  </g>");
    let _ = writeln!(svg, "</svg>");
    svg
}
