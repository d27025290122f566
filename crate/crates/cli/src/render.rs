//! Deterministic SVG bar diagrams of depth-k covers.

use std::fmt::Write;

use ifs_core::system::touch_point;
use ifs_core::{Error, IFSystem, Result};

const WIDTH: f64 = 960.0;
const MARGIN: f64 = 20.0;
const ROW: f64 = 18.0;
const GAP: f64 = 10.0;
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
const BASE: &str = "#999999";

fn x(t: f64) -> f64 {
    MARGIN + t * WIDTH
}

/// One row per depth `0..=depth`; each cylinder hull is a rectangle colored
/// by its first symbol, and a vertical line marks the touch point.
pub fn render_svg(sys: &IFSystem, depth: usize, cap: usize) -> Result<String> {
    if depth > cap {
        return Err(Error::DepthCap { depth, cap });
    }
    let height = 2.0 * MARGIN + (depth + 1) as f64 * (ROW + GAP) - GAP;
    let mut svg = String::new();
    let w = |svg: &mut String, s: std::fmt::Arguments| svg.write_fmt(s).expect("string write");
    w(
        &mut svg,
        format_args!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
            WIDTH + 2.0 * MARGIN,
            height,
            WIDTH + 2.0 * MARGIN,
            height
        ),
    );
    for k in 0..=depth {
        let y = MARGIN + k as f64 * (ROW + GAP);
        w(&mut svg, format_args!("<g id=\"depth-{k}\">\n"));
        for (word, iv) in sys.cover_with_cap(k, cap)?.cells {
            let (lo, hi) = (iv.lo().to_f64(), iv.hi().to_f64());
            let fill = word.first().map_or(BASE, |s| PALETTE[(s as usize - 1) % PALETTE.len()]);
            w(
                &mut svg,
                format_args!(
                    "<rect x=\"{:.6}\" y=\"{y:.1}\" width=\"{:.6}\" height=\"{ROW:.1}\" fill=\"{fill}\"><title>{word}</title></rect>\n",
                    x(lo),
                    (hi - lo) * WIDTH
                ),
            );
        }
        w(&mut svg, format_args!("</g>\n"));
    }
    let hx = x(touch_point().to_f64());
    w(
        &mut svg,
        format_args!(
            "<line x1=\"{hx:.6}\" y1=\"{:.1}\" x2=\"{hx:.6}\" y2=\"{:.1}\" stroke=\"#000000\" stroke-width=\"1\" stroke-dasharray=\"3,2\"/>\n\
             <text x=\"{hx:.6}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">h = 8/15</text>\n",
            MARGIN / 2.0,
            height - MARGIN / 2.0,
            MARGIN / 2.0 + 1.0
        ),
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
