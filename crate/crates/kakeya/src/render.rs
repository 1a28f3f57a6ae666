//! Figure output. SVG is emitted by hand with a fixed attribute order and
//! exact-decimal coordinates, P5 rasters row by row; identical inputs give
//! identical bytes, which is what the golden-file tests diff against.

use crate::assembly::LineFamily;
use crate::grid::{CellSet, GridError};
use crate::rational::{decimal_fixed, int, rat, Rational};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Cap on drawn elements, not a geometry limit.
pub const MAX_RENDER_CELLS: usize = 1 << 17;
/// Fine grids denser than this are not drawn.
pub const MAX_GRID_LINES: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("refusing to draw {got} cells (cap {MAX_RENDER_CELLS})")]
    TooManyCells { got: usize },
    #[error("image size too small to draw")]
    BadSize,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One panel of a stage diagram: the cells, plus the exponent of the
/// coarser grid to overlay (its parent stage).
#[derive(Clone, Debug)]
pub struct StagePanel {
    pub cells: CellSet,
    pub coarse_exponent: u32,
}

fn px(v: &Rational) -> String {
    decimal_fixed(v, 2)
}

fn panel_pos(origin: i64, frac: &Rational, side: u32) -> String {
    px(&(int(origin) + frac * int(side as i64)))
}

/// Stage panels side by side, unit square each: cells filled dark, fine
/// grid in light gray, coarse overlay darker. Row 0 is at the bottom.
pub fn render_stage_panels(panels: &[StagePanel], side_px: u32) -> Result<String, RenderError> {
    if side_px < 2 {
        return Err(RenderError::BadSize);
    }
    let margin = 10i64;
    let side = side_px as i64;
    let w = margin + panels.len() as i64 * (side + margin);
    let h = side + 2 * margin;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    svg.push_str("<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    for (i, panel) in panels.iter().enumerate() {
        if panel.cells.len() > MAX_RENDER_CELLS {
            return Err(RenderError::TooManyCells { got: panel.cells.len() });
        }
        let x0 = margin + i as i64 * (side + margin);
        let y0 = margin;
        let width = panel.cells.scale().width();
        let step = |k: u64, w: u64| rat(k as i64, w as i64);
        for c in panel.cells.cells() {
            let x = panel_pos(x0, &step(c.col, width), side_px);
            let y = panel_pos(y0, &(int(1) - step(c.row + 1, width)), side_px);
            let s = px(&(int(side) * step(1, width)));
            let _ = write!(
                svg,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{s}\" height=\"{s}\" fill=\"#1a1a1a\"/>\n"
            );
        }
        for (exp_width, stroke, sw) in [
            (width, "#cccccc", "1"),
            (4u64.pow(panel.coarse_exponent), "#444444", "2"),
        ] {
            if exp_width > MAX_GRID_LINES || (exp_width == width && stroke == "#444444") {
                continue;
            }
            for k in 0..=exp_width {
                let p = panel_pos(x0, &step(k, exp_width), side_px);
                let (top, bot) = (y0.to_string(), (y0 + side).to_string());
                let _ = write!(
                    svg,
                    "<line x1=\"{p}\" y1=\"{top}\" x2=\"{p}\" y2=\"{bot}\" stroke=\"{stroke}\" stroke-width=\"{sw}\"/>\n"
                );
                let q = panel_pos(y0, &step(k, exp_width), side_px);
                let (left, right) = (x0.to_string(), (x0 + side).to_string());
                let _ = write!(
                    svg,
                    "<line x1=\"{left}\" y1=\"{q}\" x2=\"{right}\" y2=\"{q}\" stroke=\"{stroke}\" stroke-width=\"{sw}\"/>\n"
                );
            }
        }
        let _ = write!(
            svg,
            "<rect x=\"{x0}\" y=\"{y0}\" width=\"{side}\" height=\"{side}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n"
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[derive(Clone, Debug)]
pub struct FanOptions {
    pub width_px: u32,
    pub height_px: u32,
    pub max_cells: usize,
    /// Draw the horizontal slice plane at this height.
    pub slice_t: Option<Rational>,
}

impl Default for FanOptions {
    fn default() -> Self {
        Self { width_px: 640, height_px: 480, max_cells: 4096, slice_t: None }
    }
}

/// The line fan of a parameter family: every distinct cell corner (v, a)
/// contributes the segment from (a, 0) to (a + v, 1). t runs upward.
pub fn render_line_fan(cells: &CellSet, opts: &FanOptions) -> Result<String, RenderError> {
    if opts.width_px < 22 || opts.height_px < 22 {
        return Err(RenderError::BadSize);
    }
    if cells.len() > opts.max_cells || cells.len() > MAX_RENDER_CELLS {
        return Err(RenderError::TooManyCells { got: cells.len() });
    }
    let side = cells.scale().side();
    let mut corners: BTreeSet<(Rational, Rational)> = BTreeSet::new();
    for c in cells.cells() {
        for dv in 0..=1u64 {
            for da in 0..=1u64 {
                corners.insert((
                    Rational::from_integer((c.col + dv).into()) * &side,
                    Rational::from_integer((c.row + da).into()) * &side,
                ));
            }
        }
    }
    // x-extent of all segments over t in [0, 1], endpoints included.
    let mut x_lo: Option<Rational> = None;
    let mut x_hi: Option<Rational> = None;
    for (v, a) in &corners {
        for x in [a.clone(), a + v] {
            x_lo = Some(x_lo.map_or(x.clone(), |m| m.min(x.clone())));
            x_hi = Some(x_hi.map_or(x.clone(), |m| m.max(x)));
        }
    }
    let (x_lo, x_hi) = match (x_lo, x_hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => (int(0), int(1)),
    };
    let span = &x_hi - &x_lo;
    let pad = if span == int(0) { rat(1, 2) } else { &span * &rat(1, 20) };
    let x_lo = &x_lo - &pad;
    let full = (&x_hi + &pad) - &x_lo;
    let margin = 10i64;
    let w = opts.width_px as i64;
    let h = opts.height_px as i64;
    let plot_w = int(w - 2 * margin);
    let plot_h = h - 2 * margin;
    let to_x = |x: &Rational| px(&(int(margin) + (x - &x_lo) / &full * &plot_w));
    let to_y = |t: &Rational| panel_pos(margin, &(int(1) - t), plot_h as u32);
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    svg.push_str("<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    let (y0, y1) = (to_y(&int(0)), to_y(&int(1)));
    for (v, a) in &corners {
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y1}\" stroke=\"#1f3a6e\" stroke-width=\"0.8\" stroke-opacity=\"0.55\"/>\n",
            to_x(a),
            to_x(&(a + v)),
        );
    }
    if let Some(t) = &opts.slice_t {
        let y = to_y(t);
        let _ = write!(
            svg,
            "<line x1=\"{margin}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n",
            w - margin,
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        w - 2 * margin,
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Binary P5 raster of the union of lines: each pixel row is the slice at
/// its height (top row t = 1, bottom row t = 0), dark where covered.
pub fn render_slice_raster(cells: &CellSet, width: u32, height: u32) -> Result<Vec<u8>, RenderError> {
    if width < 2 || height < 2 {
        return Err(RenderError::BadSize);
    }
    if cells.len() > MAX_RENDER_CELLS {
        return Err(RenderError::TooManyCells { got: cells.len() });
    }
    let family = LineFamily::from_cells(cells.clone());
    // The slice endpoints are linear in t, so the hull of the t=0 and t=1
    // slices bounds every slice in between.
    let ends = family.slice(&int(0)).factor.union(&family.slice(&int(1)).factor);
    let (x_lo, x_hi) = match (ends.min(), ends.max()) {
        (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
        _ => (int(0), int(1)),
    };
    let span = &x_hi - &x_lo;
    let span = if span == int(0) { int(1) } else { span };
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    for j in 0..height {
        let t = rat((height - 1 - j) as i64, (height - 1) as i64);
        let slice = family.slice(&t).factor;
        let pieces = slice.pieces();
        let mut next = 0usize;
        for i in 0..width {
            let x = &x_lo + &span * rat(2 * i as i64 + 1, 2 * width as i64);
            while next < pieces.len() && pieces[next].1 < x {
                next += 1;
            }
            let covered = next < pieces.len() && pieces[next].0 <= x;
            out.push(if covered { 0 } else { 255 });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Scale};
    use crate::moran::build_rounds;
    use crate::sticky::four_corner_stage;

    #[test]
    fn stage_panels_are_deterministic_and_complete() {
        let state = build_rounds(1, 1).unwrap();
        let odd = state.cells().coarsen(1).unwrap();
        let panels = vec![
            StagePanel { cells: odd.clone(), coarse_exponent: 0 },
            StagePanel { cells: state.cells().clone(), coarse_exponent: 1 },
        ];
        let svg = render_stage_panels(&panels, 200).unwrap();
        assert_eq!(svg, render_stage_panels(&panels, 200).unwrap());
        assert_eq!(svg.matches("<rect").count(), 1 + 8 + 16 + 2);
        assert!(svg.starts_with("<svg xmlns"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(render_stage_panels(&panels, 1).is_err());
    }

    #[test]
    fn fans_draw_each_distinct_corner_once() {
        let one = CellSet::new(Scale::new(1).unwrap(), vec![Cell::new(2, 3)]).unwrap();
        let svg = render_line_fan(&one, &FanOptions::default()).unwrap();
        assert_eq!(svg.matches("<line").count(), 4);
        let fan = render_line_fan(
            &four_corner_stage(2).unwrap(),
            &FanOptions { slice_t: Some(rat(1, 2)), ..FanOptions::default() },
        )
        .unwrap();
        // 16 well-separated cells, 4 corners each, plus the slice plane.
        assert_eq!(fan.matches("<line").count(), 64 + 1);
        assert!(fan.contains("#c0392b"));
        let big = build_rounds(1, 2).unwrap();
        assert!(render_line_fan(
            big.cells(),
            &FanOptions { max_cells: 10, ..FanOptions::default() }
        )
        .is_err());
    }

    #[test]
    fn raster_rows_match_slice_membership() {
        let cells = four_corner_stage(1).unwrap();
        let (w, h) = (64u32, 33u32);
        let img = render_slice_raster(&cells, w, h).unwrap();
        let header = format!("P5\n{w} {h}\n255\n");
        assert!(img.starts_with(header.as_bytes()));
        assert_eq!(img.len(), header.len() + (w * h) as usize);
        let body = &img[header.len()..];
        // Top row is the slice at t=1, which for the four-corner family
        // is nonempty; every pixel is either 0 or 255.
        assert!(body.iter().all(|&b| b == 0 || b == 255));
        assert!(body[..w as usize].contains(&0));
        // Middle row: t = 1/2; compare a handful of pixels directly.
        let fam = LineFamily::from_cells(cells.clone());
        let ends = fam.slice(&int(0)).factor.union(&fam.slice(&int(1)).factor);
        let (lo, hi) = (ends.min().unwrap().clone(), ends.max().unwrap().clone());
        let span = &hi - &lo;
        let slice = fam.slice(&rat(1, 2)).factor;
        let row = &body[(w * (h / 2)) as usize..(w * (h / 2 + 1)) as usize];
        for i in [0u32, 13, 31, 32, 63] {
            let x = &lo + &span * rat(2 * i as i64 + 1, 2 * w as i64);
            assert_eq!(row[i as usize] == 0, slice.contains(&x), "i={i}");
        }
        assert!(render_slice_raster(&cells, 1, 5).is_err());
    }
}
