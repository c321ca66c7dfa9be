//! Plain SVG figures of grids, windows, catalogs and assemblies. Lattice
//! point `(x, y)` is drawn as a unit cell; `y` grows upward.

use std::fmt::Write;

use crate::geometry::PlanarRect;
use crate::gridgen::{fork_rects, GridInstance, GridParams, RectCatalog, Window};
use crate::slicing::SlabAssembly;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Pixels per lattice unit.
    pub scale: f64,
    pub margin: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            scale: 2.0,
            margin: 8.0,
        }
    }
}

struct Canvas {
    frame: PlanarRect,
    opts: RenderOptions,
    body: String,
}

impl Canvas {
    fn new(frame: PlanarRect, opts: RenderOptions) -> Self {
        Self {
            frame,
            opts,
            body: String::new(),
        }
    }

    fn place(&self, r: &PlanarRect) -> (f64, f64, f64, f64) {
        let s = self.opts.scale;
        let x = (r.h.lo - self.frame.h.lo) as f64 * s + self.opts.margin;
        let y = (self.frame.v.hi - r.v.hi) as f64 * s + self.opts.margin;
        (x, y, r.width() as f64 * s, r.height() as f64 * s)
    }

    fn rect(&mut self, r: &PlanarRect, style: &str) {
        let (x, y, w, h) = self.place(r);
        writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" {style}/>"#
        )
        .unwrap();
    }

    fn finish(self) -> String {
        let (_, _, w, h) = self.place(&self.frame);
        let (tw, th) = (w + 2.0 * self.opts.margin, h + 2.0 * self.opts.margin);
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{tw:.2}" height="{th:.2}" viewBox="0 0 {tw:.2} {th:.2}">"#
        )
        .unwrap();
        out.push_str(concat!(
            r#"<defs><pattern id="layer0" width="4" height="4" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
            r#"<rect width="4" height="4" fill="white"/><line x1="0" y1="0" x2="0" y2="4" stroke="black" stroke-width="1.5"/>"#,
            "</pattern></defs>\n"
        ));
        out.push_str(&self.body);
        let (x, y, w, h) = self.place(&self.frame);
        writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        )
        .unwrap();
        out.push_str("</svg>\n");
        out
    }
}

fn hue(k: u64) -> f64 {
    (k as f64 * 137.507_764) % 360.0
}

/// Strips of `grid` shaded, squares left white, over `area`.
pub fn render_grid(grid: &GridInstance, area: &PlanarRect, opts: RenderOptions) -> String {
    let mut c = Canvas::new(*area, opts);
    for x in area.h.iter().filter(|&x| grid.is_strip_column(x)) {
        c.rect(
            &PlanarRect::from_bounds(x, x, area.v.lo, area.v.hi),
            r##"fill="#9a9a9a""##,
        );
    }
    for y in area.v.iter().filter(|&y| grid.is_strip_row(y)) {
        c.rect(
            &PlanarRect::from_bounds(area.h.lo, area.h.hi, y, y),
            r##"fill="#9a9a9a""##,
        );
    }
    c.finish()
}

/// A window with its frames outlined and its fork filled.
pub fn render_window(window: &Window, params: &[GridParams], opts: RenderOptions) -> String {
    let fork = fork_rects(window, params);
    let frame = PlanarRect::from_bounds(
        window.square.h.lo,
        fork.extended_horizontal.h.hi,
        window.square.v.lo,
        window.square.v.hi,
    );
    let mut c = Canvas::new(frame, opts);
    for f in window.vframes.iter().chain(&window.hframes) {
        c.rect(f, r##"fill="#e6e6e6" stroke="#999" stroke-width="0.5""##);
    }
    for v in &fork.verticals {
        c.rect(v, r##"fill="#3b6fb6" fill-opacity="0.8""##);
    }
    c.rect(
        &fork.extended_horizontal,
        r##"fill="#c0392b" fill-opacity="0.8""##,
    );
    c.rect(
        &window.square,
        r#"fill="none" stroke="black" stroke-width="1""#,
    );
    c.finish()
}

/// One shape per catalog rectangle, coloured by level; clipped ones dashed.
pub fn render_catalog(catalog: &RectCatalog, opts: RenderOptions) -> String {
    let mut c = Canvas::new(catalog.viewport, opts);
    for e in &catalog.entries {
        let dash = if e.clipped {
            r#" stroke-dasharray="3,2""#
        } else {
            ""
        };
        let style = format!(
            r#"fill="hsl({:.1},65%,55%)" fill-opacity="0.7" stroke="black" stroke-width="0.3"{dash}"#,
            hue(e.level as u64 * 3)
        );
        c.rect(&e.rect, &style);
    }
    c.finish()
}

/// Slices coloured by assembly component; parts folded to layer 0 hatched.
pub fn render_assembly(assembly: &SlabAssembly, frame: &PlanarRect, opts: RenderOptions) -> String {
    let mut c = Canvas::new(*frame, opts);
    let comps = assembly.slice_components();
    for (f, comp) in assembly.folded.iter().zip(comps) {
        let style = format!(
            r#"fill="hsl({:.1},70%,50%)" fill-opacity="0.85""#,
            hue(comp as u64)
        );
        c.rect(&f.source.rect, &style);
        if let Some(sunk) = f.overlap {
            if f.top_boundary.is_empty() {
                continue;
            }
            c.rect(&sunk, r#"fill="url(#layer0)""#);
            if let Some(island) = f.island {
                c.rect(&island, &style);
            }
        }
    }
    c.finish()
}
