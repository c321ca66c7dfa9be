//! Random lattice symmetries: the eight elements of the dihedral group of
//! the square acting on a viewport, times an optional swap of the two slab
//! layers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Block, Coord, FiniteGraph, PlanarRect, SlabVertex};
use crate::gridgen::RectCatalog;
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub swap_axes: bool,
    pub flip_x: bool,
    pub flip_y: bool,
    pub swap_layers: bool,
}

impl SymmetryElement {
    pub const COUNT: usize = 16;

    pub fn identity() -> Self {
        Self::default()
    }

    /// Counter-clockwise quarter turn.
    pub fn rotation90() -> Self {
        Self {
            swap_axes: true,
            flip_x: true,
            ..Self::default()
        }
    }

    pub fn layer_swap() -> Self {
        Self {
            swap_layers: true,
            ..Self::default()
        }
    }

    pub fn from_index(k: usize) -> Self {
        assert!(k < Self::COUNT);
        Self {
            swap_axes: k & 1 != 0,
            flip_x: k & 2 != 0,
            flip_y: k & 4 != 0,
            swap_layers: k & 8 != 0,
        }
    }

    pub fn index(&self) -> usize {
        self.swap_axes as usize
            | (self.flip_x as usize) << 1
            | (self.flip_y as usize) << 2
            | (self.swap_layers as usize) << 3
    }

    /// Uniform over all sixteen elements.
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self::from_index(rng.random_range(0..Self::COUNT))
    }

    /// Image of the viewport: same lower-left corner, sides swapped if the
    /// element swaps axes.
    pub fn map_viewport(&self, vp: &PlanarRect) -> PlanarRect {
        if self.swap_axes {
            PlanarRect::new(
                Block::with_len(vp.h.lo, vp.height()),
                Block::with_len(vp.v.lo, vp.width()),
            )
        } else {
            *vp
        }
    }

    pub fn map_point(&self, vp: &PlanarRect, x: Coord, y: Coord) -> (Coord, Coord) {
        let (mut a, mut b) = (x - vp.h.lo, y - vp.v.lo);
        let (mut w, mut h) = (vp.width(), vp.height());
        if self.swap_axes {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut w, &mut h);
        }
        if self.flip_x {
            a = w - 1 - a;
        }
        if self.flip_y {
            b = h - 1 - b;
        }
        (vp.h.lo + a, vp.v.lo + b)
    }
}

pub trait Symmetric: Sized {
    fn transformed(&self, g: &SymmetryElement, vp: &PlanarRect) -> Self;
}

impl Symmetric for PlanarRect {
    fn transformed(&self, g: &SymmetryElement, vp: &PlanarRect) -> Self {
        let (x0, y0) = g.map_point(vp, self.h.lo, self.v.lo);
        let (x1, y1) = g.map_point(vp, self.h.hi, self.v.hi);
        let r = PlanarRect::from_bounds(x0.min(x1), x0.max(x1), y0.min(y1), y0.max(y1));
        let orientation = if g.swap_axes {
            self.orientation.swapped()
        } else {
            self.orientation
        };
        r.tagged(orientation)
    }
}

impl Symmetric for SlabVertex {
    fn transformed(&self, g: &SymmetryElement, vp: &PlanarRect) -> Self {
        let (x, y) = g.map_point(vp, self.x, self.y);
        let layer = if g.swap_layers {
            1 - self.layer
        } else {
            self.layer
        };
        SlabVertex::new(x, y, layer)
    }
}

impl Symmetric for FiniteGraph {
    fn transformed(&self, g: &SymmetryElement, vp: &PlanarRect) -> Self {
        FiniteGraph::from_parts(
            self.vertices().iter().map(|v| v.transformed(g, vp)),
            self.edges()
                .iter()
                .map(|(a, b)| (a.transformed(g, vp), b.transformed(g, vp))),
        )
    }
}

impl Symmetric for RectCatalog {
    /// Grids are left as sampled; entries, windows and the viewport move.
    fn transformed(&self, g: &SymmetryElement, vp: &PlanarRect) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.rect = e.rect.transformed(g, vp);
        }
        for w in &mut out.windows {
            w.square = w.square.transformed(g, vp);
            let vf: Vec<_> = w.vframes.iter().map(|r| r.transformed(g, vp)).collect();
            let hf: Vec<_> = w.hframes.iter().map(|r| r.transformed(g, vp)).collect();
            if g.swap_axes {
                w.vframes = hf;
                w.hframes = vf;
            } else {
                w.vframes = vf;
                w.hframes = hf;
            }
        }
        out.viewport = g.map_viewport(&self.viewport);
        out
    }
}

/// Applies a uniformly drawn symmetry; returns the image and the element.
pub fn randomize_symmetry<T: Symmetric>(
    obj: &T,
    vp: &PlanarRect,
    seed: u64,
) -> (T, SymmetryElement) {
    let mut rng = stream(seed, Purpose::Symmetry, 0);
    let g = SymmetryElement::sample(&mut rng);
    (obj.transformed(&g, vp), g)
}
