//! Integer blocks, axis-aligned rectangles, slab vertices and finite graphs
//! combined by graph union.
//!
//! Rectangles are closed boxes: both endpoints of each block are included.
//! The graph union keeps exactly the edges of its parts and never adds an
//! edge between vertices that merely happen to be lattice neighbours.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::unionfind::DisjointSet;

pub type Coord = i64;

/// A finite run of consecutive integers `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub lo: Coord,
    pub hi: Coord,
}

impl Block {
    pub fn new(lo: Coord, hi: Coord) -> Self {
        assert!(lo <= hi, "empty block [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Block of `len` integers starting at `lo`.
    pub fn with_len(lo: Coord, len: Coord) -> Self {
        Self::new(lo, lo + len - 1)
    }

    #[allow(clippy::len_without_is_empty)] // blocks are never empty
    pub fn len(&self) -> Coord {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, x: Coord) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_block(&self, other: &Block) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `self ⊊ other`.
    pub fn is_proper_subset_of(&self, other: &Block) -> bool {
        other.contains_block(self) && self != other
    }

    pub fn intersect(&self, other: &Block) -> Option<Block> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Block { lo, hi })
    }

    pub fn iter(&self) -> impl Iterator<Item = Coord> {
        self.lo..=self.hi
    }

    pub fn shift(&self, by: Coord) -> Block {
        Block::new(self.lo + by, self.hi + by)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Vertical,
    Horizontal,
    Untagged,
}

impl Orientation {
    pub fn swapped(self) -> Self {
        match self {
            Orientation::Vertical => Orientation::Horizontal,
            Orientation::Horizontal => Orientation::Vertical,
            Orientation::Untagged => Orientation::Untagged,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Orientation::Vertical => 'V',
            Orientation::Horizontal => 'H',
            Orientation::Untagged => 'U',
        }
    }
}

/// `h × v`: `h` holds the columns, `v` the rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanarRect {
    pub h: Block,
    pub v: Block,
    pub orientation: Orientation,
}

impl PlanarRect {
    pub fn new(h: Block, v: Block) -> Self {
        Self {
            h,
            v,
            orientation: Orientation::Untagged,
        }
    }

    /// `[x0, x1] × [y0, y1]`, untagged.
    pub fn from_bounds(x0: Coord, x1: Coord, y0: Coord, y1: Coord) -> Self {
        Self::new(Block::new(x0, x1), Block::new(y0, y1))
    }

    pub fn tagged(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn width(&self) -> Coord {
        self.h.len()
    }

    pub fn height(&self) -> Coord {
        self.v.len()
    }

    pub fn area(&self) -> Coord {
        self.width() * self.height()
    }

    pub fn shorter_side(&self) -> Coord {
        self.width().min(self.height())
    }

    pub fn longer_side(&self) -> Coord {
        self.width().max(self.height())
    }

    pub fn contains(&self, x: Coord, y: Coord) -> bool {
        self.h.contains(x) && self.v.contains(y)
    }

    pub fn contains_rect(&self, other: &PlanarRect) -> bool {
        self.h.contains_block(&other.h) && self.v.contains_block(&other.v)
    }

    /// Untagged intersection, if nonempty.
    pub fn intersect(&self, other: &PlanarRect) -> Option<PlanarRect> {
        Some(PlanarRect::new(
            self.h.intersect(&other.h)?,
            self.v.intersect(&other.v)?,
        ))
    }

    pub fn is_disjoint(&self, other: &PlanarRect) -> bool {
        self.intersect(other).is_none()
    }

    pub fn points(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        self.v
            .iter()
            .flat_map(move |y| self.h.iter().map(move |x| (x, y)))
    }
}

impl fmt::Display for PlanarRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}×{}", self.h, self.v)
    }
}

/// Relation between two rectangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairClass {
    /// `h(Q) ⊊ h(R)` and `v(Q) ⊋ v(R)`.
    V2H,
    /// `v(Q) ⊊ v(R)` and `h(Q) ⊋ h(R)`.
    H2V,
    Disjoint,
    Other,
}

pub fn classify_pair(q: &PlanarRect, r: &PlanarRect) -> PairClass {
    if q.h.is_proper_subset_of(&r.h) && r.v.is_proper_subset_of(&q.v) {
        PairClass::V2H
    } else if q.v.is_proper_subset_of(&r.v) && r.h.is_proper_subset_of(&q.h) {
        PairClass::H2V
    } else if q.is_disjoint(r) {
        PairClass::Disjoint
    } else {
        PairClass::Other
    }
}

/// A vertex of the slab `Z² × {0, 1}`; layer 1 is the top layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlabVertex {
    pub x: Coord,
    pub y: Coord,
    pub layer: u8,
}

impl SlabVertex {
    pub fn new(x: Coord, y: Coord, layer: u8) -> Self {
        debug_assert!(layer <= 1, "layer must be 0 or 1");
        Self { x, y, layer }
    }

    pub fn top(x: Coord, y: Coord) -> Self {
        Self::new(x, y, 1)
    }

    pub fn bottom(x: Coord, y: Coord) -> Self {
        Self::new(x, y, 0)
    }

    pub fn planar(&self) -> (Coord, Coord) {
        (self.x, self.y)
    }

    /// Slab adjacency: unit step in the plane on one layer, or a layer switch.
    pub fn is_adjacent(&self, other: &SlabVertex) -> bool {
        let dx = (self.x - other.x).abs();
        let dy = (self.y - other.y).abs();
        if self.layer == other.layer {
            dx + dy == 1
        } else {
            dx == 0 && dy == 0
        }
    }

    pub fn neighbors(&self) -> [SlabVertex; 5] {
        let SlabVertex { x, y, layer } = *self;
        [
            SlabVertex::new(x + 1, y, layer),
            SlabVertex::new(x - 1, y, layer),
            SlabVertex::new(x, y + 1, layer),
            SlabVertex::new(x, y - 1, layer),
            SlabVertex::new(x, y, 1 - layer),
        ]
    }
}

pub type Edge = (SlabVertex, SlabVertex);

fn normalized(a: SlabVertex, b: SlabVertex) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Finite subgraph of the slab. Vertices and edges are kept sorted and
/// deduplicated so that equality is set equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteGraph {
    vertices: Vec<SlabVertex>,
    edges: Vec<Edge>,
}

impl FiniteGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a graph, sorting and deduplicating. Panics on self-loops,
    /// non-unit edges or edges with an endpoint outside the vertex set.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = SlabVertex>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        let mut vertices: Vec<_> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges: Vec<_> = edges
            .into_iter()
            .map(|(a, b)| {
                assert!(
                    a.is_adjacent(&b),
                    "edge {a:?}-{b:?} is not a unit slab edge"
                );
                normalized(a, b)
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let g = Self { vertices, edges };
        debug_assert!(g
            .edges
            .iter()
            .all(|(a, b)| g.contains_vertex(a) && g.contains_vertex(b)));
        g
    }

    /// Induced subgraph of the slab on `vertices`.
    pub fn induced(vertices: impl IntoIterator<Item = SlabVertex>) -> Self {
        let mut vs: Vec<_> = vertices.into_iter().collect();
        vs.sort_unstable();
        vs.dedup();
        let mut edges = Vec::new();
        for v in &vs {
            for u in [
                SlabVertex::new(v.x + 1, v.y, v.layer),
                SlabVertex::new(v.x, v.y + 1, v.layer),
                SlabVertex::new(v.x, v.y, 1),
            ] {
                if u != *v && u > *v && vs.binary_search(&u).is_ok() {
                    edges.push((*v, u));
                }
            }
        }
        edges.sort_unstable();
        Self {
            vertices: vs,
            edges,
        }
    }

    pub fn vertices(&self) -> &[SlabVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains_vertex(&self, v: &SlabVertex) -> bool {
        self.vertices.binary_search(v).is_ok()
    }

    pub fn has_edge(&self, a: SlabVertex, b: SlabVertex) -> bool {
        self.edges.binary_search(&normalized(a, b)).is_ok()
    }

    pub fn index_of(&self, v: &SlabVertex) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    /// Edges as index pairs into [`Self::vertices`].
    pub fn indexed_edges(&self) -> Vec<[u32; 2]> {
        self.edges
            .iter()
            .map(|(a, b)| {
                [
                    self.index_of(a).expect("edge endpoint") as u32,
                    self.index_of(b).expect("edge endpoint") as u32,
                ]
            })
            .collect()
    }

    /// Connected-component labels aligned with [`Self::vertices`].
    pub fn component_labels(&self) -> (Vec<u32>, usize) {
        let mut ds = DisjointSet::new(self.vertices.len());
        for [a, b] in self.indexed_edges() {
            ds.union(a as usize, b as usize);
        }
        ds.labels()
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().1
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Lattice-adjacent vertex pairs that the graph does not join: the edges
    /// a site-style induced graph would add on top of the graph union.
    pub fn missing_adjacencies(&self) -> Vec<Edge> {
        let induced = FiniteGraph::induced(self.vertices.iter().copied());
        induced
            .edges
            .into_iter()
            .filter(|e| self.edges.binary_search(e).is_err())
            .collect()
    }
}

/// `G[R × {layer}]`: all lattice points of `rect` on one layer with their
/// same-layer unit edges.
pub fn induced_rect_graph(rect: &PlanarRect, layer: u8) -> FiniteGraph {
    let mut vertices = Vec::with_capacity(rect.area() as usize);
    let mut edges = Vec::new();
    for (x, y) in rect.points() {
        let v = SlabVertex::new(x, y, layer);
        vertices.push(v);
        if x < rect.h.hi {
            edges.push((v, SlabVertex::new(x + 1, y, layer)));
        }
        if y < rect.v.hi {
            edges.push((v, SlabVertex::new(x, y + 1, layer)));
        }
    }
    FiniteGraph::from_parts(vertices, edges)
}

/// Graph union: union of vertex sets and of edge sets, nothing else.
pub fn graph_union<'a>(parts: impl IntoIterator<Item = &'a FiniteGraph>) -> FiniteGraph {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for g in parts {
        vertices.extend_from_slice(&g.vertices);
        edges.extend_from_slice(&g.edges);
    }
    vertices.sort_unstable();
    vertices.dedup();
    edges.sort_unstable();
    edges.dedup();
    FiniteGraph { vertices, edges }
}
