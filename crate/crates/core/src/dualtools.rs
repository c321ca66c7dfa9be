//! Planar duality on a primal box: dual configurations, the touching
//! relation between dual and primal clusters, and separation witnesses.
//!
//! Dual vertex `(a, b)` stands for the face centre `(a + ½, b + ½)`. A box
//! `[x0, x1] × [y0, y1]` has faces `[x0, x1 - 1] × [y0, y1 - 1]`; a primal
//! edge is interior when both faces beside it lie in the box. Edges along
//! the border have no dual inside the box and are left undefined.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{induced_rect_graph, Coord, Edge, FiniteGraph, PlanarRect, SlabVertex};
use crate::percolation::{label_clusters, BondConfig, ClusterLabeling};

pub type Point = (Coord, Coord);
/// Dual edge between two face coordinates, smaller endpoint first.
pub type DualEdge = (Point, Point);

/// The dual edge crossing a primal edge (ignoring the box).
pub fn dual_pair(e: (Point, Point)) -> DualEdge {
    let ((x, y), (u, w)) = if e.0 <= e.1 { e } else { (e.1, e.0) };
    if w == y {
        debug_assert_eq!(u, x + 1);
        ((x, y - 1), (x, y))
    } else {
        debug_assert_eq!(w, y + 1);
        ((x - 1, y), (x, y))
    }
}

/// The primal edge crossed by a dual edge.
pub fn primal_pair(f: DualEdge) -> (Point, Point) {
    let ((a, b), (c, d)) = if f.0 <= f.1 { f } else { (f.1, f.0) };
    if c == a {
        debug_assert_eq!(d, b + 1);
        ((a, b + 1), (a + 1, b + 1))
    } else {
        debug_assert_eq!(c, a + 1);
        ((a + 1, b), (a + 1, b + 1))
    }
}

fn planar(e: &Edge) -> (Point, Point) {
    (e.0.planar(), e.1.planar())
}

fn lift(f: DualEdge) -> Edge {
    (
        SlabVertex::bottom(f.0 .0, f.0 .1),
        SlabVertex::bottom(f.1 .0, f.1 .1),
    )
}

/// Faces of a primal box, if it has any.
pub fn face_box(viewport: &PlanarRect) -> Option<PlanarRect> {
    (viewport.width() >= 2 && viewport.height() >= 2).then(|| {
        PlanarRect::from_bounds(
            viewport.h.lo,
            viewport.h.hi - 1,
            viewport.v.lo,
            viewport.v.hi - 1,
        )
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualConfig {
    /// The primal box.
    pub viewport: PlanarRect,
    /// Dual lattice on the faces, drawn on layer 0.
    pub graph: FiniteGraph,
    /// Aligned with `graph.edges()`.
    pub open: Vec<bool>,
}

impl DualConfig {
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn is_open(&self, f: DualEdge) -> Option<bool> {
        self.graph
            .edges()
            .binary_search(&lift(f))
            .ok()
            .map(|k| self.open[k])
    }

    pub fn clusters(&self) -> ClusterLabeling {
        label_clusters(&BondConfig {
            graph: &self.graph,
            open: self.open.clone(),
            p: f64::NAN,
            seed: 0,
        })
    }

    pub fn open_edges(&self) -> impl Iterator<Item = DualEdge> + '_ {
        self.graph
            .edges()
            .iter()
            .zip(&self.open)
            .filter(|(_, &o)| o)
            .map(|(e, _)| planar(e))
    }
}

/// Bounding box of a configuration that lives on one full planar rectangle.
fn primal_box(config: &BondConfig<'_>) -> Result<PlanarRect> {
    let vs = config.graph.vertices();
    let Some(first) = vs.first() else {
        return Err(Error::NotPlanar);
    };
    if vs.iter().any(|v| v.layer != first.layer) {
        return Err(Error::NotPlanar);
    }
    let (xs, ys): (Vec<Coord>, Vec<Coord>) = vs.iter().map(|v| (v.x, v.y)).unzip();
    let rect = PlanarRect::from_bounds(
        *xs.iter().min().unwrap(),
        *xs.iter().max().unwrap(),
        *ys.iter().min().unwrap(),
        *ys.iter().max().unwrap(),
    );
    if *config.graph != induced_rect_graph(&rect, first.layer) {
        return Err(Error::NotPlanar);
    }
    Ok(rect)
}

/// Opens each interior dual edge iff its primal pair is closed.
pub fn dual_of_config(config: &BondConfig<'_>) -> Result<DualConfig> {
    let viewport = primal_box(config)?;
    let layer = config.graph.vertices()[0].layer;
    let graph = face_box(&viewport).map_or_else(FiniteGraph::empty, |f| induced_rect_graph(&f, 0));
    let open = graph
        .edges()
        .iter()
        .map(|f| {
            let (p, q) = primal_pair(planar(f));
            let e = (
                SlabVertex::new(p.0, p.1, layer),
                SlabVertex::new(q.0, q.1, layer),
            );
            let k = config
                .graph
                .edges()
                .binary_search(&e)
                .expect("interior primal edge");
            !config.open[k]
        })
        .collect();
    Ok(DualConfig {
        viewport,
        graph,
        open,
    })
}

/// Primal states recovered from the dual: `Some(open)` on interior edges of
/// `primal`, `None` on border edges.
pub fn primal_of_dual(dual: &DualConfig, primal: &FiniteGraph) -> Vec<Option<bool>> {
    primal
        .edges()
        .iter()
        .map(|e| dual.is_open(dual_pair(planar(e))).map(|o| !o))
        .collect()
}

/// Number of primal edges of the box that have a dual pair in it.
pub fn interior_pair_count(viewport: &PlanarRect) -> usize {
    face_box(viewport).map_or(0, |f| induced_rect_graph(&f, 0).edge_count())
}

/// Some dual vertex sits diagonally half a step from some primal vertex.
pub fn touches(dual_cluster: &[Point], primal_cluster: &[Point]) -> bool {
    let primal: HashSet<Point> = primal_cluster.iter().copied().collect();
    dual_cluster.iter().any(|&(a, b)| {
        [(a, b), (a + 1, b), (a, b + 1), (a + 1, b + 1)]
            .iter()
            .any(|p| primal.contains(p))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Dual of the first edge of a shortest primal path from `C₁` to `C₂`,
    /// when that edge is interior.
    pub start: Option<DualEdge>,
    /// Interior duals of the edge boundary of the `C₂` side.
    pub edges: Vec<DualEdge>,
    /// Connected pieces of `edges` (more than one when the interface runs
    /// along the border of the box).
    pub pieces: usize,
}

impl Witness {
    pub fn vertices(&self) -> Vec<Point> {
        let mut v: Vec<Point> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `d a1 b1 a2 b2` per dual edge.
    pub fn records(&self) -> String {
        let mut out =
            String::from("# d a1 b1 a2 b2 (face (a, b) is the point (a + 1/2, b + 1/2))\n");
        for ((a, b), (c, d)) in &self.edges {
            out.push_str(&format!("d {a} {b} {c} {d}\n"));
        }
        out
    }
}

/// A set of open dual edges separating the open cluster `c1` from the open
/// cluster `c2`: the duals of the edges leaving `U`, the component of `c2`
/// in the box once `c1` is removed. Every such edge joins `U` to `c1`, so it
/// is closed and its dual is open. `None` if the whole interface lies on the
/// border of the box.
pub fn separation_witness(
    c1: &[Point],
    c2: &[Point],
    config: &BondConfig<'_>,
) -> Result<Option<Witness>> {
    let viewport = primal_box(config)?;
    let a: HashSet<Point> = c1.iter().copied().collect();
    if c1.is_empty() || c2.is_empty() || c2.iter().any(|p| a.contains(p)) {
        return Err(Error::SameCluster);
    }
    let neighbours = |(x, y): Point| {
        [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            .into_iter()
            .filter(|&(u, w)| viewport.contains(u, w))
    };

    // U: lattice component of c2 avoiding c1
    let mut u: HashSet<Point> = HashSet::new();
    let mut queue: VecDeque<Point> = VecDeque::new();
    for &p in c2 {
        if u.insert(p) {
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        for q in neighbours(p) {
            if !a.contains(&q) && u.insert(q) {
                queue.push_back(q);
            }
        }
    }
    let mut boundary: Vec<DualEdge> = Vec::new();
    for &p in &u {
        for q in neighbours(p) {
            if !u.contains(&q) {
                let f = dual_pair((p, q));
                if face_box(&viewport)
                    .is_some_and(|fb| fb.contains(f.0 .0, f.0 .1) && fb.contains(f.1 .0, f.1 .1))
                {
                    boundary.push(f);
                }
            }
        }
    }
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.is_empty() {
        return Ok(None);
    }

    // first edge of a shortest lattice path from c1 to c2
    let target: HashSet<Point> = c2.iter().copied().collect();
    let mut prev: std::collections::HashMap<Point, Point> = std::collections::HashMap::new();
    let mut seen: HashSet<Point> = a.clone();
    let mut queue: VecDeque<Point> = c1.iter().copied().collect();
    let mut hit = None;
    while let Some(p) = queue.pop_front() {
        if target.contains(&p) {
            hit = Some(p);
            break;
        }
        for q in neighbours(p) {
            if seen.insert(q) {
                prev.insert(q, p);
                queue.push_back(q);
            }
        }
    }
    let start = hit.and_then(|mut p| {
        while let Some(&q) = prev.get(&p) {
            if a.contains(&q) {
                return Some(dual_pair((q, p)));
            }
            p = q;
        }
        None
    });
    let start = start.filter(|f| boundary.binary_search(f).is_ok());

    let g = FiniteGraph::from_parts(
        boundary.iter().flat_map(|&f| {
            let (p, q) = lift(f);
            [p, q]
        }),
        boundary.iter().map(|&f| lift(f)),
    );
    Ok(Some(Witness {
        start,
        pieces: g.component_count(),
        edges: boundary,
    }))
}

/// Approximate diagnostic: number of maximal runs of the box border that
/// the cluster occupies, walking the border once around.
pub fn boundary_arm_count(cluster: &[Point], viewport: &PlanarRect) -> usize {
    let set: HashSet<Point> = cluster.iter().copied().collect();
    let (x0, x1, y0, y1) = (viewport.h.lo, viewport.h.hi, viewport.v.lo, viewport.v.hi);
    let mut ring: Vec<Point> = (x0..=x1).map(|x| (x, y0)).collect();
    ring.extend((y0 + 1..=y1).map(|y| (x1, y)));
    if y1 > y0 {
        ring.extend((x0..x1).rev().map(|x| (x, y1)));
    }
    if x1 > x0 {
        ring.extend((y0 + 1..y1).rev().map(|y| (x0, y)));
    }
    let inside: Vec<bool> = ring.iter().map(|p| set.contains(p)).collect();
    if inside.iter().all(|&b| b) {
        return usize::from(!inside.is_empty());
    }
    (0..inside.len())
        .filter(|&k| inside[k] && !inside[(k + inside.len() - 1) % inside.len()])
        .count()
}
