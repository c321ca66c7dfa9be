//! Balanced cuts, slices, the folding map and assembly of the folded
//! process on the slab, plus the pairwise overlap audit.
//!
//! Folding a slice `S` against the rectangle `N` that follows its owner:
//! with `R = S ∩ N` and `B` the slice of `N` that `S` is injected into, the
//! indicator is 0 exactly on `R \ B`. Those vertices drop to layer 0, the
//! rest stay on layer 1. The top boundary (indicator 1 next to a 0) is
//! doubled onto both layers and the layer-0 copies of both boundaries are
//! joined, which gives the detour under the non-`B` part of `N`.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    graph_union, induced_rect_graph, Block, Coord, FiniteGraph, Orientation, PlanarRect, SlabVertex,
};
use crate::gridgen::RectCatalog;
use crate::rng::{stream, Purpose};
use crate::tree::{build_abstract_forest, has_full_chain, AbstractForest, RectTree};

/// Partition of `b` into `m` consecutive blocks whose sizes differ by at
/// most one; which blocks get the extra element is uniform.
pub fn balanced_cut<R: Rng>(b: &Block, m: usize, rng: &mut R) -> Result<Vec<Block>> {
    let len = b.len();
    if m == 0 || m as Coord > len {
        return Err(Error::CutTooFine { len, m });
    }
    let q = len / m as Coord;
    let r = (len % m as Coord) as usize;
    let mut sizes = vec![q; m];
    // first r positions of a random permutation get the extra element
    let mut idx: Vec<usize> = (0..m).collect();
    for k in 0..r {
        let pick = rng.random_range(k..m);
        idx.swap(k, pick);
        sizes[idx[k]] += 1;
    }
    let mut lo = b.lo;
    Ok(sizes
        .into_iter()
        .map(|s| {
            let blk = Block::with_len(lo, s);
            lo += s;
            blk
        })
        .collect())
}

/// Cuts a vertical rectangle into vertical slices and a horizontal one into
/// horizontal slices. Any actual cut (`m ≥ 2`) must leave slices whose
/// cut side is at least 3.
pub fn cut_rect<R: Rng>(rect: &PlanarRect, m: usize, rng: &mut R) -> Result<Vec<PlanarRect>> {
    if m == 1 {
        return Ok(vec![*rect]);
    }
    let side = match rect.orientation {
        Orientation::Vertical => rect.h,
        Orientation::Horizontal => rect.v,
        Orientation::Untagged => {
            return Err(Error::InvalidParams(format!("cannot cut untagged {rect}")))
        }
    };
    if m == 0 || side.len() < 3 * m as Coord {
        return Err(Error::SliceTooThin {
            rect: rect.to_string(),
            m,
        });
    }
    let blocks = balanced_cut(&side, m, rng)?;
    Ok(blocks
        .into_iter()
        .map(|c| {
            match rect.orientation {
                Orientation::Vertical => PlanarRect::new(c, rect.v),
                _ => PlanarRect::new(rect.h, c),
            }
            .tagged(rect.orientation)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub rect: PlanarRect,
    /// Catalog entry the slice was cut from.
    pub owner: usize,
    /// Position within the owner's bag.
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedSlice {
    pub source: Slice,
    pub graph: FiniteGraph,
    /// `S ∩ N`, if nonempty.
    pub overlap: Option<PlanarRect>,
    /// `S ∩ B`, the part of the overlap that stays on top.
    pub island: Option<PlanarRect>,
    pub top_boundary: Vec<(Coord, Coord)>,
    pub bottom_boundary: Vec<(Coord, Coord)>,
}

impl FoldedSlice {
    /// Layer-1 copy of the slice.
    pub fn lift(source: Slice) -> Self {
        Self {
            graph: induced_rect_graph(&source.rect, 1),
            source,
            overlap: None,
            island: None,
            top_boundary: Vec::new(),
            bottom_boundary: Vec::new(),
        }
    }

    pub fn indicator(&self, x: Coord, y: Coord) -> u8 {
        debug_assert!(self.source.rect.contains(x, y));
        let sunk = self.overlap.is_some_and(|r| r.contains(x, y))
            && !self.island.is_some_and(|b| b.contains(x, y));
        u8::from(!sunk)
    }

    /// Images of the two short sides of the slice (bottom/top rows of a
    /// vertical slice, left/right columns of a horizontal one).
    pub fn end_sets(&self) -> (Vec<SlabVertex>, Vec<SlabVertex>) {
        let r = &self.source.rect;
        let lift = |x, y| SlabVertex::new(x, y, self.indicator(x, y));
        if r.orientation == Orientation::Horizontal {
            (
                r.v.iter().map(|y| lift(r.h.lo, y)).collect(),
                r.v.iter().map(|y| lift(r.h.hi, y)).collect(),
            )
        } else {
            (
                r.h.iter().map(|x| lift(x, r.v.lo)).collect(),
                r.h.iter().map(|x| lift(x, r.v.hi)).collect(),
            )
        }
    }
}

/// Folds `slice` against `next_rect` so that only `beta` (a slice of
/// `next_rect`) is met on the top layer.
pub fn fold_slice(slice: &Slice, next_rect: &PlanarRect, beta: &Slice) -> Result<FoldedSlice> {
    if !next_rect.contains_rect(&beta.rect) {
        return Err(Error::Fold {
            slice: slice.slot,
            reason: format!("beta slice {} is not inside {}", beta.rect, next_rect),
        });
    }
    let s = slice.rect;
    let Some(overlap) = s.intersect(next_rect) else {
        return Ok(FoldedSlice::lift(*slice));
    };
    let island = s.intersect(&beta.rect);
    if island == Some(overlap) {
        let mut f = FoldedSlice::lift(*slice);
        f.overlap = Some(overlap);
        f.island = island;
        return Ok(f);
    }
    let mut folded = FoldedSlice {
        source: *slice,
        graph: FiniteGraph::empty(),
        overlap: Some(overlap),
        island,
        top_boundary: Vec::new(),
        bottom_boundary: Vec::new(),
    };
    let ind = |x, y| folded.indicator(x, y);
    let mut placed = Vec::with_capacity(s.area() as usize);
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for (x, y) in s.points() {
        let i = ind(x, y);
        placed.push(SlabVertex::new(x, y, i));
        let differs = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            .into_iter()
            .any(|(u, w)| s.contains(u, w) && ind(u, w) != i);
        if differs {
            if i == 1 {
                top.push((x, y));
            } else {
                bottom.push((x, y));
            }
        }
    }
    let layered = FiniteGraph::induced(placed);
    let doubled = FiniteGraph::induced(
        top.iter()
            .flat_map(|&(x, y)| [SlabVertex::bottom(x, y), SlabVertex::top(x, y)]),
    );
    let seam = FiniteGraph::induced(
        top.iter()
            .chain(bottom.iter())
            .map(|&(x, y)| SlabVertex::bottom(x, y)),
    );
    folded.graph = graph_union([&layered, &doubled, &seam]);
    top.sort_unstable();
    bottom.sort_unstable();
    folded.top_boundary = top;
    folded.bottom_boundary = bottom;
    Ok(folded)
}

#[derive(Clone, Debug)]
pub struct SlabAssembly {
    /// Folded slice per forest slot; index = slot id.
    pub folded: Vec<FoldedSlice>,
    pub forest: AbstractForest,
    pub graph: FiniteGraph,
    /// Component id per vertex of `graph`.
    pub labels: Vec<u32>,
    pub component_count: usize,
    /// Slots whose owner has an unclipped chain to the top level.
    pub full_chain: Vec<bool>,
}

impl SlabAssembly {
    pub fn slice_count(&self) -> usize {
        self.folded.len()
    }

    pub fn component_of_vertex(&self, v: &SlabVertex) -> Option<u32> {
        self.graph.index_of(v).map(|k| self.labels[k])
    }

    /// Component id of each slice (every folded slice is connected).
    pub fn slice_components(&self) -> Vec<u32> {
        self.folded
            .iter()
            .map(|f| {
                let v = f.graph.vertices()[0];
                self.component_of_vertex(&v)
                    .expect("slice vertex in assembly")
            })
            .collect()
    }

    /// Distinct assembly components among `slots`.
    pub fn components_among(&self, slots: impl IntoIterator<Item = usize>) -> usize {
        let comp = self.slice_components();
        let mut seen: Vec<u32> = slots.into_iter().map(|s| comp[s]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn full_chain_slots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.folded.len()).filter(|&s| self.full_chain[s])
    }

    /// Vertex records `v x y layer slice component` followed by edge records
    /// `e x1 y1 layer1 x2 y2 layer2`.
    pub fn records(&self) -> String {
        let mut out = String::from("# v x y layer slice component\n");
        for (slot, f) in self.folded.iter().enumerate() {
            for v in f.graph.vertices() {
                let c = self.component_of_vertex(v).unwrap();
                out.push_str(&format!("v {} {} {} {} {}\n", v.x, v.y, v.layer, slot, c));
            }
        }
        out.push_str("# e x1 y1 layer1 x2 y2 layer2\n");
        for (a, b) in self.graph.edges() {
            out.push_str(&format!(
                "e {} {} {} {} {} {}\n",
                a.x, a.y, a.layer, b.x, b.y, b.layer
            ));
        }
        out
    }
}

/// `next` restricted to unclipped entries: a link into a clipped entry (or
/// out of one) is dropped.
pub fn effective_next(catalog: &RectCatalog, tree: &RectTree) -> Vec<Option<usize>> {
    tree.next
        .iter()
        .enumerate()
        .map(|(v, p)| p.filter(|&p| !catalog.entries[p].clipped && !catalog.entries[v].clipped))
        .collect()
}

/// Cuts every unclipped rectangle into `m[j]` slices, samples β, folds each
/// slice against its image and takes the graph union.
pub fn assemble_phi(
    catalog: &RectCatalog,
    tree: &RectTree,
    m: &[usize],
    seed: u64,
) -> Result<SlabAssembly> {
    let next = effective_next(catalog, tree);
    let mut bag_sizes = Vec::with_capacity(catalog.len());
    for e in &catalog.entries {
        let size = if e.clipped {
            0
        } else {
            *m.get(e.j).ok_or_else(|| {
                Error::InvalidParams(format!("no slice count for index j = {}", e.j))
            })?
        };
        bag_sizes.push(size);
    }
    let forest = build_abstract_forest(&next, &bag_sizes, seed)?;

    let cuts: Vec<Vec<PlanarRect>> = catalog
        .entries
        .par_iter()
        .map(|e| {
            if e.clipped {
                return Ok(Vec::new());
            }
            let mut rng = stream(seed, Purpose::Cuts, e.id as u64);
            cut_rect(&e.rect, bag_sizes[e.id], &mut rng)
        })
        .collect::<Result<_>>()?;

    let slices: Vec<Slice> = (0..forest.slot_count())
        .map(|s| {
            let owner = forest.owner[s];
            let slot = forest.position(s);
            Slice {
                rect: cuts[owner][slot],
                owner,
                slot,
            }
        })
        .collect();

    let folded: Vec<FoldedSlice> = (0..slices.len())
        .into_par_iter()
        .map(|s| match forest.beta[s] {
            Some(t) => {
                let next_rect = catalog.entries[slices[t].owner].rect;
                fold_slice(&slices[s], &next_rect, &slices[t]).map_err(|e| match e {
                    Error::Fold { reason, .. } => Error::Fold { slice: s, reason },
                    other => other,
                })
            }
            None => Ok(FoldedSlice::lift(slices[s])),
        })
        .collect::<Result<_>>()?;

    let graph = graph_union(folded.iter().map(|f| &f.graph));
    let (labels, component_count) = graph.component_labels();
    let chain: Vec<bool> = (0..catalog.len())
        .map(|v| has_full_chain(tree, catalog, v))
        .collect();
    let full_chain = forest.owner.iter().map(|&o| chain[o]).collect();
    Ok(SlabAssembly {
        folded,
        forest,
        graph,
        labels,
        component_count,
        full_chain,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapViolation {
    pub a: usize,
    pub b: usize,
    /// Vertices in the symmetric difference of the actual and the allowed
    /// intersection.
    pub offending: Vec<SlabVertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub violations: Vec<OverlapViolation>,
}

/// Two folded slices may share vertices only if one is the β-image of the
/// other, and then they share exactly the top-layer copy of `S₁ ∩ S₂`.
pub fn overlap_audit(folded: &[FoldedSlice], beta: &[Option<usize>]) -> OverlapReport {
    let mut owners: HashMap<SlabVertex, Vec<u32>> = HashMap::new();
    for (s, f) in folded.iter().enumerate() {
        for v in f.graph.vertices() {
            owners.entry(*v).or_default().push(s as u32);
        }
    }
    let mut shared: HashMap<(usize, usize), Vec<SlabVertex>> = HashMap::new();
    for (v, list) in &owners {
        for (k, &a) in list.iter().enumerate() {
            for &b in &list[k + 1..] {
                let key = (a.min(b) as usize, a.max(b) as usize);
                shared.entry(key).or_default().push(*v);
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = shared.keys().copied().collect();
    for (s, t) in beta.iter().enumerate() {
        if let Some(t) = *t {
            pairs.push((s.min(t), s.max(t)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let mut violations = Vec::new();
    for &(a, b) in &pairs {
        let mut actual = shared.remove(&(a, b)).unwrap_or_default();
        actual.sort_unstable();
        let linked = beta[a] == Some(b) || beta[b] == Some(a);
        let mut allowed: Vec<SlabVertex> = if linked {
            folded[a]
                .source
                .rect
                .intersect(&folded[b].source.rect)
                .map(|r| r.points().map(|(x, y)| SlabVertex::top(x, y)).collect())
                .unwrap_or_default()
        } else {
            Vec::new()
        };
        allowed.sort_unstable();
        let nonempty_link = !linked || !actual.is_empty();
        if actual != allowed || !nonempty_link {
            let mut offending: Vec<SlabVertex> = actual
                .iter()
                .filter(|v| allowed.binary_search(v).is_err())
                .chain(allowed.iter().filter(|v| actual.binary_search(v).is_err()))
                .copied()
                .collect();
            offending.sort_unstable();
            violations.push(OverlapViolation { a, b, offending });
        }
    }
    OverlapReport {
        pass: violations.is_empty(),
        pairs_checked: pairs.len(),
        violations,
    }
}

impl SlabAssembly {
    pub fn audit(&self) -> OverlapReport {
        overlap_audit(&self.folded, &self.forest.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    fn sizes(blocks: &[Block]) -> Vec<Coord> {
        let mut s: Vec<_> = blocks.iter().map(Block::len).collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn balanced_cut_examples() {
        let b = Block::new(0, 6);
        assert_eq!(
            sizes(&balanced_cut(&b, 3, &mut rng()).unwrap()),
            vec![2, 2, 3]
        );
        assert_eq!(
            sizes(&balanced_cut(&Block::new(0, 5), 3, &mut rng()).unwrap()),
            vec![2, 2, 2]
        );
        assert_eq!(balanced_cut(&b, 1, &mut rng()).unwrap(), vec![b]);
        assert!(balanced_cut(&b, 8, &mut rng()).is_err());
    }

    #[test]
    fn balanced_cut_extra_position_is_uniform() {
        let b = Block::new(0, 6);
        let mut counts = [0usize; 3];
        let mut r = rng();
        for _ in 0..3000 {
            let cut = balanced_cut(&b, 3, &mut r).unwrap();
            let k = cut.iter().position(|c| c.len() == 3).unwrap();
            counts[k] += 1;
        }
        for c in counts {
            assert!((900..1100).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn cut_rect_examples() {
        let v = PlanarRect::from_bounds(0, 5, 0, 99).tagged(Orientation::Vertical);
        let slices = cut_rect(&v, 2, &mut rng()).unwrap();
        assert_eq!(
            slices,
            vec![
                PlanarRect::from_bounds(0, 2, 0, 99).tagged(Orientation::Vertical),
                PlanarRect::from_bounds(3, 5, 0, 99).tagged(Orientation::Vertical),
            ]
        );
        let h = PlanarRect::from_bounds(0, 99, 0, 5).tagged(Orientation::Horizontal);
        assert_eq!(cut_rect(&h, 1, &mut rng()).unwrap(), vec![h]);
        assert!(matches!(
            cut_rect(&h, 3, &mut rng()),
            Err(Error::SliceTooThin { .. })
        ));
    }

    fn vslice(rect: PlanarRect) -> Slice {
        Slice {
            rect: rect.tagged(Orientation::Vertical),
            owner: 0,
            slot: 0,
        }
    }

    #[test]
    fn fold_example_boundaries_and_connectivity() {
        let s = vslice(PlanarRect::from_bounds(0, 2, 0, 11));
        let next = PlanarRect::from_bounds(-5, 10, 4, 7);
        let beta = Slice {
            rect: PlanarRect::from_bounds(-5, 10, 5, 6),
            owner: 1,
            slot: 1,
        };
        let f = fold_slice(&s, &next, &beta).unwrap();
        for (x, y) in s.rect.points() {
            let expect = u8::from(!(y == 4 || y == 7));
            assert_eq!(f.indicator(x, y), expect);
        }
        let rows = |set: &[(Coord, Coord)]| {
            let mut r: Vec<_> = set.iter().map(|p| p.1).collect();
            r.sort_unstable();
            r.dedup();
            r
        };
        assert_eq!(rows(&f.top_boundary), vec![3, 5, 6, 8]);
        assert_eq!(rows(&f.bottom_boundary), vec![4, 7]);
        assert!(f.graph.is_connected());
        for x in 0..=2 {
            assert!(f
                .graph
                .has_edge(SlabVertex::top(x, 3), SlabVertex::bottom(x, 3)));
            assert!(f
                .graph
                .has_edge(SlabVertex::bottom(x, 3), SlabVertex::bottom(x, 4)));
            assert!(f
                .graph
                .has_edge(SlabVertex::bottom(x, 4), SlabVertex::bottom(x, 5)));
            assert!(f
                .graph
                .has_edge(SlabVertex::bottom(x, 5), SlabVertex::top(x, 5)));
        }
        // |V(φ(S))| = |S| + |∂ᵗ|
        assert_eq!(
            f.graph.vertex_count(),
            s.rect.area() as usize + f.top_boundary.len()
        );
        assert!(f.graph.vertices().iter().all(|v| s.rect.contains(v.x, v.y)));
    }

    #[test]
    fn fold_without_overlap_is_lift() {
        let s = vslice(PlanarRect::from_bounds(0, 2, 0, 11));
        let next = PlanarRect::from_bounds(10, 20, 4, 7);
        let beta = Slice {
            rect: PlanarRect::from_bounds(10, 20, 5, 6),
            owner: 1,
            slot: 0,
        };
        let f = fold_slice(&s, &next, &beta).unwrap();
        assert_eq!(f.graph, induced_rect_graph(&s.rect, 1));
    }

    #[test]
    fn fold_rejects_beta_outside_next() {
        let s = vslice(PlanarRect::from_bounds(0, 2, 0, 11));
        let next = PlanarRect::from_bounds(-5, 10, 4, 7);
        let beta = Slice {
            rect: PlanarRect::from_bounds(-5, 10, 7, 8),
            owner: 1,
            slot: 0,
        };
        assert!(matches!(
            fold_slice(&s, &next, &beta),
            Err(Error::Fold { .. })
        ));
    }

    #[test]
    fn audit_flags_translated_slice_and_accepts_shared_targets() {
        // H cut into two horizontal slices; two V slices both folded onto the
        // lower one (siblings with a merged target).
        let h0 = Slice {
            rect: PlanarRect::from_bounds(0, 20, 0, 2).tagged(Orientation::Horizontal),
            owner: 2,
            slot: 0,
        };
        let h1 = Slice {
            rect: PlanarRect::from_bounds(0, 20, 3, 5).tagged(Orientation::Horizontal),
            owner: 2,
            slot: 1,
        };
        let hrect = PlanarRect::from_bounds(0, 20, 0, 5);
        let va = Slice {
            rect: PlanarRect::from_bounds(3, 5, 0, 15).tagged(Orientation::Vertical),
            owner: 0,
            slot: 0,
        };
        let vb = Slice {
            rect: PlanarRect::from_bounds(10, 12, 0, 15).tagged(Orientation::Vertical),
            owner: 1,
            slot: 0,
        };
        let folded = vec![
            fold_slice(&va, &hrect, &h0).unwrap(),
            fold_slice(&vb, &hrect, &h0).unwrap(),
            FoldedSlice::lift(h0),
            FoldedSlice::lift(h1),
        ];
        let beta = vec![Some(2), Some(2), None, None];
        let report = overlap_audit(&folded, &beta);
        assert!(report.pass, "{report:?}");

        // an unfolded lift of va meets h1 as well
        let mut bad = folded.clone();
        bad[0] = FoldedSlice::lift(va);
        let report = overlap_audit(&bad, &beta);
        assert!(!report.pass);
        assert!(report.violations.iter().any(|v| (v.a, v.b) == (0, 3)));
    }

    #[test]
    fn empty_catalog_gives_empty_assembly() {
        let cat = RectCatalog {
            entries: Vec::new(),
            windows: Vec::new(),
            viewport: PlanarRect::from_bounds(0, 9, 0, 9),
            grids: Vec::new(),
            params: Vec::new(),
        };
        let tree = RectTree {
            adjacency: Vec::new(),
            next: Vec::new(),
        };
        let a = assemble_phi(&cat, &tree, &[1], 0).unwrap();
        assert_eq!(a.slice_count(), 0);
        assert!(a.graph.is_empty());
        assert!(a.audit().pass);
    }
}
